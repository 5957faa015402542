"""Numerical audit of dilation invariance: does I_p(x) = int_x^{px} f(t) dt depend on x?

If I_p and I_q are both constant for multiplicatively independent p, q, then
f(t) = c/t; this module checks instances of that statement on sample grids.
It reports spreads together with a quadrature error budget and never claims
more than the numbers support.
"""

from __future__ import annotations

import csv
import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import DependentDilations, DomainViolation
from .exactnum import as_rational

DEFAULT_ZERO_EXCLUSION = 1e-6
_EPS = np.finfo(float).eps

# Gauss-Kronrod 7/15 on [-1, 1] (QUADPACK qk15 constants)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes (1, 3, 5, 7 counted from the outside)
_GW = np.zeros(15)
_GW[[1, 3, 5]] = _WG[:3]
_GW[[13, 11, 9]] = _WG[:3]
_GW[7] = _WG[3]


def _gk15(f: Callable[[np.ndarray], np.ndarray], a: float, b: float) -> tuple[float, float, float]:
    half = 0.5 * (b - a)
    center = 0.5 * (a + b)
    y = f(center + half * _NODES)
    k = half * float(_KW @ y)
    g = half * float(_GW @ y)
    absint = abs(half) * float(_KW @ np.abs(y))
    return k, abs(k - g), absint


def adaptive_gk(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-13,
    max_panels: int = 4000,
) -> tuple[float, float]:
    """Oriented integral of ``f`` over [a, b] and an error bound.

    Panels are bisected worst-first; each panel contributes |K15 - G7| to the
    bound, plus a rounding allowance proportional to the integral of |f|.
    """
    if a == b:
        return 0.0, 0.0
    k, e, ab = _gk15(f, a, b)
    heap = [(-e, a, b, k, ab)]
    total, err = k, e
    while err > max(tol, tol * abs(total)) and len(heap) < max_panels:
        neg_e, lo, hi, kv, abv = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        k1, e1, a1 = _gk15(f, lo, mid)
        k2, e2, a2 = _gk15(f, mid, hi)
        total += k1 + k2 - kv
        err += e1 + e2 + neg_e
        heapq.heappush(heap, (-e1, lo, mid, k1, a1))
        heapq.heappush(heap, (-e2, mid, hi, k2, a2))
    # fixed reduction order keeps the result reproducible
    panels = sorted(heap, key=lambda p: (p[1], p[2]))
    total = math.fsum(p[3] for p in panels)
    err = math.fsum(-p[0] for p in panels)
    absint = math.fsum(p[4] for p in panels)
    return total, err + 50 * _EPS * absint


# --------------------------------------------------------------------------
# Functions under test
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Perturbation:
    """Bounded log-periodic g(t); the function under test is (c + g(t)) / t.

    ``sin_log``: amp * sin(freq * ln|t| + phase)
    ``cos_log``: amp * cos(2 pi ln|t| / ln(period) + phase)
    """

    kind: str
    amp: float
    freq: float = 1.0
    period: float = 2.0
    phase: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("sin_log", "cos_log"):
            raise ValueError(f"unknown perturbation {self.kind!r}")
        if self.kind == "cos_log" and not self.period > 1:
            raise ValueError("cos_log period must exceed 1")

    def _omega(self) -> float:
        return self.freq if self.kind == "sin_log" else 2 * math.pi / math.log(self.period)

    def __call__(self, t):
        u = self._omega() * np.log(np.abs(t)) + self.phase
        return self.amp * (np.sin(u) if self.kind == "sin_log" else np.cos(u))

    def log_antiderivative(self, u: float) -> float:
        """G with G'(u) = g(e^u), so int_x^{px} g(t)/t dt = G(ln px) - G(ln x) for x > 0."""
        w = self._omega()
        v = w * u + self.phase
        return self.amp * ((-math.cos(v) if self.kind == "sin_log" else math.sin(v)) / w)

    def to_json(self) -> dict:
        return {"kind": self.kind, "amp": self.amp, "freq": self.freq, "period": self.period, "phase": self.phase}


@dataclass(frozen=True)
class Hyperbola:
    """f(t) = c / t on both half-axes."""

    c: Fraction
    zero_exclusion: float = DEFAULT_ZERO_EXCLUSION
    two_sided = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", as_rational(self.c))

    def __call__(self, t):
        return float(self.c) / np.asarray(t, dtype=float)

    def to_json(self) -> dict:
        return {"kind": "hyperbola", "c": f"{self.c.numerator}/{self.c.denominator}"}


@dataclass(frozen=True)
class HyperbolaPlus:
    """f(t) = (c + g(t)) / t with a named bounded perturbation g."""

    c: Fraction
    perturbation: Perturbation
    zero_exclusion: float = DEFAULT_ZERO_EXCLUSION
    two_sided = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", as_rational(self.c))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return (float(self.c) + self.perturbation(t)) / t

    def to_json(self) -> dict:
        return {
            "kind": "hyperbola_plus",
            "c": f"{self.c.numerator}/{self.c.denominator}",
            "perturbation": self.perturbation.to_json(),
        }


@dataclass(frozen=True, eq=False)
class SampleTable:
    """Piecewise-linear interpolant of (abscissa, ordinate) samples.

    Abscissae are strictly increasing and avoid zero; samples on both sides of
    zero are allowed, but the gap between them is outside the domain.
    """

    xs: np.ndarray
    ys: np.ndarray
    zero_exclusion: float = DEFAULT_ZERO_EXCLUSION

    def __post_init__(self) -> None:
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or len(xs) < 2:
            raise ValueError("need matching 1-d abscissae and ordinates, at least two samples")
        if xs[0] > xs[-1]:
            xs, ys = xs[::-1], ys[::-1]
        if np.any(np.diff(xs) <= 0):
            raise ValueError("abscissae must be strictly monotone")
        if np.any(np.abs(xs) < self.zero_exclusion):
            raise ValueError("abscissae must avoid the excluded neighbourhood of 0")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        # exact integral of the interpolant from xs[0] to each node
        seg = 0.5 * np.diff(xs) * (ys[:-1] + ys[1:])
        object.__setattr__(self, "_cum", np.concatenate([[0.0], np.cumsum(seg)]))

    @property
    def two_sided(self) -> bool:
        return bool(self.xs[0] < 0 < self.xs[-1])

    def covers(self, a: float, b: float) -> bool:
        lo, hi = min(a, b), max(a, b)
        if lo < self.xs[0] or hi > self.xs[-1]:
            return False
        if lo < 0 < hi:
            return False
        neg = self.xs[self.xs < 0]
        pos = self.xs[self.xs > 0]
        if hi < 0:
            return len(neg) > 0 and hi <= neg[-1]
        return len(pos) > 0 and lo >= pos[0]

    def __call__(self, t):
        return np.interp(t, self.xs, self.ys)

    def antiderivative(self, x: float) -> float:
        i = int(np.clip(np.searchsorted(self.xs, x, side="right") - 1, 0, len(self.xs) - 2))
        x0, x1 = self.xs[i], self.xs[i + 1]
        y0 = self.ys[i]
        y = float(np.interp(x, self.xs, self.ys))
        return float(self._cum[i]) + 0.5 * (x - x0) * (y0 + y)

    def to_json(self) -> dict:
        return {"kind": "table", "points": len(self.xs)}

    @classmethod
    def from_csv(cls, path: Union[str, Path], zero_exclusion: float = DEFAULT_ZERO_EXCLUSION) -> "SampleTable":
        xs, ys = [], []
        first = True
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    x, y = float(row[0]), float(row[1])
                except (ValueError, IndexError):
                    if first:  # one header line is allowed
                        first = False
                        continue
                    raise ValueError(f"{path}: bad sample row {row!r}") from None
                first = False
                xs.append(x)
                ys.append(y)
        return cls(np.array(xs), np.array(ys), zero_exclusion)


@dataclass(frozen=True)
class Custom:
    """Any vectorised callable; integrated by adaptive quadrature."""

    func: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"
    zero_exclusion: float = DEFAULT_ZERO_EXCLUSION
    two_sided: bool = True

    def __call__(self, t):
        return self.func(np.asarray(t, dtype=float))

    def to_json(self) -> dict:
        return {"kind": "custom", "name": self.name}


FunctionUnderTest = Union[Hyperbola, HyperbolaPlus, SampleTable, Custom]


def function_from_json(obj: dict, base_dir: Optional[Path] = None) -> FunctionUnderTest:
    kind = obj.get("kind")
    excl = float(obj.get("zero_exclusion", DEFAULT_ZERO_EXCLUSION))
    if kind == "hyperbola":
        return Hyperbola(as_rational(obj["c"]), excl)
    if kind == "hyperbola_plus":
        pt = obj["perturbation"]
        pert = Perturbation(
            pt["kind"],
            float(pt["amp"]),
            float(pt.get("freq", 1.0)),
            float(pt.get("period", 2.0)),
            float(pt.get("phase", 0.0)),
        )
        return HyperbolaPlus(as_rational(obj["c"]), pert, excl)
    if kind == "table":
        path = Path(obj["csv"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return SampleTable.from_csv(path, excl)
    raise ValueError(f"unknown function kind {kind!r}")


# --------------------------------------------------------------------------
# Integrals and reports
# --------------------------------------------------------------------------


def _check_domain(f: FunctionUnderTest, a: float, b: float) -> None:
    lo, hi = min(a, b), max(a, b)
    if lo < 0 < hi or min(abs(lo), abs(hi)) < f.zero_exclusion:
        raise DomainViolation(f"[{lo}, {hi}] meets the excluded neighbourhood of 0")
    if isinstance(f, SampleTable) and not f.covers(a, b):
        raise DomainViolation(f"[{lo}, {hi}] is outside the sampled range")


def dilation_integral(f: FunctionUnderTest, x: float, p: Union[float, Fraction], tol: float = 1e-13) -> tuple[float, float]:
    """I_p(x) = int_x^{px} f(t) dt (oriented) and an error bound."""
    x, p = float(x), float(p)
    if p <= 0:
        raise ValueError("dilation must be positive")
    a, b = x, p * x
    _check_domain(f, a, b)
    log_p = math.log(p)
    if isinstance(f, Hyperbola):
        v = float(f.c) * log_p
        return v, 4 * _EPS * abs(v)
    if isinstance(f, HyperbolaPlus):
        base = float(f.c) * log_p
        pert = f.perturbation
        val, err = adaptive_gk(lambda t: pert(t) / t, a, b, tol)
        return base + val, err + 4 * _EPS * abs(base)
    if isinstance(f, SampleTable):
        v = f.antiderivative(b) - f.antiderivative(a)
        scale = float(np.abs(f._cum).max()) + abs(v)
        return v, 16 * _EPS * scale
    val, err = adaptive_gk(f, a, b, tol)
    return val, err


def geometric_grid(lo: float, hi: float, count: int) -> list[float]:
    """x_j = lo * g^j, j = 0..count-1, ending at hi."""
    if count < 1 or lo <= 0 or hi < lo:
        raise ValueError("need count >= 1 and 0 < lo <= hi")
    if count == 1:
        return [float(lo)]
    g = (hi / lo) ** (1.0 / (count - 1))
    pts = [lo * g**j for j in range(count)]
    pts[-1] = float(hi)
    return [float(v) for v in pts]


@dataclass
class InvarianceReport:
    p: float
    grid: list[float]
    integrals: list[float]
    errors: list[float]
    spread: float
    quad_error_bound: float
    recovered_c: Optional[float]
    c_half_width: Optional[float]
    residual_max: Optional[float]
    verdict: str
    tol: float

    def to_json(self) -> dict:
        def fmt(v):
            return None if v is None else repr(float(v))

        return {
            "p": fmt(self.p),
            "grid": [fmt(v) for v in self.grid],
            "integrals": [fmt(v) for v in self.integrals],
            "spread": fmt(self.spread),
            "quad_error_bound": fmt(self.quad_error_bound),
            "recovered_c": fmt(self.recovered_c),
            "c_half_width": fmt(self.c_half_width),
            "residual_max": fmt(self.residual_max),
            "tol": fmt(self.tol),
            "verdict": self.verdict,
        }


def recover_c(f: FunctionUnderTest, p: Union[float, Fraction], base: float = 1.0) -> tuple[float, float]:
    """c = I_p(base) / ln p and its half-width from the quadrature bound.

    With ``base = -1`` this recovers the negative-axis constant in the form
    I_p(-1) / ln p, which equals c_1 exactly when f(t) = c_1/t for t < 0 too.
    """
    val, err = dilation_integral(f, base, p)
    lp = math.log(float(p))
    return val / lp, err / abs(lp)


def residual_max(f: FunctionUnderTest, c: float, points: Sequence[float]) -> float:
    t = np.asarray(points, dtype=float)
    return float(np.max(np.abs(f(t) - c / t)))


def invariance_check(
    f: FunctionUnderTest,
    p: Union[float, Fraction],
    grid: Sequence[float],
    tol: float,
    base: Optional[float] = None,
) -> InvarianceReport:
    """Evaluate I_p on the grid; verdict constant / non-constant / inconclusive."""
    if len(grid) == 0:
        raise ValueError("grid must be nonempty")
    if not float(p) > 1:
        raise ValueError("dilation factor must exceed 1")
    vals, errs = [], []
    for x in grid:
        v, e = dilation_integral(f, x, p)
        vals.append(v)
        errs.append(e)
    spread = max(vals) - min(vals)
    top = sorted(errs, reverse=True)
    # the spread can be off by at most the two largest single-integral errors
    qeb = top[0] + (top[1] if len(top) > 1 else 0.0)
    if tol < qeb:
        verdict = "inconclusive"
    elif spread <= tol + qeb:
        verdict = "constant"
    else:
        verdict = "non-constant"
    if base is None:
        base = 1.0 if grid[0] > 0 else -1.0
    try:
        c, hw = recover_c(f, p, base)
    except DomainViolation:
        c = hw = None
    res = residual_max(f, c, grid) if c is not None else None
    return InvarianceReport(float(p), [float(x) for x in grid], vals, errs, spread, qeb, c, hw, res, verdict, tol)


@dataclass
class AuditReport:
    p_report: InvarianceReport
    q_report: InvarianceReport
    c: Optional[float]
    c_half_width: Optional[float]
    residual_max: Optional[float]
    negative_p: Optional[InvarianceReport] = None
    negative_q: Optional[InvarianceReport] = None
    c1: Optional[float] = None
    c2: Optional[float] = None
    verdict: str = "inconclusive"
    reasons: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        def fmt(v):
            return None if v is None else repr(float(v))

        return {
            "p_report": self.p_report.to_json(),
            "q_report": self.q_report.to_json(),
            "negative_p": None if self.negative_p is None else self.negative_p.to_json(),
            "negative_q": None if self.negative_q is None else self.negative_q.to_json(),
            "c": fmt(self.c),
            "c_half_width": fmt(self.c_half_width),
            "c1": fmt(self.c1),
            "c2": fmt(self.c2),
            "residual_max": fmt(self.residual_max),
            "verdict": self.verdict,
            "reasons": list(self.reasons),
        }


def _prime_exponents(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def dilations_independent(p: Union[Fraction, int, str], q: Union[Fraction, int, str]) -> bool:
    """ln p / ln q irrational, for rationals p, q > 0 other than 1.

    ln p / ln q is rational iff the prime-exponent vectors of p and q are
    parallel, which trial factorisation decides exactly.
    """
    p, q = as_rational(p), as_rational(q)
    if p <= 0 or q <= 0 or p == 1 or q == 1:
        raise ValueError("dilations must be positive and different from 1")
    vp = _prime_exponents(p.numerator)
    for k, v in _prime_exponents(p.denominator).items():
        vp[k] = vp.get(k, 0) - v
    vq = _prime_exponents(q.numerator)
    for k, v in _prime_exponents(q.denominator).items():
        vq[k] = vq.get(k, 0) - v
    keys = set(vp) | set(vq)
    # parallel iff every 2x2 minor vanishes
    ref = next(iter(keys))
    a0, b0 = vp.get(ref, 0), vq.get(ref, 0)
    return any(a0 * vq.get(k, 0) - b0 * vp.get(k, 0) != 0 for k in keys)


def two_dilation_audit(
    f: FunctionUnderTest,
    p: Union[Fraction, int, str],
    q: Union[Fraction, int, str],
    grid: Sequence[float],
    tol: float,
    residual_tol: float = 1e-6,
) -> AuditReport:
    """Check both dilation invariances, recover c, and link the two half-axes."""
    p, q = as_rational(p), as_rational(q)
    if not dilations_independent(p, q):
        raise DependentDilations(f"ln {p} / ln {q} is rational")
    rp = invariance_check(f, p, grid, tol)
    rq = invariance_check(f, q, grid, tol)
    reasons: list[str] = []
    verdicts = {rp.verdict, rq.verdict}

    c = hw = res = None
    if rp.recovered_c is not None:
        c, hw = rp.recovered_c, rp.c_half_width
        res = rp.residual_max
        if rq.recovered_c is not None:
            gap = abs(rp.recovered_c - rq.recovered_c)
            if gap > tol + rp.c_half_width + rq.c_half_width:
                reasons.append(f"c disagrees between dilations (gap {gap:.3g})")
    else:
        reasons.append("base point 1 outside the domain; c not recovered")

    report = AuditReport(rp, rq, c, hw, res)
    if getattr(f, "two_sided", False):
        neg = [-x for x in grid]
        report.negative_p = invariance_check(f, p, neg, tol)
        report.negative_q = invariance_check(f, q, neg, tol)
        verdicts |= {report.negative_p.verdict, report.negative_q.verdict}
        if c is not None and report.negative_p.recovered_c is not None:
            report.c1 = c
            # I_p(-1) = -c_2 ln p in the f(-t) = c_2 / t convention
            report.c2 = -report.negative_p.recovered_c
            link = abs(report.c1 + report.c2)
            if link > tol + hw + report.negative_p.c_half_width:
                reasons.append(f"c1 + c2 = {report.c1 + report.c2:.3g} != 0: the dilation integral differs across the axes")
                verdicts.add("non-constant")

    if "non-constant" in verdicts:
        report.verdict = "violates-hypotheses"
        if rq.verdict == "non-constant":
            reasons.append("q-invariance fails")
        if rp.verdict == "non-constant":
            reasons.append("p-invariance fails")
    elif "inconclusive" in verdicts or reasons:
        report.verdict = "inconclusive"
    elif res is not None and res > residual_tol:
        report.verdict = "inconclusive"
        reasons.append(f"residual {res:.3g} exceeds {residual_tol:.3g}")
    else:
        report.verdict = "consistent-with-theorem"
    report.reasons = reasons
    return report
