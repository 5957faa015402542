"""Denominator-bound irrationality certificates.

Each certificate is a finite object that rules out ``x == a/b`` for every
denominator ``b <= B``; the verifiers recompute everything from scratch.

Roots.  With y = q^(1/n) and m = floor(y), the powers (y - m)^k reduce modulo
y^n - q to integer combinations sum c_i y^i.  If y = r/s with s <= B then
s^n * sum c_i y^i is an integer, yet it lies strictly between 0 and
s^n / B^n <= 1 once (y - m)^k < 1/B^n.

Engel numbers.  If q has Engel digits p_i, then r q + s (r = p_1...p_n) lies in
(0, 2/p_{n+1}); for q = a/b with b <= B the integer b(r q + s) would lie in
(0, 2B/p_{n+1}), which is empty once p_{n+1} > 2B.  For e the classical
bracket 1/(n+1) < n!(e - S_n) < 1/n plays the same role.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, NamedTuple, Optional

from .density import make_witness
from .engel import EngelExpansion, engel_digits
from .errors import BudgetExhausted, ExactRoot, NeedsRefinement, PrefixTooShort, PrimalityFailure
from .exactnum import (
    DEFAULT_BUDGET_BITS,
    EulerE,
    Interval,
    Linear,
    NthRoot,
    RealSpec,
    approximate,
    as_rational,
    euler_partial_sum,
    integer_nth_root,
    rational_to_str,
    refine_until,
    spec_from_json,
)

DEFAULT_K_CAP = 1 << 16

MR_EXACT_LIMIT = 3_317_044_064_679_887_385_961_981
_TRIAL_LIMIT = 10**6
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic primality.

    Miller-Rabin with the first twelve prime bases is exact below
    MR_EXACT_LIMIT.  Larger inputs get a short trial-division pass that
    can only prove compositeness; if it finds no factor we refuse to
    guess and raise BudgetExhausted.
    """
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    if n >= MR_EXACT_LIMIT:
        for f in range(41, _TRIAL_LIMIT, 2):
            if n % f == 0:
                return False
        raise BudgetExhausted(f"primality of {n} is undecided above {MR_EXACT_LIMIT}")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


# --------------------------------------------------------------------------
# Z[y]/(y^n - q)
# --------------------------------------------------------------------------


def poly_mulmod(a: list[int], b: list[int], n: int, q: int) -> list[int]:
    """Product in Z[y]/(y^n - q); both inputs have length n."""
    out = [0] * (2 * n - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    # y^(n+j) = q * y^j
    for j in range(2 * n - 2, n - 1, -1):
        out[j - n] += q * out[j]
    return out[:n]


def shifted_root_power(m: int, k: int, n: int, q: int) -> list[int]:
    """Coefficients c_0..c_{n-1} of (y - m)^k reduced modulo y^n - q."""
    base = [0] * n
    base[0] = -m
    if n > 1:
        base[1] = 1
    else:  # pragma: no cover - n >= 2 everywhere we call it
        base[0] += q
    result = [1] + [0] * (n - 1)
    while k:
        if k & 1:
            result = poly_mulmod(result, base, n, q)
        base = poly_mulmod(base, base, n, q)
        k >>= 1
    return result


def _horner(coeffs: list[int], y: Interval) -> Interval:
    acc = Interval.point(0)
    for c in reversed(coeffs):
        acc = acc * y + c
    return acc


def _eval_coeffs(coeffs: list[int], q: int, n: int, accept, reject, budget: int) -> Optional[Interval]:
    """Refine sum c_i q^(i/n) until ``accept`` or ``reject`` decides."""
    root = NthRoot(q, n)
    mag = max((abs(c).bit_length() for c in coeffs), default=1) + n * q.bit_length()
    k = 32 + mag
    while True:
        iv = _horner(coeffs, approximate(root, k))
        if accept(iv):
            return iv
        if reject(iv):
            return None
        if k >= budget + mag:
            raise NeedsRefinement("root certificate enclosure undecided", enclosure=iv)
        k = min(2 * k, budget + mag)


def _fits(q: int, n: int, m: int, k: int, bound: Fraction, budget: int) -> bool:
    """Decide (q^(1/n) - m)^k < bound via enclosures of the base."""
    if k == 0:
        return 1 < bound
    base = NthRoot(q, n) - m
    prec = 32 + bound.denominator.bit_length() + k.bit_length()
    while True:
        b = approximate(base, prec)
        lo, hi = max(b.lo, Fraction(0)) ** k, b.hi**k
        if hi < bound:
            return True
        if lo >= bound:
            return False
        if prec >= budget + bound.denominator.bit_length():
            raise NeedsRefinement("cannot compare (root - m)^k with the bound")
        prec *= 2


# --------------------------------------------------------------------------
# Certificates
# --------------------------------------------------------------------------


class VerificationResult(NamedTuple):
    ok: bool
    reason: str

    def __bool__(self) -> bool:
        return self.ok


_OK = VerificationResult(True, "ok")


def _fail(reason: str) -> VerificationResult:
    return VerificationResult(False, reason)


@dataclass(frozen=True)
class RootCertificate:
    q: int
    n: int
    m: int
    B: int
    k: int
    coeffs: tuple[int, ...]
    z_enclosure: Interval

    @property
    def bound(self) -> Fraction:
        return Fraction(1, self.B**self.n)

    def to_json(self) -> dict[str, Any]:
        return {
            "type": "root",
            "q": str(self.q),
            "n": str(self.n),
            "m": str(self.m),
            "B": str(self.B),
            "k": str(self.k),
            "coeffs": [str(c) for c in self.coeffs],
            "z_enclosure": self.z_enclosure.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> "RootCertificate":
        return cls(
            int(obj["q"]),
            int(obj["n"]),
            int(obj["m"]),
            int(obj["B"]),
            int(obj["k"]),
            tuple(int(c) for c in obj["coeffs"]),
            Interval.from_json(obj["z_enclosure"]),
        )


def certify_nth_root(q: int, n: int, B: int, budget: int = DEFAULT_BUDGET_BITS, k_cap: int = DEFAULT_K_CAP) -> RootCertificate:
    """Certificate that q^(1/n) has no rational form r/s with s <= B."""
    if n < 2 or B < 1:
        raise ValueError("need n >= 2 and B >= 1")
    if not is_prime(q):
        raise PrimalityFailure(f"{q} is not prime")
    m, exact = integer_nth_root(q, n)
    if exact:
        raise ExactRoot(f"{q} is a perfect {n}-th power")
    bound = Fraction(1, B**n)

    # double k until it fits, then binary search for the minimal k
    hi = 1
    while not _fits(q, n, m, hi, bound, budget):
        if hi >= k_cap:
            raise BudgetExhausted(f"no exponent k <= {k_cap} fits below 1/B^n")
        hi = min(2 * hi, k_cap)
    lo = hi // 2  # does not fit (or is 0)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _fits(q, n, m, mid, bound, budget):
            hi = mid
        else:
            lo = mid
    k = hi

    coeffs = shifted_root_power(m, k, n, q)
    z = _eval_coeffs(coeffs, q, n, lambda iv: iv.inside(0, bound), lambda iv: iv.lo >= bound or iv.hi <= 0, budget)
    if z is None:
        raise AssertionError("reduced polynomial disagrees with the power enclosure")
    return RootCertificate(q, n, m, B, k, tuple(coeffs), z)


def verify_root_certificate(cert: RootCertificate, budget: int = DEFAULT_BUDGET_BITS) -> VerificationResult:
    """Re-derive every field of a root certificate; trusts nothing."""
    q, n, B, k = cert.q, cert.n, cert.B, cert.k
    if n < 2 or B < 1 or k < 1:
        return _fail("parameter out of range")
    try:
        if not is_prime(q):
            return _fail("q is not prime")
    except BudgetExhausted:
        return _fail("primality of q undecided within budget")
    m, exact = integer_nth_root(q, n)
    if exact:
        return _fail("q^(1/n) is an integer")
    if cert.m != m:
        return _fail("m is not floor(q^(1/n))")
    if k > DEFAULT_K_CAP or len(cert.coeffs) != n:
        return _fail("coefficients are not (y - m)^k mod (y^n - q)")
    bound = cert.bound
    stored = cert.z_enclosure
    if not stored.inside(0, bound):
        return _fail("stored enclosure not inside (0, 1/B^n)")
    try:
        # cheap enclosure checks first, so a hostile k cannot force a huge expansion
        if not _fits(q, n, m, k, bound, budget):
            return _fail("(q^(1/n) - m)^k is not below 1/B^n")
        if _fits(q, n, m, k - 1, bound, budget):
            return _fail("exponent k is not minimal")
        if list(cert.coeffs) != shifted_root_power(m, k, n, q):
            return _fail("coefficients are not (y - m)^k mod (y^n - q)")
        fresh = _eval_coeffs(
            list(cert.coeffs),
            q,
            n,
            lambda iv: iv.inside(stored.lo, stored.hi) or (iv.is_point and iv in stored),
            lambda iv: iv.hi < stored.lo or iv.lo > stored.hi,
            budget,
        )
        if fresh is None:
            return _fail("value lies outside the stored enclosure")
    except NeedsRefinement:
        return _fail("undecided within precision budget")
    return _OK


@dataclass(frozen=True)
class EulerCertificate:
    B: int
    n: int
    S: Fraction
    lower: Fraction
    upper: Fraction

    def to_json(self) -> dict[str, Any]:
        return {
            "type": "euler",
            "B": str(self.B),
            "n": str(self.n),
            "S": rational_to_str(self.S),
            "lower": rational_to_str(self.lower),
            "upper": rational_to_str(self.upper),
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> "EulerCertificate":
        return cls(
            int(obj["B"]),
            int(obj["n"]),
            as_rational(obj["S"]),
            as_rational(obj["lower"]),
            as_rational(obj["upper"]),
        )


def certify_e(B: int) -> EulerCertificate:
    """Certificate that e != a/b for all b <= B."""
    if B < 1:
        raise ValueError("need B >= 1")
    n = max(B, 2)
    return EulerCertificate(B, n, euler_partial_sum(n), Fraction(1, n + 1), Fraction(1, n))


def euler_scaled_remainder(n: int) -> Interval:
    """Enclosure of n! (e - S_n), tight enough to separate it from 1/(n+1) and 1/n."""
    nf = math.factorial(n)
    spec = Linear(((Fraction(nf), EulerE()),), -nf * euler_partial_sum(n))
    lo, hi = Fraction(1, n + 1), Fraction(1, n)
    iv = refine_until(spec, lambda iv: iv.inside(lo, hi), lambda iv: iv.hi <= lo or iv.lo >= hi, start=16 + 2 * n.bit_length())
    if iv is None:
        raise AssertionError("n!(e - S_n) escaped its bracket")
    return iv


def verify_euler_certificate(cert: EulerCertificate) -> VerificationResult:
    n = cert.n
    if cert.B < 1:
        return _fail("B must be >= 1")
    if n != max(cert.B, 2):
        return _fail("n must equal max(B, 2)")
    if cert.S != euler_partial_sum(n):
        return _fail("S is not sum_{i<=n} 1/i!")
    if cert.lower != Fraction(1, n + 1) or cert.upper != Fraction(1, n):
        return _fail("bracket is not (1/(n+1), 1/n)")
    if not 0 < cert.lower < cert.upper < 1:
        return _fail("bracket does not exclude integers")
    try:
        euler_scaled_remainder(n)
    except (AssertionError, NeedsRefinement):
        return _fail("n!(e - S) not inside the bracket")
    return _OK


@dataclass(frozen=True)
class EngelCertificate:
    source: RealSpec
    B: int
    n: int
    digits: tuple[int, ...]  # p_1 .. p_{n+1}
    r: int
    s: int
    bound: Fraction
    z_enclosure: Interval

    def to_json(self) -> dict[str, Any]:
        return {
            "type": "engel",
            "source": self.source.to_json(),
            "B": str(self.B),
            "n": str(self.n),
            "digits": [str(d) for d in self.digits],
            "r": str(self.r),
            "s": str(self.s),
            "bound": rational_to_str(self.bound),
            "z_enclosure": self.z_enclosure.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> "EngelCertificate":
        return cls(
            spec_from_json(obj["source"]),
            int(obj["B"]),
            int(obj["n"]),
            tuple(int(d) for d in obj["digits"]),
            int(obj["r"]),
            int(obj["s"]),
            as_rational(obj["bound"]),
            Interval.from_json(obj["z_enclosure"]),
        )


def _first_large_digit(digits: tuple[int, ...], B: int) -> Optional[int]:
    """Smallest n >= 1 with p_{n+1} > 2B."""
    for n in range(1, len(digits)):
        if digits[n] > 2 * B:
            return n
    return None


def certify_engel_number(e: EngelExpansion, B: int, budget: int = DEFAULT_BUDGET_BITS) -> EngelCertificate:
    """Certificate that the Engel number ``e.source`` has no form a/b with b <= B."""
    if B < 1:
        raise ValueError("need B >= 1")
    n = _first_large_digit(e.digits, B)
    if n is None:
        raise PrefixTooShort(f"no digit beyond the first exceeds 2B = {2 * B} in the available prefix")
    if e.source is None:
        raise ValueError("expansion carries no source to enclose")
    w = make_witness(e.source, n, budget)
    if w.digits != e.digits[: n + 1]:
        raise AssertionError("expansion digits disagree with the source")
    return EngelCertificate(e.source, B, n, w.digits, w.r, w.s, w.bound, w.z_enclosure)


def verify_engel_certificate(cert: EngelCertificate, budget: int = DEFAULT_BUDGET_BITS) -> VerificationResult:
    n, B, d = cert.n, cert.B, cert.digits
    if B < 1 or n < 1 or len(d) != n + 1:
        return _fail("parameter out of range")
    try:
        fresh = engel_digits(cert.source, n + 1, budget)
    except (NeedsRefinement, ValueError):
        return _fail("could not recompute Engel digits of the source")
    if fresh.digits != d:
        return _fail("digits are not the Engel digits of the source")
    if _first_large_digit(d, B) != n:
        return _fail("n is not the first index with p_{n+1} > 2B")
    if cert.r != math.prod(d[:n]):
        return _fail("r is not p_1...p_n")
    if cert.s != -sum(math.prod(d[i + 1 : n]) for i in range(n)):
        return _fail("s is not -sum p_{i+1}...p_n")
    if cert.bound != Fraction(2, d[n]):
        return _fail("bound is not 2/p_{n+1}")
    stored = cert.z_enclosure
    if not stored.inside(0, cert.bound) and not (stored.is_point and 0 < stored.lo < cert.bound):
        return _fail("stored enclosure not inside (0, 2/p_{n+1})")
    z = Linear(((Fraction(cert.r), cert.source),), Fraction(cert.s))
    try:
        ok = refine_until(
            z,
            lambda iv: iv.inside(stored.lo, stored.hi) or (iv.is_point and iv in stored),
            lambda iv: iv.hi < stored.lo or iv.lo > stored.hi,
            budget=budget,
        )
    except NeedsRefinement:
        return _fail("undecided within precision budget")
    if ok is None:
        return _fail("r*q + s lies outside the stored enclosure")
    return _OK


# --------------------------------------------------------------------------
# JSON
# --------------------------------------------------------------------------


def certificate_from_json(obj: dict[str, Any]):
    kind = obj.get("type")
    if kind == "root":
        return RootCertificate.from_json(obj)
    if kind == "euler":
        return EulerCertificate.from_json(obj)
    if kind == "engel":
        return EngelCertificate.from_json(obj)
    raise ValueError(f"unknown certificate type {kind!r}")


def verify_certificate(cert, budget: int = DEFAULT_BUDGET_BITS) -> VerificationResult:
    if isinstance(cert, RootCertificate):
        return verify_root_certificate(cert, budget)
    if isinstance(cert, EulerCertificate):
        return verify_euler_certificate(cert)
    if isinstance(cert, EngelCertificate):
        return verify_engel_certificate(cert, budget)
    raise TypeError(f"not a certificate: {type(cert).__name__}")


def dumps_canonical(obj: dict[str, Any]) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))
