"""Density witnesses in A = {m + n q : m, n integers} and the additive solver.

A witness at depth n is the Engel remainder alpha_n = r q + s with
r = p_1 ... p_n and s = -sum_i p_{i+1} ... p_n.  It lies in (0, 2/p_{n+1}),
and since the digits of an irrational q are unbounded these witnesses shrink
to zero.  Any target t is then approached by integer multiples k * z.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Union

from .engel import EngelExpansion, EngelState, iter_engel, partial_sum
from .errors import BudgetExhausted, DegenerateTermination, NeedsRefinement
from .exactnum import (
    DEFAULT_BUDGET_BITS,
    Interval,
    Linear,
    Quotient,
    RationalLit,
    RealSpec,
    Shifted,
    approximate,
    as_rational,
    as_spec,
    certified_floor,
    refine_until,
)

DEFAULT_DEPTH_CAP = 10_000


@dataclass(frozen=True)
class DensityWitness:
    r: int
    s: int
    z_enclosure: Interval
    bound: Fraction
    depth: int
    digits: tuple[int, ...] = ()

    def spec(self, q: RealSpec) -> RealSpec:
        """The witness value r*q + s as a RealSpec."""
        return Linear(((Fraction(self.r), q),), Fraction(self.s))


def _witness_from_state(q: RealSpec, state: EngelState, digits: tuple[int, ...], budget: int) -> DensityWitness:
    n = state.index
    nxt = digits[n]
    bound = Fraction(2, nxt)
    if state.exact:
        # rational q whose expansion is still running: z is an exact rational
        r = math.prod(digits[:n])
        s = int(-partial_sum(EngelExpansion(digits, False), n) * r)
        z = Interval.point(state.alpha)
    else:
        r, s = state.scale, state.offset
        z = refine_until(
            state.alpha,
            lambda iv: iv.inside(0, bound),
            lambda iv: iv.hi <= 0 or iv.lo >= bound,
            start=32,
            budget=budget,
        )
        if z is None:
            raise AssertionError("witness enclosure left (0, 2/p_{n+1})")
    assert s + partial_sum(EngelExpansion(digits, False), n) * r == 0
    assert z.inside(0, bound)
    return DensityWitness(r, s, z, bound, n, digits[: n + 1])


def _stream(q: RealSpec, budget: int) -> Iterator[tuple[tuple[int, ...], EngelState]]:
    """Yield (digits so far, state) pairs, one digit ahead of the state."""
    digits: list[int] = []
    prev_state: Optional[EngelState] = None
    for p, state in iter_engel(q, budget):
        digits.append(p)
        if prev_state is not None:
            yield tuple(digits), prev_state
        prev_state = state


def make_witness(q: Union[RealSpec, Fraction], depth: int, budget: int = DEFAULT_BUDGET_BITS) -> DensityWitness:
    """Witness z = q*r + s in (0, 2/p_{depth+1}) built from the first depth+1 Engel digits."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    spec = as_spec(q)
    _require_unit(spec, budget)
    for digits, state in _stream(spec, budget):
        if state.index == depth:
            return _witness_from_state(spec, state, digits, budget)
    raise DegenerateTermination(f"Engel expansion terminated before depth {depth + 1}: q is rational")


def _require_unit(spec: RealSpec, budget: int) -> None:
    if isinstance(spec, RationalLit):
        ok = 0 < spec.value < 1
    else:
        ok = refine_until(spec, lambda iv: iv.inside(0, 1), lambda iv: iv.hi <= 0 or iv.lo >= 1, budget=budget) is not None
    if not ok:
        raise ValueError("witness construction needs 0 < q < 1")


def iter_witnesses(q: Union[RealSpec, Fraction], budget: int = DEFAULT_BUDGET_BITS) -> Iterator[DensityWitness]:
    spec = as_spec(q)
    _require_unit(spec, budget)
    for digits, state in _stream(spec, budget):
        yield _witness_from_state(spec, state, digits, budget)


@functools.lru_cache(maxsize=256)
def witness_below(
    q: RealSpec, eps: Fraction, budget: int = DEFAULT_BUDGET_BITS, max_depth: int = DEFAULT_DEPTH_CAP
) -> DensityWitness:
    """Shallowest witness whose certified enclosure lies below ``eps``."""
    eps = as_rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    spec = as_spec(q)
    best = None
    check_bits = max(8, 4 - math.floor(math.log2(eps)))
    try:
        for w in iter_witnesses(spec, budget):
            best = w
            if w.z_enclosure.hi < eps or w.bound < eps:
                return w
            # the generic enclosure is only as tight as needed for (0, bound); look closer
            if not w.z_enclosure.is_point:
                iv = approximate(w.spec(spec), check_bits)
                if iv.lo > 0 and iv.hi < eps:
                    return DensityWitness(w.r, w.s, iv, w.bound, w.depth, w.digits)
            if w.depth >= max_depth:
                raise BudgetExhausted(f"no witness below {eps} within depth {max_depth}", best=best)
    except NeedsRefinement as exc:
        raise BudgetExhausted(f"precision budget exhausted: {exc}", best=best) from None
    raise DegenerateTermination("Engel expansion terminated: q is rational")


@dataclass(frozen=True)
class AdditiveApprox:
    m: int
    n: int
    err: Interval  # encloses m + n*q - t
    witness_depth: int


def _floor_lower(spec: RealSpec, budget: int) -> int:
    # an undecidable floor takes the lower integer; either neighbour keeps |t - k z| <= z
    try:
        return certified_floor(spec, budget=budget)
    except NeedsRefinement as exc:
        return math.floor(exc.enclosure.lo)


def approx_additive(
    q: Union[RealSpec, Fraction],
    t: Union[RealSpec, Fraction, int, str],
    eps: Union[Fraction, int, str],
    budget: int = DEFAULT_BUDGET_BITS,
    max_depth: int = DEFAULT_DEPTH_CAP,
    strategy: str = "single",
) -> AdditiveApprox:
    """Integers m, n with certified |m + n q - t| < eps.

    ``strategy="single"`` scales one witness z < eps by k = floor(t/z).
    ``strategy="greedy"`` peels t with every witness z_1 > z_2 > ... in turn,
    which keeps the coefficients near the last r instead of t*r/z.
    """
    eps = as_rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if strategy not in ("single", "greedy"):
        raise ValueError(f"unknown strategy {strategy!r}")
    q, t = as_spec(q), as_spec(t)
    fl = certified_floor(q, budget=budget)
    q1 = q if fl == 0 else Shifted(q, -fl)
    q1 = _canonical(q1)

    target = eps
    for _attempt in range(4):
        w = witness_below(q1, target, budget, max_depth)
        if strategy == "single":
            k = _floor_lower(Quotient(t, w.spec(q1)), budget)
            n, m1 = k * w.r, k * w.s
        else:
            n, m1 = _greedy(q1, t, w, budget)
        # fold back the integer part: m1 + n*q1 == (m1 - n*fl) + n*q
        m = m1 - n * fl
        err_spec = Linear(((Fraction(n), q), (Fraction(-1), t)), Fraction(m))
        try:
            err = refine_until(
                err_spec,
                lambda iv: iv.inside(-eps, eps),
                lambda iv: iv.lo >= eps or iv.hi <= -eps,
                start=max(32, -math.floor(math.log2(eps)) + 8),
                budget=budget,
            )
        except NeedsRefinement:
            err = None
        if err is not None:
            return AdditiveApprox(m, n, err, w.depth)
        target /= 2
    raise BudgetExhausted(f"could not certify an element within {eps} of the target")


def _canonical(spec: RealSpec) -> RealSpec:
    iv = approximate(spec, 8)
    return RationalLit(iv.lo) if iv.is_point else spec


def _greedy(q1: RealSpec, t: RealSpec, last: DensityWitness, budget: int) -> tuple[int, int]:
    big_r = big_s = 0
    for w in iter_witnesses(q1, budget):
        rem = Linear(((Fraction(1), t), (Fraction(-big_r), q1)), Fraction(-big_s))
        k = _floor_lower(Quotient(rem, w.spec(q1)), budget)
        big_r += k * w.r
        big_s += k * w.s
        if w.depth >= last.depth:
            break
    return big_r, big_s


def rational_min_gap(q: Union[Fraction, int, str]) -> Fraction:
    """Smallest positive element of {m + n*a/b}: exactly 1/b."""
    q = as_rational(q)
    return Fraction(1, q.denominator)


def min_gap_pair(q: Union[Fraction, int, str]) -> tuple[int, int]:
    """(m, n) with m + n*q == 1/b, from the extended gcd of b and a."""
    q = as_rational(q)
    a, b = q.numerator, q.denominator
    # extended Euclid on (b, a): m*b + n*a == 1
    old_r, r = b, a
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        quo = old_r // r
        old_r, r = r, old_r - quo * r
        old_s, s = s, old_s - quo * s
        old_t, t = t, old_t - quo * t
    if old_r < 0:
        old_s, old_t = -old_s, -old_t
    assert old_s * b + old_t * a == 1
    return old_s, old_t
