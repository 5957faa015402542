"""Engel expansions q = 1/p1 + 1/(p1 p2) + 1/(p1 p2 p3) + ...

Digits follow the remainder recurrence

    alpha_0 = q,   p_{n+1} chosen with (p_{n+1} - 1) alpha_n < 1 < p_{n+1} alpha_n,
    alpha_{n+1} = p_{n+1} alpha_n - 1.

Rational inputs run on exact Fractions and terminate; any other RealSpec is
expanded through certified enclosures.  On the real path the remainder is
kept in the flat form alpha_n = r_n * q + s_n with integers r_n, s_n, which
is exactly the density witness of :mod:`densecert.density`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Optional, Union

from .errors import NeedsRefinement
from .exactnum import (
    DEFAULT_BUDGET_BITS,
    Interval,
    Linear,
    RationalLit,
    RealSpec,
    approximate,
    as_spec,
    refine_until,
)


@dataclass(frozen=True)
class EngelExpansion:
    digits: tuple[int, ...]
    terminated: bool
    source: Optional[RealSpec] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))

    def __len__(self) -> int:
        return len(self.digits)


@dataclass(frozen=True)
class EngelState:
    """Remainder alpha_n after ``index`` digits.

    On the exact path ``alpha`` is a Fraction.  On the real path alpha equals
    ``scale * source + offset``; ``alpha`` then holds that expression as a
    RealSpec.
    """

    alpha: Union[Fraction, RealSpec]
    index: int = 0
    scale: int = 1
    offset: int = 0
    source: Optional[RealSpec] = None

    @property
    def exact(self) -> bool:
        return isinstance(self.alpha, Fraction)

    @classmethod
    def start(cls, x: Union[RealSpec, Fraction, int]) -> "EngelState":
        spec = as_spec(x)
        if isinstance(spec, RationalLit):
            return cls(spec.value)
        # a point enclosure means the value is a known rational: use the exact path
        iv = approximate(spec, 8)
        if iv.is_point:
            return cls(iv.lo)
        return cls(spec, 0, 1, 0, spec)


def _real_alpha(source: RealSpec, scale: int, offset: int) -> RealSpec:
    return Linear(((Fraction(scale), source),), Fraction(offset))


def _chain_holds(p: int, a: Interval) -> bool:
    # (p-1) alpha < 1 < p alpha < 2
    return (p - 1) * a.hi < 1 < p * a.lo and p * a.hi < 2


def engel_step(state: EngelState, budget: int = DEFAULT_BUDGET_BITS) -> Optional[tuple[int, EngelState]]:
    """Advance one digit.  Returns ``None`` once the remainder is exactly zero."""
    if state.exact:
        a = state.alpha
        assert isinstance(a, Fraction)
        if a == 0:
            return None
        if not 0 < a < 1:
            raise ValueError(f"Engel remainder {a} outside (0, 1)")
        # 1/alpha integer: take p = 1/alpha so the next remainder is 0
        q, r = divmod(a.denominator, a.numerator)
        p = q if r == 0 else q + 1
        nxt = p * a - 1
        assert (p - 1) * a < 1 <= p * a < 2 and p >= 2
        return p, EngelState(nxt, state.index + 1)

    assert state.source is not None
    alpha = state.alpha
    assert isinstance(alpha, RealSpec)

    def decided(iv: Interval) -> bool:
        if iv.lo <= 0:
            return False
        f_lo, f_hi = math.floor(1 / iv.hi), math.floor(1 / iv.lo)
        # 1/alpha must sit strictly between two integers
        return f_lo == f_hi and 1 / iv.hi > f_lo and _chain_holds(f_lo + 1, iv)

    try:
        iv = refine_until(alpha, decided, start=32, budget=budget)
    except NeedsRefinement as exc:
        raise NeedsRefinement(
            f"Engel digit {state.index + 1} undecided within {budget} bits", enclosure=exc.enclosure
        ) from None
    assert iv is not None
    p = math.floor(1 / iv.lo) + 1
    scale, offset = p * state.scale, p * state.offset - 1
    nxt = EngelState(_real_alpha(state.source, scale, offset), state.index + 1, scale, offset, state.source)
    return p, nxt


def iter_engel(x: Union[RealSpec, Fraction, int], budget: int = DEFAULT_BUDGET_BITS) -> Iterator[tuple[int, EngelState]]:
    """Yield ``(digit, state_after_digit)`` until the expansion terminates (if ever)."""
    state = EngelState.start(x)
    prev = 2
    while True:
        step = engel_step(state, budget)
        if step is None:
            return
        p, state = step
        if p < prev:
            raise AssertionError(f"Engel digits decreased: {prev} -> {p}")
        prev = p
        yield p, state


def _check_unit_interval(spec: RealSpec, budget: int) -> None:
    if isinstance(spec, RationalLit):
        if not 0 < spec.value < 1:
            raise ValueError(f"Engel expansion needs 0 < x < 1, got {spec.value}")
        return
    iv = refine_until(spec, lambda iv: iv.inside(0, 1), lambda iv: iv.hi <= 0 or iv.lo >= 1, budget=budget)
    if iv is None:
        raise ValueError("Engel expansion needs 0 < x < 1")


def engel_digits(x: Union[RealSpec, Fraction, int], count: int, budget: int = DEFAULT_BUDGET_BITS) -> EngelExpansion:
    """First ``count`` Engel digits of ``x`` (fewer if the expansion terminates)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    spec = as_spec(x)
    _check_unit_interval(spec, budget)
    digits: list[int] = []
    last = None
    try:
        for p, last in iter_engel(spec, budget):
            digits.append(p)
            if len(digits) == count:
                break
        else:
            return EngelExpansion(tuple(digits), True, spec)
    except NeedsRefinement as exc:
        exc.partial = EngelExpansion(tuple(digits), False, spec)
        raise
    # hitting ``count`` can coincide with termination on the exact path
    terminated = last is not None and last.exact and last.alpha == 0
    return EngelExpansion(tuple(digits), terminated, spec)


def partial_sum(e: EngelExpansion, n: int) -> Fraction:
    """Exact S_n = sum_{i<=n} 1/(p_1 ... p_i)."""
    if not 0 <= n <= len(e.digits):
        raise ValueError(f"n={n} outside 0..{len(e.digits)}")
    # Horner from the inside out: S_n = (1 + (1 + ...)/p_2)/p_1
    acc = Fraction(0)
    for p in reversed(e.digits[:n]):
        acc = (1 + acc) / p
    return acc


def truncation_bound(e: EngelExpansion, n: int) -> Fraction:
    """1/(p_1 ... p_n), an upper bound on |source - S_n|."""
    if not 0 <= n <= len(e.digits):
        raise ValueError(f"n={n} outside 0..{len(e.digits)}")
    return Fraction(1, math.prod(e.digits[:n]))


class PatternReport(NamedTuple):
    strict_increases: int
    tail_constant_from: Optional[int]  # 1-based index where a trailing constant run (length >= 2) starts


def rational_pattern_scan(e: EngelExpansion) -> PatternReport:
    """Heuristic look at a finite prefix; never a proof of rationality."""
    d = e.digits
    strict = sum(1 for a, b in zip(d, d[1:]) if a < b)
    start = len(d)
    while start > 1 and d[start - 2] == d[-1]:
        start -= 1
    tail = start if len(d) - start + 1 >= 2 else None
    return PatternReport(strict, tail)
