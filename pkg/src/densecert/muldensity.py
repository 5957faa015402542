"""Approximation over B = {+-p^m q^n}.

Taking logarithms turns the problem additive: m ln p + n ln q ~ ln y, or
after dividing by ln q, m*theta + n ~ ln y / ln q with theta = ln p / ln q.
A log-space error |D| <= delta gives |p^m q^n - y| <= y (e^delta - 1), so
picking delta below ln(1 + eps/y) is enough; the final answer is still checked
by exact rational arithmetic, independent of any interval used on the way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Optional, Union

import numpy as np

from .density import DEFAULT_DEPTH_CAP, approx_additive
from .errors import BudgetError, BudgetExhausted, DependentDilations
from .exactnum import (
    DEFAULT_BUDGET_BITS,
    NaturalLog,
    Quotient,
    RationalLit,
    RealSpec,
    approximate,
    as_rational,
    integer_nth_root,
    refine_until,
)

DEFAULT_EXPONENT_CAP = 10**6


def perfect_power_base(a: int) -> tuple[int, int]:
    """Write a = u**g with g maximal, so u is not itself a perfect power."""
    if a < 2:
        raise ValueError("need a >= 2")
    for g in range(a.bit_length(), 1, -1):
        root, exact = integer_nth_root(a, g)
        if exact and root >= 2:
            return root, g
    return a, 1


def mul_independence(p: int, q: int) -> bool:
    """True iff p**b != q**a for all positive a, b (ln p / ln q irrational)."""
    if p < 2 or q < 2:
        raise ValueError("need p, q >= 2")
    return perfect_power_base(p)[0] != perfect_power_base(q)[0]


def log_ratio_spec(p: int, q: int) -> RealSpec:
    """theta = ln p / ln q for a multiplicatively independent pair."""
    if not mul_independence(p, q):
        raise DependentDilations(f"ln {p} / ln {q} is rational")
    return Quotient(NaturalLog(Fraction(p)), NaturalLog(Fraction(q)))


@dataclass(frozen=True)
class MulProblem:
    p: int
    q: int
    y: Fraction
    eps: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "y", as_rational(self.y))
        object.__setattr__(self, "eps", as_rational(self.eps))
        if self.p < 2 or self.q < 2:
            raise ValueError("need p, q >= 2")
        if self.y <= 0 or self.eps <= 0:
            raise ValueError("need y > 0 and eps > 0")


@dataclass(frozen=True)
class MulSolution:
    m: int  # exponent of p
    n: int  # exponent of q
    value: Fraction
    err: Fraction
    certified: bool = True
    method: str = "witness"


def exact_value(p: int, q: int, m: int, n: int) -> Fraction:
    return Fraction(p) ** m * Fraction(q) ** n


def _solution(prob: MulProblem, m: int, n: int, method: str) -> MulSolution:
    value = exact_value(prob.p, prob.q, m, n)
    err = abs(value - prob.y)
    return MulSolution(m, n, value, err, err < prob.eps, method)


def log_tolerance(y: Union[Fraction, int, str], eps: Union[Fraction, int, str]) -> Fraction:
    """A rational delta strictly below ln(1 + eps/y)."""
    x = 1 + as_rational(eps) / as_rational(y)
    iv = refine_until(NaturalLog(x), lambda iv: iv.lo > 0 and 16 * iv.width <= iv.lo, start=16)
    assert iv is not None
    return iv.lo


def _witness_route(prob: MulProblem, delta: Fraction, cap: int, budget: int, max_depth: int) -> Optional[MulSolution]:
    theta = log_ratio_spec(prob.p, prob.q)
    t: RealSpec
    if prob.y == 1:
        t = RationalLit(Fraction(0))
    else:
        t = Quotient(NaturalLog(prob.y), NaturalLog(Fraction(prob.q)))
    # |a + b*theta - t| < delta / ln q  =>  |b ln p + a ln q - ln y| < delta
    ln_q_hi = approximate(NaturalLog(Fraction(prob.q)), 64).hi
    try:
        sol = approx_additive(theta, t, delta / ln_q_hi, budget, max_depth, strategy="greedy")
    except BudgetError:
        return None
    m, n = sol.n, sol.m
    if abs(m) > cap or abs(n) > cap:
        return None
    found = _solution(prob, m, n, "witness")
    return found if found.certified else None


def _float_log(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


def _enumerate(prob: MulProblem, window: float, cap: int) -> Iterable[tuple[int, int]]:
    """Candidate exponent pairs whose float log error is below ``window``, smallest first.

    Floats only pick candidates; each one is verified exactly by the caller.
    """
    lp, lq, ly = math.log(prob.p), math.log(prob.q), _float_log(prob.y)
    a = np.arange(-cap, cap + 1, dtype=np.int64)
    resid = (ly - a * lp) / lq
    b = np.rint(resid)
    logerr = np.abs(resid - b) * lq
    keep = (logerr <= window) & (np.abs(b) <= cap)
    a, b = a[keep], b[keep].astype(np.int64)
    order = np.lexsort((a, np.abs(a), np.maximum(np.abs(a), np.abs(b))))
    for i in order:
        yield int(a[i]), int(b[i])


def _nearest(prob: MulProblem, cap: int) -> tuple[int, int]:
    """Pair with the smallest float log error inside the cap box."""
    lp, lq, ly = math.log(prob.p), math.log(prob.q), _float_log(prob.y)
    a = np.arange(-cap, cap + 1, dtype=np.int64)
    b = np.clip(np.rint((ly - a * lp) / lq), -cap, cap)
    i = int(np.argmin(np.abs(ly - a * lp - b * lq)))
    return int(a[i]), int(b[i])


def approx_multiplicative(
    prob: MulProblem,
    exponent_cap: int = DEFAULT_EXPONENT_CAP,
    budget: int = DEFAULT_BUDGET_BITS,
    max_depth: int = DEFAULT_DEPTH_CAP,
    max_checks: int = 4096,
) -> MulSolution:
    """Exponents (m, n) with exact |p^m q^n - y| < eps.

    Tried in order: an exact hit y == p^m q^n, the Engel-witness route through
    :func:`approx_additive`, then a bounded enumeration over |m| <= cap.  The
    witness route needs exponents around the product of the Engel digits, so
    for small eps it usually exceeds the cap and the enumeration answers.
    """
    if not mul_independence(prob.p, prob.q):
        raise DependentDilations(f"ln {prob.p} / ln {prob.q} is rational")
    cap = exponent_cap

    for m, n in _enumerate(prob, 1e-9, cap):
        if exact_value(prob.p, prob.q, m, n) == prob.y:
            return _solution(prob, m, n, "exact")

    delta = log_tolerance(prob.y, prob.eps)
    found = _witness_route(prob, delta, cap, budget, max_depth)
    if found is not None:
        return found

    best: Optional[MulSolution] = None
    window = 2 * float(delta) + 1e-9
    for checked, (m, n) in enumerate(_enumerate(prob, window, cap)):
        if checked >= max_checks:
            break
        cand = _solution(prob, m, n, "enumeration")
        if cand.certified:
            return cand
        if best is None or cand.err < best.err:
            best = cand
    if best is None:
        # nothing inside the window: report the nearest pair in log space anyway
        best = _solution(prob, *_nearest(prob, cap), "enumeration")
    raise BudgetExhausted(f"no certified pair with |m|, |n| <= {cap}", best=best)


def sign_extend(sol: MulSolution, sign: int) -> MulSolution:
    """Attach a sign to the value for negative targets; the error is unchanged."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return replace(sol, value=sign * abs(sol.value))


def approx_signed(
    p: int,
    q: int,
    y: Union[Fraction, int, str],
    eps: Union[Fraction, int, str],
    **kwargs,
) -> MulSolution:
    """Solve for any nonzero target, using B = -B for negative y."""
    y = as_rational(y)
    if y == 0:
        raise ValueError("target must be nonzero")
    sol = approx_multiplicative(MulProblem(p, q, abs(y), as_rational(eps)), **kwargs)
    return sign_extend(sol, 1 if y > 0 else -1)
