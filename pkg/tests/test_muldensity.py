import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from densecert.errors import BudgetExhausted, DependentDilations
from densecert.exactnum import approximate, exp_enclosure
from densecert.muldensity import (
    MulProblem,
    MulSolution,
    approx_multiplicative,
    approx_signed,
    log_ratio_spec,
    log_tolerance,
    mul_independence,
    perfect_power_base,
    sign_extend,
)


def test_independence_examples():
    assert mul_independence(2, 3)
    assert not mul_independence(4, 8)
    assert mul_independence(12, 18)


def test_independence_matches_brute_force():
    for p in range(2, 101):
        for q in range(2, 101):
            dependent = False
            for a in range(1, 65):
                qa = q**a
                for b in range(1, 65):
                    pb = p**b
                    if pb == qa:
                        dependent = True
                        break
                    if pb > qa:
                        break
                if dependent:
                    break
            assert mul_independence(p, q) == (not dependent), (p, q)


def test_perfect_power_base():
    assert perfect_power_base(64) == (2, 6)
    assert perfect_power_base(12) == (12, 1)
    assert perfect_power_base(3**10 * 5**5) == (3**2 * 5, 5)


def test_log_ratio_spec():
    theta = log_ratio_spec(2, 3)
    iv = approximate(theta, 100)
    v = mpmath.log(2) / mpmath.log(3)
    assert mpmath.mpf(iv.lo.numerator) / iv.lo.denominator <= v <= mpmath.mpf(iv.hi.numerator) / iv.hi.denominator
    # theta * ln 3 encloses ln 2
    from densecert.exactnum import NaturalLog

    prod = iv * approximate(NaturalLog(Fraction(3)), 100)
    assert prod.lo <= approximate(NaturalLog(Fraction(2)), 200).hi and approximate(NaturalLog(Fraction(2)), 200).lo <= prod.hi
    for p, q in ((3, 3), (2, 4)):
        with pytest.raises(DependentDilations):
            log_ratio_spec(p, q)


def test_documented_pair_y1():
    value = Fraction(2) ** 19 * Fraction(3) ** -12
    assert value == Fraction(524288, 531441) and abs(value - 1) == Fraction(7153, 531441) < Fraction(1, 50)
    sol = approx_multiplicative(MulProblem(2, 3, 1, Fraction(1, 50)))
    assert sol.certified and abs(sol.value - 1) < Fraction(1, 50)


@pytest.mark.parametrize("p, q", [(2, 3), (5, 7), (6, 10)])
def test_exact_hit(p, q):
    sol = approx_multiplicative(MulProblem(p, q, p**3, Fraction(1, 10**9)))
    assert (sol.m, sol.n, sol.err) == (3, 0, 0)


def test_y10_eps_tenth():
    sol = approx_multiplicative(MulProblem(2, 3, 10, Fraction(1, 10)))
    assert abs(Fraction(2) ** sol.m * Fraction(3) ** sol.n - 10) < Fraction(1, 10)


@given(st.fractions(min_value=Fraction(1, 10), max_value=10, max_denominator=1000))
@settings(max_examples=20, deadline=None)
def test_density_sanity_eps_1e3(y):
    eps = Fraction(1, 1000)
    sol = approx_multiplicative(MulProblem(2, 3, y, eps))
    exact = Fraction(2) ** sol.m * Fraction(3) ** sol.n
    assert exact == sol.value and abs(exact - y) == sol.err < eps


def test_log_to_value_bound():
    rnd = random.Random(11)
    for _ in range(100):
        y = Fraction(rnd.randint(1, 10**4), rnd.randint(1, 10**3))
        eps = Fraction(1, rnd.randint(2, 10**6))
        delta = log_tolerance(y, eps)
        d = delta * Fraction(rnd.randint(-(10**6), 10**6), 10**6)
        # y e^d - y, with e^d enclosed rigorously
        iv = exp_enclosure(d, 200) * y - y
        assert max(abs(iv.lo), abs(iv.hi)) <= eps


def test_dependent_dilations_rejected():
    with pytest.raises(DependentDilations):
        approx_multiplicative(MulProblem(2, 4, 5, Fraction(1, 10)))


def test_cap_exhaustion_reports_best():
    with pytest.raises(BudgetExhausted) as info:
        approx_multiplicative(MulProblem(2, 3, 5, Fraction(1, 10**12)), exponent_cap=20)
    best = info.value.best
    assert isinstance(best, MulSolution) and not best.certified
    assert best.err == abs(Fraction(2) ** best.m * Fraction(3) ** best.n - 5)


def test_sign_extend():
    sol = MulSolution(19, -12, Fraction(524288, 531441), Fraction(7153, 531441))
    assert sign_extend(sol, 1) == sol
    neg = sign_extend(MulSolution(3, 0, Fraction(8), Fraction(0)), -1)
    assert neg.value == -8 and neg.err == 0
    assert sign_extend(sol, -1).err == sol.err


def test_signed_target():
    sol = approx_signed(2, 3, Fraction(-5), Fraction(1, 100))
    assert sol.value < 0 and abs(sol.value - (-5)) == sol.err < Fraction(1, 100)


def test_problem_validation():
    with pytest.raises(ValueError):
        MulProblem(2, 3, 0, Fraction(1))
    with pytest.raises(ValueError):
        MulProblem(1, 3, 2, Fraction(1))
