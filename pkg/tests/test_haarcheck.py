import math
import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from densecert.errors import DependentDilations, DomainViolation
from densecert.haarcheck import (
    Custom,
    Hyperbola,
    HyperbolaPlus,
    Perturbation,
    SampleTable,
    adaptive_gk,
    dilation_integral,
    dilations_independent,
    function_from_json,
    geometric_grid,
    invariance_check,
    recover_c,
    two_dilation_audit,
)

GRID4 = [1.0, 2.0, 3.5, 10.0]


def test_hyperbola_closed_form():
    v, err = dilation_integral(Hyperbola(Fraction(5)), 1, 2)
    assert abs(v - 5 * math.log(2)) <= err + 1e-15
    v7, _ = dilation_integral(Hyperbola(Fraction(5)), 7, 2)
    assert v7 == v


def test_table_trapezoid_exact():
    xs = np.array([1.0, 2.0, 3.0, 4.0])
    f = SampleTable(xs, xs.copy())
    v, err = dilation_integral(f, 1, 2)
    assert abs(v - 1.5) <= err


def test_gk_matches_analytic_on_closed_forms():
    rnd = random.Random(8)
    for _ in range(100):
        c = rnd.uniform(-10, 10)
        x = rnd.uniform(0.01, 50) * rnd.choice([-1, 1])
        p = rnd.uniform(1.01, 20)
        a, b = x, p * x
        v, err = adaptive_gk(lambda t: c / t, a, b)
        assert abs(v - c * math.log(p)) <= err
        # polynomial integrand
        coeffs = [rnd.uniform(-3, 3) for _ in range(5)]
        poly = np.polynomial.Polynomial(coeffs)
        anti = poly.integ()
        v, err = adaptive_gk(poly, a, b)
        exact = anti(b) - anti(a)
        assert abs(v - exact) <= err + 1e-12 * abs(exact)


def test_gk_against_mpmath_on_oscillatory_integrand():
    pert = Perturbation("sin_log", 0.3, freq=7.0, phase=0.4)
    for x, p in [(0.3, 5.0), (2.0, 17.0), (-4.0, 3.0)]:
        v, err = adaptive_gk(lambda t: pert(t) / t, x, p * x)
        with mpmath.workprec(106):
            ref = mpmath.quad(lambda t: 0.3 * mpmath.sin(7 * mpmath.log(abs(t)) + 0.4) / t, [x, p * x])
        assert abs(v - float(ref)) <= err


def test_dilation_invariance_of_exact_solution():
    f = Hyperbola(Fraction(-3, 7))
    for x in geometric_grid(1e-3, 1e3, 40):
        for sign in (1, -1):
            v, err = dilation_integral(f, sign * x, 3)
            assert abs(v - (-3 / 7) * math.log(3)) <= err + 1e-15


def test_invariance_check_hyperbola_constant():
    r = invariance_check(Hyperbola(Fraction(5)), 2, GRID4, 1e-9)
    assert r.verdict == "constant" and r.spread <= r.quad_error_bound


def test_invariance_check_detects_sin_log():
    pert = Perturbation("sin_log", 0.01)
    f = HyperbolaPlus(Fraction(5), pert)
    r = invariance_check(f, 2, GRID4, 1e-9)
    # closed form: I_2(x) = 5 ln 2 + 0.01 (cos(ln x) - cos(ln x + ln 2))
    expected = [5 * math.log(2) + 0.01 * (math.cos(math.log(x)) - math.cos(math.log(2 * x))) for x in GRID4]
    for got, want, e in zip(r.integrals, expected, r.errors):
        assert abs(got - want) <= e + 1e-14
    assert r.verdict == "non-constant"
    assert abs(r.spread - (max(expected) - min(expected))) <= r.quad_error_bound + 1e-14


def test_perturbation_log_antiderivative():
    for kind in ("sin_log", "cos_log"):
        pert = Perturbation(kind, 0.2, freq=1.7, period=3.0, phase=0.1)
        for x, p in [(0.5, 2.0), (3.0, 5.0)]:
            v, err = adaptive_gk(lambda t: pert(t) / t, x, p * x)
            closed = pert.log_antiderivative(math.log(p * x)) - pert.log_antiderivative(math.log(x))
            assert abs(v - closed) <= err + 1e-14


def _table_from(c, lo, hi, count):
    xs = np.geomspace(lo, hi, count)
    return SampleTable(xs, c / xs)


def test_table_from_hyperbola_constant_within_interpolation_budget():
    f = _table_from(5.0, 0.5, 40, 20001)
    # 20001 geometric samples keep the chord error of 5/t far below the 1e-6 tolerance
    r = invariance_check(f, 2, GRID4, 1e-6)
    assert r.verdict == "constant"
    assert abs(r.integrals[0] - 5 * math.log(2)) < 1e-6


def test_recover_c_examples():
    c, hw = recover_c(Hyperbola(Fraction(5)), 2)
    assert abs(c - 5) <= hw + 1e-15
    c, hw = recover_c(Hyperbola(Fraction(-3)), 10)
    assert abs(c + 3) <= hw + 1e-15
    c, _ = recover_c(_table_from(7.0, 0.5, 5, 20001), 3)
    assert abs(c - 7) < 1e-6


def test_domain_violations():
    with pytest.raises(DomainViolation):
        dilation_integral(Hyperbola(Fraction(1)), 1e-8, 2)
    with pytest.raises(DomainViolation):
        dilation_integral(_table_from(1.0, 1, 4, 50), 3, 2)
    f = Hyperbola(Fraction(1), zero_exclusion=0.5)
    with pytest.raises(DomainViolation):
        invariance_check(f, 2, [0.25, 1.0], 1e-9)


def test_table_validation():
    with pytest.raises(ValueError):
        SampleTable(np.array([1.0, 1.0, 2.0]), np.zeros(3))
    with pytest.raises(ValueError):
        SampleTable(np.array([-1.0, 0.0, 1.0]), np.zeros(3))


def test_table_from_csv(tmp_path):
    path = tmp_path / "f.csv"
    xs = np.geomspace(0.25, 64, 4001)
    path.write_text("t,f\n" + "\n".join(f"{float(x)!r},{5 / float(x)!r}" for x in xs))
    f = SampleTable.from_csv(path)
    assert len(f.xs) == 4001
    bad = tmp_path / "bad.csv"
    bad.write_text("t,f\n1,2\nx,y\n")
    with pytest.raises(ValueError):
        SampleTable.from_csv(bad)
    c, _ = recover_c(f, 2)
    assert abs(c - 5) < 1e-4


def test_audit_positive_two_sided():
    f = Hyperbola(Fraction(5))
    a = two_dilation_audit(f, 2, 3, geometric_grid(0.25, 16, 16), 1e-9)
    assert a.verdict == "consistent-with-theorem"
    assert abs(a.c - 5) < 1e-12 and a.residual_max < 1e-12
    assert abs(a.c1 - 5) < 1e-12 and abs(a.c2 + 5) < 1e-12


def test_audit_dependent_dilations():
    with pytest.raises(DependentDilations):
        two_dilation_audit(Hyperbola(Fraction(5)), 2, 4, GRID4, 1e-9)


def test_audit_negative_control():
    pert = Perturbation("cos_log", 0.2, period=2.0)
    f = HyperbolaPlus(Fraction(1), pert)
    a = two_dilation_audit(f, 2, 3, geometric_grid(0.25, 16, 16), 1e-9)
    assert a.p_report.verdict == "constant"
    assert a.q_report.verdict == "non-constant"
    assert a.q_report.spread >= 10 * a.q_report.quad_error_bound
    assert a.verdict == "violates-hypotheses"
    assert "q-invariance fails" in a.reasons


def test_audit_sign_linkage_failure():
    # c/t on t > 0 but a different constant on t < 0: each axis is invariant, the link is not
    f = Custom(lambda t: np.where(t > 0, 5.0, -2.0) / t, "split")
    a = two_dilation_audit(f, 2, 3, geometric_grid(0.25, 16, 16), 1e-9)
    assert a.verdict == "violates-hypotheses"
    # f(-t) = -2/(-t) = 2/t, so c2 = 2 and c1 + c2 = 7
    assert abs(a.c1 + a.c2 - 7) < 1e-9


def test_inconclusive_when_tol_below_error_budget():
    pert = Perturbation("sin_log", 1e-3, freq=40.0)
    f = HyperbolaPlus(Fraction(1), pert)
    r = invariance_check(f, 2, GRID4, 1e-30)
    assert r.verdict == "inconclusive"


def test_dilations_independent():
    assert dilations_independent(2, 3)
    assert not dilations_independent(2, 4)
    assert not dilations_independent(Fraction(1, 2), 8)
    assert dilations_independent(6, 12)
    assert not dilations_independent(Fraction(4, 9), Fraction(27, 8))
    with pytest.raises(ValueError):
        dilations_independent(1, 2)


def test_report_is_deterministic():
    f = HyperbolaPlus(Fraction(2), Perturbation("sin_log", 0.05, freq=3.0))
    grid = geometric_grid(0.25, 16, 16)
    a = two_dilation_audit(f, 2, 3, grid, 1e-9).to_json()
    b = two_dilation_audit(f, 2, 3, grid, 1e-9).to_json()
    assert a == b


def test_function_from_json_round_trip():
    obj = {"kind": "hyperbola_plus", "c": "5", "perturbation": {"kind": "sin_log", "amp": 0.01}}
    f = function_from_json(obj)
    assert isinstance(f, HyperbolaPlus) and f.c == 5
    assert function_from_json(f.to_json()) == f
    with pytest.raises(ValueError):
        function_from_json({"kind": "gaussian"})
