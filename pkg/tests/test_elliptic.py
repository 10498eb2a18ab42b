import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from hetnil.elliptic import (
    DomainError,
    WeierstrassParams,
    _laurent_unit,
    eqcan_parameters,
    half_period,
    ode_residual,
    profile_equation,
    profile_jet,
    verify_profile_pde,
    wp_eval,
    wp_second,
)
from hetnil.jets import expf

# Gamma(1/4)^2 / (4 sqrt(2 pi)): the real half period for g2 = 4, g3 = 0.
TAU_UNIT = 1.3110287771461


def wp_oracle(z, a):
    """P(z) for g2 = 4a^2, g3 = 0 via Jacobi sn: roots a, 0, -a and m = 1/2."""
    sn = mpmath.ellipfun("sn", math.sqrt(2 * a) * z, m=0.5)
    return float(-a + 2 * a / sn ** 2)


def test_half_period_oracle():
    closed = math.gamma(0.25) ** 2 / (4 * math.sqrt(2 * math.pi))
    assert abs(closed - TAU_UNIT) < 1e-12
    assert abs(half_period(1.0) - closed) < 1e-12
    assert abs(half_period(4.0) - closed / 2) < 1e-12
    assert WeierstrassParams(1.0).half_period == half_period(1.0)


def test_laurent_coefficients():
    c = _laurent_unit()
    assert c[0] == pytest.approx(1 / 5)
    assert c[1] == 0
    assert c[2] == pytest.approx(1 / 75, rel=1e-15)


@given(st.floats(0.2, 5.0), st.floats(0.01, 0.99))
def test_matches_jacobi_oracle(a, frac):
    z = 2 * half_period(a) * frac
    p, dp = wp_eval(z, a)
    assert p == pytest.approx(wp_oracle(z, a), rel=1e-9, abs=1e-9)
    assert ode_residual(p, dp, a) < 1e-10


@given(st.floats(0.2, 5.0), st.floats(0.001, 0.9))
def test_reflection_about_half_period(a, frac):
    tau = half_period(a)
    d = tau * frac
    p1, dp1 = wp_eval(tau + d, a)
    p2, dp2 = wp_eval(tau - d, a)
    assert p1 == pytest.approx(p2, rel=1e-10)
    assert dp1 == pytest.approx(-dp2, rel=1e-9, abs=1e-9)


def test_derivatives_by_finite_differences():
    a, h = 1.3, 1e-5
    for z in (0.2, 0.7, 1.0):
        p, dp = wp_eval(z, a)
        fd = (wp_eval(z + h, a)[0] - wp_eval(z - h, a)[0]) / (2 * h)
        assert dp == pytest.approx(fd, rel=1e-7)
        fd2 = (wp_eval(z + h, a)[1] - wp_eval(z - h, a)[1]) / (2 * h)
        assert wp_second(p, a) == pytest.approx(fd2, rel=1e-6)


def test_minimum_at_half_period():
    a = 2.0
    p, dp = wp_eval(half_period(a) * (1 - 1e-12), a)
    assert p == pytest.approx(a, rel=1e-9)
    assert abs(dp) < 1e-5


def test_inverse_square_jets():
    j = profile_jet("inverse-square", (1, 0, 0, 0), params={"alphap": Fraction(1, 3)})
    assert j.exact
    assert j[(1,)] == -1
    assert j[(1, 1)] == 1
    assert j[(2, 2)] == j[(3, 3)] == j[(4, 4)] == -1
    assert expf(-2).laplacian().evaluate(j) == 8


def test_quadratic_laplacian():
    a, d = Fraction(2), Fraction(1, 2)
    tau2 = 1 + 1 / (2 * d * d)
    j = profile_jet("quadratic", (Fraction(1, 3), 0, Fraction(1, 5), 0), params={"a_inst": a, "d_inst": d})
    assert expf(2).laplacian().evaluate(j) == -8 * a * a * tau2


@given(st.lists(st.fractions(-3, 3, max_denominator=5), min_size=4, max_size=4),
       st.fractions(Fraction(1, 9), 4, max_denominator=9))
def test_inverse_square_solves_both_laplace_equations(x, ap):
    if not any(x):
        return
    params = {"alphap": ap}
    assert verify_profile_pde("inverse-square", "harmonic", [x], params) == 0
    assert verify_profile_pde("inverse-square", "inverse-laplacian", [x], params) == 0


@given(st.lists(st.fractions(-1, 1, max_denominator=4), min_size=4, max_size=4),
       st.fractions(-3, 3, max_denominator=5).filter(bool), st.fractions(-3, 3, max_denominator=5).filter(bool))
def test_quadratic_solves_insab(x, a, d):
    if sum(v * v for v in x) >= 1:
        return
    assert verify_profile_pde("quadratic", "insab", [x], {"a_inst": a, "d_inst": d}) == 0


def test_weierstrass_solves_the_reduced_equations():
    pts = [(z, 0, 0, 0) for z in (0.3, 0.6, 0.9, 1.2)]
    params = eqcan_parameters(2.0, 1.0, 1.0)
    assert params["s"] > 0
    assert verify_profile_pde("weierstrass", "eqcan", pts, params) < 1e-9
    pts1 = [(z, 0, 0, 0) for z in (0.3, 0.8, 1.3, 2.0)]
    assert verify_profile_pde("weierstrass", "solv5", pts1, {"aW": 1.0, "alpha": 1.0}) < 1e-9


def test_numeric_and_exact_modes_agree():
    x = (Fraction(1, 2), Fraction(1, 3), 0, 0)
    expr = profile_equation("in1")
    ex = profile_jet("quadratic", x)
    fl = profile_jet("quadratic", x, exact=False)
    params = {"t": 1, "s": 1}
    assert float(expr.evaluate(ex, params)) == pytest.approx(expr.evaluate(fl, params, exact=False), abs=1e-12)


def test_domain_errors():
    with pytest.raises(DomainError):
        WeierstrassParams(0.0)
    with pytest.raises(DomainError):
        half_period(-1.0)
    with pytest.raises(DomainError):
        wp_eval(0.0, 1.0)
    with pytest.raises(DomainError):
        wp_eval(3 * half_period(1.0), 1.0)
    with pytest.raises(DomainError):
        profile_jet("inverse-square", (0, 0, 0, 0))
    with pytest.raises(DomainError):
        profile_jet("quadratic", (1, 0, 0, 0))
    with pytest.raises(DomainError):
        profile_jet("nope", (0, 0, 0, 0))
    with pytest.raises(DomainError):
        eqcan_parameters(1.0, 1.0, 1.0)
    j = profile_jet("constant", (0, 0, 0, 0), params={"c": 2})
    with pytest.raises(DomainError):
        j.exp_value(1)
    assert j.exp_value(-2) == Fraction(1, 2)
    with pytest.raises(KeyError):
        profile_equation("nope")
