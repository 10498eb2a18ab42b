from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from hetnil.grammar import parse
from hetnil.jets import (
    ONE,
    ZERO,
    ScalarExpr,
    UnboundSymbolError,
    divide_exact,
    exact_sqrt,
    jet,
    kappa2,
    param,
    rational_ratio,
    render,
)
from strategies import monomials, rationals, scalars


@given(scalars(), scalars(), scalars())
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == ZERO
    assert a * ONE == a


@given(scalars(max_order=2), scalars(max_order=2), st.integers(1, 4))
def test_partial_is_a_derivation(a, b, i):
    assert (a * b).partial(i) == a.partial(i) * b + a * b.partial(i)


@given(scalars(max_order=1), st.integers(1, 4), st.integers(1, 4))
def test_partials_commute(a, i, j):
    assert a.partial(i).partial(j) == a.partial(j).partial(i)


@given(st.integers(-3, 3), st.integers(1, 4))
def test_partial_of_exponential(k, i):
    assert ScalarExpr.exp(k).partial(i) == ScalarExpr.exp(k) * jet(i) * k


@given(monomials(max_order=2))
def test_unit_inverse(m):
    if m.jet_symbols():
        assert not m.is_unit()
    else:
        assert m * m.inverse() == ONE


@given(scalars(), scalars(max_terms=2))
def test_divide_exact_recovers_factor(q, d):
    d = d.subs_jet((1,), ZERO) + jet(1) * param("t", 2)
    x = q * d
    assert divide_exact(x, d, (1,)) == q


def test_divide_exact_reports_remainder():
    with pytest.raises(ArithmeticError):
        divide_exact(jet(1) + 1, jet(1) * 2 + jet(2), (1,))


@given(scalars(max_order=3, max_jets=3))
def test_render_parse_roundtrip(a):
    assert parse(render(a)) == a


@given(scalars(), rationals.filter(bool))
def test_rational_ratio(a, c):
    if a:
        assert rational_ratio(a * c, a) == c
        assert rational_ratio(a + jet(4) * jet(4) * jet(4), a) is None


@given(scalars(), st.fractions(min_value=1, max_value=4, max_denominator=5),
       st.fractions(min_value=1, max_value=4, max_denominator=5),
       st.dictionaries(st.sampled_from([(1,), (2,), (3,), (4,)]), rationals, min_size=4, max_size=4))
def test_substitute_is_a_homomorphism(a, t, s, jets):
    params = {"t": t, "s": s}
    ev = lambda x: x.substitute(jets, params, lambda k: Fraction(2) ** k)
    b = a * a + jet(2)
    assert ev(a * b) == ev(a) * ev(b)
    assert ev(a + b) == ev(a) + ev(b)
    assert isinstance(ev(a), Fraction)


def test_float_substitution_matches_exact():
    x = param("t", 2) * jet(1) - Fraction(1, 3) * ScalarExpr.exp(-2)
    jets = {(1,): Fraction(1, 2)}
    exact = x.substitute(jets, {"t": 3}, lambda k: Fraction(5) ** k)
    approx = x.substitute(jets, {"t": 3}, lambda k: 5.0 ** k, exact=False)
    assert abs(float(exact) - approx) < 1e-14


def test_unbound_symbols():
    with pytest.raises(UnboundSymbolError):
        param("t").substitute({}, {})
    with pytest.raises(UnboundSymbolError):
        jet(1, 2).substitute({}, {})
    with pytest.raises(UnboundSymbolError):
        ScalarExpr.exp(1).substitute({}, {})


def test_jet_order_limit():
    with pytest.raises(ValueError):
        jet(1, 1, 1).partial(2)
    with pytest.raises(ValueError):
        jet(5)


def test_kappa_expansion_and_params():
    assert kappa2() == parse("(2 + s^-2)/2")
    assert kappa2().subs_params({"s": 1}) == ScalarExpr.const(Fraction(3, 2))
    assert (param("t") * param("s")).subs_params({"t": param("a_inst")}) == param("a_inst") * param("s")


def test_laplacian_of_exponential():
    lap = ScalarExpr.exp(2).laplacian()
    expected = ScalarExpr.exp(2) * sum((jet(i, i) * 2 + jet(i) * jet(i) * 4 for i in range(1, 5)), ZERO)
    assert lap == expected


def test_exact_sqrt():
    assert exact_sqrt(Fraction(9, 4)) == Fraction(3, 2)
    assert exact_sqrt(Fraction(2)) is None
    assert exact_sqrt(Fraction(-1)) is None


def test_render_is_stable():
    assert render(ZERO) == "0"
    assert render(jet(1) * ScalarExpr.exp(2) * 2 - param("t", 2) * param("s", -2)) == "-t^2*s^-2 + 2*f1*exp(2f)"
