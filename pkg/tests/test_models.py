import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from hetnil import hermitian as hg
from hetnil.checks import random_family_draw
from hetnil.forms import e
from hetnil.jets import ONE, expf, kappa2, lambda_norm2, param, tau2
from hetnil.models import (
    AnomalySetup,
    InstantonSpec,
    ParameterError,
    anomaly_residual,
    build_family,
    classify,
    contract_params,
    contract_to_h3,
    expected_ad_anomaly,
    geometry,
    h5,
    is_asd,
    ode_identity_checks,
)

rationals = st.fractions(min_value=-4, max_value=4, max_denominator=7)


@given(st.integers(0, 2 ** 32))
def test_asd_iff_abelian_iff_rho_zero(seed):
    fam, params = random_family_draw(random.Random(seed))
    alg = build_family(fam, **params)
    c = classify(alg)
    assert c.asd == c.abelian
    assert c.asd == (fam != "h5real" and params["rho"] == 0)


def test_named_families_classify():
    for fam in ("h5", "h3", "flat"):
        c = classify(build_family(fam))
        assert c.asd and c.abelian
    c = classify(build_family("h5real"))
    assert not c.asd and not c.abelian


def test_fam1_reduces_to_h5():
    assert all(build_family("fam1", rho=0, b=1).structure(k) == h5().structure(k) for k in range(1, 7))


def test_fam2_example():
    alg = build_family("fam2", rho=0, b=1, t=1, s=13, u1=3, u2=4)
    assert classify(alg).asd
    with pytest.raises(ParameterError):
        build_family("fam2", rho=0, b=1, t=1, s=5, u1=3, u2=4)
    with pytest.raises(ParameterError):
        build_family("fam2", rho=0, b=1, t=1, s=13, u1=1, u2=1)


def test_fam2_abelian_solves_the_torsion_identities():
    alg = build_family("fam2", rho=0, b=2, t=Fraction(1, 2), s=13, u1=3, u2=4)
    G = geometry(alg)
    assert hg.dtr_residual(G.R_plus, G.R_minus, G.dT) == {}
    assert not hg.strominger_residual(hg.standard_su3(), alg)


def test_parameter_validation():
    with pytest.raises(ParameterError):
        build_family("nope")
    with pytest.raises(ParameterError):
        build_family("fam1", rho=2)
    with pytest.raises(ParameterError):
        build_family("h5", s=0)
    with pytest.raises(ParameterError):
        InstantonSpec("A_ad", {"d_inst": 0})
    with pytest.raises(ParameterError):
        InstantonSpec("other")
    with pytest.raises(hg.PreconditionError):
        geometry(build_family("h5real"))


def test_is_asd():
    assert is_asd(e(1, 2) - e(3, 4))
    assert not is_asd(e(1, 2) + e(3, 4))
    assert not is_asd(e(1, 5))


def test_contraction_to_h3():
    h3c = contract_to_h3(h5())
    h3 = build_family("h3")
    assert all(h3c.structure(k) == h3.structure(k) for k in range(1, 7))
    assert contract_params(kappa2()) == ONE
    with pytest.raises(ParameterError):
        contract_to_h3(h3)


def test_twin_instanton_is_the_minus_connection():
    G = geometry(h5())
    twin = InstantonSpec("A_ad", {"a_inst": "t", "d_inst": "s"})
    assert twin.connection() == G.minus
    assert G.p1_instanton(twin) == G.p1_minus


def test_pontrjagin_difference_constant():
    G = geometry(h5())
    diff = G.p1_minus - G.p1_instanton(InstantonSpec("A_ad"))
    want = (param("t", 2) * kappa2() - param("a_inst", 2) * tau2()) * expf(-2).laplacian() * -12
    assert diff == want


@given(rationals, rationals, rationals.filter(bool))
def test_anomaly_is_affine_in_alpha_prime(ap, a, d):
    alg = h5()
    spec = InstantonSpec("A_ad", {"a_inst": a, "d_inst": d})
    r = anomaly_residual(AnomalySetup(alg, spec, ap))
    r0 = anomaly_residual(AnomalySetup(alg, spec, 0))
    r1 = anomaly_residual(AnomalySetup(alg, spec, 1))
    assert r == r0 + (r1 - r0) * ap
    want = expected_ad_anomaly(ONE * ap, Fraction(-12)).subs_params({"a_inst": a, "d_inst": d})
    assert r == want


def test_a_lambda_pontrjagin_is_constant():
    G = geometry(h5())
    want = param("t", 2) * (ONE + kappa2()) * lambda_norm2() * -8
    assert G.p1_instanton(InstantonSpec("A_lambda")) == want


def test_ode_identities():
    rows = {r.name: r for r in ode_identity_checks()}
    assert len(rows) == 9
    for name, row in rows.items():
        if name == "u-substitution-as-printed":
            assert row.status == "discrepancy"
            assert row.residual
        else:
            assert row.status == "pass", name
