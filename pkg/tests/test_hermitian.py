from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from hetnil import hermitian as hg
from hetnil.forms import Form, apply_J, contract, eb, wedge
from hetnil.jets import ZERO, divide_exact, expf, jet, kappa2, param
from hetnil.models import InstantonSpec, build_family, geometry

IDX = range(1, 7)
S0 = hg.standard_su3(dilaton=False)
S = hg.standard_su3()

nonzero = st.fractions(min_value=-4, max_value=4, max_denominator=7).filter(bool)


def matmul(a, b):
    """Matrix wedge product of two form matrices."""
    out = {}
    for i in IDX:
        for j in IDX:
            acc = Form.zero(a.degree + b.degree)
            for k in IDX:
                if (i, k) in a.entries and (k, j) in b.entries:
                    acc = acc + wedge(a[i, k], b[k, j])
            out[i, j] = acc
    return hg.FormMatrix(a.degree + b.degree, out)


def madd(*ms):
    keys = set().union(*(m.entries for m in ms))
    return hg.FormMatrix(ms[0].degree, {k: sum((m[k] for m in ms[1:]), ms[0][k]) for k in keys})


def mneg(m):
    return hg.FormMatrix(m.degree, {k: -v for k, v in m.entries.items()})


def mmap_d(m, alg):
    return hg.FormMatrix(m.degree + 1, {k: alg.d(v) for k, v in m.entries.items()})


def torsion_two_forms(conn, alg):
    return {i: alg.d(eb(i)) + sum((wedge(conn[i, j], eb(j)) for j in IDX), Form.zero(2)) for i in IDX}


@st.composite
def h5_constant_dilaton(draw):
    return build_family("h5", conformal=False, t=draw(nonzero), s=draw(nonzero))


def _pieces(alg, S_):
    T = hg.torsion(S_, alg)
    lc = hg.levi_civita(alg)
    return T, lc, hg.torsion_connection(lc, T, "-"), hg.torsion_connection(lc, T, "+")


@given(h5_constant_dilaton())
def test_connections_have_the_right_torsion(alg):
    T, lc, minus, plus = _pieces(alg, S0)
    for i, th in torsion_two_forms(lc, alg).items():
        assert not th
    tp = torsion_two_forms(plus, alg)
    tm = torsion_two_forms(minus, alg)
    for i in IDX:
        Ti = contract(eb(i), T)
        assert tp[i] == Ti
        assert tm[i] == -Ti


@given(h5_constant_dilaton())
def test_bianchi_and_skew_curvature(alg):
    _, _, minus, plus = _pieces(alg, S0)
    for conn in (minus, plus):
        R = hg.curvature(conn, alg)
        assert not R.antisymmetry_defect()
        lhs = mmap_d(R, alg)
        rhs = madd(matmul(R, conn), mneg(matmul(conn, R)))
        assert (lhs - rhs).entries == {}


@given(h5_constant_dilaton())
def test_curvature_difference_identity(alg):
    T, _, minus, plus = _pieces(alg, S0)
    Tm = hg.torsion_matrix(T)
    assert (madd(minus, mneg(Tm)) - plus).entries == {}
    Rm = hg.curvature(minus, alg)
    Rp = hg.curvature(plus, alg)
    predicted = madd(Rm, mneg(mmap_d(Tm, alg)), mneg(matmul(minus, Tm)), mneg(matmul(Tm, minus)), matmul(Tm, Tm))
    assert (predicted - Rp).entries == {}


@given(h5_constant_dilaton())
def test_plus_connection_is_hermitian_and_dtr_holds(alg):
    T, _, minus, plus = _pieces(alg, S0)
    assert hg.preserves_J(plus)
    assert not hg.preserves_J(minus)
    assert hg.dtr_residual(hg.curvature(plus, alg), hg.curvature(minus, alg), alg.d(T)) == {}


@given(nonzero, nonzero, nonzero)
def test_a_lambda_is_an_instanton(l1, l2, l3):
    G = geometry(build_family("h5"))
    R = G.instanton_curvature(InstantonSpec("A_lambda", {"lam1": l1, "lam2": l2, "lam3": l3}))
    assert hg.instanton_residual(R, S) == ({}, {})


def test_symbolic_geometry_identities():
    G = geometry(build_family("h5"))
    assert hg.preserves_J(G.plus)
    for conn, R in ((G.minus, G.R_minus), (G.plus, G.R_plus)):
        rhs = madd(matmul(R, conn), mneg(matmul(conn, R)))
        assert (mmap_d(R, G.alg) - rhs).entries == {}
    assert not G.alg.d(hg.pontrjagin(G.R_minus))
    assert hg.dtr_residual(G.R_plus, G.R_minus, G.dT) == {}


def test_torsion_is_dc_of_F():
    alg = build_family("h5")
    T = hg.torsion(S, alg)
    assert T == apply_J(alg.d(S.F))
    assert apply_J(T) == -alg.d(S.F)


def test_dT_is_a_base_four_form():
    G = geometry(build_family("h5"))
    want = -(expf(2).laplacian() + param("t", 2) * kappa2() * 8)
    assert G.dT_coefficient() == want


def test_minus_residual_is_multiple_of_the_in1_operator():
    G = geometry(build_family("h5"))
    D = expf(2).laplacian() + param("t", 2) * kappa2() * 8
    td, tr = hg.instanton_residual(G.R_minus, S)
    assert td or tr
    for v in list(td.values()):
        for _, c in v.items():
            divide_exact(c, D, (4, 4))
    for c in tr.values():
        divide_exact(c, D, (4, 4))


def test_plus_connection_instanton_on_h3_only():
    h3 = geometry(build_family("h3").with_constant_dilaton())
    h5 = geometry(build_family("h5").with_constant_dilaton())
    assert hg.instanton_residual(h3.R_plus, S0) == ({}, {})
    assert hg.instanton_residual(h5.R_plus, S0) != ({}, {})


def test_flat_algebra():
    alg = build_family("flat", conformal=False)
    assert not hg.torsion(S0, alg)
    assert hg.curvature(hg.levi_civita(alg), alg).entries == {}


def test_lee_form():
    alg = build_family("h5")
    assert not hg.lee_form(S0, alg.with_constant_dilaton())
    lee = hg.lee_form(S, alg).to_invariant()
    assert lee == Form(1, "e", {(i,): jet(i) * 2 for i in range(1, 5)})


def test_strominger_and_balanced():
    alg = build_family("h5")
    assert not hg.strominger_residual(S, alg)
    for v in hg.balanced_residuals(S0, alg.with_constant_dilaton()).values():
        assert not v
    bent = hg.SU3Structure(S.F + eb(1, 2) * Fraction(1, 10), S.psi_plus, S.psi_minus)
    assert hg.strominger_residual(bent, alg)


def test_su3_consistency_guard():
    with pytest.raises(hg.ConsistencyError):
        hg.SU3Structure(eb(1, 2) + eb(3, 4), S.psi_plus, S.psi_minus).check()


def test_connection_sign_argument():
    alg = build_family("h3")
    with pytest.raises(ValueError):
        hg.torsion_connection(hg.levi_civita(alg), hg.torsion(S, alg), "x")
    with pytest.raises(ValueError):
        hg.connection_from_entries({(2, 1): eb(1)}, "bad")
