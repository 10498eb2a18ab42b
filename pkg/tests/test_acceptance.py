"""Acceptance criteria 1-13.

Each test records one PASS/FAIL line; the lines are printed together at the
end of the run (see ``conftest.py``) and also when this file is run directly.
Timed criteria start from an empty geometry cache.
"""

import random
import time
from fractions import Fraction

import pytest

from hetnil import checks as C
from hetnil import elliptic as ell
from hetnil import hermitian as hg
from hetnil import models as M
from hetnil.jets import expf, param, kappa2

LINES: dict[int, str] = {}

# criterion 13: property-based suites, by what they establish
PROPERTY_SUITES = {
    "d^2 = 0": "test_forms.py::test_d_squared_vanishes",
    "Leibniz (d)": "test_forms.py::test_d_leibniz",
    "Leibniz (partial)": "test_jets.py::test_partial_is_a_derivation",
    "graded commutativity": "test_forms.py::test_graded_commutativity",
    "*-isometry": "test_forms.py::test_hodge_star_isometry",
    "metricity": "test_hermitian.py::test_bianchi_and_skew_curvature",
    "torsion of the connections": "test_hermitian.py::test_connections_have_the_right_torsion",
    "ring axioms": "test_jets.py::test_ring_axioms",
}
MIN_CASES = 200
SUITE_LIMIT = 180.0


def record(n, ok, what, elapsed=None, limit=None, note=""):
    timing = ""
    if limit is not None:
        timing = f" [{elapsed:.2f}s < {limit:g}s]" if elapsed < limit else f" [{elapsed:.2f}s exceeds {limit:g}s]"
        ok = ok and elapsed < limit
    LINES[n] = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {what}{timing}" + (f"  ({note})" if note else "")
    return ok


@pytest.fixture
def cold():
    M._GEOMETRY_CACHE.clear()
    yield time.perf_counter()


def _run(check_id, **ctx):
    return C.CHECKS[check_id](C.Context(**ctx))


def test_criterion_01_torsion(cold):
    r = _run("tor5")
    el = time.perf_counter() - cold
    assert record(1, r.status == C.PASS and r.residual == 0, "torsion equals the ten-term display", el, 1.0)


def test_criterion_02_dT(cold):
    r = _run("dtorsion")
    el = time.perf_counter() - cold
    G = M.geometry(M.h5())
    flat = hg.e1234_coefficient(G.dT).at_constant_f() == -(param("t", 2) * kappa2() * 8)
    ok = r.status == C.PASS and flat
    assert record(2, ok, "dT = -[Lap e^2f + 8t^2k^2] e1234, and -8t^2k^2 at constant f", el, 1.0)


def test_criterion_03_connection(cold):
    r = _run("connection")
    el = time.perf_counter() - cold
    note = "; ".join(r.details) if r.details else "14 entries"
    assert record(3, r.status == C.PASS, "(-)-connection entries match", el, 5.0, note)


def test_criterion_04_curvature(cold):
    r = _run("curvature")
    el = time.perf_counter() - cold
    note = "; ".join(r.details) if r.details else "15 entries"
    assert record(4, r.status == C.PASS, "(-)-curvature entries match", el, 30.0, note)


def test_criterion_05_pontrjagin(cold):
    r = _run("pontrjagin")
    el = time.perf_counter() - cold
    c = r.constants["c_norm"]
    ok = r.status == C.PASS and c == C.C_NORM_EXPECTED
    assert record(5, ok, "sum Omega^Omega = c_norm * bracket and the A_lambda value", el, 60.0, f"c_norm = {c}")


def test_criterion_06_difference_formula(cold):
    r = _run("p11")
    const = r.constants["p11_constant"]
    proportional = r.status in (C.PASS, C.DISCREPANCY) and isinstance(const, Fraction)
    note = f"engine constant {const}, printed -24: {r.status}"
    if r.status == C.DISCREPANCY:
        note += f"; printed first line ratio {r.constants['engine/printed first']}"
    assert record(6, proportional, "difference is rational * (t^2k^2 - a^2tau^2) Lap e^-2f e1234", note=note)


def test_criterion_07_dtr(cold):
    G = M.geometry(M.h5())
    bad = hg.dtr_residual(G.R_plus, G.R_minus, G.dT)
    assert record(7, not bad, "dtr identity on all 1296 frame quadruples", note=f"{len(bad)} non-zero")


def test_criterion_08_instantons(cold):
    r = _run("instanton")
    assert record(8, r.status == C.PASS, "A_lambda exact, (-) residual divisible by in1, (+) on h3 only",
                  note="; ".join(r.details))


def test_criterion_09_strominger(cold):
    r = _run("strominger")
    assert record(9, r.status == C.PASS, "strsys, balanced at constant f, Lee form = 2 df, F^Psi = 0",
                  note="; ".join(r.details))


def test_criterion_10_classification():
    ctx = C.Context(draws=120)
    r = C.check_classify(ctx)
    ok = r.status == C.PASS and ctx.draws >= 100
    assert record(10, ok, f"asd <=> abelian <=> rho = 0 over {ctx.draws} draws",
                  note=f"{r.residual} counterexamples")


def test_criterion_11_weierstrass():
    start = time.perf_counter()
    rows = []
    ok = True
    for aW in (1.0, 1.7):
        m = C.weierstrass_metrics(aW)
        ok &= m["ode"] < 1e-10 and m["p_at_tau"] < 1e-9 and m["laurent"] < 1e-6 and m["scaling"] < 1e-10
        rows.append(f"aW={aW}: ode {m['ode']:.1e}, P(tau)-aW {m['p_at_tau']:.1e}, "
                    f"laurent {m['laurent']:.1e}, scaling {m['scaling']:.1e}")
    el = time.perf_counter() - start
    assert record(11, ok, "ODE, P(tau) = aW, Laurent and scaling", el, 5.0, "; ".join(rows))


def test_criterion_12_profiles():
    aW, alpha = 2.0, 1.0
    wp = ell.eqcan_parameters(aW, alpha)
    tau = ell.half_period(aW)
    grid = [(0.1 * tau + 1.8 * tau * i / 199,) for i in range(200)]
    r_i = ell.verify_profile_pde("weierstrass", "eqcan", grid, wp)
    rng = random.Random(7)
    pts = C.rational_points(rng, 50)
    r_ii = [ell.verify_profile_pde("inverse-square", eq, pts, {"alphap": Fraction(2, 5)})
            for eq in ("harmonic", "inverse-laplacian")]
    qpts = C.rational_points(rng, 50, radius=1)
    r_iii = ell.verify_profile_pde("quadratic", "insab", qpts, {"a_inst": Fraction(3, 2), "d_inst": Fraction(1, 3)})
    ok = r_i < 1e-8 and r_ii == [0, 0] and r_iii == 0
    assert record(12, ok, "Weierstrass solves eqcan, inverse-square and quadratic exact at 50 points",
                  note=f"eqcan residual {r_i:.1e}, exact residuals {', '.join(str(r) for r in r_ii + [r_iii])}")


def test_criterion_13_property_suites(request):
    from hypothesis import settings

    cases = settings.default.max_examples
    ok = cases >= MIN_CASES
    # outcomes and wall time are only known at the end; conftest completes the line
    record(13, ok, f"{len(PROPERTY_SUITES)} property suites at {cases} cases each",
           note="outcomes pending")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
