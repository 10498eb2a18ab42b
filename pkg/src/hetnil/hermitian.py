"""SU(3)-structures, torsion, metric connections and their curvature.

Index conventions: for a metric connection with 1-forms ``omega[i, j]`` in the
orthonormal coframe, ``nabla_X E_j = sum_i omega[i, j](X) E_i``, so
``omega[i, j](E_k) = g(nabla_{E_k} E_j, E_i)``.  Curvature is
``Omega[i, j] = d omega[i, j] + sum_k omega[i, k] ^ omega[k, j]`` and
``R(E_a, E_b, E_c, E_d) = Omega[d, c](E_a, E_b)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Mapping

from .forms import (
    DIM, INVARIANT, J_VECTOR, ORTHONORMAL, Form, FrameAlgebra, apply_J, contract,
    eb, evaluate_with_J, hodge_star, wedge, wedge_all,
)
from .jets import ZERO, ScalarExpr, expf

HALF = Fraction(1, 2)
INDICES = range(1, DIM + 1)


class ConsistencyError(ArithmeticError):
    """An internal identity that must hold did not (never silently dropped)."""


class PreconditionError(ValueError):
    pass


# -- matrices of forms -------------------------------------------------------------

@dataclass(frozen=True)
class FormMatrix:
    """Sparse 6x6 matrix of forms of one degree, keyed by 1-based (row, col)."""

    degree: int
    entries: Mapping[tuple[int, int], Form] = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        clean = {k: v for k, v in self.entries.items() if v}
        object.__setattr__(self, "entries", clean)

    def __getitem__(self, ij: tuple[int, int]) -> Form:
        return self.entries.get(ij, Form.zero(self.degree, ORTHONORMAL))

    def nonzero(self):
        return sorted(self.entries.items())

    def __eq__(self, other) -> bool:
        if not isinstance(other, FormMatrix):
            return NotImplemented
        return self.degree == other.degree and self.entries == other.entries

    def __sub__(self, other: "FormMatrix") -> "FormMatrix":
        keys = set(self.entries) | set(other.entries)
        return FormMatrix(self.degree, {k: self[k] - other[k] for k in keys})

    def map(self, fn, label: str | None = None) -> "FormMatrix":
        return FormMatrix(
            self.degree,
            {k: v.map_coefficients(fn) for k, v in self.entries.items()},
            self.label if label is None else label,
        )

    def antisymmetry_defect(self) -> list[tuple[int, int]]:
        return [(i, j) for i in INDICES for j in INDICES if i <= j and (self[i, j] + self[j, i])]


class Connection(FormMatrix):
    """Metric connection: 1-form matrix with omega[i, j] = -omega[j, i]."""

    def __init__(self, entries, label: str = ""):
        super().__init__(1, entries, label)


class CurvatureMatrix(FormMatrix):
    def __init__(self, entries, label: str = ""):
        super().__init__(2, entries, label)


# -- SU(3)-structure -----------------------------------------------------------------

@dataclass(frozen=True)
class SU3Structure:
    F: Form
    psi_plus: Form
    psi_minus: Form
    dilaton: bool = True

    def check(self) -> None:
        vol = eb(1, 2, 3, 4, 5, 6)
        if wedge(self.F, self.psi_plus) or wedge(self.F, self.psi_minus):
            raise ConsistencyError("F ^ Psi+- must vanish")
        F3 = wedge_all(self.F, self.F, self.F)
        if wedge(self.psi_plus, self.psi_minus) != F3 * Fraction(2, 3):
            raise ConsistencyError("Psi+ ^ Psi- must equal (2/3) F^3")
        if F3 != vol * 6:
            raise ConsistencyError("F^3 must be 6 vol")


def standard_su3(dilaton: bool = True) -> SU3Structure:
    """``F = eb12 + eb34 + eb56`` and ``Psi = (eb1 + i eb2)(eb3 + i eb4)(eb5 + i eb6)``."""
    F = eb(1, 2) + eb(3, 4) + eb(5, 6)
    psi_plus = eb(1, 3, 5) - eb(2, 4, 5) - eb(1, 4, 6) - eb(2, 3, 6)
    psi_minus = eb(1, 3, 6) - eb(2, 4, 6) + eb(1, 4, 5) + eb(2, 3, 5)
    S = SU3Structure(F, psi_plus, psi_minus, dilaton)
    S.check()
    return S


# -- torsion ---------------------------------------------------------------------------

def torsion(S: SU3Structure, alg: FrameAlgebra) -> Form:
    """Torsion 3-form ``T = d^c F``, ``d^c F(X,Y,Z) = -dF(JX,JY,JZ)``."""
    return apply_J(alg.d(S.F))


def e1234_coefficient(form: Form, conformal: bool = True) -> ScalarExpr:
    """Coefficient of ``e^{1234}`` of a 4-form; raises if other components exist."""
    inv = form.to_invariant(conformal)
    extra = inv.support() - {(1, 2, 3, 4)}
    if extra:
        raise ConsistencyError(f"4-form has components off e1234: {sorted(extra)}")
    return inv.coefficient(1, 2, 3, 4)


def d_torsion(T: Form, alg: FrameAlgebra) -> Form:
    """``dT`` in the invariant coframe; must be a multiple of ``e^{1234}``."""
    dT = alg.d(T).to_invariant(alg.conformal)
    e1234_coefficient(dT)
    return dT


def torsion_matrix(T: Form) -> FormMatrix:
    """``T[i, j] = sum_k T(E_i, E_j, E_k) eb^k``."""
    out = {}
    for i in INDICES:
        for j in INDICES:
            if i == j:
                continue
            coeffs = {(k,): T.evaluate(i, j, k) for k in INDICES if k not in (i, j)}
            form = Form(1, ORTHONORMAL, coeffs)
            if form:
                out[i, j] = form
    return FormMatrix(1, out, "T")


# -- connections -----------------------------------------------------------------------

def levi_civita(alg: FrameAlgebra) -> Connection:
    """Koszul formula in the orthonormal coframe:

    ``omega[i, j](E_k) = 1/2 (d eb^i(E_j,E_k) - d eb^k(E_i,E_j) + d eb^j(E_k,E_i))``.
    """
    de = {k: alg.d_coframe(k) for k in INDICES}
    out = {}
    for i in INDICES:
        for j in INDICES:
            if i == j:
                continue
            coeffs = {}
            for k in INDICES:
                v = de[i].evaluate(j, k) - de[k].evaluate(i, j) + de[j].evaluate(k, i)
                if v:
                    coeffs[(k,)] = v * HALF
            form = Form(1, ORTHONORMAL, coeffs)
            if form:
                out[i, j] = form
    conn = Connection(out, "levi-civita")
    _check_metric(conn)
    return conn


def torsion_connection(lc: Connection, T: Form, sign: str) -> Connection:
    """The metric connections ``nabla^(+-) = nabla^g +- T/2`` with skew torsion +-T.

    With ``g(nabla^+-_X Y, Z) = g(nabla^g_X Y, Z) +- T(X,Y,Z)/2`` the 1-forms are
    ``omega^+-[i, j] = omega^g[i, j] -+ T[i, j]/2`` where
    ``T[i, j](E_k) = T(E_i, E_j, E_k)``.
    """
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    Tm = torsion_matrix(T)
    factor = -HALF if sign == "+" else HALF
    keys = set(lc.entries) | set(Tm.entries)
    conn = Connection({k: lc[k] + Tm[k] * factor for k in keys}, "plus" if sign == "+" else "minus")
    _check_metric(conn)
    return conn


def _check_metric(conn: FormMatrix) -> None:
    bad = conn.antisymmetry_defect()
    if bad:
        raise ConsistencyError(f"connection is not metric at {bad}")


def connection_from_entries(upper: Mapping[tuple[int, int], Form], label: str) -> Connection:
    """Complete ``omega[i, j]`` for i < j by antisymmetry."""
    out = {}
    for (i, j), form in upper.items():
        if i >= j:
            raise ValueError("give entries with i < j only")
        out[i, j] = form
        out[j, i] = -form
    return Connection(out, label)


def preserves_J(conn: FormMatrix) -> bool:
    """True when ``nabla J = 0``, i.e. ``omega`` commutes with the matrix of J."""
    # J E_j = Jm[s][j] E_s
    Jm = {(J_VECTOR[j][0], j): J_VECTOR[j][1] for j in INDICES}
    for i in INDICES:
        for j in INDICES:
            lhs = Form.zero(1)
            rhs = Form.zero(1)
            for s in INDICES:
                if (s, j) in Jm:
                    lhs = lhs + conn[i, s] * Jm[s, j]
                if (i, s) in Jm:
                    rhs = rhs + conn[s, j] * Jm[i, s]
            if lhs != rhs:
                return False
    return True


# -- curvature --------------------------------------------------------------------------

def curvature(conn: FormMatrix, alg: FrameAlgebra) -> CurvatureMatrix:
    """``Omega[i, j] = d omega[i, j] + sum_k omega[i, k] ^ omega[k, j]``."""
    rows: dict[int, list] = {}
    for (i, k), w in conn.entries.items():
        rows.setdefault(i, []).append((k, w))
    d_cache = {ij: alg.d(w) for ij, w in conn.entries.items()}
    out = {}
    for i in INDICES:
        for j in INDICES:
            if i == j:
                continue
            acc = d_cache.get((i, j), Form.zero(2))
            for k, w_ik in rows.get(i, ()):
                w_kj = conn.entries.get((k, j))
                if w_kj is not None:
                    acc = acc + wedge(w_ik, w_kj)
            if acc:
                out[i, j] = acc
    R = CurvatureMatrix(out, f"curvature({conn.label})")
    bad = R.antisymmetry_defect()
    if bad:
        raise ConsistencyError(f"curvature is not skew at {bad}")
    return R


def pontrjagin(R: FormMatrix, conformal: bool = True) -> Form:
    """``sum_{i<j} Omega[i, j] ^ Omega[i, j]`` (that is, ``8 pi^2 p_1``), invariant coframe.

    Raises :class:`ConsistencyError` when the 4-form is not a multiple of e^{1234}.
    """
    acc = Form.zero(4)
    for i in INDICES:
        for j in INDICES:
            if i < j and (i, j) in R.entries:
                w = R.entries[i, j]
                acc = acc + wedge(w, w)
    inv = acc.to_invariant(conformal)
    e1234_coefficient(inv, conformal)
    return inv if inv else Form.zero(4, INVARIANT)


def instanton_residual(R: FormMatrix, S: SU3Structure | None = None):
    """SU(3)-instanton defects of a curvature matrix, entry by entry.

    Returns ``(type_defect, trace_defect)``: ``Omega(J.,J.) - Omega(.,.)`` (a
    2-form per entry) and ``sum_k Omega(E_k, J E_k)`` (a scalar per entry).
    Both dictionaries are empty exactly when the curvature is an instanton.
    The standard J of the coframe is used; ``S`` is accepted for symmetry with
    the other checks.
    """
    type_defect = {}
    trace_defect = {}
    for ij, w in R.entries.items():
        w = w.to_orthonormal()
        delta = apply_J(w) - w
        if delta:
            type_defect[ij] = delta
        tr = ZERO
        for k in INDICES:
            jk, sgn = J_VECTOR[k]
            tr = tr + w.evaluate(k, jk) * sgn
        if tr:
            trace_defect[ij] = tr
    return type_defect, trace_defect


# -- balanced / Strominger / Lee --------------------------------------------------------

def lee_form(S: SU3Structure, alg: FrameAlgebra) -> Form:
    """``theta(X) = (delta F)(J X)`` with ``delta = -* d *``, orthonormal coframe.

    On the conformal h5/h3 ansatz this is ``2 df``.
    """
    deltaF = -hodge_star(alg.d(hodge_star(S.F)))
    coeffs = {(k,): evaluate_with_J(deltaF, (k,)) for k in INDICES}
    return Form(1, ORTHONORMAL, coeffs)


def strominger_residual(S: SU3Structure, alg: FrameAlgebra) -> Form:
    """``2 F _| dF + Psi+ _| dPsi+`` (a 1-form)."""
    return contract(S.F, alg.d(S.F)) * 2 + contract(S.psi_plus, alg.d(S.psi_plus))


def strominger_terms(S: SU3Structure, alg: FrameAlgebra) -> tuple[Form, Form]:
    return contract(S.F, alg.d(S.F)), contract(S.psi_plus, alg.d(S.psi_plus))


def balanced_residuals(S: SU3Structure, alg: FrameAlgebra) -> dict[str, Form]:
    """``dF ^ F``, ``dPsi+`` and ``dPsi-``; all zero for a balanced structure."""
    return {
        "dF^F": wedge(alg.d(S.F), S.F),
        "dPsi+": alg.d(S.psi_plus),
        "dPsi-": alg.d(S.psi_minus),
    }


def dtr_residual(R_plus: FormMatrix, R_minus: FormMatrix, dT: Form) -> dict:
    """``R+(a,b,c,d) - R-(c,d,a,b) - dT(a,b,c,d)/2`` over all frame quadruples.

    Returns only the non-zero entries.
    """
    dT = dT.to_orthonormal()
    out = {}
    for a, b, c, d in product(INDICES, repeat=4):
        v = (
            R_plus[d, c].evaluate(a, b)
            - R_minus[b, a].evaluate(c, d)
            - dT.evaluate(a, b, c, d) * HALF
        )
        if v:
            out[a, b, c, d] = v
    return out
