"""Exterior forms on a six-dimensional coframe with jet-ring coefficients.

Two coframes are in play: the invariant coframe ``e1..e6`` of a nilpotent Lie
algebra and the orthonormal conformal coframe ``eb1..eb6`` with
``eb_k = exp(f) e_k`` for ``k <= 4`` and ``eb5 = e5``, ``eb6 = e6``.  The
dilaton ``f`` lives on the base, so coefficients are differentiated along
directions 1..4 only and ``dc = sum_j (d_j c) e^j = sum_j (d_j c) exp(-f) eb^j``.

The complex structure is the standard one: ``J e^1 = -e^2``, ``J e^3 = -e^4``,
``J e^5 = -e^6`` on 1-forms, equivalently ``J E_1 = -E_2``, ``J E_2 = E_1`` on
frame vectors (and likewise for the pairs 3,4 and 5,6).
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping

from .jets import ONE, ZERO, ScalarExpr, expf

DIM = 6
BASE = (1, 2, 3, 4)
INVARIANT = "e"
ORTHONORMAL = "eb"
_BASES = (INVARIANT, ORTHONORMAL)

# e^i o J as (index, sign): e^1(JX) = e^2(X), e^2(JX) = -e^1(X), ...
_J_PULL = {1: (2, 1), 2: (1, -1), 3: (4, 1), 4: (3, -1), 5: (6, 1), 6: (5, -1)}
# J E_i as (index, sign)
J_VECTOR = {1: (2, -1), 2: (1, 1), 3: (4, -1), 4: (3, 1), 5: (6, -1), 6: (5, 1)}


class BasisMismatchError(ValueError):
    pass


@lru_cache(maxsize=None)
def sort_sign(idx: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Sign of the sorting permutation and the sorted index (sign 0 on repeats)."""
    if len(set(idx)) != len(idx):
        return 0, ()
    arr = list(idx)
    sign = 1
    for i in range(len(arr)):
        for j in range(len(arr) - 1 - i):
            if arr[j] > arr[j + 1]:
                arr[j], arr[j + 1] = arr[j + 1], arr[j]
                sign = -sign
    return sign, tuple(arr)


@lru_cache(maxsize=None)
def _wedge_index(i1: tuple[int, ...], i2: tuple[int, ...]):
    if set(i1) & set(i2):
        return 0, ()
    return sort_sign(i1 + i2)


def _n_base(idx: tuple[int, ...]) -> int:
    return sum(1 for i in idx if i <= 4)


class Form:
    """A homogeneous p-form ``sum_I c_I e^I`` stored on strictly increasing ``I``."""

    __slots__ = ("degree", "basis", "_c")

    def __init__(self, degree: int, basis: str = ORTHONORMAL, coeffs: Mapping | None = None):
        if basis not in _BASES:
            raise ValueError(f"basis must be one of {_BASES}")
        if not 0 <= degree <= DIM:
            raise ValueError("degree out of range")
        self.degree = degree
        self.basis = basis
        acc: dict = {}
        for idx, c in (coeffs or {}).items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise ValueError(f"index {idx} does not have length {degree}")
            if any(not 1 <= i <= DIM for i in idx):
                raise ValueError(f"index {idx} out of range")
            sign, key = sort_sign(idx)
            if not sign:
                continue
            c = ScalarExpr.coerce(c)
            if not c:
                continue
            prev = acc.get(key)
            acc[key] = c * sign if prev is None else prev + c * sign
        self._c = {k: v for k, v in acc.items() if v}

    @classmethod
    def _raw(cls, degree, basis, coeffs):
        obj = cls.__new__(cls)
        obj.degree = degree
        obj.basis = basis
        obj._c = coeffs
        return obj

    @classmethod
    def basis_form(cls, *idx: int, basis: str = ORTHONORMAL, coeff=1) -> "Form":
        return cls(len(idx), basis, {tuple(idx): coeff})

    @classmethod
    def scalar(cls, c, basis: str = ORTHONORMAL) -> "Form":
        return cls(0, basis, {(): c})

    @classmethod
    def zero(cls, degree: int, basis: str = ORTHONORMAL) -> "Form":
        return cls._raw(degree, basis, {})

    # -- access --------------------------------------------------------------
    def items(self):
        return sorted(self._c.items())

    def coefficient(self, *idx: int) -> ScalarExpr:
        sign, key = sort_sign(tuple(idx))
        if not sign:
            return ZERO
        return self._c.get(key, ZERO) * sign

    def support(self) -> set[tuple[int, ...]]:
        return set(self._c)

    def is_zero(self) -> bool:
        return not self._c

    def __bool__(self) -> bool:
        return bool(self._c)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Form):
            return NotImplemented
        if not self._c and not other._c:
            return True
        return (self.degree, self.basis, self._c) == (other.degree, other.basis, other._c)

    def __hash__(self):
        return hash((self.degree, self.basis, frozenset(self._c.items())))

    def __repr__(self) -> str:
        return f"Form({render_form(self)!r})"

    def __str__(self) -> str:
        return render_form(self)

    # -- linear structure ----------------------------------------------------
    def _check(self, other: "Form"):
        if not isinstance(other, Form):
            raise TypeError("expected a Form")
        if self.basis != other.basis and self._c and other._c:
            raise BasisMismatchError("forms live in different coframes; convert first")

    def __add__(self, other: "Form") -> "Form":
        self._check(other)
        if not other._c:
            return self
        if not self._c:
            return other
        if self.degree != other.degree:
            raise ValueError(f"cannot add a {self.degree}-form and a {other.degree}-form")
        acc = dict(self._c)
        for k, v in other._c.items():
            w = acc.get(k)
            w = v if w is None else w + v
            if w:
                acc[k] = w
            else:
                acc.pop(k, None)
        return Form._raw(self.degree, self.basis, acc)

    def __neg__(self) -> "Form":
        return Form._raw(self.degree, self.basis, {k: -v for k, v in self._c.items()})

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def __mul__(self, c) -> "Form":
        if isinstance(c, Form):
            return wedge(self, c)
        c = ScalarExpr.coerce(c)
        if not c:
            return Form.zero(self.degree, self.basis)
        acc = {}
        for k, v in self._c.items():
            w = v * c
            if w:
                acc[k] = w
        return Form._raw(self.degree, self.basis, acc)

    def __rmul__(self, c) -> "Form":
        return self * c

    def __truediv__(self, c) -> "Form":
        return self * ScalarExpr.coerce(c).inverse()

    def map_coefficients(self, fn) -> "Form":
        acc = {}
        for k, v in self._c.items():
            w = fn(v)
            if w:
                acc[k] = w
        return Form._raw(self.degree, self.basis, acc)

    # -- coframe conversion --------------------------------------------------
    def to_invariant(self, conformal: bool = True) -> "Form":
        if self.basis == INVARIANT:
            return self
        if not conformal:
            return Form._raw(self.degree, INVARIANT, dict(self._c))
        return Form._raw(
            self.degree, INVARIANT,
            {k: v * expf(_n_base(k)) if _n_base(k) else v for k, v in self._c.items()},
        )

    def to_orthonormal(self, conformal: bool = True) -> "Form":
        if self.basis == ORTHONORMAL:
            return self
        if not conformal:
            return Form._raw(self.degree, ORTHONORMAL, dict(self._c))
        return Form._raw(
            self.degree, ORTHONORMAL,
            {k: v * expf(-_n_base(k)) if _n_base(k) else v for k, v in self._c.items()},
        )

    def evaluate(self, *indices: int) -> ScalarExpr:
        """Value on frame vectors ``(E_i1, ..., E_ip)`` (determinant convention)."""
        if len(indices) != self.degree:
            raise ValueError(f"need {self.degree} frame vectors, got {len(indices)}")
        return self.coefficient(*indices)


def wedge(a: Form, b: Form) -> Form:
    if a.basis != b.basis and a._c and b._c:
        raise BasisMismatchError("wedge of forms in different coframes; convert first")
    deg = a.degree + b.degree
    basis = a.basis if a._c else b.basis
    if deg > DIM:
        return Form.zero(min(deg, DIM), basis)
    acc: dict = {}
    for i1, c1 in a._c.items():
        for i2, c2 in b._c.items():
            sign, key = _wedge_index(i1, i2)
            if not sign:
                continue
            prod = c1 * c2
            if sign < 0:
                prod = -prod
            prev = acc.get(key)
            acc[key] = prod if prev is None else prev + prod
    return Form._raw(deg, basis, {k: v for k, v in acc.items() if v})


def wedge_all(*forms: Form) -> Form:
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def e(*idx: int, coeff=1) -> Form:
    """Invariant basis monomial ``e^{idx}``."""
    return Form.basis_form(*idx, basis=INVARIANT, coeff=coeff)


def eb(*idx: int, coeff=1) -> Form:
    """Orthonormal basis monomial ``eb^{idx}``."""
    return Form.basis_form(*idx, basis=ORTHONORMAL, coeff=coeff)


# -- metric operations (orthonormal coframe) ------------------------------------

def _require_orthonormal(a: Form, what: str):
    if a.basis != ORTHONORMAL and a._c:
        raise BasisMismatchError(f"{what} needs the orthonormal coframe")


@lru_cache(maxsize=None)
def _star_index(idx: tuple[int, ...]):
    comp = tuple(i for i in range(1, DIM + 1) if i not in idx)
    sign, _ = sort_sign(idx + comp)
    return sign, comp


def hodge_star(a: Form) -> Form:
    """Hodge star for orientation ``eb^{123456}``: ``eb^I ^ *eb^I = vol``."""
    _require_orthonormal(a, "hodge_star")
    acc = {}
    for idx, c in a._c.items():
        sign, comp = _star_index(idx)
        acc[comp] = c if sign > 0 else -c
    return Form._raw(DIM - a.degree, ORTHONORMAL, acc)


@lru_cache(maxsize=None)
def _interior_index(inner: tuple[int, ...], outer: tuple[int, ...]):
    """``eb^outer(E_inner..., .)`` as (sign, remaining index)."""
    if not set(inner) <= set(outer):
        return 0, ()
    rest = tuple(i for i in outer if i not in inner)
    sign, _ = sort_sign(inner + rest)
    # eb^outer = sign * eb^inner ^ eb^rest after reordering
    return sign, rest


def contract(a: Form, b: Form) -> Form:
    """Interior product ``a _| b`` of a p-form into a q-form, q >= p.

    Normalization: ``(a _| b)(X...) = (1/p!) sum_{i1..ip} a(E_i..) b(E_i.., X...)``
    over ordered orthonormal tuples, i.e. ``sum_I a_I b(E_I, ...)`` over
    increasing ``I``.  For p == q this is the inner product of forms.
    """
    _require_orthonormal(a, "contract")
    _require_orthonormal(b, "contract")
    if b.degree < a.degree:
        raise ValueError("contract needs deg(a) <= deg(b)")
    acc: dict = {}
    for i1, c1 in a._c.items():
        for i2, c2 in b._c.items():
            sign, rest = _interior_index(i1, i2)
            if not sign:
                continue
            prod = c1 * c2 * sign
            prev = acc.get(rest)
            acc[rest] = prod if prev is None else prev + prod
    return Form._raw(b.degree - a.degree, ORTHONORMAL, {k: v for k, v in acc.items() if v})


def inner(a: Form, b: Form) -> ScalarExpr:
    if a.degree != b.degree:
        raise ValueError("inner product needs equal degrees")
    return contract(a, b).coefficient()


@lru_cache(maxsize=None)
def _j_index(idx: tuple[int, ...]):
    sign = -1 if len(idx) % 2 else 1
    mapped = []
    for i in idx:
        j, s = _J_PULL[i]
        sign *= s
        mapped.append(j)
    s2, key = sort_sign(tuple(mapped))
    return sign * s2, key


def apply_J(a: Form) -> Form:
    """``(J a)(X1..Xp) = (-1)^p a(J X1, ..., J Xp)``.

    On 1-forms this is ``J e^1 = -e^2``; on 3-forms it is exactly ``d^c``'s
    sign, ``(J dF)(X,Y,Z) = -dF(JX,JY,JZ)``.  Applying twice gives
    ``(-1)^p a``.  The standard J has the same matrix in both coframes, so
    either basis tag is accepted.
    """
    acc = {}
    for idx, c in a._c.items():
        sign, key = _j_index(idx)
        acc[key] = c if sign > 0 else -c
    return Form._raw(a.degree, a.basis, acc)


def evaluate_with_J(a: Form, indices: Iterable[int]) -> ScalarExpr:
    """``a(J E_i1, ..., J E_ip)``."""
    sign = 1
    mapped = []
    for i in indices:
        j, s = J_VECTOR[i]
        mapped.append(j)
        sign *= s
    return a.evaluate(*mapped) * sign


# -- the structure data ----------------------------------------------------------

class FrameAlgebra:
    """Structure equations ``d e^k`` (invariant 2-forms) of a 6-dim Lie algebra.

    ``conformal`` selects the dilaton-deformed orthonormal coframe
    ``eb_k = exp(f) e_k`` (k <= 4); with ``conformal=False`` the dilaton is
    identically zero and the two coframes coincide.
    """

    def __init__(self, family: str, params: Mapping, structure: Mapping[int, Form], conformal: bool = True):
        self.family = family
        self.params = dict(params)
        self.conformal = conformal
        de = {}
        for k in range(1, DIM + 1):
            form = structure.get(k, Form.zero(2, INVARIANT))
            if form.basis != INVARIANT or (form and form.degree != 2):
                raise ValueError(f"d e^{k} must be an invariant 2-form")
            de[k] = form if form else Form.zero(2, INVARIANT)
        self._de = de
        self._dI_cache: dict = {}
        for k in range(1, DIM + 1):
            if self.d(de[k]):
                raise ValueError(f"structure equations fail d^2 e^{k} = 0 (Jacobi)")

    def __repr__(self) -> str:
        return f"FrameAlgebra({self.family!r}, {self.params!r}, conformal={self.conformal})"

    def structure(self, k: int) -> Form:
        return self._de[k]

    def with_constant_dilaton(self) -> "FrameAlgebra":
        return FrameAlgebra(self.family, self.params, self._de, conformal=False)

    def map_parameters(self, fn) -> "FrameAlgebra":
        """New algebra with ``fn`` applied to every structure coefficient."""
        de = {k: v.map_coefficients(fn) for k, v in self._de.items()}
        return FrameAlgebra(self.family, self.params, de, conformal=self.conformal)

    def _d_monomial(self, idx: tuple[int, ...]) -> Form:
        """``d(e^idx)`` in the invariant coframe, by Leibniz."""
        hit = self._dI_cache.get(idx)
        if hit is not None:
            return hit
        p = len(idx)
        out = Form.zero(p + 1, INVARIANT) if p < DIM else Form.zero(DIM, INVARIANT)
        for m, i in enumerate(idx):
            de = self._de[i]
            if not de:
                continue
            left = Form.basis_form(*idx[:m], basis=INVARIANT) if m else Form.scalar(1, INVARIANT)
            right = Form.basis_form(*idx[m + 1:], basis=INVARIANT) if m + 1 < p else Form.scalar(1, INVARIANT)
            term = wedge(wedge(left, de), right)
            out = out + (term if m % 2 == 0 else -term)
        self._dI_cache[idx] = out
        return out

    def d(self, a: Form) -> Form:
        """Exterior derivative of a form in either coframe (result in the same coframe)."""
        if a.basis == ORTHONORMAL:
            return self.d(a.to_invariant(self.conformal)).to_orthonormal(self.conformal)
        if a.degree >= DIM:
            return Form.zero(DIM, INVARIANT)
        acc: dict = {}

        def add(key, val):
            prev = acc.get(key)
            acc[key] = val if prev is None else prev + val

        for idx, c in a._c.items():
            if self.conformal or not c.is_constant():
                for j in BASE:
                    dc = c.partial(j)
                    if not dc:
                        continue
                    sign, key = _wedge_index((j,), idx)
                    if sign:
                        add(key, dc if sign > 0 else -dc)
            dI = self._d_monomial(idx)
            for key, v in dI._c.items():
                add(key, v * c)
        return Form._raw(a.degree + 1, INVARIANT, {k: v for k, v in acc.items() if v})

    def d_coframe(self, k: int, basis: str = ORTHONORMAL) -> Form:
        return self.d(Form.basis_form(k, basis=basis))


def asd_basis() -> tuple[Form, Form, Form]:
    """Anti-self-dual 2-forms on the base for orientation e^{1234}."""
    return (e(1, 2) - e(3, 4), e(1, 3) + e(2, 4), e(1, 4) - e(2, 3))


def sd_basis() -> tuple[Form, Form, Form]:
    return (e(1, 2) + e(3, 4), e(1, 3) - e(2, 4), e(1, 4) + e(2, 3))


def all_indices(p: int):
    return list(combinations(range(1, DIM + 1), p))


def render_form(a: Form) -> str:
    """Stable text form ``(coef)*eb13 + (coef)*eb24``; zero renders as ``0``.

    Coefficients use :func:`hetnil.jets.render`; a coefficient that is exactly
    ``1`` or ``-1`` is folded into the sign.  0-forms render as their scalar.
    """
    from .jets import render

    if not a._c:
        return "0"
    out = []
    for n, (idx, c) in enumerate(a.items()):
        name = a.basis + "".join(str(i) for i in idx) if idx else ""
        if not idx:
            body, neg = render(c), False
        elif c == ONE or c == -ONE:
            body, neg = name, c == -ONE
        else:
            body, neg = f"({render(c)})*{name}", False
        if n == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


__all__ = [
    "Form", "FrameAlgebra", "wedge", "wedge_all", "hodge_star", "contract", "inner",
    "apply_J", "evaluate_with_J", "e", "eb", "asd_basis", "sd_basis", "render_form",
    "INVARIANT", "ORTHONORMAL", "BasisMismatchError", "J_VECTOR",
]
