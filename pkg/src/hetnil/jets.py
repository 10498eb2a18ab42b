"""Exact ring of dilaton-jet expressions.

A :class:`ScalarExpr` is a finite sum of terms

    coefficient * (parameter monomial) * (product of jet symbols) * exp(k f)

with rational coefficients, integer (possibly negative) parameter exponents and
an integer multiple ``k`` of the dilaton ``f`` in the exponential.  Jet symbols
``f_I`` stand for partial derivatives of ``f`` with respect to the base
coordinates ``x1..x4``; ``I`` is a sorted multi-index, so mixed partials
commute by construction.

Values are normalized on construction and never mutated afterwards, so
structural equality is ring equality.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Callable, Iterable, Mapping

#: Canonical order of the known parameter symbols (others sort after, by name).
PARAMETERS = (
    "t", "s", "a_inst", "d_inst", "lam1", "lam2", "lam3", "alphap", "alpha", "aW",
)
_PARAM_RANK = {name: i for i, name in enumerate(PARAMETERS)}

BASE_DIRECTIONS = (1, 2, 3, 4)
MAX_JET_ORDER = 3


class UnboundSymbolError(KeyError):
    """Raised by :meth:`ScalarExpr.substitute` when a symbol has no value."""

    def __init__(self, symbol: str):
        super().__init__(symbol)
        self.symbol = symbol

    def __str__(self) -> str:
        return f"unbound symbol {self.symbol!r}"


def _param_key(name: str):
    return (_PARAM_RANK.get(name, len(PARAMETERS)), name)


def _jet_key(jet: tuple[int, ...]):
    return (len(jet), jet)


def jet_name(jet: tuple[int, ...]) -> str:
    return "f" + "".join(str(i) for i in jet)


def make_jet(index: Iterable[int]) -> tuple[int, ...]:
    idx = tuple(sorted(int(i) for i in index))
    if not idx:
        raise ValueError("jet symbol needs a non-empty multi-index")
    if any(i not in BASE_DIRECTIONS for i in idx):
        raise ValueError(f"jet directions must lie in 1..4, got {idx}")
    if len(idx) > MAX_JET_ORDER:
        raise ValueError(f"jet order {len(idx)} exceeds {MAX_JET_ORDER}")
    return idx


# A term key is (params, k, jets):
#   params: tuple of (name, exponent) sorted by _param_key, exponents non-zero
#   k:      integer multiple of f in exp(k f)
#   jets:   sorted tuple of jet multi-indices (a multiset)
ONE_KEY = ((), 0, ())


@lru_cache(maxsize=None)
def _mul_keys(k1, k2):
    p1, e1, j1 = k1
    p2, e2, j2 = k2
    if not p1:
        params = p2
    elif not p2:
        params = p1
    else:
        acc = dict(p1)
        for name, n in p2:
            m = acc.get(name, 0) + n
            if m:
                acc[name] = m
            else:
                del acc[name]
        params = tuple(sorted(acc.items(), key=lambda kv: _param_key(kv[0])))
    if not j1:
        jets = j2
    elif not j2:
        jets = j1
    else:
        jets = tuple(sorted(j1 + j2, key=_jet_key))
    return (params, e1 + e2, jets)


@lru_cache(maxsize=None)
def _partial_key(key, i: int):
    """d/dx_i of a single monomial, as a tuple of (factor, key) pairs."""
    params, k, jets = key
    out = []
    if k:
        new_jets = tuple(sorted(jets + ((i,),), key=_jet_key))
        out.append((k, (params, k, new_jets)))
    for m, jet in enumerate(jets):
        if len(jet) >= MAX_JET_ORDER:
            raise ValueError(
                f"differentiating {jet_name(jet)} exceeds jet order {MAX_JET_ORDER}"
            )
        grown = tuple(sorted(jet + (i,)))
        rest = jets[:m] + jets[m + 1:] + (grown,)
        out.append((1, (params, k, tuple(sorted(rest, key=_jet_key)))))
    return tuple(out)


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def _accumulate(acc: dict, key, coef) -> None:
    v = acc.get(key)
    if v is None:
        acc[key] = coef
    else:
        v = v + coef
        if v:
            acc[key] = v
        else:
            del acc[key]


class ScalarExpr:
    """Immutable normalized element of the jet ring."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping | None = None):
        # callers inside this module pass already-normalized dicts
        self._terms = {k: v for k, v in (terms or {}).items() if v}
        self._hash = None

    # -- constructors ------------------------------------------------------
    @classmethod
    def const(cls, c) -> "ScalarExpr":
        c = _to_fraction(c)
        return cls({ONE_KEY: c}) if c else ZERO

    @classmethod
    def param(cls, name: str, power: int = 1) -> "ScalarExpr":
        if not name.isidentifier():
            raise ValueError(f"bad parameter name {name!r}")
        if power == 0:
            return ONE
        return cls({(((name, int(power)),), 0, ()): Fraction(1)})

    @classmethod
    def jet(cls, *index: int) -> "ScalarExpr":
        return cls({((), 0, (make_jet(index),)): Fraction(1)})

    @classmethod
    def exp(cls, k: int) -> "ScalarExpr":
        """``exp(k f)`` for an integer ``k``."""
        if int(k) != k:
            raise ValueError("only integer multiples of f are representable")
        return cls({((), int(k), ()): Fraction(1)})

    @classmethod
    def coerce(cls, x) -> "ScalarExpr":
        if isinstance(x, ScalarExpr):
            return x
        return cls.const(x)

    # -- basic protocol ----------------------------------------------------
    def terms(self):
        """Terms in deterministic order, as ``(coefficient, key)`` pairs."""
        return [(self._terms[k], k) for k in sorted(self._terms, key=_term_order)]

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __eq__(self, other) -> bool:
        if isinstance(other, ScalarExpr):
            return self._terms == other._terms
        try:
            other = ScalarExpr.const(other)
        except TypeError:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"ScalarExpr({render(self)!r})"

    def __str__(self) -> str:
        return render(self)

    # -- ring operations ---------------------------------------------------
    def __add__(self, other):
        try:
            other = ScalarExpr.coerce(other)
        except TypeError:
            return NotImplemented
        if not other._terms:
            return self
        if not self._terms:
            return other
        acc = dict(self._terms)
        for k, v in other._terms.items():
            _accumulate(acc, k, v)
        return ScalarExpr(acc)

    __radd__ = __add__

    def __neg__(self):
        return ScalarExpr({k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        try:
            other = ScalarExpr.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return ScalarExpr.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return ZERO
            return ScalarExpr({k: v * other for k, v in self._terms.items()})
        if not isinstance(other, ScalarExpr):
            try:
                other = ScalarExpr.coerce(other)
            except TypeError:
                return NotImplemented
        if not self._terms or not other._terms:
            return ZERO
        acc: dict = {}
        for k1, v1 in self._terms.items():
            for k2, v2 in other._terms.items():
                _accumulate(acc, _mul_keys(k1, k2), v1 * v2)
        return ScalarExpr(acc)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out = ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def is_unit(self) -> bool:
        """True for a single term without jet factors (invertible in the ring)."""
        if len(self._terms) != 1:
            return False
        (key,) = self._terms
        return not key[2]

    def inverse(self) -> "ScalarExpr":
        if not self.is_unit():
            raise ZeroDivisionError(f"{render(self)} is not invertible in the jet ring")
        ((params, k, _), c), = self._terms.items()
        inv_params = tuple((n, -e) for n, e in params)
        return ScalarExpr({(inv_params, -k, ()): 1 / c})

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        if isinstance(other, ScalarExpr):
            return self * other.inverse()
        return NotImplemented

    def __rtruediv__(self, other):
        return ScalarExpr.coerce(other) * self.inverse()

    # -- calculus ------------------------------------------------------------
    def partial(self, i: int) -> "ScalarExpr":
        """Partial derivative along the base direction ``i``; parameters are constants."""
        if i not in BASE_DIRECTIONS:
            raise ValueError(f"direction must be in 1..4, got {i}")
        acc: dict = {}
        for key, c in self._terms.items():
            for factor, new_key in _partial_key(key, i):
                _accumulate(acc, new_key, c * factor)
        return ScalarExpr(acc)

    def laplacian(self) -> "ScalarExpr":
        out = ZERO
        for i in BASE_DIRECTIONS:
            out = out + self.partial(i).partial(i)
        return out

    # -- inspection ----------------------------------------------------------
    def jet_symbols(self) -> set[tuple[int, ...]]:
        return {j for (_, _, jets) in self._terms for j in jets}

    def parameters(self) -> set[str]:
        return {n for (params, _, _) in self._terms for n, _ in params}

    def exp_powers(self) -> set[int]:
        return {k for (_, k, _) in self._terms}

    def is_constant(self) -> bool:
        """True when there is no dependence on f (no jets, only exp(0 f))."""
        return all(k == 0 and not jets for (_, k, jets) in self._terms)

    def as_rational(self) -> Fraction:
        """The value of a pure rational constant."""
        if not self._terms:
            return Fraction(0)
        if len(self._terms) == 1 and ONE_KEY in self._terms:
            return self._terms[ONE_KEY]
        raise ValueError(f"{render(self)} is not a rational constant")

    def coefficient(self, jet: tuple[int, ...], power: int) -> "ScalarExpr":
        """Coefficient of ``jet**power`` when viewed as a polynomial in that jet."""
        jet = make_jet(jet)
        acc = {}
        for (params, k, jets), c in self._terms.items():
            if jets.count(jet) == power:
                rest = tuple(j for j in jets if j != jet)
                acc[(params, k, rest)] = c
        return ScalarExpr(acc)

    def degree_in(self, jet: tuple[int, ...]) -> int:
        jet = make_jet(jet)
        return max((jets.count(jet) for (_, _, jets) in self._terms), default=0)

    # -- transformations -----------------------------------------------------
    def map_keys(self, fn: Callable) -> "ScalarExpr":
        """Rebuild from ``fn(key) -> (factor, key) | None`` applied to each term."""
        acc: dict = {}
        for key, c in self._terms.items():
            res = fn(key)
            if res is None:
                continue
            factor, new_key = res
            _accumulate(acc, new_key, c * factor)
        return ScalarExpr(acc)

    def at_constant_f(self) -> "ScalarExpr":
        """Specialize to f = 0 identically: jets vanish and exp(k f) -> 1."""
        return self.map_keys(lambda key: None if key[2] else (1, (key[0], 0, ())))

    def restrict_directions(self, directions: Iterable[int]) -> "ScalarExpr":
        """Set every jet that differentiates outside ``directions`` to zero."""
        allowed = set(directions)
        return self.map_keys(
            lambda key: None if any(set(j) - allowed for j in key[2]) else (1, key)
        )

    def drop_inverse_powers(self, name: str) -> "ScalarExpr":
        """Send ``name**-1`` to zero: keep terms where ``name`` has exponent >= 0."""
        return self.map_keys(
            lambda key: None if dict(key[0]).get(name, 0) < 0 else (1, key)
        )

    def rename_params(self, mapping: Mapping[str, str]) -> "ScalarExpr":
        def fn(key):
            params, k, jets = key
            acc: dict = {}
            for n, e in params:
                n = mapping.get(n, n)
                acc[n] = acc.get(n, 0) + e
            p = tuple(sorted(((n, e) for n, e in acc.items() if e), key=lambda kv: _param_key(kv[0])))
            return 1, (p, k, jets)
        return self.map_keys(fn)

    def subs_params(self, values: Mapping[str, object]) -> "ScalarExpr":
        """Substitute parameters by rationals or jet-ring expressions.

        Negative powers need an invertible replacement.
        """
        repl = {n: ScalarExpr.coerce(v) for n, v in values.items()}
        out = ZERO
        for (params, k, jets), c in self._terms.items():
            term = ScalarExpr({((), k, jets): c})
            keep = []
            for n, e in params:
                if n in repl:
                    term = term * (repl[n] ** e)
                else:
                    keep.append((n, e))
            if keep:
                term = term * ScalarExpr({(tuple(keep), 0, ()): Fraction(1)})
            out = out + term
        return out

    def subs_jet(self, jet: tuple[int, ...], value: "ScalarExpr") -> "ScalarExpr":
        """Replace every occurrence of a jet symbol by an expression."""
        jet = make_jet(jet)
        value = ScalarExpr.coerce(value)
        out = ZERO
        for (params, k, jets), c in self._terms.items():
            n = jets.count(jet)
            rest = tuple(j for j in jets if j != jet)
            term = ScalarExpr({(params, k, rest): c})
            if n:
                term = term * value ** n
            out = out + term
        return out

    def reduce_jet_power(self, jet: tuple[int, ...], power: int, value: "ScalarExpr") -> "ScalarExpr":
        """Rewrite using the relation ``jet**power == value`` until degree < power."""
        jet = make_jet(jet)
        value = ScalarExpr.coerce(value)
        if value.degree_in(jet) >= power:
            raise ValueError("replacement must have lower degree in the jet")
        out = ZERO
        for (params, k, jets), c in self._terms.items():
            n = jets.count(jet)
            q, r = divmod(n, power)
            rest = tuple(j for j in jets if j != jet) + (jet,) * r
            term = ScalarExpr({(params, k, tuple(sorted(rest, key=_jet_key))): c})
            if q:
                term = term * value ** q
            out = out + term
        if out.degree_in(jet) >= power:
            return out.reduce_jet_power(jet, power, value)
        return out

    # -- evaluation ----------------------------------------------------------
    def substitute(
        self,
        jets: Mapping[tuple[int, ...], object],
        params: Mapping[str, object] | None = None,
        exp_value: Callable[[int], object] | None = None,
        exact: bool = True,
    ):
        """Evaluate at concrete jet values and parameter values.

        ``jets`` maps sorted multi-indices to numbers; ``exp_value(k)`` returns
        the value of ``exp(k f)``.  In the exact variant every input must be
        rational and the result is a :class:`~fractions.Fraction`; the floating
        variant converts each factor to ``float`` and sums in term order, so it
        carries ordinary double rounding.
        """
        params = params or {}
        conv = _to_fraction if exact else float
        total = Fraction(0) if exact else 0.0
        exp_cache: dict = {}
        for coef, (pkey, k, jkey) in self.terms():
            val = conv(coef)
            for name, e in pkey:
                if name not in params:
                    raise UnboundSymbolError(name)
                val = val * conv(params[name]) ** e
            for j in jkey:
                if j not in jets:
                    raise UnboundSymbolError(jet_name(j))
                val = val * conv(jets[j])
            if k:
                if exp_value is None:
                    raise UnboundSymbolError("f")
                if k not in exp_cache:
                    exp_cache[k] = conv(exp_value(k))
                val = val * exp_cache[k]
            total = total + val
        return total

    def evaluate(self, jet, params: Mapping[str, object] | None = None, exact: bool = True):
        """Evaluate at a :class:`~hetnil.elliptic.DilatonJet`-like object.

        The object needs ``symbols()`` (jet values) and ``exp_value(k, exact)``.
        """
        return self.substitute(
            jet.symbols(), params, lambda k: jet.exp_value(k, exact=exact), exact=exact
        )


def _term_order(key):
    params, k, jets = key
    order = sum(len(j) for j in jets)
    return (order, [_jet_key(j) for j in jets], k, [(_param_key(n), e) for n, e in params])


ZERO = ScalarExpr()
ONE = ScalarExpr({ONE_KEY: Fraction(1)})


def const(c) -> ScalarExpr:
    return ScalarExpr.const(c)


def param(name: str, power: int = 1) -> ScalarExpr:
    return ScalarExpr.param(name, power)


def jet(*index: int) -> ScalarExpr:
    return ScalarExpr.jet(*index)


def expf(k: int) -> ScalarExpr:
    return ScalarExpr.exp(k)


def laplacian(x: ScalarExpr) -> ScalarExpr:
    return x.laplacian()


def kappa2(s: str = "s") -> ScalarExpr:
    """kappa^2 = (2 + 1/s^2)/2, expanded so equality needs no side relation."""
    return ONE + Fraction(1, 2) * param(s, -2)


def tau2(d: str = "d_inst") -> ScalarExpr:
    """tau^2 = (2 + 1/d^2)/2 for the A_{a,d} instanton."""
    return kappa2(d)


def lambda_norm2() -> ScalarExpr:
    return param("lam1", 2) + param("lam2", 2) + param("lam3", 2)


def divide_exact(x: ScalarExpr, d: ScalarExpr, jet_index: tuple[int, ...]) -> ScalarExpr:
    """Exact quotient ``x / d`` by long division in one jet variable.

    ``d`` must have a unit leading coefficient in that jet.  Raises
    :class:`ArithmeticError` when ``d`` does not divide ``x``.
    """
    jet_index = make_jet(jet_index)
    n = d.degree_in(jet_index)
    lead = d.coefficient(jet_index, n)
    if not lead.is_unit():
        raise ValueError("divisor must have an invertible leading coefficient")
    lead_inv = lead.inverse()
    x_jet = ScalarExpr.jet(*jet_index)
    q = ZERO
    r = x
    while r and r.degree_in(jet_index) >= n:
        m = r.degree_in(jet_index)
        step = r.coefficient(jet_index, m) * lead_inv * x_jet ** (m - n)
        q = q + step
        r = r - step * d
    if r:
        raise ArithmeticError(f"remainder {render(r)} after division")
    return q


def rational_ratio(x: ScalarExpr, y: ScalarExpr) -> Fraction | None:
    """The rational ``c`` with ``x == c*y``, or None when no such constant exists."""
    if not y:
        return None if x else Fraction(0)
    key = next(iter(sorted(y._terms, key=_term_order)))
    c = x._terms.get(key, Fraction(0)) / y._terms[key]
    return c if x == y * c else None


# -- text rendering ----------------------------------------------------------

def _render_monomial(key) -> list[str]:
    params, k, jets = key
    parts = []
    for name, e in params:
        parts.append(name if e == 1 else f"{name}^{e}")
    i = 0
    while i < len(jets):
        j = jets[i]
        n = 1
        while i + n < len(jets) and jets[i + n] == j:
            n += 1
        parts.append(jet_name(j) if n == 1 else f"{jet_name(j)}^{n}")
        i += n
    if k:
        parts.append("exp(f)" if k == 1 else f"exp({k}f)")
    return parts


def render(x: ScalarExpr) -> str:
    """Stable text form, e.g. ``-t^2*s^-2 + 2*f1*exp(2f)``.

    Grammar: terms joined by `` + `` / `` - ``; a term is ``*``-joined factors
    in the order rational coefficient (omitted when 1), parameters ``name^e``,
    jets ``fI^n``, then ``exp(kf)``.  The zero element renders as ``0``.
    """
    if not x._terms:
        return "0"
    out = []
    for n, (c, key) in enumerate(x.terms()):
        parts = _render_monomial(key)
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if mag != 1 or not parts:
            parts.insert(0, str(mag))
        body = "*".join(parts)
        if n == 0:
            out.append(("-" if sign == "-" else "") + body)
        else:
            out.append(f" {sign} {body}")
    return "".join(out)


def exact_sqrt(q: Fraction) -> Fraction | None:
    """Rational square root when ``q`` is a perfect square, else None."""
    q = Fraction(q)
    if q < 0:
        return None
    n, d = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return Fraction(n, d)
    return None
