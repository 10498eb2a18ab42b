"""Lemniscatic Weierstrass function on the real axis and the dilaton profiles.

``P`` solves ``P'^2 = 4P^3 - g2 P`` with ``g2 = 4 a^2`` (``g3 = 0``), so that
``P'^2 = 4P(P-a)(P+a)``.  Values come from the Laurent series near the pole
followed by repeated duplication; the real half period from quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from scipy import integrate

from .jets import ScalarExpr, exact_sqrt, expf, kappa2, param, tau2

SEED_RADIUS = 0.5  # |z| sqrt(a) below which the series is used directly
POLE_GUARD = 1e-150  # |z| (scaled) below which P would overflow
_N_LAURENT = 12  # through z^22; stopping at z^14 leaves ~5e-10 at the seed radius


class DomainError(ValueError):
    pass


@lru_cache(maxsize=None)
def _laurent_unit() -> tuple[float, ...]:
    """Coefficients c_k of z^{2k-2} for a = 1 (c_2 = g2/20, g3 = 0)."""
    c = {2: 4 / 20, 3: 0.0}
    for k in range(4, _N_LAURENT + 1):
        acc = sum(c[m] * c[k - m] for m in range(2, k - 1))
        c[k] = 3 * acc / ((2 * k + 1) * (k - 3))
    return tuple(c[k] for k in range(2, _N_LAURENT + 1))


@dataclass(frozen=True)
class WeierstrassParams:
    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError("the root parameter must be positive")

    @property
    def g2(self) -> float:
        return 4 * self.a * self.a

    @property
    def g3(self) -> float:
        return 0.0

    @property
    def half_period(self) -> float:
        return half_period(self.a)


@lru_cache(maxsize=None)
def _unit_half_period() -> float:
    # z = int_1^inf dt / sqrt(4 t (t-1)(t+1)); t = 1/sin^2(th) gives
    # int_0^{pi/2} dth / sqrt(1 + sin^2 th), smooth on the closed interval.
    val, _ = integrate.quad(lambda th: 1.0 / math.sqrt(1.0 + math.sin(th) ** 2), 0.0, math.pi / 2,
                            epsabs=1e-14, epsrel=1e-14)
    return val


def half_period(a: float) -> float:
    """Real half period of P for root parameter ``a`` (scaling ``tau(a) = tau(1)/sqrt(a)``)."""
    if not a > 0:
        raise DomainError("the root parameter must be positive")
    return _unit_half_period() / math.sqrt(a)


def _series_unit(x: float, a: float) -> tuple[float, float]:
    """Series for the a=1 function at ``x = sqrt(a) z``, rescaled: P(z; a) = a P(sqrt(a) z; 1)."""
    x2 = x * x
    p = 1.0 / x2
    dp = -2.0 / (x2 * x)
    for j, c in enumerate(_laurent_unit(), start=2):
        e = 2 * j - 2
        if c:
            p += c * x ** e
            dp += c * e * x ** (e - 1)
    sa = math.sqrt(a)
    return a * p, a * sa * dp


def _duplicate(p: float, dp: float, a: float) -> tuple[float, float]:
    d2 = 6 * p * p - 2 * a * a
    p2 = 0.25 * (d2 / dp) ** 2 - 2 * p
    dp2 = 0.25 * d2 * (12 * p * dp * dp - d2 * d2) / dp ** 3 - dp
    return p2, dp2


def wp_eval(z: float, params: WeierstrassParams | float) -> tuple[float, float]:
    """``(P(z), P'(z))`` for real ``z`` in ``(0, 2 tau)``."""
    a = params.a if isinstance(params, WeierstrassParams) else float(params)
    tau = half_period(a)
    if not 0 < z < 2 * tau:
        raise DomainError(f"z must lie in (0, 2*tau) = (0, {2 * tau:.12g}); got {z!r}")
    sign = 1.0
    if z > tau:
        z = 2 * tau - z
        sign = -1.0
    sa = math.sqrt(a)
    if z * sa < POLE_GUARD:
        raise DomainError("z is too close to the pole")
    n = 0
    w = z
    while w * sa > SEED_RADIUS:
        w /= 2
        n += 1
    p, dp = _series_unit(w * sa, a)
    for _ in range(n):
        p, dp = _duplicate(p, dp, a)
    return p, sign * dp


def wp_second(p: float, a: float) -> float:
    """``P'' = 6 P^2 - g2/2``."""
    return 6 * p * p - 2 * a * a


def ode_residual(p: float, dp: float, a: float) -> float:
    """Scaled defect ``|P'^2 - 4P^3 + 4a^2 P| / (1 + |P|^3)``."""
    return abs(dp * dp - 4 * p ** 3 + 4 * a * a * p) / (1 + abs(p) ** 3)


# -- dilaton profiles ----------------------------------------------------------------

PROFILES = ("weierstrass", "inverse-square", "quadratic", "constant")


@dataclass(frozen=True)
class DilatonJet:
    """Values of ``f`` and its derivatives at one point of the base.

    Jets absent from ``values`` are zero (directions the profile does not
    depend on).  Exact jets hold rationals, numeric ones floats.
    """
    point: tuple
    profile: str
    values: Mapping  # jet index tuple -> value (f_i, f_ij, f_ijk)
    e2f: object  # e^{2f}
    exact: bool

    def symbols(self):
        zero = Fraction(0) if self.exact else 0.0
        out = {}
        for order in (1, 2, 3):
            for idx in combinations_with_replacement((1, 2, 3, 4), order):
                out[idx] = self.values.get(idx, zero)
        return out

    def exp_value(self, k: int, exact: bool = True):
        if k % 2 == 0:
            base = self.e2f
            return base ** (k // 2) if k >= 0 else 1 / base ** (-k // 2)
        if self.exact:
            root = exact_sqrt(Fraction(self.e2f))
            if root is None:
                raise DomainError("e^f is irrational at this point; use an even power or numeric mode")
            return root ** k if k >= 0 else 1 / root ** (-k)
        return math.sqrt(self.e2f) ** k

    def __getitem__(self, idx):
        return self.values.get(tuple(sorted(idx)), 0)


def _jets_from_e2f(E, grad, hess, third=None) -> dict:
    """Jets of ``f = (1/2) log E`` from the derivatives of ``E``."""
    vals = {}
    for i in range(4):
        vals[(i + 1,)] = grad[i] / (2 * E)
    for i in range(4):
        for j in range(i, 4):
            vals[(i + 1, j + 1)] = (hess[i][j] * E - grad[i] * grad[j]) / (2 * E * E)
    if third is not None:
        for i in range(4):
            for j in range(i, 4):
                for k in range(j, 4):
                    Eijk = third[i][j][k]
                    num = (Eijk * E * E - E * (hess[i][j] * grad[k] + hess[i][k] * grad[j] + hess[j][k] * grad[i])
                           + 2 * grad[i] * grad[j] * grad[k])
                    vals[(i + 1, j + 1, k + 1)] = num / (2 * E ** 3)
    return vals


def _to_exact(x):
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return None


def profile_jet(profile: str, x: Sequence, *, params: Mapping | None = None, exact: bool | None = None) -> DilatonJet:
    """Jets of the dilaton ``f`` of a profile at the base point ``x``.

    Profiles and parameters:

    * ``weierstrass``: ``e^{2f} = alpha^2 P(x1)``; ``aW`` (root), ``alpha``.
    * ``inverse-square``: ``e^{2f} = 3 alphap / |x - b|^2``; ``alphap``, ``b`` (4-vector).
    * ``quadratic``: ``e^{2f} = a^2 tau^2 (1 - |x|^2)``; ``a_inst``, ``d_inst``.
    * ``constant``: ``f = c``; ``c`` (value of ``e^{2f}``, default 1).

    Rational inputs give exact jets for the last three.
    """
    params = dict(params or {})
    if profile not in PROFILES:
        raise DomainError(f"unknown profile {profile!r}; expected one of {PROFILES}")
    x = tuple(x) + (0,) * (4 - len(x))
    if len(x) != 4:
        raise DomainError("base points have four coordinates")
    if profile == "weierstrass":
        return _weierstrass_jet(x, params)
    xs = [_to_exact(v) for v in x]
    is_exact = all(v is not None for v in xs) if exact is None else exact
    if not is_exact:
        xs = [float(v) for v in x]
    num = (lambda v: Fraction(v)) if is_exact else float
    zero = num(0)
    if profile == "constant":
        c = num(params.get("c", 1))
        if c <= 0:
            raise DomainError("e^{2f} must be positive")
        return DilatonJet(tuple(x), profile, {}, c, is_exact)
    if profile == "inverse-square":
        ap = num(params.get("alphap", Fraction(1, 3)))
        b = [num(v) for v in params.get("b", (0, 0, 0, 0))]
        if ap <= 0:
            raise DomainError("inverse-square needs alpha' > 0")
        y = [xs[i] - b[i] for i in range(4)]
        r2 = sum(v * v for v in y)
        if r2 == 0:
            raise DomainError("inverse-square is singular at x = b")
        E = 3 * ap / r2
        grad = [-6 * ap * y[i] / r2 ** 2 for i in range(4)]
        hess = [[(24 * ap * y[i] * y[j] / r2 ** 3) - (6 * ap / r2 ** 2 if i == j else zero)
                 for j in range(4)] for i in range(4)]
        third = [[[(-144 * ap * y[i] * y[j] * y[k] / r2 ** 4)
                   + 24 * ap * ((y[k] if i == j else zero) + (y[j] if i == k else zero)
                                + (y[i] if j == k else zero)) / r2 ** 3
                   for k in range(4)] for j in range(4)] for i in range(4)]
        return DilatonJet(tuple(x), profile, _jets_from_e2f(E, grad, hess, third), E, is_exact)
    # quadratic
    a = num(params.get("a_inst", 1))
    d = num(params.get("d_inst", 1))
    if d == 0:
        raise DomainError("d_inst must be non-zero")
    tau_sq = 1 + 1 / (2 * d * d)
    r2 = sum(v * v for v in xs)
    if not r2 < 1:
        raise DomainError("quadratic profile needs |x| < 1")
    c = a * a * tau_sq
    if c == 0:
        raise DomainError("quadratic profile needs a_inst != 0")
    E = c * (1 - r2)
    grad = [-2 * c * xs[i] for i in range(4)]
    hess = [[(-2 * c if i == j else zero) for j in range(4)] for i in range(4)]
    third = [[[zero] * 4 for _ in range(4)] for _ in range(4)]
    return DilatonJet(tuple(x), profile, _jets_from_e2f(E, grad, hess, third), E, is_exact)


def _weierstrass_jet(x, params) -> DilatonJet:
    aW = float(params.get("aW", 1.0))
    alpha = float(params.get("alpha", 1.0))
    z = float(x[0])
    p, dp = wp_eval(z, aW)
    d2 = wp_second(p, aW)
    d3 = 12 * p * dp
    E = alpha * alpha * p
    vals = {
        (1,): dp / (2 * p),
        (1, 1): (d2 * p - dp * dp) / (2 * p * p),
        (1, 1, 1): (d3 * p * p - 3 * p * dp * d2 + 2 * dp ** 3) / (2 * p ** 3),
    }
    return DilatonJet(tuple(x), "weierstrass", vals, E, False)


# -- equations checked against profiles ----------------------------------------------

def _lap_e2f() -> ScalarExpr:
    return expf(2).laplacian()


def _lap_em2f() -> ScalarExpr:
    return expf(-2).laplacian()


def profile_equation(name: str) -> ScalarExpr:
    """Symbolic left side (expected zero) of a named profile equation.

    ``harmonic``: ``Lap e^{2f}``; ``inverse-laplacian``: ``Lap e^{-2f} - 8/(3 alphap)``;
    ``insab``: ``Lap e^{2f} + 8 tau^2 a^2``; ``in1``: ``Lap e^{2f} + 8 t^2 k^2``;
    ``solv5``: ``u'^2 - 4u(u-aW)(u+aW)`` with ``u = alpha^{-2} e^{2f}``;
    ``eqcan``: the one-variable anomaly ODE under the balancing of constants
    (``alphap = -alpha^2``, ``t^2 k^2 = aW^2 alpha^2 / 3``).
    """
    from .models import eqcan_lhs

    if name == "harmonic":
        return _lap_e2f()
    if name == "inverse-laplacian":
        return _lap_em2f() - param("alphap", -1) * Fraction(8, 3)
    if name == "insab":
        return _lap_e2f() + param("a_inst", 2) * tau2() * 8
    if name == "in1":
        return _lap_e2f() + param("t", 2) * kappa2() * 8
    if name == "solv5":
        u = expf(2) * param("alpha", -2)
        du = u.partial(1)
        aw = param("aW")
        return du * du - u * (u - aw) * (u + aw) * 4
    if name == "eqcan":
        return eqcan_lhs(-param("alpha", 2)).restrict_directions((1,))
    raise KeyError(f"unknown profile equation {name!r}")


PDE_EXACT = ("harmonic", "inverse-laplacian", "insab", "in1")


def eqcan_parameters(aW: float, alpha: float, t: float = 1.0) -> dict:
    """Parameters satisfying the balancing with ``e^{2f} = alpha^2 P``.

    ``kappa^2`` follows from ``aW^2 = 3 t^2 k^2 / alpha^2``; ``s`` from ``k^2 = 1 + 1/(2 s^2)``
    (requires ``k^2 > 1``) and ``|lambda|^2 = 4k^2 / (alpha^2 (1+k^2))`` is placed in ``lam1``.
    """
    k2 = aW * aW * alpha * alpha / (3 * t * t)
    if not k2 > 1:
        raise DomainError("need aW^2 alpha^2 > 3 t^2 so that kappa^2 > 1")
    s = math.sqrt(1 / (2 * (k2 - 1)))
    lam = math.sqrt(4 * k2 / (alpha * alpha * (1 + k2)))
    return {"t": t, "s": s, "alpha": alpha, "aW": aW, "lam1": lam, "lam2": 0.0, "lam3": 0.0}


def verify_profile_pde(profile: str, equation: str, points: Sequence, params: Mapping | None = None,
                       exact: bool | None = None):
    """Max residual of ``equation`` over ``points`` with the profile's jets substituted.

    Exact profiles at rational points return a :class:`~fractions.Fraction`
    (zero when the equation holds); the Weierstrass profile returns a float.
    """
    params = dict(params or {})
    expr = profile_equation(equation)
    worst = None
    for x in points:
        jet = profile_jet(profile, x, params=params, exact=exact)
        val = expr.evaluate(jet, params, exact=jet.exact)
        mag = abs(val)
        if worst is None or mag > worst:
            worst = mag
    return worst


__all__ = [
    "WeierstrassParams", "wp_eval", "wp_second", "half_period", "ode_residual", "DomainError",
    "DilatonJet", "profile_jet", "PROFILES", "profile_equation", "verify_profile_pde",
    "eqcan_parameters",
]
