"""Generating functions, spectral radius and coefficient asymptotics.

With ``D = d - 1``, ``s = D + lam`` and ``alpha = 4 * lam * D / s**2``
(so ``alpha = rho**2`` on the transient side) the first-return and Green
generating functions of the root are

    U(z) = (s - s * sqrt(1 - alpha z^2)) / (2D)
    G(z) = 1 / (1 - U(z)) = 2D / ((D - lam) + s * sqrt(1 - alpha z^2))

Both are expanded as power series from the binomial series of
``sqrt(1 - w)``, so the coefficient views are independent of the Catalan
closed form and of the dynamic programs in :mod:`biasedtree.exact`.

Asymptotic constants
--------------------
For ``lam < D`` the Green function has a square-root singularity at
``z = 1/rho``, with ``G(z) = a / (b + sqrt(1 - rho^2 z^2))``. Expanding
``-a/b^2 * sqrt(1 - w)`` and accounting for the period two of the walk gives

    p^(2n) ~ D (D + lam) / ((D - lam)^2 sqrt(pi)) * rho^(2n) * n^(-3/2)
    f^(2n) ~ (D + lam) / (4 D sqrt(pi)) * base^(2n) * n^(-3/2)

where ``base = 2 sqrt(D lam) / (D + lam)``. Writing the implicit-function
form ``Psi(u, v) = Phi(u v) - v = 0`` the first constant equals
``sqrt(c2 / (pi rho c1)) / 2``. These are the constants returned by
:func:`p_asymptotic`, :func:`f_asymptotic` and :class:`DarbouxReport`.

:class:`DarbouxReport` also carries ``p_const_uncorrected``
(``sqrt(c1 / (2 pi rho c2)) * 2**-1.5``, equivalently
``(D - lam)^2 / (16 sqrt(pi lam) D^1.5)``) and ``f_const_uncorrected``
(``1/sqrt(pi)``). These forms swap ``c1`` and ``c2 / rho`` and drop the
period-two factor. They are kept only so that they can be compared against
exact coefficients, and they do not describe the decay of ``p^(2n)`` or
``f^(2n)``. For ``d = 3, lam = 1`` the exact ``p^(1600)`` is about 267 times
the uncorrected prediction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import BiasedTreeError, DomainError, NotCoveredRegime, NotTransient
from .model import Regime, WalkParams

__all__ = [
    "PowerSeries",
    "DarbouxReport",
    "catalan_gf",
    "u_closed",
    "g_closed",
    "series_u",
    "series_g",
    "sqrt_one_minus_series",
    "spectral_radius",
    "return_probability",
    "convergence_radius",
    "phi",
    "psi",
    "darboux_point",
    "darboux_report",
    "darboux_finite_differences",
    "p_leading_constant",
    "f_leading_constant",
    "p_asymptotic",
    "log_p_asymptotic",
    "f_asymptotic",
    "log_f_asymptotic",
    "rho_derivative",
]

_BOUNDARY_TOL = 1e-12
# discriminants this close to zero are rounding noise at the branch point
_SNAP_TOL = 1e-14


@dataclass(frozen=True)
class PowerSeries:
    """Truncated power series; coefficients past :attr:`order` are unknown."""

    coefficients: tuple

    def __post_init__(self):
        if not self.coefficients:
            raise ValueError("a power series needs at least one coefficient")
        object.__setattr__(self, "coefficients", tuple(self.coefficients))

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def __len__(self) -> int:
        return len(self.coefficients)

    def __getitem__(self, k: int):
        if k < 0 or k > self.order:
            raise IndexError(f"coefficient {k} is beyond order {self.order}")
        return self.coefficients[k]

    def __call__(self, z):
        acc = 0 * z
        for c in reversed(self.coefficients):
            acc = acc * z + c
        return acc

    def _coerce(self, other) -> "PowerSeries":
        if isinstance(other, PowerSeries):
            return other
        return PowerSeries((other,) + (0 * other,) * self.order)

    def __add__(self, other) -> "PowerSeries":
        other = self._coerce(other)
        n = min(self.order, other.order) + 1
        return PowerSeries(tuple(self.coefficients[k] + other.coefficients[k] for k in range(n)))

    __radd__ = __add__

    def __neg__(self) -> "PowerSeries":
        return PowerSeries(tuple(-c for c in self.coefficients))

    def __sub__(self, other) -> "PowerSeries":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "PowerSeries":
        return self._coerce(other) - self

    def __mul__(self, other) -> "PowerSeries":
        if not isinstance(other, PowerSeries):
            return PowerSeries(tuple(c * other for c in self.coefficients))
        n = min(self.order, other.order) + 1
        a, b = self.coefficients, other.coefficients
        return PowerSeries(
            tuple(sum((a[i] * b[k - i] for i in range(k + 1)), 0 * a[0]) for k in range(n))
        )

    __rmul__ = __mul__

    def reciprocal(self) -> "PowerSeries":
        a = self.coefficients
        if a[0] == 0:
            raise ZeroDivisionError("series with zero constant term has no reciprocal")
        out = [1 / a[0]]
        for k in range(1, len(a)):
            acc = sum((a[i] * out[k - i] for i in range(1, k + 1)), 0 * a[0])
            out.append(-acc / a[0])
        return PowerSeries(tuple(out))


# -- closed forms ------------------------------------------------------------


def catalan_gf(x: float) -> float:
    """Catalan generating function ``(1 - sqrt(1 - 4x)) / (2x)`` on ``[-1/4, 1/4]``.

    Evaluated as ``2 / (1 + sqrt(1 - 4x))``, which is the same function without
    the cancellation near ``x = 0`` (where the value is 1).
    """
    if abs(x) > 0.25:
        raise DomainError(f"catalan_gf needs |x| <= 1/4, got {x}")
    return 2.0 / (1.0 + math.sqrt(1.0 - 4.0 * float(x)))


def _shape(params: WalkParams):
    branch = params.d - 1
    lam = params.lam
    return branch, lam, branch + lam


def convergence_radius(params: WalkParams) -> float:
    """Radius of the first-return generating function, ``(D + lam) / (2 sqrt(D lam))``."""
    branch, lam, s = _shape(params)
    return float(s) / (2.0 * math.sqrt(branch * float(lam)))


def _discriminant(params: WalkParams, z: float) -> float:
    branch, lam, s = _shape(params)
    s, lam = float(s), float(lam)
    disc = s * s - 4.0 * lam * branch * z * z
    if disc < -_BOUNDARY_TOL * s * s:
        raise DomainError(
            f"|z| = {abs(z)} exceeds the convergence radius {convergence_radius(params)}"
        )
    if disc < _SNAP_TOL * s * s:
        disc = 0.0
    return disc


def u_closed(params: WalkParams, z: float) -> float:
    """First-return generating function ``U(o, o | z)`` for real ``z``."""
    z = float(z)
    disc = _discriminant(params, z)
    s = float(params.d - 1 + params.lam)
    # rationalized: (s - sqrt(disc)) / 2D == 2 lam z^2 / (s + sqrt(disc))
    return 2.0 * float(params.lam) * z * z / (s + math.sqrt(disc))


def g_closed(params: WalkParams, z: float) -> float:
    """Green function ``G(o, o | z)``; raises where the series diverges."""
    z = float(z)
    disc = _discriminant(params, z)
    branch = params.d - 1
    den = float(branch - params.lam) + math.sqrt(disc)
    if den <= _BOUNDARY_TOL * branch:
        raise DomainError(f"Green function diverges at z = {z} for lambda = {params.lambda_str()}")
    return 2.0 * branch / den


# -- series ------------------------------------------------------------------


def sqrt_one_minus_series(order: int, exact: bool = True) -> list:
    """Coefficients of ``sqrt(1 - w)`` in ``w`` via ``a_k = a_{k-1} (2k - 3) / (2k)``."""
    coeffs = [Fraction(1) if exact else 1.0]
    for k in range(1, order + 1):
        ratio = Fraction(2 * k - 3, 2 * k) if exact else (2 * k - 3) / (2 * k)
        coeffs.append(coeffs[-1] * ratio)
    return coeffs


def _sqrt_term_in_z(params: WalkParams, order: int) -> list:
    """Coefficients in ``z`` of ``sqrt(1 - alpha z^2)`` up to ``z**order``."""
    branch, lam, s = _shape(params)
    exact = params.exact
    if not exact:
        lam, s = float(lam), float(s)
    alpha = 4 * lam * branch / (s * s)
    half = sqrt_one_minus_series(order // 2, exact)
    zero = Fraction(0) if exact else 0.0
    out = [zero] * (order + 1)
    power = Fraction(1) if exact else 1.0
    for k, a in enumerate(half):
        out[2 * k] = a * power
        power *= alpha
    return out


def series_u(params: WalkParams, order: int) -> PowerSeries:
    """Power series of ``U(o, o | z)`` through ``z**order``.

    Rational coefficients when ``params.lam`` is rational, floats otherwise.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    branch, lam, s = _shape(params)
    if not params.exact:
        s = float(s)
    root = _sqrt_term_in_z(params, order)
    coeffs = [-s * c / (2 * branch) for c in root]
    coeffs[0] = 0 * coeffs[0]
    return PowerSeries(tuple(coeffs))


def series_g(params: WalkParams, order: int) -> PowerSeries:
    """Power series of ``G(o, o | z)`` through ``z**order``.

    Computed as ``2D`` times the series reciprocal of the closed-form
    denominator ``(D - lam) + s * sqrt(1 - alpha z^2)``, whose square root is
    expanded by the binomial series. It does not go through ``series_u``.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    branch, lam, s = _shape(params)
    if not params.exact:
        lam, s = float(lam), float(s)
    root = _sqrt_term_in_z(params, order)
    den = [s * c for c in root]
    den[0] = den[0] + (branch - lam)
    return PowerSeries(den).reciprocal() * (2 * branch)


# -- spectral radius ---------------------------------------------------------


def spectral_radius(params: WalkParams) -> float:
    """``2 sqrt(D lam) / (D + lam)`` for ``lam <= D``, else 1."""
    branch = params.d - 1
    if params.lam >= branch:
        return 1.0
    lam = float(params.lam)
    return 2.0 * math.sqrt(branch * lam) / (branch + lam)


def _base(params: WalkParams) -> float:
    branch = params.d - 1
    lam = float(params.lam)
    if params.lam == branch:
        return 1.0
    return 2.0 * math.sqrt(branch * lam) / (branch + lam)


def return_probability(params: WalkParams) -> Union[Fraction, float]:
    """Probability of ever returning to the root, ``min(lam, D) / D``."""
    branch = params.d - 1
    if params.exact:
        return min(params.lam, Fraction(branch)) / branch
    return min(params.lam, branch) / branch


def rho_derivative(params: WalkParams) -> float:
    """Derivative of :func:`spectral_radius` in ``lam`` on the transient side.

    Equals ``sqrt(D / lam) * (D - lam) / (D + lam)**2``. The expression
    ``sqrt(D / lam) * (D + lam) / (D - lam)**2`` also appears in the
    literature. It has the same sign but not the same value, and it fails
    the finite-difference check, so it is not used here.
    """
    branch = params.d - 1
    if params.lam >= branch:
        raise NotTransient("rho_derivative needs lambda < d - 1")
    lam = float(params.lam)
    return math.sqrt(branch / lam) * (branch - lam) / (branch + lam) ** 2


# -- Darboux constants -------------------------------------------------------


def _require_transient(params: WalkParams, what: str) -> None:
    if params.regime is not Regime.TRANSIENT:
        raise NotTransient(f"{what} needs lambda < d - 1, got lambda = {params.lambda_str()}")


def _ab_rho(params: WalkParams):
    branch = params.d - 1
    lam = float(params.lam)
    a = 2.0 * branch / (branch + lam)
    b = (branch - lam) / (branch + lam)
    return a, b, spectral_radius(params)


def phi(params: WalkParams, t: float) -> float:
    """The map ``Phi`` with ``G(z) = Phi(z G(z))`` for ``|z| <= 1/rho``."""
    a, b, rho = _ab_rho(params)
    return (-a * b + math.sqrt(a * a + rho * rho * (1.0 - b * b) * t * t)) / (1.0 - b * b)


def psi(params: WalkParams, u: float, v: float) -> float:
    return phi(params, u * v) - v


def darboux_point(params: WalkParams):
    """``(1/rho, G(1/rho))``; the square root vanishes there so ``G = 2D / (D - lam)``."""
    _require_transient(params, "darboux_point")
    branch = params.d - 1
    return 1.0 / spectral_radius(params), 2.0 * branch / float(branch - params.lam)


def darboux_finite_differences(params: WalkParams, dps: int = 40) -> dict:
    """Central-difference derivatives of ``Psi`` at :func:`darboux_point`.

    Evaluated with mpmath at ``dps`` digits so that the check is not limited
    by double-precision cancellation. Returns ``dpsi_dv`` (zero at a square-
    root singularity), ``d2psi_dv2`` (compare with ``c1``) and ``dpsi_du``
    (compare with ``c2``).
    """
    import mpmath

    _require_transient(params, "darboux_finite_differences")
    with mpmath.workdps(dps):
        branch = mpmath.mpf(params.d - 1)
        lam = (
            mpmath.mpf(params.lam.numerator) / params.lam.denominator
            if params.exact
            else mpmath.mpf(params.lam)
        )
        a = 2 * branch / (branch + lam)
        b = (branch - lam) / (branch + lam)
        rho = 2 * mpmath.sqrt(branch * lam) / (branch + lam)

        def psi_mp(u, v):
            t = u * v
            return (-a * b + mpmath.sqrt(a * a + rho**2 * (1 - b * b) * t * t)) / (1 - b * b) - v

        u0, v0 = 1 / rho, 2 * branch / (branch - lam)
        return {
            "dpsi_dv": float(mpmath.diff(lambda v: psi_mp(u0, v), v0)),
            "d2psi_dv2": float(mpmath.diff(lambda v: psi_mp(u0, v), v0, 2)),
            "dpsi_du": float(mpmath.diff(lambda u: psi_mp(u, v0), u0)),
        }


@dataclass(frozen=True)
class DarbouxReport:
    a: float
    b: float
    c1: float
    c2: float
    rho: float
    p_const: float
    f_const: float
    p_const_uncorrected: float
    f_const_uncorrected: float


_CONSISTENCY_TOL = 1e-13


def p_leading_constant(params: WalkParams) -> float:
    """``C`` in ``p^(2n) ~ C rho^(2n) n^(-3/2)`` on the transient side."""
    _require_transient(params, "p_leading_constant")
    branch = params.d - 1
    lam = float(params.lam)
    return branch * (branch + lam) / ((branch - lam) ** 2 * math.sqrt(math.pi))


def f_leading_constant(params: WalkParams) -> float:
    """``C`` in ``f^(2n) ~ C base^(2n) n^(-3/2)``; valid for every ``lam > 0``."""
    branch = params.d - 1
    return (branch + float(params.lam)) / (4.0 * branch * math.sqrt(math.pi))


def darboux_report(params: WalkParams) -> DarbouxReport:
    """Singularity data and leading constants for a transient walk.

    Both algebraic forms of each ``p`` constant are evaluated and required to
    agree to 1e-13 relative.

    Raises:
        NotTransient: if ``lam >= d - 1``.
    """
    _require_transient(params, "darboux_report")
    branch = params.d - 1
    lam = float(params.lam)
    a, b, rho = _ab_rho(params)
    c1 = (branch - lam) ** 3 / (2.0 * branch * (branch + lam) ** 2)
    c2 = 2.0 * rho * branch / (branch - lam)

    p_const = p_leading_constant(params)
    p_const_implicit = math.sqrt(c2 / (math.pi * rho * c1)) / 2.0
    p_unc = (branch - lam) ** 2 / (16.0 * math.sqrt(math.pi * lam) * branch**1.5)
    p_unc_implicit = math.sqrt(c1 / (2.0 * math.pi * rho * c2)) * 2.0**-1.5
    for x, y, name in ((p_const, p_const_implicit, "p_const"), (p_unc, p_unc_implicit, "p_const_uncorrected")):
        if not math.isclose(x, y, rel_tol=_CONSISTENCY_TOL):
            raise BiasedTreeError(f"{name} forms disagree: {x!r} vs {y!r}")
    return DarbouxReport(
        a=a,
        b=b,
        c1=c1,
        c2=c2,
        rho=rho,
        p_const=p_const,
        f_const=f_leading_constant(params),
        p_const_uncorrected=p_unc,
        f_const_uncorrected=1.0 / math.sqrt(math.pi),
    )


# -- asymptotic laws ---------------------------------------------------------


def log_p_asymptotic(params: WalkParams, n: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    regime = params.regime
    if regime is Regime.CRITICAL:
        return -0.5 * math.log(math.pi * n)
    if regime is Regime.RECURRENT:
        raise NotCoveredRegime("no n-step return asymptotic for lambda > d - 1")
    rho = spectral_radius(params)
    return math.log(p_leading_constant(params)) + 2 * n * math.log(rho) - 1.5 * math.log(n)


def p_asymptotic(params: WalkParams, n: int) -> float:
    """Leading-order approximation of ``p^(2n)(o, o)``.

    ``C rho^(2n) n^(-3/2)`` when transient, ``1 / sqrt(pi n)`` when critical.

    Raises:
        NotCoveredRegime: if ``lam > d - 1``.
    """
    return math.exp(log_p_asymptotic(params, n))


def log_f_asymptotic(params: WalkParams, n: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    return (
        math.log(f_leading_constant(params))
        + 2 * n * math.log(_base(params))
        - 1.5 * math.log(n)
    )


def f_asymptotic(params: WalkParams, n: int) -> float:
    """Leading-order approximation of the ``2n``-step first-return probability.

    Uses ``base = 2 sqrt(D lam) / (D + lam)`` for every ``lam``, including the
    recurrent side where the spectral radius is 1 but ``base < 1``.
    """
    return math.exp(log_f_asymptotic(params, n))
