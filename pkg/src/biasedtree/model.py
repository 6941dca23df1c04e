"""Walk parameters, transition kernels and tree geometry.

The walk lives on the infinite d-regular tree, so nothing here ever
materializes the graph. The full kernel is exposed one row at a time and
every origin-return quantity factors through the distance-to-root chain
(:class:`RadialKernel`).

The bias ``lam`` is stored either as a :class:`fractions.Fraction` (when the
caller supplies an int, a Fraction or a decimal/ratio string) or as a binary
float. Regime classification compares the stored value exactly.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Union

from .errors import DegreeTooSmall, InexactParameter, NonFinite, NonPositiveLambda

Number = Union[Fraction, float]

__all__ = [
    "Regime",
    "WalkParams",
    "RadialKernel",
    "TreeKernelRow",
    "make_params",
    "parse_lambda",
    "radial_kernel",
    "tree_kernel_row",
    "sphere_size",
    "growth_rate",
    "critical_lambda",
]


class Regime(str, enum.Enum):
    TRANSIENT = "transient"
    CRITICAL = "critical"
    RECURRENT = "recurrent"


@dataclass(frozen=True)
class WalkParams:
    """Degree ``d`` and bias ``lam`` of the walk. Build with :func:`make_params`."""

    d: int
    lam: Number

    @property
    def exact(self) -> bool:
        return isinstance(self.lam, Fraction)

    @property
    def regime(self) -> Regime:
        branch = self.d - 1
        if self.lam < branch:
            return Regime.TRANSIENT
        if self.lam == branch:
            return Regime.CRITICAL
        return Regime.RECURRENT

    @property
    def lam_float(self) -> float:
        return float(self.lam)

    def require_exact(self) -> Fraction:
        if not self.exact:
            raise InexactParameter(
                f"lambda={self.lam!r} is a float; rational arithmetic needs a rational lambda"
            )
        return self.lam

    def lambda_str(self) -> str:
        """Canonical text form: ``num/den`` (or integer) for rationals, repr for floats."""
        if self.exact:
            return str(self.lam)
        return repr(self.lam)


def parse_lambda(value) -> Number:
    """Convert user input to the stored bias representation.

    Integers, Fractions and strings such as ``"3/2"`` or ``"0.25"`` become
    exact Fractions. Python floats stay floats.

    >>> parse_lambda("3/2")
    Fraction(3, 2)
    >>> parse_lambda(0.5)
    0.5
    """
    if isinstance(value, bool):
        raise TypeError("lambda must be numeric")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            pass
        try:
            return float(text)
        except ValueError:
            raise NonFinite(f"cannot parse lambda {value!r}") from None
    return float(value)


def make_params(d: int, lam) -> WalkParams:
    """Validate and build :class:`WalkParams`.

    Raises:
        DegreeTooSmall: if ``d < 2``.
        NonFinite: if ``lam`` is NaN or infinite.
        NonPositiveLambda: if ``lam <= 0``.
    """
    if isinstance(d, bool) or int(d) != d:
        raise DegreeTooSmall(f"degree must be an integer, got {d!r}")
    d = int(d)
    if d < 2:
        raise DegreeTooSmall(f"degree must be >= 2, got {d}")
    lam = parse_lambda(lam)
    if isinstance(lam, float) and not math.isfinite(lam):
        raise NonFinite(f"lambda must be finite, got {lam!r}")
    if lam <= 0:
        raise NonPositiveLambda(f"lambda must be > 0, got {lam}")
    return WalkParams(d, lam)


@dataclass(frozen=True)
class RadialKernel:
    """Transition probabilities of the distance chain on {0, 1, 2, ...}.

    From 0 the chain moves to 1 with probability one; from ``x >= 1`` it
    moves to ``x - 1`` with ``p_down`` and to ``x + 1`` with ``p_up``.
    """

    p_origin_up: Number
    p_down: Number
    p_up: Number


@dataclass(frozen=True)
class TreeKernelRow:
    vertex_depth: int
    prob_toward_root: Number
    prob_per_child: Number
    child_count: int

    def total(self) -> Number:
        return self.prob_toward_root + self.child_count * self.prob_per_child


def _one(params: WalkParams) -> Number:
    return Fraction(1) if params.exact else 1.0


def radial_kernel(params: WalkParams) -> RadialKernel:
    branch = params.d - 1
    if params.exact:
        total = branch + params.lam
        return RadialKernel(Fraction(1), params.lam / total, Fraction(branch) / total)
    lam = params.lam
    total = branch + lam
    p_down = lam / total
    # p_up computed directly (not 1 - p_down) so both are correctly rounded
    return RadialKernel(1.0, p_down, branch / total)


def tree_kernel_row(params: WalkParams, depth: int) -> TreeKernelRow:
    """Row of the tree kernel for any vertex at distance ``depth`` from the root."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    d = params.d
    one = _one(params)
    if depth == 0:
        return TreeKernelRow(0, 0 * one, one / d, d)
    total = d + params.lam - 1
    return TreeKernelRow(depth, params.lam / total, one / total, d - 1)


def sphere_size(params: WalkParams, n: int) -> int:
    """Number of vertices at distance exactly ``n`` from the root."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return 1
    return params.d * (params.d - 1) ** (n - 1)


def growth_rate(params: WalkParams) -> float:
    """Limit of ``sphere_size(n) ** (1/n)``, which is ``d - 1``."""
    return float(params.d - 1)


def critical_lambda(params: WalkParams) -> float:
    """Bias separating transience from recurrence: ``d - 1``."""
    return float(params.d - 1)
