"""Exact and scaled-float return probabilities by dynamic programming.

Everything here works on the distance chain. After ``t`` steps the walk is
at most ``t`` levels out, and a walk at level ``x`` needs ``x`` more steps to
get home, so the DP keeps only levels ``0..min(t, max_step - t)``. Neither
cut changes the level-0 mass.

Two arithmetic backends are provided:

``rational``
    Integer weights over the common denominator ``s = (d-1)*m + r`` where
    ``lam = r/m``; every probability is ``weight / s**t`` and is returned as
    a :class:`~fractions.Fraction`.

``scaled_float``
    Doubles with one power-of-two exponent per time step. The DP runs on the
    symmetrized chain ``D P D^-1`` (off-diagonal entries
    ``sqrt(p(x, y) p(y, x))``), which leaves every level-0 return probability
    unchanged but keeps the level-0 entry within a polynomial factor of the
    row maximum. Renormalizing by the row maximum therefore never flushes the
    quantity of interest to zero, even when ``p^(n)`` is far below the double
    range.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .errors import CapacityExceeded
from .model import WalkParams, radial_kernel

__all__ = [
    "Arithmetic",
    "TableKind",
    "ProbTable",
    "DEFAULT_RATIONAL_CAP",
    "pn_return_dp",
    "first_return_dp",
    "first_return_catalan",
    "log_first_return_catalan",
    "catalan_number",
    "convolve_first_return",
    "first_return_partial_sum",
    "central_binomial_return",
    "log_central_binomial_return",
]

DEFAULT_RATIONAL_CAP = 2000


class Arithmetic(str, enum.Enum):
    RATIONAL = "rational"
    SCALED_FLOAT = "scaled_float"

    @classmethod
    def coerce(cls, value: Union[str, "Arithmetic"]) -> "Arithmetic":
        if isinstance(value, cls):
            return value
        if value == "float":
            return cls.SCALED_FLOAT
        return cls(value)


class TableKind(str, enum.Enum):
    STEP_RETURN = "step_return"
    FIRST_RETURN = "first_return"


@dataclass(frozen=True)
class ProbTable:
    """Probabilities indexed by step count ``0..max_step``.

    In ``scaled_float`` mode ``values[n]`` is a mantissa and the probability
    is ``values[n] * 2**log_scale[n]``. Use :meth:`value` or :meth:`log` rather
    than reading ``values`` directly.
    """

    kind: TableKind
    arithmetic: Arithmetic
    values: tuple
    log_scale: Optional[tuple] = None

    @property
    def max_step(self) -> int:
        return len(self.values) - 1

    def __len__(self) -> int:
        return len(self.values)

    def value(self, n: int) -> Union[Fraction, float]:
        """Probability at step ``n``; in float mode this may underflow to 0."""
        if self.arithmetic is Arithmetic.RATIONAL:
            return self.values[n]
        return math.ldexp(self.values[n], self.log_scale[n])

    __getitem__ = value

    def log(self, n: int) -> float:
        """Natural log of the probability at step ``n`` (``-inf`` for zero)."""
        v = self.values[n]
        if v == 0:
            return -math.inf
        if self.arithmetic is Arithmetic.RATIONAL:
            return math.log(v.numerator) - math.log(v.denominator)
        return math.log(v) + self.log_scale[n] * math.log(2.0)

    def to_floats(self) -> np.ndarray:
        return np.array([float(self.value(n)) for n in range(len(self))])


def _check_max_step(max_step: int, minimum: int) -> None:
    if int(max_step) != max_step or max_step < minimum:
        raise ValueError(f"max_step must be an integer >= {minimum}, got {max_step!r}")


def _rational_dp(params: WalkParams, max_step: int, taboo: bool, cap: int) -> ProbTable:
    lam = params.require_exact()
    if max_step > cap:
        raise CapacityExceeded(f"rational DP capped at max_step={cap}, requested {max_step}")
    down = lam.numerator
    up = (params.d - 1) * lam.denominator
    s = up + down
    weights = [1]
    values = [Fraction(0) if taboo else Fraction(1)]
    denom = 1
    for t in range(1, max_step + 1):
        hi = min(t, max_step - t)
        new = [0] * (hi + 1)
        if weights[0] and hi >= 1:
            new[1] = weights[0] * s
        for x in range(1, min(len(weights), hi + 2)):
            w = weights[x]
            if not w:
                continue
            new[x - 1] += w * down
            if x + 1 <= hi:
                new[x + 1] += w * up
        denom *= s
        values.append(Fraction(new[0], denom))
        if taboo:
            new[0] = 0
        weights = new
    kind = TableKind.FIRST_RETURN if taboo else TableKind.STEP_RETURN
    return ProbTable(kind, Arithmetic.RATIONAL, tuple(values))


def _scaled_float_dp(params: WalkParams, max_step: int, taboo: bool) -> ProbTable:
    kernel = radial_kernel(WalkParams(params.d, params.lam_float))
    root_edge = math.sqrt(kernel.p_down)
    inner_edge = math.sqrt(kernel.p_down * kernel.p_up)
    v = np.ones(1)
    mantissas = [0.0 if taboo else 1.0]
    exponents = [0]
    scale = 0
    for t in range(1, max_step + 1):
        hi = min(t, max_step - t)
        vp = np.zeros(hi + 2)
        k = min(len(v), hi + 2)
        vp[:k] = v[:k]
        new = np.empty(hi + 1)
        new[0] = root_edge * vp[1]
        if hi >= 1:
            new[1] = root_edge * vp[0] + inner_edge * vp[2]
        if hi >= 2:
            new[2:] = inner_edge * (vp[1:hi] + vp[3 : hi + 2])
        peak = new.max()
        shift = math.frexp(peak)[1]
        new = np.ldexp(new, -shift)
        scale += shift
        head = float(new[0])
        if head == 0.0:
            mantissas.append(0.0)
            exponents.append(0)
        else:
            m, e = math.frexp(head)
            mantissas.append(m)
            exponents.append(e + scale)
        if taboo:
            new[0] = 0.0
        v = new
    kind = TableKind.FIRST_RETURN if taboo else TableKind.STEP_RETURN
    return ProbTable(kind, Arithmetic.SCALED_FLOAT, tuple(mantissas), tuple(exponents))


def pn_return_dp(
    params: WalkParams,
    max_step: int,
    arithmetic="rational",
    *,
    rational_cap: int = DEFAULT_RATIONAL_CAP,
) -> ProbTable:
    """``p^(n)(o, o)`` for ``n = 0..max_step`` by forward DP on the distance chain.

    Raises:
        CapacityExceeded: rational mode with ``max_step > rational_cap``.
        InexactParameter: rational mode with a float ``lam``.
    """
    _check_max_step(max_step, 0)
    arithmetic = Arithmetic.coerce(arithmetic)
    if arithmetic is Arithmetic.RATIONAL:
        return _rational_dp(params, max_step, False, rational_cap)
    return _scaled_float_dp(params, max_step, False)


def first_return_dp(
    params: WalkParams,
    max_step: int,
    arithmetic="rational",
    *,
    rational_cap: int = DEFAULT_RATIONAL_CAP,
) -> ProbTable:
    """First-return probabilities, with level-0 mass removed after every step."""
    _check_max_step(max_step, 2)
    arithmetic = Arithmetic.coerce(arithmetic)
    if arithmetic is Arithmetic.RATIONAL:
        return _rational_dp(params, max_step, True, rational_cap)
    return _scaled_float_dp(params, max_step, True)


def catalan_number(k: int) -> int:
    if k < 0:
        raise ValueError("k must be nonnegative")
    return math.comb(2 * k, k) // (k + 1)


def log_first_return_catalan(params: WalkParams, n: int) -> float:
    """Natural log of the ``2n``-step first-return probability."""
    if n < 1:
        raise ValueError("n must be >= 1")
    branch = params.d - 1
    lam = params.lam_float
    total = branch + lam
    return (
        math.log(catalan_number(n - 1))
        + (n - 1) * math.log(branch / total)
        + n * math.log(lam / total)
    )


def first_return_catalan(params: WalkParams, n: int, arithmetic="rational"):
    """Probability that the first return to the root happens at step ``2n``.

    Closed form ``c_{n-1} * p_up**(n-1) * p_down**n`` where ``c_k`` is the
    k-th Catalan number (the number of excursions of length ``2n`` that stay
    positive in between).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    arithmetic = Arithmetic.coerce(arithmetic)
    if arithmetic is Arithmetic.RATIONAL:
        params.require_exact()
        kernel = radial_kernel(params)
        return catalan_number(n - 1) * kernel.p_up ** (n - 1) * kernel.p_down**n
    return math.exp(log_first_return_catalan(params, n))


def first_return_partial_sum(params: WalkParams, horizon: int) -> float:
    """``P(first return at or before step horizon)`` in floating point.

    Uses ``f_{k+1} / f_k = 2 (2k - 1) / (k + 1) * p_up * p_down``.
    """
    kernel = radial_kernel(WalkParams(params.d, params.lam_float))
    term = kernel.p_down
    total = 0.0
    for k in range(1, horizon // 2 + 1):
        total += term
        term *= 2.0 * (2 * k - 1) / (k + 1) * kernel.p_up * kernel.p_down
    return total


def convolve_first_return(f: ProbTable) -> ProbTable:
    """Renewal identity ``p[n] = sum_{k=1..n} f[k] p[n-k]`` with ``p[0] = 1``."""
    if f.kind is not TableKind.FIRST_RETURN:
        raise ValueError("expected a first_return table")
    n_max = f.max_step
    if f.arithmetic is Arithmetic.RATIONAL:
        p = [Fraction(1)]
        for n in range(1, n_max + 1):
            p.append(sum((f.values[k] * p[n - k] for k in range(1, n + 1)), Fraction(0)))
        return ProbTable(TableKind.STEP_RETURN, Arithmetic.RATIONAL, tuple(p))

    fm = np.asarray(f.values, dtype=float)
    fe = np.asarray(f.log_scale, dtype=np.int64)
    pm = np.zeros(n_max + 1)
    pe = np.zeros(n_max + 1, dtype=np.int64)
    pm[0], pe[0] = 0.5, 1
    for n in range(1, n_max + 1):
        mant = fm[1 : n + 1] * pm[n - 1 :: -1]
        expo = fe[1 : n + 1] + pe[n - 1 :: -1]
        live = mant != 0.0
        if not live.any():
            continue
        top = int(expo[live].max())
        total = float(np.sum(np.ldexp(mant[live], expo[live] - top)))
        m, e = math.frexp(total)
        pm[n], pe[n] = m, e + top
    return ProbTable(
        TableKind.STEP_RETURN,
        Arithmetic.SCALED_FLOAT,
        tuple(float(x) for x in pm),
        tuple(int(x) for x in pe),
    )


def central_binomial_return(n: int) -> Fraction:
    """``C(2n, n) / 4**n``: the ``2n``-step return probability at ``lam = d - 1``."""
    return Fraction(math.comb(2 * n, n), 4**n)


def log_central_binomial_return(n: int) -> float:
    return math.log(math.comb(2 * n, n)) - 2 * n * math.log(2.0)
