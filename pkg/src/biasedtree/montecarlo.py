"""Seeded Monte Carlo simulation of the distance-to-root chain.

Random numbers
--------------
Generator ``splitmix64-path-v1``. Path ``i`` under master seed ``s`` owns the
SplitMix64 stream whose initial state is ``mix64(mix64(s) ^ i)``. Draw ``k``
advances the state by ``0x9E3779B97F4A7C15``, outputs ``mix64(state)`` and
maps its top 53 bits to a uniform in ``[0, 1)``. A step goes toward the
root when the uniform is below ``p_down``. Every path depends only on
``(s, i)``, so results are identical however paths are split across
threads or chunks.

A walk at level ``x`` with ``r`` steps left cannot reach the root if
``x > r``. Such paths are stopped early and counted as not returned. This
only saves work; the reported estimates are unaffected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numba as nb
import numpy as np

from .exact import first_return_catalan
from .model import WalkParams, radial_kernel

__all__ = [
    "RNG_NAME",
    "SimConfig",
    "McEstimate",
    "FirstReturnResult",
    "simulate_first_return",
    "estimate_pn_return",
    "path_uniforms",
]

RNG_NAME = "splitmix64-path-v1"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO_M53 = 2.0**-53
_CHUNK = 1 << 20


@nb.njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(cache=True)
def _path_state(seed, path):
    return _mix64(_mix64(seed) ^ np.uint64(path))


@nb.njit(cache=True)
def _next_uniform(state):
    state = state + _GOLDEN
    return state, float(_mix64(state) >> _S11) * _TWO_M53


@nb.njit(parallel=True, cache=True)
def _first_return_times(seed, first_path, count, max_steps, p_down):
    out = np.zeros(count, np.int64)
    for j in nb.prange(count):
        state = _path_state(seed, first_path + j)
        level = 1
        t = 1
        while t < max_steps:
            if level > max_steps - t:
                break
            state, u = _next_uniform(state)
            if u < p_down:
                level -= 1
            else:
                level += 1
            t += 1
            if level == 0:
                out[j] = t
                break
    return out


@nb.njit(parallel=True, cache=True)
def _at_root_after(seed, first_path, count, n, p_down):
    out = np.zeros(count, np.bool_)
    for j in nb.prange(count):
        state = _path_state(seed, first_path + j)
        level = 0
        t = 0
        while t < n:
            if level > n - t:
                break
            if level == 0:
                level = 1
            else:
                state, u = _next_uniform(state)
                if u < p_down:
                    level -= 1
                else:
                    level += 1
            t += 1
        out[j] = t == n and level == 0
    return out


@nb.njit(cache=True)
def _uniforms(seed, path, count):
    out = np.empty(count)
    state = _path_state(seed, path)
    for k in range(count):
        state, out[k] = _next_uniform(state)
    return out


def path_uniforms(master_seed: int, path_index: int, count: int) -> np.ndarray:
    """First ``count`` uniforms of one path's stream (for inspection and tests)."""
    return _uniforms(np.uint64(master_seed), path_index, count)


@dataclass(frozen=True)
class SimConfig:
    params: WalkParams
    num_paths: int
    max_steps: int
    master_seed: int

    def __post_init__(self):
        if self.num_paths < 1:
            raise ValueError("num_paths must be >= 1")
        if self.max_steps < 2 or self.max_steps % 2:
            raise ValueError("max_steps must be even and >= 2")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 unsigned bits")

    @property
    def p_down(self) -> float:
        return float(radial_kernel(self.params).p_down)


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    std_error: float
    num_paths: int
    truncated_fraction: float
    seed: int
    horizon: Optional[int] = None

    def z_score(self, exact: float) -> float:
        if self.std_error == 0:
            return 0.0 if self.estimate == exact else math.copysign(math.inf, self.estimate - exact)
        return (self.estimate - exact) / self.std_error


def _binomial_estimate(hits: int, num_paths: int) -> tuple:
    p = hits / num_paths
    return p, math.sqrt(p * (1.0 - p) / num_paths)


@dataclass(frozen=True)
class FirstReturnResult:
    """Histogram of first-return steps plus the return-within-horizon estimate.

    ``histogram[k]`` counts paths whose first return happened at step ``k``;
    index 0 is unused. Paths that did not return are counted in
    ``returned.truncated_fraction``, not in the histogram.
    """

    config: SimConfig
    histogram: np.ndarray = field(repr=False)
    returned: McEstimate

    def mass(self, step: int) -> McEstimate:
        p, se = _binomial_estimate(int(self.histogram[step]), self.config.num_paths)
        return McEstimate(p, se, self.config.num_paths, 0.0, self.config.master_seed, step)

    def exact_mass(self, step: int) -> float:
        if step % 2:
            return 0.0
        return first_return_catalan(self.config.params, step // 2, "scaled_float")


def simulate_first_return(config: SimConfig) -> FirstReturnResult:
    """Simulate ``num_paths`` excursions from the root, each truncated at ``max_steps``.

    The returned estimate of ``P(tau <= max_steps)`` is a lower bound on the
    total return probability. Its bias is the tail mass beyond the horizon,
    which decays like ``rho ** max_steps``.
    """
    seed = np.uint64(config.master_seed)
    hist = np.zeros(config.max_steps + 1, dtype=np.int64)
    for start in range(0, config.num_paths, _CHUNK):
        count = min(_CHUNK, config.num_paths - start)
        times = _first_return_times(seed, start, count, config.max_steps, config.p_down)
        hist += np.bincount(times, minlength=config.max_steps + 1)
    hist[0] = 0
    returned = int(hist.sum())
    p, se = _binomial_estimate(returned, config.num_paths)
    estimate = McEstimate(
        estimate=p,
        std_error=se,
        num_paths=config.num_paths,
        truncated_fraction=1.0 - returned / config.num_paths,
        seed=config.master_seed,
        horizon=config.max_steps,
    )
    return FirstReturnResult(config, hist, estimate)


def estimate_pn_return(config: SimConfig, n: int) -> McEstimate:
    """Fraction of paths sitting at the root after exactly ``n`` steps."""
    if n < 0 or n % 2:
        raise ValueError(f"n must be a nonnegative even step count, got {n}")
    if n > config.max_steps:
        raise ValueError(f"n={n} exceeds the horizon max_steps={config.max_steps}")
    seed = np.uint64(config.master_seed)
    hits = 0
    for start in range(0, config.num_paths, _CHUNK):
        count = min(_CHUNK, config.num_paths - start)
        hits += int(_at_root_after(seed, start, count, n, config.p_down).sum())
    p, se = _binomial_estimate(hits, config.num_paths)
    return McEstimate(p, se, config.num_paths, 0.0, config.master_seed, n)
