"""The Poisson branching chain and its martingale limit surrogate.

The chain starts at 1 and grows by a Poisson(current value) increment per
generation, doubling in expectation, so value / 2^t is a positive martingale
with mean 1 and limiting variance 1/2.  The limit is approximated by cutting
the chain at a fixed generation t* (default 28) and the runtime-correction
variable is the negative base-2 logarithm of that cut value.

Sampling kernels follow the same dual-backend and substream contract as the
protocol simulator: one derived 32-bit seed per sample, njit kernels drawing
through ``_rng`` and plain kernels drawing from ``RandomState``, with
identical output either way.
"""

import math
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from ._compat import njit, use_numba
from ._rng import poisson_draw
from .limitdist import EmpiricalDistribution
from .pmf import CapacityError, ExactPmf
from .protocol import substream_seeds

DEFAULT_T_STAR = 28
DEFAULT_SAMPLES = 10 ** 6

# cost guard for the exact convolution DP
_EXACT_PMF_MAX_T = 8


@dataclass(frozen=True)
class BranchingSample:
    """One realization of the chain at generation ``t``."""

    t: int
    j: int
    h: float

    def __post_init__(self):
        if self.t < 0 or self.j < 1:
            raise ValueError("invalid branching sample")


def sample_branching(t: int, rng: np.random.RandomState) -> BranchingSample:
    """Forward-sample the chain through ``t`` exact Poisson increments."""
    if t < 0:
        raise ValueError("generation must be >= 0")
    j = 1
    for _ in range(t):
        j += int(rng.poisson(j))
    return BranchingSample(t=t, j=j, h=j * math.ldexp(1.0, -t))


def branching_moments(t: int) -> tuple:
    """Closed-form (mean, second moment) of the chain at generation ``t``.

    The mean is 2^t and the second moment 2^(t-1) * (3 * 2^t - 1); raises
    OverflowError once 2^(2t) leaves the double range.
    """
    if t < 0:
        raise ValueError("generation must be >= 0")
    if t == 0:
        return 1.0, 1.0
    # ldexp raises OverflowError for exponents beyond the double range
    mean = math.ldexp(1.0, t)
    second = math.ldexp(3.0, 2 * t - 1) - math.ldexp(1.0, t - 1)
    return mean, second


@njit(cache=True)
def _limit_kernel_nb(t_star, seeds):
    out = np.empty(seeds.size, dtype=np.float64)
    for r in range(seeds.size):
        np.random.seed(seeds[r])
        j = 1
        for _ in range(t_star):
            j += poisson_draw(float(j))
        out[r] = float(t_star) - np.log2(float(j))
    return out


def _limit_kernel_np(t_star, seeds):
    out = np.empty(seeds.size, dtype=np.float64)
    for r in range(seeds.size):
        rng = np.random.RandomState(seeds[r])
        j = 1
        for _ in range(t_star):
            j += int(rng.poisson(j))
        out[r] = float(t_star) - math.log2(float(j))
    return out


@njit(cache=True)
def _checkpoint_kernel_nb(t_points, t_max, seeds):
    out = np.empty((seeds.size, t_points.size), dtype=np.float64)
    for r in range(seeds.size):
        np.random.seed(seeds[r])
        j = 1
        idx = 0
        for t in range(t_max + 1):
            if idx < t_points.size and t_points[idx] == t:
                out[r, idx] = float(j) * 2.0 ** (-t)
                idx += 1
            if t < t_max:
                j += poisson_draw(float(j))
    return out


def _checkpoint_kernel_np(t_points, t_max, seeds):
    out = np.empty((seeds.size, t_points.size), dtype=np.float64)
    for r in range(seeds.size):
        rng = np.random.RandomState(seeds[r])
        j = 1
        idx = 0
        for t in range(t_max + 1):
            if idx < t_points.size and t_points[idx] == t:
                out[r, idx] = float(j) * 2.0 ** (-t)
                idx += 1
            if t < t_max:
                j += int(rng.poisson(j))
    return out


def sample_neg_log2_h(t_star: int = DEFAULT_T_STAR,
                      samples: int = DEFAULT_SAMPLES,
                      master_seed: int = 0) -> EmpiricalDistribution:
    """Sample the limit surrogate -log2(value / 2^t*) at generation ``t_star``.

    Every value is finite because the chain never dies (it starts at 1 and
    increments are non-negative).
    """
    if t_star < 0:
        raise ValueError("cutoff generation must be >= 0")
    seeds = substream_seeds(master_seed, samples)
    kernel = _limit_kernel_nb if use_numba() else _limit_kernel_np
    return EmpiricalDistribution.from_samples(kernel(t_star, seeds))


def martingale_checkpoints(t_points: Sequence[int], samples: int,
                           master_seed: int) -> Dict[int, np.ndarray]:
    """Coupled samples of value / 2^t at several generations of one path.

    Coupling along a common path makes small distributional gaps between
    nearby generations measurable without 1/sqrt(samples) noise drowning
    them.  The draw sequence is identical to ``sample_neg_log2_h`` for the
    same seeds, so checkpoint output at the cutoff generation matches it
    exactly.
    """
    points = np.asarray(sorted(set(int(t) for t in t_points)), dtype=np.int64)
    if points.size == 0 or points[0] < 0:
        raise ValueError("checkpoint generations must be non-negative")
    seeds = substream_seeds(master_seed, samples)
    t_max = int(points[-1])
    kernel = _checkpoint_kernel_nb if use_numba() else _checkpoint_kernel_np
    matrix = kernel(points, t_max, seeds)
    return {int(t): matrix[:, col].copy() for col, t in enumerate(points)}


def exact_branching_pmf(t: int, tail_tol: float = 1e-12) -> ExactPmf:
    """Exact law of the chain at generation ``t`` by iterated convolution.

    Each conditional Poisson row is truncated once its remaining tail mass
    drops below ``tail_tol``; every discarded crumb is accumulated into
    ``truncation_error`` rather than silently renormalized away.
    """
    if t < 0:
        raise ValueError("generation must be >= 0")
    if t > _EXACT_PMF_MAX_T:
        raise CapacityError(
            f"exact branching DP is guarded to t <= {_EXACT_PMF_MAX_T}, got t={t}")
    if not 0.0 < tail_tol < 1.0:
        raise ValueError("tail tolerance must lie in (0, 1)")
    masses = np.array([1.0])
    offset = 1
    truncated = 0.0
    for _ in range(t):
        support = offset + np.arange(masses.size)
        # per-state increment cutoffs with tail mass below tail_tol
        kmax = poisson.isf(tail_tol, support).astype(np.int64) + 1
        new_size = int((support + kmax).max()) - offset + 1
        nxt = np.zeros(new_size)
        for idx, j in enumerate(support):
            mass = masses[idx]
            if mass == 0.0:
                continue
            k = np.arange(kmax[idx] + 1, dtype=np.float64)
            row = np.exp(-float(j) + k * math.log(j) - gammaln(k + 1.0))
            truncated += mass * max(0.0, 1.0 - float(row.sum()))
            lo = int(j) - offset
            nxt[lo:lo + row.size] += mass * row
        masses = nxt
    result = ExactPmf(support_offset=offset, masses=masses,
                      truncation_error=truncated)
    return result.trimmed()
