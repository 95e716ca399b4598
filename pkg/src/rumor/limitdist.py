"""Empirical distributions, lattice restriction, and kernel density.

``EmpiricalDistribution`` wraps a sorted sample vector with ECDF, quantile
and two-sample queries.  The lattice restriction of a real variable X shifted
by x is the integer law with CDF P(X <= k - x), i.e. the law of ceil(X + x);
its first two moments are evaluated through tail sums over the ECDF, which is
what the moment curves are built from (the kernel density is presentation
only).

Tie convention: a sample exactly on a lattice boundary counts as not yet
ceiling-ed past it, i.e. P(ceil(X + x) >= k) = P(X > k - 1 - x) with a strict
inequality.  This keeps the tail-sum moments consistent with the lattice
atoms to rounding error even for integer-valued sample sets.
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Union

import numpy as np


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """Sorted sample vector with ECDF and quantile queries."""

    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("sample vector must be non-empty")
        if np.any(np.diff(samples) < 0):
            raise ValueError("samples must be sorted ascending")

    @classmethod
    def from_samples(cls, values) -> "EmpiricalDistribution":
        values = np.asarray(values, dtype=np.float64)
        return cls(np.sort(values))

    @property
    def count(self) -> int:
        return int(self.samples.size)

    @property
    def min(self) -> float:
        return float(self.samples[0])

    @property
    def max(self) -> float:
        return float(self.samples[-1])

    def ecdf_le(self, v: float) -> float:
        """Fraction of samples <= v."""
        return np.searchsorted(self.samples, v, side="right") / self.count

    def ecdf_ge(self, v: float) -> float:
        """Fraction of samples >= v."""
        below = np.searchsorted(self.samples, v, side="left")
        return (self.count - below) / self.count

    def quantile(self, q: float) -> float:
        return float(np.quantile(self.samples, q))

    def mean(self) -> float:
        return float(self.samples.mean())

    def variance(self) -> float:
        if self.count < 2:
            return 0.0
        return float(self.samples.var(ddof=1))

    def std(self) -> float:
        return math.sqrt(self.variance())

    def shifted(self, delta: float) -> "EmpiricalDistribution":
        return EmpiricalDistribution(self.samples + delta)

    def ks_distance(self, other: "EmpiricalDistribution") -> float:
        """Two-sample Kolmogorov distance (sup of |ECDF difference|)."""
        grid = np.concatenate([self.samples, other.samples])
        own = np.searchsorted(self.samples, grid, side="right") / self.count
        theirs = np.searchsorted(other.samples, grid, side="right") / other.count
        return float(np.abs(own - theirs).max())


@dataclass(frozen=True, eq=False)
class LatticeLaw:
    """Integer law of ceil(X + x_shift) for an empirical X."""

    x_shift: float
    atoms: Dict[int, float]

    def __post_init__(self):
        if not 0.0 <= self.x_shift < 1.0:
            raise ValueError("shift must lie in [0, 1)")
        total = sum(self.atoms.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"atoms must sum to 1, got {total!r}")
        if any(v < 0.0 for v in self.atoms.values()):
            raise ValueError("negative atom")

    def mean(self) -> float:
        return sum(k * v for k, v in self.atoms.items())

    def second_moment(self) -> float:
        return sum(k * k * v for k, v in self.atoms.items())

    def variance(self) -> float:
        m = self.mean()
        return self.second_moment() - m * m


def lattice_law(dist: EmpiricalDistribution, x_shift: float) -> LatticeLaw:
    """Atoms of the lattice restriction: CDF differences at shifted integers."""
    if not 0.0 <= x_shift < 1.0:
        raise ValueError("shift must lie in [0, 1)")
    k_lo = math.floor(dist.min + x_shift) - 1
    k_hi = math.ceil(dist.max + x_shift) + 1
    atoms = {}
    for k in range(k_lo, k_hi + 1):
        mass = dist.ecdf_le(k - x_shift) - dist.ecdf_le(k - 1 - x_shift)
        if mass > 0.0:
            atoms[k] = mass
    return LatticeLaw(x_shift=x_shift, atoms=atoms)


def lattice_mean(dist: EmpiricalDistribution, x_shift: float) -> float:
    """Mean of the lattice restriction via two-sided tail sums.

    Sums P(value >= k) - P(value <= -k) over k >= 1; both tails saturate to
    zero just past the sample range, which terminates the loop without any
    tolerance.
    """
    if not 0.0 <= x_shift < 1.0:
        raise ValueError("shift must lie in [0, 1)")
    total = 0.0
    k = 1
    while True:
        upper = 1.0 - dist.ecdf_le(k - 1 - x_shift)
        lower = dist.ecdf_le(-k - x_shift)
        if upper == 0.0 and lower == 0.0:
            break
        total += upper - lower
        k += 1
    return total


def lattice_second(dist: EmpiricalDistribution, x_shift: float) -> float:
    """Second moment of the lattice restriction via weighted tail sums.

    Uses the identity y^2 + y = 2 * sum_{k>=1} k * (1[y >= k] + 1[y <= -k-1]),
    valid for every integer y, then subtracts the mean.
    """
    if not 0.0 <= x_shift < 1.0:
        raise ValueError("shift must lie in [0, 1)")
    total = 0.0
    k = 1
    while True:
        upper = 1.0 - dist.ecdf_le(k - 1 - x_shift)
        lower = dist.ecdf_le(-k - 1 - x_shift)
        if upper == 0.0 and lower == 0.0:
            break
        total += k * (upper + lower)
        k += 1
    return 2.0 * total - lattice_mean(dist, x_shift)


def lattice_variance(dist: EmpiricalDistribution, x_shift: float) -> float:
    m = lattice_mean(dist, x_shift)
    return lattice_second(dist, x_shift) - m * m


def scott_bandwidth(dist: EmpiricalDistribution) -> float:
    """Scott's rule: sample standard deviation times count^(-1/5)."""
    return dist.std() * dist.count ** (-0.2)


def kde_density(dist: EmpiricalDistribution, grid: np.ndarray,
                bandwidth: Union[str, float] = "scott") -> np.ndarray:
    """Gaussian kernel density estimate evaluated on ``grid``.

    Sorted samples allow a windowed evaluation: kernel mass beyond 9
    bandwidths is below double rounding, so each grid point only touches the
    samples inside that window.
    """
    if dist.count < 2:
        raise ValueError("density estimation needs at least two samples")
    if isinstance(bandwidth, str):
        if bandwidth != "scott":
            raise ValueError(f"unknown bandwidth rule {bandwidth!r}")
        bw = scott_bandwidth(dist)
    else:
        bw = float(bandwidth)
    if bw <= 0.0:
        raise ValueError("degenerate sample set: zero bandwidth")
    grid = np.asarray(grid, dtype=np.float64)
    samples = dist.samples
    cutoff = 9.0 * bw
    norm = 1.0 / (dist.count * bw * math.sqrt(2.0 * math.pi))
    out = np.zeros(grid.size)
    for i, g in enumerate(grid.ravel()):
        lo = np.searchsorted(samples, g - cutoff, side="left")
        hi = np.searchsorted(samples, g + cutoff, side="right")
        if lo == hi:
            continue
        z = (samples[lo:hi] - g) / bw
        out[i] = norm * float(np.exp(-0.5 * z * z).sum())
    return out.reshape(grid.shape)


def density_grid(dist: EmpiricalDistribution, points: int = 512,
                 bandwidth: Union[str, float] = "scott",
                 pad_bandwidths: float = 5.0) -> np.ndarray:
    """Evaluation grid spanning the samples plus a bandwidth margin."""
    if points < 2:
        raise ValueError("grid needs at least two points")
    bw = scott_bandwidth(dist) if bandwidth == "scott" else float(bandwidth)
    if bw <= 0.0:
        raise ValueError("degenerate sample set: zero bandwidth")
    pad = pad_bandwidths * bw
    return np.linspace(dist.min - pad, dist.max + pad, points)
