"""Exact discrete distributions on contiguous integer supports.

``ExactPmf`` is the carrier type for the exact forward dynamic programs (the
informed-count chain and the branching chain) and for the total-variation
verifier.  It stores a probability vector, the integer value of its first
entry, and the mass discarded by any tail truncation performed while building
it, so downstream consumers can account for truncation as explicit
uncertainty instead of silently losing it.
"""

from dataclasses import dataclass

import numpy as np

_MASS_TOL = 1e-9


class CapacityError(ValueError):
    """Raised when an exact computation exceeds its configured size guard."""


@dataclass(frozen=True, eq=False)
class ExactPmf:
    """Probability mass function on consecutive integers.

    ``masses[i]`` is the probability of the value ``support_offset + i``;
    ``truncation_error`` is the total probability discarded during
    construction (0 for full-support computations).
    """

    support_offset: int
    masses: np.ndarray
    truncation_error: float = 0.0

    def __post_init__(self):
        masses = np.asarray(self.masses, dtype=np.float64)
        object.__setattr__(self, "masses", masses)
        if masses.ndim != 1 or masses.size == 0:
            raise ValueError("masses must be a non-empty vector")
        if np.any(masses < 0.0):
            raise ValueError("negative probability mass")
        if not 0.0 <= self.truncation_error:
            raise ValueError("negative truncation error")
        total = float(masses.sum()) + self.truncation_error
        if not (1.0 - _MASS_TOL <= total <= 1.0 + _MASS_TOL):
            raise ValueError(f"mass accounting is off: sum + truncation = {total!r}")

    @property
    def support(self) -> np.ndarray:
        """Integer values carrying the masses, in vector order."""
        return self.support_offset + np.arange(self.masses.size, dtype=np.int64)

    def prob(self, k: int) -> float:
        """Probability of the integer ``k`` (0 outside the stored support)."""
        idx = int(k) - self.support_offset
        if 0 <= idx < self.masses.size:
            return float(self.masses[idx])
        return 0.0

    def mean(self) -> float:
        return float(np.dot(self.support.astype(np.float64), self.masses))

    def second_moment(self) -> float:
        values = self.support.astype(np.float64)
        return float(np.dot(values * values, self.masses))

    def variance(self) -> float:
        m = self.mean()
        return self.second_moment() - m * m

    def trimmed(self) -> "ExactPmf":
        """Copy with leading and trailing exact-zero masses removed."""
        nonzero = np.nonzero(self.masses)[0]
        if nonzero.size == 0:
            return self
        lo, hi = int(nonzero[0]), int(nonzero[-1]) + 1
        return ExactPmf(self.support_offset + lo, self.masses[lo:hi],
                        self.truncation_error)
