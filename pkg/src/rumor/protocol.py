"""Pull rumor spreading on the complete graph.

One vertex starts informed.  In every round each uninformed vertex contacts a
uniformly chosen vertex and becomes informed exactly if the contact already
knows the rumor, so with ``i`` informed among ``n`` the informed count grows
by an exact Binomial(n - i, i/n) increment per round.  The informed count is
a sufficient statistic on the complete graph, which keeps a run at O(rounds)
cost independent of n and makes populations up to 10^9 tractable.

Monte Carlo ensembles give every run its own deterministically derived
substream, so results are a pure function of (n, runs, master_seed) and do
not depend on execution order.  The hot loops exist twice: njit-compiled
kernels drawing through the stream-compatible ports in ``_rng``, and plain
loops drawing from ``numpy.random.RandomState``.  Both produce identical
output for identical seeds; ``RUMOR_BACKEND`` selects the flavor.
"""

import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
from scipy.special import gammaln

from ._compat import njit, use_numba
from ._rng import binomial_draw
from .limitdist import EmpiricalDistribution
from .pmf import CapacityError, ExactPmf

_DENOMINATORS = ("n", "n-1")

# cost guards for the exact forward DP
_EXACT_PMF_MAX_N = 2 ** 16
_EXACT_PMF_MAX_T = 12


def _denominator_offset(denominator: str) -> int:
    if denominator not in _DENOMINATORS:
        raise ValueError(f"denominator must be one of {_DENOMINATORS}, got {denominator!r}")
    return 0 if denominator == "n" else 1


def round_cap(n: int) -> int:
    """Abort threshold for a single run; astronomically above typical runtimes."""
    return int(64 * math.log2(n + 1) + 64)


@dataclass(frozen=True)
class ProtocolState:
    """Sufficient statistic of the protocol: population, informed count, round."""

    n: int
    informed: int
    round: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("population size must be >= 1")
        if not 1 <= self.informed <= self.n:
            raise ValueError("informed count must lie in [1, n]")
        if self.round < 0:
            raise ValueError("round index must be >= 0")

    @property
    def uninformed(self) -> int:
        return self.n - self.informed


def initial_state(n: int) -> ProtocolState:
    return ProtocolState(n=n, informed=1, round=0)


@dataclass(frozen=True, eq=False)
class RunRecord:
    """One completed run: population, runtime, optional informed-count path."""

    n: int
    runtime: int
    trajectory: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.n < 1 or self.runtime < 0:
            raise ValueError("invalid run record")
        if self.trajectory is None:
            return
        traj = np.asarray(self.trajectory, dtype=np.int64)
        object.__setattr__(self, "trajectory", traj)
        if traj.size != self.runtime + 1:
            raise ValueError("trajectory length must be runtime + 1")
        if traj[0] != 1 or traj[-1] != self.n:
            raise ValueError("trajectory must start at 1 and end at n")
        if np.any(np.diff(traj) < 0):
            raise ValueError("trajectory must be non-decreasing")
        if np.any(traj[:-1] >= self.n):
            raise ValueError("trajectory may reach n only at the final round")

    def uninformed(self, t: int) -> int:
        """Uninformed count at round ``t``; 0 beyond the recorded runtime."""
        if self.trajectory is None:
            raise ValueError("run record has no trajectory")
        if t <= self.runtime:
            return self.n - int(self.trajectory[t])
        return 0


def step(state: ProtocolState, rng: np.random.RandomState,
         denominator: str = "n") -> ProtocolState:
    """Advance one round with an exact binomial draw from ``rng``.

    ``denominator`` selects the per-vertex success probability i/n (default)
    or i/(n-1), the strict uniform-neighbor reading.  The informed state
    ``informed == n`` is absorbing; the draw is Binomial(0, 1) = 0.
    """
    offset = _denominator_offset(denominator)
    trials = state.n - state.informed
    # clamp keeps the absorbing state valid under the n-1 convention
    p = 1.0 if trials == 0 else state.informed / (state.n - offset)
    draw = int(rng.binomial(trials, p))
    return ProtocolState(state.n, state.informed + draw, state.round + 1)


def run(n: int, rng: np.random.RandomState, keep_trajectory: bool = False,
        denominator: str = "n") -> RunRecord:
    """Simulate one run to completion; ``n == 1`` finishes in 0 rounds."""
    if n < 1:
        raise ValueError("population size must be >= 1")
    cap = round_cap(n)
    state = initial_state(n)
    path = [1] if keep_trajectory else None
    while state.informed < n:
        state = step(state, rng, denominator)
        if keep_trajectory:
            path.append(state.informed)
        if state.round > cap:
            raise RuntimeError(
                f"round cap {cap} exceeded at n={n}; runaway random stream")
    trajectory = np.asarray(path, dtype=np.int64) if keep_trajectory else None
    return RunRecord(n=n, runtime=state.round, trajectory=trajectory)


def substream_seeds(master_seed: int, runs: int) -> np.ndarray:
    """Per-run 32-bit seeds, consecutive from the master seed.

    Consecutive seeding guarantees distinct substreams within an ensemble
    (hashed 32-bit seeds would collide with noticeable probability at 10^6
    runs) and is shared by both kernel flavors.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    start = int(master_seed) % 2 ** 32
    window = start + np.arange(runs, dtype=np.uint64)
    return (window % np.uint64(2 ** 32)).astype(np.uint32)


@njit(cache=True)
def _runtime_kernel_nb(n, seeds, denom_offset, cap):
    out = np.empty(seeds.size, dtype=np.int64)
    denom = float(n - denom_offset)
    for r in range(seeds.size):
        np.random.seed(seeds[r])
        informed = 1
        t = 0
        while informed < n:
            informed += binomial_draw(n - informed, informed / denom)
            t += 1
            if t > cap:
                t = -1
                break
        out[r] = t
    return out


def _runtime_kernel_np(n, seeds, denom_offset, cap):
    out = np.empty(seeds.size, dtype=np.int64)
    denom = float(n - denom_offset)
    for r in range(seeds.size):
        rng = np.random.RandomState(seeds[r])
        informed = 1
        t = 0
        while informed < n:
            informed += int(rng.binomial(n - informed, informed / denom))
            t += 1
            if t > cap:
                t = -1
                break
        out[r] = t
    return out


@njit(cache=True)
def _trajectory_kernel_nb(n, seeds, denom_offset, width):
    # rows are padded with n past each run's completion round
    out = np.full((seeds.size, width), n, dtype=np.int64)
    denom = float(n - denom_offset)
    for r in range(seeds.size):
        np.random.seed(seeds[r])
        informed = 1
        out[r, 0] = 1
        t = 0
        while informed < n:
            informed += binomial_draw(n - informed, informed / denom)
            t += 1
            out[r, t] = informed
    return out


def _trajectory_kernel_np(n, seeds, denom_offset, width):
    out = np.full((seeds.size, width), n, dtype=np.int64)
    denom = float(n - denom_offset)
    for r in range(seeds.size):
        rng = np.random.RandomState(seeds[r])
        informed = 1
        out[r, 0] = 1
        t = 0
        while informed < n:
            informed += int(rng.binomial(n - informed, informed / denom))
            t += 1
            out[r, t] = informed
    return out


@njit(cache=True)
def _informed_after_kernel_nb(n, t_rounds, seeds, denom_offset):
    out = np.empty(seeds.size, dtype=np.int64)
    denom = float(n - denom_offset)
    for r in range(seeds.size):
        np.random.seed(seeds[r])
        informed = 1
        for _ in range(t_rounds):
            if informed < n:
                informed += binomial_draw(n - informed, informed / denom)
        out[r] = informed
    return out


def _informed_after_kernel_np(n, t_rounds, seeds, denom_offset):
    out = np.empty(seeds.size, dtype=np.int64)
    denom = float(n - denom_offset)
    for r in range(seeds.size):
        rng = np.random.RandomState(seeds[r])
        informed = 1
        for _ in range(t_rounds):
            if informed < n:
                informed += int(rng.binomial(n - informed, informed / denom))
        out[r] = informed
    return out


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    """Runtimes of independent runs plus their summary statistics."""

    n: int
    runs: int
    master_seed: int
    denominator: str
    runtimes: np.ndarray
    distribution: EmpiricalDistribution
    mean: float
    variance: float
    min: int
    max: int


def ensemble(n: int, runs: int, master_seed: int,
             denominator: str = "n") -> EnsembleResult:
    """Runtimes of ``runs`` independent simulations on derived substreams."""
    offset = _denominator_offset(denominator)
    seeds = substream_seeds(master_seed, runs)
    cap = round_cap(n)
    kernel = _runtime_kernel_nb if use_numba() else _runtime_kernel_np
    runtimes = kernel(n, seeds, offset, cap)
    if np.any(runtimes < 0):
        raise RuntimeError(f"round cap {cap} exceeded at n={n}; runaway random stream")
    dist = EmpiricalDistribution.from_samples(runtimes.astype(np.float64))
    variance = float(runtimes.var(ddof=1)) if runs > 1 else 0.0
    return EnsembleResult(
        n=n, runs=runs, master_seed=int(master_seed), denominator=denominator,
        runtimes=runtimes, distribution=dist, mean=float(runtimes.mean()),
        variance=variance, min=int(runtimes.min()), max=int(runtimes.max()))


@dataclass(frozen=True, eq=False)
class TrajectoryEnsemble:
    """Trajectory-retaining ensemble stored as one padded matrix.

    Row ``r`` holds the informed counts of run ``r`` per round, padded with n
    past completion; per-run views are materialized on demand.
    """

    n: int
    runs: int
    master_seed: int
    denominator: str
    runtimes: np.ndarray
    trajectories: np.ndarray

    def record(self, index: int) -> RunRecord:
        rt = int(self.runtimes[index])
        return RunRecord(n=self.n, runtime=rt,
                         trajectory=self.trajectories[index, :rt + 1])

    def records(self) -> Iterator[RunRecord]:
        for index in range(self.runs):
            yield self.record(index)


def trajectory_ensemble(n: int, runs: int, master_seed: int,
                        denominator: str = "n") -> TrajectoryEnsemble:
    """Ensemble that retains every informed-count path.

    Runs twice on the same substreams: a first pass finds the maximal
    runtime (the matrix width), a second pass fills the matrix.  Per-run
    determinism makes the replay exact.
    """
    offset = _denominator_offset(denominator)
    seeds = substream_seeds(master_seed, runs)
    cap = round_cap(n)
    if use_numba():
        runtimes = _runtime_kernel_nb(n, seeds, offset, cap)
    else:
        runtimes = _runtime_kernel_np(n, seeds, offset, cap)
    if np.any(runtimes < 0):
        raise RuntimeError(f"round cap {cap} exceeded at n={n}; runaway random stream")
    width = int(runtimes.max()) + 1
    if use_numba():
        paths = _trajectory_kernel_nb(n, seeds, offset, width)
    else:
        paths = _trajectory_kernel_np(n, seeds, offset, width)
    return TrajectoryEnsemble(n=n, runs=runs, master_seed=int(master_seed),
                              denominator=denominator, runtimes=runtimes,
                              trajectories=paths)


def informed_counts(n: int, t: int, runs: int, master_seed: int,
                    denominator: str = "n") -> np.ndarray:
    """Monte Carlo sample of the informed count after exactly ``t`` rounds."""
    if t < 0:
        raise ValueError("round count must be >= 0")
    offset = _denominator_offset(denominator)
    seeds = substream_seeds(master_seed, runs)
    kernel = _informed_after_kernel_nb if use_numba() else _informed_after_kernel_np
    return kernel(n, t, seeds, offset)


def exact_informed_pmf(n: int, t: int, denominator: str = "n") -> ExactPmf:
    """Exact law of the informed count after ``t`` rounds (full support kept)."""
    return _informed_pmf_sequence(n, t, denominator)[-1]


def _informed_pmf_sequence(n: int, t: int, denominator: str = "n") -> list:
    """Exact informed-count pmfs for rounds 0..t from one forward DP pass."""
    if n < 1:
        raise ValueError("population size must be >= 1")
    if t < 0:
        raise ValueError("round count must be >= 0")
    if n > _EXACT_PMF_MAX_N or t > _EXACT_PMF_MAX_T:
        raise CapacityError(
            f"exact informed-count DP is guarded to n <= {_EXACT_PMF_MAX_N} "
            f"and t <= {_EXACT_PMF_MAX_T}, got n={n}, t={t}")
    offset = _denominator_offset(denominator)
    denom = float(n - offset) if n - offset > 0 else 1.0
    lg = gammaln(np.arange(n + 2, dtype=np.float64))
    probs = np.zeros(n + 1)
    probs[1] = 1.0
    out = [_pmf_from_counts(probs)]
    for _ in range(t):
        nxt = np.zeros(n + 1)
        for i in np.nonzero(probs)[0]:
            mass = probs[i]
            m = n - i
            if m == 0:
                nxt[n] += mass
                continue
            p = i / denom
            if p >= 1.0:
                nxt[n] += mass
                continue
            k = np.arange(m + 1, dtype=np.float64)
            log_row = (lg[m + 1] - lg[1:m + 2] - lg[m + 1:0:-1]
                       + k * math.log(p) + (m - k) * math.log1p(-p))
            nxt[i:n + 1] += mass * np.exp(log_row)
        probs = nxt
        out.append(_pmf_from_counts(probs))
    return out


def _pmf_from_counts(probs: np.ndarray) -> ExactPmf:
    nonzero = np.nonzero(probs)[0]
    lo, hi = int(nonzero[0]), int(nonzero[-1]) + 1
    return ExactPmf(support_offset=lo, masses=probs[lo:hi].copy(),
                    truncation_error=0.0)


@dataclass(frozen=True)
class EndgameReport:
    """Threshold-round diagnostics of one run.

    ``t_threshold`` is the first round with fewer than sqrt(n) uninformed
    vertices.  The four event flags are evaluated exactly on integers
    (comparing squared counts with n); the ratios divide by sqrt(n).
    """

    n: int
    runtime: int
    t_threshold: int
    u_before: Optional[int]
    u_at: int
    u_after: int
    before_above_root: bool
    at_below_root: bool
    at_positive: bool
    after_zero: bool
    ratio_before: float
    ratio_at: float

    @property
    def all_events(self) -> bool:
        return (self.before_above_root and self.at_below_root
                and self.at_positive and self.after_zero)

    @property
    def finished_next_round(self) -> bool:
        return self.runtime == self.t_threshold + 1


def endgame_stats(record: RunRecord) -> EndgameReport:
    """Locate the sub-sqrt(n) threshold round and evaluate its event flags."""
    if record.trajectory is None:
        raise ValueError("run record has no trajectory")
    n = record.n
    uninformed = n - record.trajectory
    below = np.nonzero(uninformed.astype(np.int64) ** 2 < n)[0]
    # the trajectory ends at 0 uninformed, so the threshold always exists
    t_thr = int(below[0])
    u_at = int(uninformed[t_thr])
    u_before = int(uninformed[t_thr - 1]) if t_thr > 0 else None
    u_after = int(uninformed[t_thr + 1]) if t_thr + 1 <= record.runtime else 0
    root = math.sqrt(n)
    return EndgameReport(
        n=n, runtime=record.runtime, t_threshold=t_thr,
        u_before=u_before, u_at=u_at, u_after=u_after,
        before_above_root=True if u_before is None else u_before ** 2 > n,
        at_below_root=u_at ** 2 < n,
        at_positive=u_at > 0,
        after_zero=u_after == 0,
        ratio_before=float("inf") if u_before is None else u_before / root,
        ratio_at=u_at / root)
