"""Subsequence construction and verification of the runtime asymptotics.

Everything here compares simulation output or exact pmfs against the limit
machinery: total-variation distance between the informed-count chain and the
branching chain, the squaring recurrence of the uninformed fraction, the
sub-sqrt(n) endgame events, the sup distance between centered runtimes and
the lattice-restricted limit law, residuals of the mean runtime, and the
exponential tail proxy.  Verifiers return ``VerificationReport`` values that
serialize to JSON lines for CI consumption.

Population subsequences with convergent fractional parts of
log2(n) + log2(ln n) are built from the principal Lambert W branch; the
fractional parts are computed in extended precision because at index i the
quantity is a fractional part of a number of magnitude i.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import mpmath
import numpy as np
from scipy.special import lambertw as _scipy_lambertw

from .branching import exact_branching_pmf
from .limitdist import EmpiricalDistribution
from .pmf import CapacityError, ExactPmf
from .protocol import (RunRecord, TrajectoryEnsemble, endgame_stats, ensemble,
                       _informed_pmf_sequence)

# exact-DP guards for the total-variation verifier
_TV_MAX_N = 2 ** 14
_TV_MAX_T = 5

_SUBSEQ_DPS = 40


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


@dataclass(frozen=True)
class VerificationReport:
    """One named check: observed value, its bound or target, and the verdict."""

    name: str
    observed: float
    bound_or_target: float
    passed: bool
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "name": self.name,
            "observed": _jsonable(self.observed),
            "bound_or_target": _jsonable(self.bound_or_target),
            "passed": bool(self.passed),
            "metadata": _jsonable(self.metadata),
        }
        return json.dumps(payload, sort_keys=True)


def lambert_w(z: float) -> float:
    """Principal branch of the inverse of w * exp(w) on [0, inf).

    Polished with Halley steps until |w * exp(w) - z| <= 1e-12 * max(1, z).
    """
    z = float(z)
    if z < 0.0:
        raise ValueError("lambert_w is restricted to non-negative arguments")
    if z == 0.0:
        return 0.0
    w = float(_scipy_lambertw(z).real)
    tol = 1e-12 * max(1.0, z)
    for _ in range(8):
        ew = math.exp(w)
        err = w * ew - z
        if abs(err) <= tol:
            return w
        # Halley update for f(w) = w e^w - z
        denom = ew * (w + 1.0) - (w + 2.0) * err / (2.0 * w + 2.0)
        w -= err / denom
    if abs(w * math.exp(w) - z) > tol:
        raise ArithmeticError(f"lambert_w failed to converge at z={z!r}")
    return w


@dataclass(frozen=True)
class SubsequenceSpec:
    """Population subsequence request: target fractional part and index range."""

    x_target: float
    i_from: int
    i_to: int

    def __post_init__(self):
        if not 0.0 <= self.x_target < 1.0:
            raise ValueError("x_target must lie in [0, 1)")
        if self.i_from > self.i_to:
            raise ValueError("empty index range")


class SubsequencePoint(NamedTuple):
    i: int
    n: int
    frac: float


def subsequence(spec: SubsequenceSpec) -> List[SubsequencePoint]:
    """Populations floor(exp(W(2^(i + x)))) with their fractional parts.

    The fractional part of log2(n) + log2(ln n) is evaluated with 40
    significant decimal digits; in doubles it would lose the low bits that
    the convergence claim is about.  Requires every generated population to
    be at least 3 so the iterated logarithm is meaningful.
    """
    points = []
    previous = None
    with mpmath.workdps(_SUBSEQ_DPS):
        for i in range(spec.i_from, spec.i_to + 1):
            target = mpmath.power(2, mpmath.mpf(i) + mpmath.mpf(spec.x_target))
            w = mpmath.lambertw(target)
            n = int(mpmath.floor(mpmath.e ** w))
            if n < 3:
                raise ValueError(
                    f"population {n} at index {i} is below 3; start the range higher")
            if previous is not None and n <= previous:
                raise ArithmeticError("subsequence failed to increase strictly")
            previous = n
            value = (mpmath.log(n) + mpmath.log(mpmath.log(n))) / mpmath.log(2)
            frac = value - mpmath.floor(value)
            points.append(SubsequencePoint(i=i, n=n, frac=float(frac)))
    return points


def circular_distance(a: float, b: float) -> float:
    """Distance between fractional parts on the unit circle.

    Fractional parts live on R/Z: a value just below 1 is next to 0, and a
    floor that lands a hair under an integer must not count as distance 1.
    """
    return abs((a - b + 0.5) % 1.0 - 0.5)


class TvDistance(NamedTuple):
    value: float
    uncertainty: float


def tv_distance(p: ExactPmf, q: ExactPmf) -> TvDistance:
    """Total-variation distance: half the l1 gap over the union support.

    Half of both truncation errors is carried as explicit uncertainty on the
    distance rather than folded into it.
    """
    lo = min(p.support_offset, q.support_offset)
    hi = max(p.support_offset + p.masses.size, q.support_offset + q.masses.size)
    pa = np.zeros(hi - lo)
    qa = np.zeros(hi - lo)
    pa[p.support_offset - lo:p.support_offset - lo + p.masses.size] = p.masses
    qa[q.support_offset - lo:q.support_offset - lo + q.masses.size] = q.masses
    value = 0.5 * float(np.abs(pa - qa).sum())
    return TvDistance(value=value,
                      uncertainty=0.5 * (p.truncation_error + q.truncation_error))


def verify_tv_bound(n: int, t_max: int, denominator: str = "n"
                    ) -> List[VerificationReport]:
    """Exact total-variation distances against the 2 * 4^t / n bound."""
    if n > _TV_MAX_N or t_max > _TV_MAX_T:
        raise CapacityError(
            f"total-variation verifier is guarded to n <= {_TV_MAX_N} and "
            f"t <= {_TV_MAX_T}, got n={n}, t_max={t_max}")
    informed = _informed_pmf_sequence(n, t_max, denominator)
    reports = []
    for t in range(t_max + 1):
        branching = exact_branching_pmf(t)
        distance = tv_distance(informed[t], branching)
        bound = 2.0 * 4.0 ** t / n
        reports.append(VerificationReport(
            name=f"tv-bound-t{t}",
            observed=distance.value,
            bound_or_target=bound,
            passed=distance.value <= bound + distance.uncertainty,
            metadata={"n": n, "t": t, "uncertainty": distance.uncertainty}))
    return reports


def recurrence_depth(n: int) -> int:
    """Base round for the squaring recurrence: floor of log2 of cuberoot(n)."""
    if n < 2:
        raise ValueError("population must be >= 2")
    return int(math.floor(math.log2(n) / 3.0))


def verify_recurrence(record: RunRecord) -> VerificationReport:
    """Check the squaring recurrence of the uninformed fraction on one run.

    From the base round t1 onward the uninformed fraction should square each
    round: the count at t1 + t is predicted by (u(t1)/n)^(2^t) * n within a
    slack of observed * n^(-1/50) + n^(1/4).  Reports the maximal ratio of
    deviation to slack over all checkable rounds.
    """
    if record.trajectory is None:
        raise ValueError("run record has no trajectory")
    n = record.n
    t1 = recurrence_depth(n)
    worst = 0.0
    worst_round = None
    checked = 0
    if t1 <= record.runtime:
        base = record.uninformed(t1)
        log_base = math.log(base / n) if base > 0 else None
        slack_scale = n ** (-1.0 / 50.0)
        slack_floor = n ** 0.25
        for t in range(record.runtime - t1 + 1):
            observed = record.uninformed(t1 + t)
            predicted = 0.0 if log_base is None else n * math.exp(2.0 ** t * log_base)
            slack = observed * slack_scale + slack_floor
            ratio = abs(observed - predicted) / slack
            checked += 1
            if ratio > worst:
                worst = ratio
                worst_round = t1 + t
    return VerificationReport(
        name="recurrence",
        observed=worst,
        bound_or_target=1.0,
        passed=worst <= 1.0,
        metadata={"n": n, "t1": t1, "runtime": record.runtime,
                  "checked_rounds": checked, "worst_round": worst_round})


def recurrence_ensemble_report(paths: TrajectoryEnsemble,
                               threshold: float = 0.95) -> VerificationReport:
    """Fraction of runs on which the squaring recurrence fully holds."""
    holds = sum(1 for record in paths.records()
                if verify_recurrence(record).passed)
    fraction = holds / paths.runs
    return VerificationReport(
        name="recurrence-ensemble",
        observed=fraction,
        bound_or_target=threshold,
        passed=fraction >= threshold,
        metadata={"n": paths.n, "runs": paths.runs,
                  "master_seed": paths.master_seed})


@dataclass(frozen=True)
class EndgameSummary:
    """Event frequencies of the sub-sqrt(n) threshold round over an ensemble."""

    n: int
    runs: int
    freq_before_above: float
    freq_at_below: float
    freq_at_positive: float
    freq_after_zero: float
    freq_finish: float
    freq_all_events: float
    all_event_count: int
    runtime_identity_violations: int
    tprime_match_rate: float
    tprime_evaluated: int
    ratio_at_mean: float
    ratio_before_median: float

    def reports(self, finish_threshold: float = 0.9) -> List[VerificationReport]:
        return [
            VerificationReport(
                name="endgame-finish",
                observed=self.freq_finish,
                bound_or_target=finish_threshold,
                passed=self.freq_finish >= finish_threshold,
                metadata={"n": self.n, "runs": self.runs}),
            VerificationReport(
                name="endgame-runtime-identity",
                observed=float(self.runtime_identity_violations),
                bound_or_target=0.0,
                passed=self.runtime_identity_violations == 0,
                metadata={"n": self.n, "runs": self.runs,
                          "all_event_count": self.all_event_count}),
        ]


def verify_endgame(paths: TrajectoryEnsemble) -> EndgameSummary:
    """Aggregate per-run endgame diagnostics into event frequencies.

    Also reports how often the threshold round matches the closed-form
    prediction solved from the squaring recurrence at the base round (no
    pass/fail attached; the prediction carries an unquantified error term).
    """
    n = paths.n
    t1 = recurrence_depth(n)
    counts = {"before": 0, "below": 0, "positive": 0, "zero": 0,
              "finish": 0, "all": 0}
    identity_violations = 0
    tprime_matches = 0
    tprime_evaluated = 0
    ratio_at = []
    ratio_before = []
    for record in paths.records():
        stats = endgame_stats(record)
        counts["before"] += stats.before_above_root
        counts["below"] += stats.at_below_root
        counts["positive"] += stats.at_positive
        counts["zero"] += stats.after_zero
        counts["finish"] += stats.at_positive and stats.after_zero
        counts["all"] += stats.all_events
        if stats.all_events and not stats.finished_next_round:
            identity_violations += 1
        ratio_at.append(stats.ratio_at)
        if stats.u_before is not None:
            ratio_before.append(stats.ratio_before)
        if t1 <= record.runtime:
            base = record.uninformed(t1)
            if base > 0:
                tprime_evaluated += 1
                tp = math.log2(0.5 * math.log(n)) - math.log2(math.log(n / base))
                if math.floor(tp + t1 + 1) == stats.t_threshold:
                    tprime_matches += 1
    runs = paths.runs
    return EndgameSummary(
        n=n, runs=runs,
        freq_before_above=counts["before"] / runs,
        freq_at_below=counts["below"] / runs,
        freq_at_positive=counts["positive"] / runs,
        freq_after_zero=counts["zero"] / runs,
        freq_finish=counts["finish"] / runs,
        freq_all_events=counts["all"] / runs,
        all_event_count=counts["all"],
        runtime_identity_violations=identity_violations,
        tprime_match_rate=tprime_matches / tprime_evaluated if tprime_evaluated else 0.0,
        tprime_evaluated=tprime_evaluated,
        ratio_at_mean=float(np.mean(ratio_at)),
        ratio_before_median=float(np.median(ratio_before)) if ratio_before else float("inf"))


def runtime_shift(n: int) -> float:
    """Centering constant log2(n) + log2(ln n) of the runtime law."""
    if n < 2:
        raise ValueError("population must be >= 2")
    return math.log2(n) + math.log2(math.log(n))


def sup_tail_distance(runtime_dist: EmpiricalDistribution,
                      x_dist: EmpiricalDistribution, n: int) -> float:
    """Sup over integers of |runtime tail - shifted-limit lattice tail|.

    The limit side is P(ceil(c + X) >= k) = P(X > k - 1 - c) with
    c = log2(n) + log2(ln n) and the strict tie convention; the sup ranges
    over every integer where either tail is strictly between 0 and 1.
    """
    c = runtime_shift(n)
    k_lo = math.floor(min(runtime_dist.min, c + x_dist.min))
    k_hi = math.ceil(max(runtime_dist.max, c + x_dist.max)) + 1
    worst = 0.0
    for k in range(k_lo, k_hi + 1):
        run_tail = runtime_dist.ecdf_ge(k)
        lim_tail = 1.0 - x_dist.ecdf_le(k - 1 - c)
        if 0.0 < run_tail < 1.0 or 0.0 < lim_tail < 1.0:
            worst = max(worst, abs(run_tail - lim_tail))
    return worst


def tail_comparison_rows(runtime_dist: EmpiricalDistribution,
                         x_dist: EmpiricalDistribution, n: int
                         ) -> List[Tuple[int, float, float]]:
    """Rows (k, runtime tail, limit tail) over the informative integer range."""
    c = runtime_shift(n)
    k_lo = math.floor(min(runtime_dist.min, c + x_dist.min))
    k_hi = math.ceil(max(runtime_dist.max, c + x_dist.max)) + 1
    rows = []
    for k in range(k_lo, k_hi + 1):
        run_tail = runtime_dist.ecdf_ge(k)
        lim_tail = 1.0 - x_dist.ecdf_le(k - 1 - c)
        if 0.0 < run_tail < 1.0 or 0.0 < lim_tail < 1.0:
            rows.append((k, run_tail, lim_tail))
    return rows


@dataclass(frozen=True)
class ResidualPoint:
    """Mean-runtime residual against the centering constant at one n."""

    n: int
    runs: int
    mean: float
    se: float
    residual: float


def runtime_residual_scan(n_values: Sequence[int], runs: int,
                          master_seed: int) -> List[ResidualPoint]:
    """Monte Carlo residuals mean(runtime) - log2(n) - log2(ln n) per n."""
    points = []
    for n in n_values:
        if n < 3:
            raise ValueError("population must be >= 3 for the centering constant")
        result = ensemble(n, runs, master_seed)
        se = math.sqrt(result.variance / runs)
        points.append(ResidualPoint(
            n=n, runs=runs, mean=result.mean, se=se,
            residual=result.mean - runtime_shift(n)))
    return points


@dataclass(frozen=True)
class TailPoint:
    """Empirical two-sided tail of the centered runtime at offset r."""

    r: float
    count: int
    prob: float
    log_prob: Optional[float]
    censored: bool


@dataclass(frozen=True)
class TailDecayReport:
    """Tail probabilities at increasing offsets with a fitted decay rate."""

    mean: float
    points: List[TailPoint]
    monotone: bool
    alpha_hat: Optional[float]
    intercept: Optional[float]

    def report(self) -> VerificationReport:
        observed = self.alpha_hat if self.alpha_hat is not None else float("nan")
        passed = self.monotone and (self.alpha_hat is None or self.alpha_hat > 0.0)
        return VerificationReport(
            name="tail-decay",
            observed=observed,
            bound_or_target=0.0,
            passed=passed,
            metadata={
                "mean": self.mean,
                "monotone": self.monotone,
                "intercept": self.intercept,
                "points": [
                    {"r": p.r, "count": p.count, "prob": p.prob,
                     "censored": p.censored} for p in self.points],
            })


def tail_decay_check(runtime_dist: EmpiricalDistribution,
                     r_values: Sequence[float]) -> TailDecayReport:
    """Empirical P(|runtime - mean| >= r) at the requested offsets.

    Offsets with zero observed count are reported as censored, not failed.
    Monotonicity is asserted strictly between consecutive resolved offsets;
    the decay rate is a least-squares slope over resolved offsets r >= 1.
    """
    mean = runtime_dist.mean()
    deviations = np.abs(runtime_dist.samples - mean)
    total = runtime_dist.count
    points = []
    for r in sorted(float(r) for r in r_values):
        count = int(np.count_nonzero(deviations >= r))
        prob = count / total
        points.append(TailPoint(
            r=r, count=count, prob=prob,
            log_prob=math.log(prob) if count > 0 else None,
            censored=count == 0))
    resolved = [p for p in points if not p.censored]
    monotone = all(b.prob < a.prob for a, b in zip(resolved, resolved[1:]))
    fit_points = [p for p in resolved if p.r >= 1.0]
    alpha_hat = None
    intercept = None
    if len(fit_points) >= 2:
        xs = np.array([p.r for p in fit_points])
        ys = np.array([p.log_prob for p in fit_points])
        slope, intercept_fit = np.polyfit(xs, ys, 1)
        alpha_hat = -float(slope)
        intercept = float(intercept_fit)
    return TailDecayReport(mean=mean, points=points, monotone=monotone,
                           alpha_hat=alpha_hat, intercept=intercept)
