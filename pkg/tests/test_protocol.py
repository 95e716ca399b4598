"""Simulator: exact transition law, runs, ensembles, exact DP, endgame."""

import math

import numpy as np
import pytest

import rumor
from rumor import (CapacityError, ProtocolState, RunRecord, endgame_stats,
                   ensemble, exact_informed_pmf, informed_counts,
                   initial_state, round_cap, run, step, substream_seeds,
                   trajectory_ensemble)


class _StuckRng:
    """Adversarial stream whose binomial draws never succeed."""

    def binomial(self, trials, p):
        return 0


def test_initial_state():
    state = initial_state(7)
    assert (state.n, state.informed, state.round) == (7, 1, 0)
    assert state.uninformed == 6


def test_state_validation():
    with pytest.raises(ValueError):
        ProtocolState(n=0, informed=1)
    with pytest.raises(ValueError):
        ProtocolState(n=5, informed=0)
    with pytest.raises(ValueError):
        ProtocolState(n=5, informed=6)
    with pytest.raises(ValueError):
        ProtocolState(n=5, informed=3, round=-1)


def test_full_information_is_absorbing():
    state = ProtocolState(n=9, informed=9, round=4)
    for denominator in ("n", "n-1"):
        nxt = step(state, np.random.RandomState(0), denominator)
        assert nxt.informed == 9
        assert nxt.round == 5


def test_single_uninformed_vertex_succeeds_half_the_time():
    rng = np.random.RandomState(321)
    state = ProtocolState(n=2, informed=1)
    trials = 20000
    successes = sum(step(state, rng).informed == 2 for _ in range(trials))
    se = math.sqrt(0.25 / trials)
    assert abs(successes / trials - 0.5) <= 4 * se


def test_one_round_law_for_four_vertices():
    pmf = exact_informed_pmf(4, 1)
    expected = {1: 27 / 64, 2: 27 / 64, 3: 9 / 64, 4: 1 / 64}
    assert pmf.support_offset == 1
    for k, p in expected.items():
        assert pmf.prob(k) == pytest.approx(p, rel=1e-13)


def test_exact_pmf_round_zero_is_a_point_mass():
    pmf = exact_informed_pmf(37, 0)
    assert pmf.support_offset == 1
    assert np.array_equal(pmf.masses, [1.0])


def test_exact_pmf_two_vertices_closed_form():
    # completion probability after t rounds is 1 - 2^-t
    for t in range(9):
        pmf = exact_informed_pmf(2, t)
        assert pmf.prob(2) == pytest.approx(1.0 - 0.5 ** t, rel=1e-12, abs=1e-15)


def test_exact_pmf_capacity_guard():
    with pytest.raises(CapacityError):
        exact_informed_pmf(2 ** 16 + 1, 1)
    with pytest.raises(CapacityError):
        exact_informed_pmf(64, 13)


def test_run_single_vertex_finishes_immediately():
    record = run(1, np.random.RandomState(0), keep_trajectory=True)
    assert record.runtime == 0
    assert np.array_equal(record.trajectory, [1])


def test_run_is_reproducible_from_its_stream():
    first = run(100, np.random.RandomState(5), keep_trajectory=True)
    second = run(100, np.random.RandomState(5), keep_trajectory=True)
    assert first.runtime == second.runtime
    assert np.array_equal(first.trajectory, second.trajectory)


def test_round_cap_values():
    assert round_cap(1) == 128
    assert round_cap(1023) == 704


def test_round_cap_aborts_a_stuck_stream():
    with pytest.raises(RuntimeError):
        run(4, _StuckRng())


def test_two_vertex_runtime_is_geometric():
    result = ensemble(2, 10 ** 6, 77)
    assert abs(result.mean - 2.0) <= 0.01
    freq = np.bincount(result.runtimes)
    for k in range(1, 6):
        p = 0.5 ** k
        se = math.sqrt(p * (1 - p) / result.runs)
        assert abs(freq[k] / result.runs - p) <= 4 * se


def test_mean_runtime_band_for_a_large_population():
    n = 2 ** 20
    result = ensemble(n, 10 ** 5, 88)
    center = math.log2(n) + math.log2(math.log(n))
    assert center <= result.mean <= center + 3.0


def test_single_vertex_ensemble_is_all_zero():
    result = ensemble(1, 100, 3)
    assert np.array_equal(result.runtimes, np.zeros(100, dtype=np.int64))


def test_ensemble_is_deterministic_and_prefix_stable():
    a = ensemble(512, 200, 12345)
    b = ensemble(512, 200, 12345)
    assert np.array_equal(a.runtimes, b.runtimes)
    # runs only ever extend the substream window, never reshuffle it
    longer = ensemble(512, 400, 12345)
    assert np.array_equal(longer.runtimes[:200], a.runtimes)


def test_ensemble_summary_matches_its_samples():
    result = ensemble(256, 500, 9)
    assert result.mean == pytest.approx(float(result.runtimes.mean()))
    assert result.variance == pytest.approx(float(result.runtimes.var(ddof=1)))
    assert result.min == int(result.runtimes.min())
    assert result.max == int(result.runtimes.max())
    assert np.array_equal(result.distribution.samples,
                          np.sort(result.runtimes.astype(np.float64)))


def test_substream_seeds_are_consecutive_and_wrap():
    seeds = substream_seeds(2 ** 32 - 1, 3)
    assert seeds.dtype == np.uint32
    assert list(seeds) == [2 ** 32 - 1, 0, 1]
    with pytest.raises(ValueError):
        substream_seeds(0, 0)


def test_run_record_validation():
    with pytest.raises(ValueError):
        RunRecord(n=3, runtime=1, trajectory=[2, 3])       # wrong start
    with pytest.raises(ValueError):
        RunRecord(n=3, runtime=1, trajectory=[1, 2])       # wrong end
    with pytest.raises(ValueError):
        RunRecord(n=3, runtime=2, trajectory=[1, 2])       # wrong length
    with pytest.raises(ValueError):
        RunRecord(n=3, runtime=2, trajectory=[1, 3, 3])    # early completion
    with pytest.raises(ValueError):
        RunRecord(n=3, runtime=2, trajectory=[1, 2, 1])    # decreasing
    record = RunRecord(n=3, runtime=2, trajectory=[1, 2, 3])
    assert record.uninformed(0) == 2
    assert record.uninformed(2) == 0
    assert record.uninformed(10) == 0
    with pytest.raises(ValueError):
        RunRecord(n=3, runtime=2).uninformed(0)


def test_trajectories_are_monotone_and_complete():
    paths = trajectory_ensemble(128, 50, 4242)
    for record in paths.records():
        assert record.trajectory[0] == 1
        assert record.trajectory[-1] == 128
        assert np.all(np.diff(record.trajectory) >= 0)


def test_trajectory_ensemble_matches_runtime_ensemble():
    paths = trajectory_ensemble(512, 100, 2024)
    flat = ensemble(512, 100, 2024)
    assert np.array_equal(paths.runtimes, flat.runtimes)
    # rows are padded with n past each completion round
    for r in range(paths.runs):
        rt = int(paths.runtimes[r])
        assert np.all(paths.trajectories[r, rt:] == 512)


def test_informed_counts_match_the_trajectory_column():
    paths = trajectory_ensemble(64, 200, 55)
    t = 2
    assert paths.trajectories.shape[1] > t
    counts = informed_counts(64, t, 200, 55)
    assert np.array_equal(counts, paths.trajectories[:, t])


@pytest.mark.parametrize("n", [2, 4, 16])
@pytest.mark.parametrize("t", [1, 2, 3])
def test_exact_law_matches_monte_carlo(n, t):
    runs = 10 ** 6
    counts = informed_counts(n, t, runs, 1000 + 17 * n + t)
    pmf = exact_informed_pmf(n, t)
    ecdf_num = np.cumsum(np.bincount(counts, minlength=n + 1))
    cdf = 0.0
    for k in pmf.support:
        cdf += pmf.prob(int(k))
        se = math.sqrt(max(cdf * (1.0 - cdf), 0.0) / runs)
        observed = ecdf_num[int(k)] / runs
        assert abs(observed - cdf) <= 4 * se + 1e-12, (n, t, int(k))


def test_conditional_mean_of_one_step():
    n, informed = 100, 37
    state = ProtocolState(n=n, informed=informed)
    rng = np.random.RandomState(2718)
    calls = 10 ** 5
    gains = np.array([step(state, rng).informed - informed
                      for _ in range(calls)])
    p = informed / n
    expected = (n - informed) * p
    se = math.sqrt((n - informed) * p * (1 - p) / calls)
    assert abs(gains.mean() - expected) <= 4 * se


def test_strict_neighbor_denominator():
    # with two vertices the lone uninformed one succeeds surely under n-1
    pmf = exact_informed_pmf(2, 1, denominator="n-1")
    assert pmf.prob(2) == pytest.approx(1.0)
    result = ensemble(2, 1000, 5, denominator="n-1")
    assert np.array_equal(result.runtimes, np.ones(1000, dtype=np.int64))
    with pytest.raises(ValueError):
        ensemble(2, 10, 5, denominator="half")


def test_endgame_hand_case_two_vertices():
    report = endgame_stats(RunRecord(n=2, runtime=1, trajectory=[1, 2]))
    assert report.t_threshold == 0
    assert report.u_before is None
    assert report.u_at == 1
    assert report.u_after == 0
    assert report.before_above_root      # vacuous at the start round
    assert report.at_below_root and report.at_positive and report.after_zero
    assert report.all_events
    assert report.finished_next_round
    assert math.isinf(report.ratio_before)
    assert report.ratio_at == pytest.approx(1 / math.sqrt(2))


def test_endgame_threshold_and_flags_on_a_synthetic_path():
    record = RunRecord(n=100, runtime=4, trajectory=[1, 5, 50, 91, 100])
    report = endgame_stats(record)
    assert report.t_threshold == 3
    assert (report.u_before, report.u_at, report.u_after) == (50, 9, 0)
    assert report.all_events
    assert report.finished_next_round
    assert report.ratio_before == pytest.approx(5.0)
    assert report.ratio_at == pytest.approx(0.9)


def test_endgame_threshold_comparisons_are_integer_exact():
    # u = 10 at n = 100 sits exactly on the boundary: 10^2 < 100 is false
    record = RunRecord(n=100, runtime=2, trajectory=[1, 90, 100])
    report = endgame_stats(record)
    assert report.t_threshold == 2
    assert report.u_at == 0
    assert not report.before_above_root  # 10^2 > 100 is false too
    assert not report.at_positive
    assert not report.finished_next_round


def test_endgame_requires_a_trajectory():
    with pytest.raises(ValueError):
        endgame_stats(RunRecord(n=4, runtime=3))
