"""Branching chain: moments, exact law, coupled checkpoints, convergence."""

import math

import numpy as np
import pytest

import rumor
from rumor import (BranchingSample, CapacityError, EmpiricalDistribution,
                   branching_moments, exact_branching_pmf,
                   martingale_checkpoints, sample_branching,
                   sample_neg_log2_h)

from conftest import CHECKPOINT_ROUNDS


def test_sample_at_generation_zero_is_the_root():
    sample = sample_branching(0, np.random.RandomState(0))
    assert (sample.t, sample.j, sample.h) == (0, 1, 1.0)
    with pytest.raises(ValueError):
        sample_branching(-1, np.random.RandomState(0))


def test_sample_validation():
    with pytest.raises(ValueError):
        BranchingSample(t=-1, j=1, h=1.0)
    with pytest.raises(ValueError):
        BranchingSample(t=0, j=0, h=0.0)


def test_closed_form_moments():
    assert branching_moments(0) == (1.0, 1.0)
    assert branching_moments(1) == (2.0, 5.0)
    assert branching_moments(3) == (8.0, 92.0)
    assert branching_moments(8) == (256.0, 98176.0)
    with pytest.raises(ValueError):
        branching_moments(-1)


def test_moments_overflow_beyond_double_range():
    with pytest.raises(OverflowError):
        branching_moments(600)


def test_exact_law_at_generation_zero_and_one():
    root = exact_branching_pmf(0)
    assert root.support_offset == 1
    assert np.array_equal(root.masses, [1.0])
    one = exact_branching_pmf(1)
    # value k is the root plus a Poisson(1) increment of k - 1
    for k in range(1, 11):
        expected = math.exp(-1.0) / math.factorial(k - 1)
        assert one.prob(k) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("t", range(6))
def test_exact_law_matches_closed_form_moments(t):
    pmf = exact_branching_pmf(t)
    mean, second = branching_moments(t)
    assert float(pmf.masses.sum()) + pmf.truncation_error == pytest.approx(1.0, abs=1e-12)
    assert pmf.truncation_error < 1e-9
    assert pmf.mean() == pytest.approx(mean, rel=1e-7)
    assert pmf.second_moment() == pytest.approx(second, rel=1e-7)


def test_exact_law_guards():
    with pytest.raises(CapacityError):
        exact_branching_pmf(9)
    with pytest.raises(ValueError):
        exact_branching_pmf(2, tail_tol=0.0)
    with pytest.raises(ValueError):
        exact_branching_pmf(2, tail_tol=1.0)


def test_limit_kernel_replays_a_plain_randomstate_walk():
    seeds = rumor.substream_seeds(424242, 50)
    manual = []
    for seed in seeds:
        rng = np.random.RandomState(int(seed))
        j = 1
        for _ in range(9):
            j += int(rng.poisson(j))
        manual.append(9.0 - np.log2(float(j)))
    dist = sample_neg_log2_h(9, 50, 424242)
    assert np.array_equal(dist.samples, np.sort(manual))


def test_checkpoints_replay_the_same_paths():
    points = martingale_checkpoints((0, 4, 9), 50, 424242)
    seeds = rumor.substream_seeds(424242, 50)
    for row, seed in enumerate(seeds):
        rng = np.random.RandomState(int(seed))
        j = 1
        values = {0: 1.0}
        for t in range(1, 10):
            j += int(rng.poisson(j))
            values[t] = float(j) * 2.0 ** (-t)
        assert points[0][row] == values[0]
        assert points[4][row] == values[4]
        assert points[9][row] == values[9]


def test_checkpoint_cutoff_column_matches_the_limit_sampler():
    # same draws, but log2 applied before vs after the 2^-t scaling: the
    # results may differ in the last bit, never more
    points = martingale_checkpoints((3, 9), 200, 777)
    direct = sample_neg_log2_h(9, 200, 777)
    transformed = np.sort(-np.log2(points[9]))
    np.testing.assert_allclose(transformed, direct.samples, rtol=0, atol=1e-12)


def test_checkpoint_validation_and_deduplication():
    with pytest.raises(ValueError):
        martingale_checkpoints((), 10, 0)
    with pytest.raises(ValueError):
        martingale_checkpoints((-1, 3), 10, 0)
    points = martingale_checkpoints((5, 3, 5), 10, 0)
    assert sorted(points) == [3, 5]


def test_sampler_validation():
    with pytest.raises(ValueError):
        sample_neg_log2_h(-1, 10, 0)
    with pytest.raises(ValueError):
        sample_neg_log2_h(5, 0, 0)


def test_martingale_moments_at_every_checkpoint(checkpoints):
    for t in CHECKPOINT_ROUNDS:
        values = checkpoints[t]
        exact_var = 0.5 - 2.0 ** (-t - 1)
        assert abs(values.mean() - 1.0) < 0.005, t
        assert abs(values.var(ddof=1) - exact_var) < 0.005, t


def test_distributional_gaps_shrink_along_the_martingale(checkpoints):
    # coupled paths expose the Cauchy property far below Monte Carlo noise
    gaps = []
    for t in (8, 12, 16, 20, 24):
        a = EmpiricalDistribution.from_samples(checkpoints[t])
        b = EmpiricalDistribution.from_samples(checkpoints[t + 2])
        gaps.append(a.ks_distance(b))
    assert all(later < earlier for earlier, later in zip(gaps, gaps[1:]))


def test_cutoff_generation_is_saturated(checkpoints):
    # moving the cutoff from 24 to 28 no longer moves the law measurably
    a = EmpiricalDistribution.from_samples(checkpoints[24])
    b = EmpiricalDistribution.from_samples(checkpoints[28])
    assert a.ks_distance(b) < 5e-4
