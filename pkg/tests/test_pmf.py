"""Exact integer pmf container: validation, queries, moments, trimming."""

import numpy as np
import pytest

from rumor import CapacityError, ExactPmf


def test_validates_and_queries_a_hand_built_pmf():
    pmf = ExactPmf(support_offset=2, masses=np.array([0.25, 0.5, 0.25]))
    assert np.array_equal(pmf.support, [2, 3, 4])
    assert pmf.prob(2) == 0.25
    assert pmf.prob(3) == 0.5
    assert pmf.prob(1) == 0.0
    assert pmf.prob(5) == 0.0
    assert pmf.mean() == pytest.approx(3.0)
    assert pmf.second_moment() == pytest.approx(9.5)
    assert pmf.variance() == pytest.approx(0.5)


def test_rejects_negative_mass():
    with pytest.raises(ValueError):
        ExactPmf(support_offset=0, masses=np.array([0.5, -0.1, 0.6]))


def test_rejects_mass_that_does_not_sum_to_one():
    with pytest.raises(ValueError):
        ExactPmf(support_offset=0, masses=np.array([0.5, 0.4]))


def test_truncation_error_completes_the_total_mass():
    pmf = ExactPmf(support_offset=0, masses=np.array([0.6, 0.3]),
                   truncation_error=0.1)
    assert pmf.truncation_error == pytest.approx(0.1)
    with pytest.raises(ValueError):
        ExactPmf(support_offset=0, masses=np.array([0.6, 0.3]),
                 truncation_error=0.2)


def test_trimmed_drops_zero_margins_but_keeps_interior_zeros():
    pmf = ExactPmf(support_offset=0,
                   masses=np.array([0.0, 0.5, 0.0, 0.5, 0.0]))
    trimmed = pmf.trimmed()
    assert np.array_equal(trimmed.support, [1, 2, 3])
    assert np.array_equal(trimmed.masses, np.array([0.5, 0.0, 0.5]))
    assert trimmed.mean() == pmf.mean()


def test_capacity_error_is_a_value_error():
    assert issubclass(CapacityError, ValueError)
