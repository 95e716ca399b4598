"""The two kernel flavors must be interchangeable, not merely close.

Every sampling entry point is run once per backend with the same seed and the
outputs are compared for exact equality.  Sizes are kept small; the fallback
kernels pay a fresh RandomState per substream.
"""

import numpy as np
import pytest

import rumor
from rumor._compat import HAS_NUMBA, apply_thread_cap, backend_name

pytestmark = pytest.mark.skipif(
    not HAS_NUMBA, reason="backend comparison requires both flavors")


def _both_backends(monkeypatch, fn):
    monkeypatch.setenv("RUMOR_BACKEND", "numba")
    compiled = fn()
    monkeypatch.setenv("RUMOR_BACKEND", "numpy")
    fallback = fn()
    return compiled, fallback


def test_runtime_ensembles_are_bit_identical(monkeypatch):
    a, b = _both_backends(
        monkeypatch, lambda: rumor.ensemble(4096, 300, 99).runtimes)
    assert np.array_equal(a, b)


def test_trajectory_ensembles_are_bit_identical(monkeypatch):
    def build():
        paths = rumor.trajectory_ensemble(2048, 100, 7)
        return paths.runtimes.copy(), paths.trajectories.copy()
    (rt_a, tr_a), (rt_b, tr_b) = _both_backends(monkeypatch, build)
    assert np.array_equal(rt_a, rt_b)
    assert np.array_equal(tr_a, tr_b)


def test_limit_samples_are_bit_identical(monkeypatch):
    a, b = _both_backends(
        monkeypatch, lambda: rumor.sample_neg_log2_h(14, 500, 42).samples)
    assert np.array_equal(a, b)


def test_checkpoints_are_bit_identical(monkeypatch):
    def build():
        points = rumor.martingale_checkpoints((3, 7, 12), 400, 5)
        return points[3], points[7], points[12]
    rows_a, rows_b = _both_backends(monkeypatch, build)
    for a, b in zip(rows_a, rows_b):
        assert np.array_equal(a, b)


def test_informed_counts_are_bit_identical(monkeypatch):
    a, b = _both_backends(
        monkeypatch, lambda: rumor.informed_counts(4096, 6, 400, 11))
    assert np.array_equal(a, b)


def test_backend_selection_flags(monkeypatch):
    monkeypatch.setenv("RUMOR_BACKEND", "numpy")
    assert backend_name() == "numpy"
    monkeypatch.setenv("RUMOR_BACKEND", "numba")
    assert backend_name() == "numba"
    monkeypatch.setenv("RUMOR_BACKEND", "auto")
    assert backend_name() == "numba"
    monkeypatch.delenv("RUMOR_BACKEND", raising=False)
    assert backend_name() == "numba"
    monkeypatch.setenv("RUMOR_BACKEND", "cuda")
    with pytest.raises(ValueError):
        backend_name()


def test_thread_cap_env(monkeypatch):
    import numba
    before = numba.get_num_threads()
    try:
        monkeypatch.setenv("RUMOR_THREADS", "1")
        apply_thread_cap()
        assert numba.get_num_threads() == 1
        monkeypatch.setenv("RUMOR_THREADS", "0")
        apply_thread_cap()  # 0 means automatic: leaves the pool alone
        assert numba.get_num_threads() == 1
        monkeypatch.setenv("RUMOR_THREADS", "-3")
        with pytest.raises(ValueError):
            apply_thread_cap()
    finally:
        numba.set_num_threads(before)
