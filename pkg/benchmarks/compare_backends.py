"""Benchmark the njit kernels against the RandomState fallback.

Runs the runtime-ensemble and limit-sampling kernels under both values of
``RUMOR_BACKEND``, asserts that the outputs are bit-identical (the fallback
is a correctness oracle for the compiled path, not an approximation), and
prints a timing table.  Usage: ``python benchmarks/compare_backends.py``.
"""

import os
import time

import numpy as np


def _timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


def main() -> None:
    import rumor
    from rumor._compat import HAS_NUMBA

    if not HAS_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    cases = [
        ("ensemble n=2^16, 2000 runs",
         lambda: rumor.ensemble(2 ** 16, 2000, master_seed=7).runtimes),
        ("trajectories n=2^16, 200 runs",
         lambda: rumor.trajectory_ensemble(2 ** 16, 200, master_seed=8).trajectories),
        ("limit t*=20, 20000 samples",
         lambda: rumor.sample_neg_log2_h(20, 20000, master_seed=9).samples),
    ]

    print(f"{'case':38s} {'numba':>10s} {'numpy':>10s} {'speedup':>9s}")
    for label, fn in cases:
        os.environ["RUMOR_BACKEND"] = "numba"
        fn()  # warm the compile cache before timing
        fast, t_nb = _timed(fn)
        os.environ["RUMOR_BACKEND"] = "numpy"
        slow, t_np = _timed(fn)
        os.environ.pop("RUMOR_BACKEND")
        if not np.array_equal(fast, slow):
            raise AssertionError(f"backend outputs differ for {label}")
        print(f"{label:38s} {t_nb:9.3f}s {t_np:9.3f}s {t_np / t_nb:8.1f}x")
    print("outputs bit-identical across backends")


if __name__ == "__main__":
    main()
