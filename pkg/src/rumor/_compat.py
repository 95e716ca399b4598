"""Optional numba acceleration and thread-control helpers.

The heavy Monte Carlo kernels exist in two flavors: njit-compiled loops that
draw variates through the algorithms in ``_rng`` (bit-compatible with numpy's
legacy generator), and pure-numpy loops that call ``RandomState`` directly.
Both flavors produce identical output for identical seeds.

Environment flags:

``RUMOR_BACKEND``
    ``numba`` (default when importable), ``numpy`` to force the fallback,
    or ``auto``.
``RUMOR_THREADS``
    Caps kernel parallelism; ``0`` or unset means automatic.
"""

import os

try:
    import numba
    from numba import njit, prange

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - CI installs numba; fallback kept honest via RUMOR_BACKEND
    numba = None
    HAS_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


def backend_name() -> str:
    """Return the active kernel backend, ``"numba"`` or ``"numpy"``."""
    forced = os.environ.get("RUMOR_BACKEND", "").strip().lower()
    if forced == "numpy":
        return "numpy"
    if forced == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("RUMOR_BACKEND=numba but numba is not importable")
        return "numba"
    if forced not in ("", "auto"):
        raise ValueError(f"unknown RUMOR_BACKEND value: {forced!r}")
    return "numba" if HAS_NUMBA else "numpy"


def use_numba() -> bool:
    return backend_name() == "numba"


def apply_thread_cap() -> None:
    """Apply the ``RUMOR_THREADS`` cap to numba's thread pool (0 = automatic)."""
    if not HAS_NUMBA:
        return
    raw = os.environ.get("RUMOR_THREADS", "").strip()
    cap = int(raw) if raw else 0
    if cap < 0:
        raise ValueError("RUMOR_THREADS must be >= 0")
    if cap:
        numba.set_num_threads(min(cap, numba.config.NUMBA_NUM_THREADS))
