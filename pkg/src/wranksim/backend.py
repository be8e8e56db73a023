"""Numba/NumPy backend selection for the hot kernels.

The numeric kernels in :mod:`wranksim.kernels` are written once, in the
NumPy subset numba can compile. By default they are JIT-compiled with
``numba.njit``; setting the environment variable ``WRANKSIM_NO_NUMBA`` to a
non-empty value other than ``0``/``false`` (or running without numba
installed) selects the pure-NumPy interpretation of the exact same source.

``benchmarks/bench_backends.py`` compares the two paths.
"""

import os

ENV_FLAG = "WRANKSIM_NO_NUMBA"


def _numba_disabled() -> bool:
    value = os.environ.get(ENV_FLAG, "").strip().lower()
    return value not in ("", "0", "false")


_numba = None
if not _numba_disabled():
    try:
        import numba as _numba
    except ImportError:  # pragma: no cover - exercised only without numba
        _numba = None

USING_NUMBA = _numba is not None

if USING_NUMBA:
    from numba.typed import List as KernelList

    def njit(func):
        """Compile ``func`` with numba (cached across processes)."""
        return _numba.njit(cache=True)(func)

else:
    KernelList = list

    def njit(func):
        """Identity decorator: run the kernel as plain NumPy code."""
        return func


def make_array_list(arrays):
    """Container for a sequence of same-ndim float64 arrays, suitable for
    passing into kernels (``numba.typed.List`` under numba, ``list``
    otherwise)."""
    out = KernelList()
    for a in arrays:
        out.append(a)
    return out
