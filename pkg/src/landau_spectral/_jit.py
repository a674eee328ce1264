"""JIT backend selection.

The hot accumulation kernels are compiled with numba when it is importable
and the environment variable ``LANDAU_JIT`` is not set to ``0``.  Otherwise a
no-op ``njit`` is installed so the same source runs as plain Python/NumPy.
``benchmarks/bench_bilinear.py`` compares both paths.
"""

import os

JIT_ENABLED = os.environ.get("LANDAU_JIT", "1").lower() not in ("0", "false", "off")

if JIT_ENABLED:
    try:
        from numba import njit
    except ImportError:
        JIT_ENABLED = False

if not JIT_ENABLED:

    def njit(func=None, **kwargs):
        if func is not None:
            return func

        def wrapper(f):
            return f

        return wrapper
