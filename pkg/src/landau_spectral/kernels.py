"""Hot numeric kernels with a numba fast path and a pure-NumPy fallback.

The single performance-critical inner loop of the package is the sparse
trilinear gather/scatter that applies the precomputed coupling stencil:

    out[tgt[i]] += coef[i] * f[drv[i]] * g[src[i]]

It runs four times per exponential Runge-Kutta stage, every step.  The numba
variant is selected by default; set ``LANDAU_JIT=0`` to force the NumPy path
(see ``_jit.py``).  Both variants are importable at all times so they can be
benchmarked against each other.
"""

import numpy as np

from ._jit import JIT_ENABLED, njit


@njit(cache=True)
def _accumulate_loop(out, coef, tgt, src, drv, f, g):
    for i in range(coef.shape[0]):
        out[tgt[i]] += coef[i] * f[drv[i]] * g[src[i]]


def accumulate_numba(out, coef, tgt, src, drv, f, g):
    """Scatter-accumulate the coupling stencil (numba loop)."""
    _accumulate_loop(out, coef, tgt, src, drv, f, g)


def accumulate_numpy(out, coef, tgt, src, drv, f, g):
    """Scatter-accumulate the coupling stencil (vectorized fallback).

    np.add.at handles repeated target indices, which a plain fancy-index
    assignment would silently drop.
    """
    np.add.at(out, tgt, coef * f[drv] * g[src])


accumulate = accumulate_numba if JIT_ENABLED else accumulate_numpy
