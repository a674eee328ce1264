"""Benchmark the coupling-stencil apply kernel: numba njit vs NumPy add.at.

The apply runs four times per ETDRK4 stage, so it dominates long
integrations.  Run with default settings for the compiled path and rerun
with LANDAU_JIT=0 to force the fallback; or just run this script, which
times both callables directly.

    python benchmarks/bench_bilinear.py [--truncation N] [--repeats R]
"""

import argparse
import time

import numpy as np

from landau_spectral.coupling import build_tensor
from landau_spectral.kernels import accumulate_numba, accumulate_numpy


def bench(fn, tensor, f, g, repeats):
    out = np.zeros(len(f), dtype=np.complex128)
    fn(out, tensor.coef, tensor.tgt, tensor.src, tensor.drv, f, g)  # warm-up / compile
    best = np.inf
    for _ in range(repeats):
        out[:] = 0
        t0 = time.perf_counter()
        fn(out, tensor.coef, tensor.tgt, tensor.src, tensor.drv, f, g)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--truncation", type=int, default=20)
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    tensor = build_tensor(args.truncation)
    n = int(tensor.tgt.max()) + 1
    rng = np.random.default_rng(0)
    f = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    g = rng.standard_normal(n) + 1j * rng.standard_normal(n)

    t_numba, out_a = bench(accumulate_numba, tensor, f, g, args.repeats)
    t_numpy, out_b = bench(accumulate_numpy, tensor, f, g, args.repeats)
    diff = float(np.max(np.abs(out_a - out_b)))

    print(f"truncation N={args.truncation}: {len(tensor)} stencil entries, {n} modes")
    print(f"numba njit loop : {t_numba * 1e6:10.1f} us/apply")
    print(f"numpy add.at    : {t_numpy * 1e6:10.1f} us/apply")
    print(f"speedup         : {t_numpy / t_numba:10.1f}x")
    print(f"max |difference|: {diff:.3e}")


if __name__ == "__main__":
    main()
