#!/usr/bin/env python3
"""Micro-benchmark: numba kernels vs the pure-numpy fallback paths.

Covers the two hot loops: the characteristic-function quadrature behind the
detection probabilities, and the per-trial Monte Carlo detection statistic.
Run with ISAC_NUMBA=0 to check the fallback alone.

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from isacopt import _imhof
from isacopt.backend import USE_NUMBA


def timeit(fn, repeat):
    fn()  # warm (and trigger jit compilation)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def bench_imhof():
    cases = {
        "detection null": (74.5, [0.2381], [300.0], [192.0]),
        "detection alt": (74.5, [0.2381], [300.0], [390.0]),
        "small dof": (0.693, [0.5], [2.0], [0.0]),
        "near-degenerate": (53800.0, [0.00125], [300.0], [4.3e7]),
    }
    print(f"{'imhof cdf':<18} {'numpy':>12} {'numba':>12} {'speedup':>9} {'agree':>10}")
    for name, (x, w, dof, nc) in cases.items():
        w = np.array(w)
        dof = np.array(dof)
        nc = np.array(nc)
        t_np = timeit(lambda: _imhof.imhof_cdf_numpy(x, w, dof, nc, 1e-10, 10 ** 6), 20)
        v_np = _imhof.imhof_cdf_numpy(x, w, dof, nc, 1e-10, 10 ** 6)[0]
        if USE_NUMBA:
            t_nb = timeit(lambda: _imhof.imhof_cdf(x, w, dof, nc, 1e-10, 10 ** 6), 20)
            v_nb = _imhof.imhof_cdf(x, w, dof, nc, 1e-10, 10 ** 6)[0]
            print(f"{name:<18} {t_np * 1e6:>10.1f}us {t_nb * 1e6:>10.1f}us "
                  f"{t_np / t_nb:>8.1f}x {abs(v_np - v_nb):>10.1e}")
        else:
            print(f"{name:<18} {t_np * 1e6:>10.1f}us {'n/a':>12} {'':>9} {'':>10}")


def bench_detection_stat():
    rng = np.random.default_rng(0)
    y = rng.standard_normal((4096, 2, 150))
    mu = rng.standard_normal((4096, 2, 150)) * 0.3
    sig = np.array([1.3, 1.3])
    print(f"\n{'mc statistic':<18} {'numpy':>12} {'numba':>12} {'speedup':>9} {'agree':>10}")
    t_np = timeit(lambda: _imhof.detection_stat_numpy(y, mu, sig), 30)
    v_np = _imhof.detection_stat_numpy(y, mu, sig)
    if USE_NUMBA:
        t_nb = timeit(lambda: _imhof.detection_stat(y, mu, sig), 30)
        v_nb = _imhof.detection_stat(y, mu, sig)
        print(f"{'4096x2x150':<18} {t_np * 1e3:>10.2f}ms {t_nb * 1e3:>10.2f}ms "
              f"{t_np / t_nb:>8.1f}x {np.max(np.abs(v_np - v_nb)):>10.1e}")
    else:
        print(f"{'4096x2x150':<18} {t_np * 1e3:>10.2f}ms {'n/a':>12}")


if __name__ == "__main__":
    print(f"numba backend active: {USE_NUMBA}")
    bench_imhof()
    bench_detection_stat()
