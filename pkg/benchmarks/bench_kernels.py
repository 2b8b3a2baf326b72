#!/usr/bin/env python3
"""Benchmark the jitted kernels against their pure-numpy fallbacks.

Times both implementations of each hot kernel on representative workloads
(the sizes the experiments actually use) and prints a speedup table.
Run after any kernel change:

    python benchmarks/bench_kernels.py
"""

import math
import time

import numpy as np

from hklab import accel
from hklab.kernels import (
    _conv_mod_numpy,
    _enum_canonical_numpy,
    _phase_poly_sums_numpy,
)

if accel.HAVE_NUMBA:
    from hklab.kernels import (
        _conv_mod_2d_numba,
        _enum_canonical_numba,
        _phase_poly_sums_numba,
    )


def timeit(fn, *args, repeat=3):
    best = math.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_phase_sums(rows):
    rng = np.random.default_rng(0)
    coeffs = np.ascontiguousarray(rng.random((500, 3)))
    n = 10_000
    if accel.HAVE_NUMBA:
        _phase_poly_sums_numba(coeffs[:2], 0, 10)  # compile
        t_nb, a = timeit(_phase_poly_sums_numba, coeffs, 0, n)
    else:
        t_nb, a = math.inf, None
    t_np, b = timeit(_phase_poly_sums_numpy, coeffs, 0, n)
    if a is not None:
        assert np.abs(a - b).max() < 1e-4 * n
    rows.append(("phase sums (500 x 10^4 terms, k=3)", t_nb, t_np))

    # hill climbing evaluates one point at a time: per-step overhead dominates
    one = coeffs[:1]

    def numba_many():
        for _ in range(100):
            _phase_poly_sums_numba(one, 0, n)

    def numpy_many():
        for _ in range(100):
            _phase_poly_sums_numpy(one, 0, n)

    if accel.HAVE_NUMBA:
        t_nb, _ = timeit(numba_many, repeat=1)
    else:
        t_nb = math.inf
    t_np, _ = timeit(numpy_many, repeat=1)
    rows.append(("phase sums (100 single points, 10^4 terms)", t_nb, t_np))


def bench_enumeration(rows):
    t, lo, hi, k = 3, 0, 140, 2
    vals = np.arange(lo, hi + 1, dtype=np.int64)
    powtab = np.stack([vals ** j for j in range(1, k + 1)], axis=1)
    facts = np.array([math.factorial(i) for i in range(t + 1)], dtype=np.int64)
    total = math.comb(hi - lo + t, t)

    def run_numba():
        keys = np.empty((total, k), dtype=np.int64)
        mult = np.empty(total, dtype=np.int64)
        _enum_canonical_numba(t, lo, hi, powtab, facts, keys, mult)
        return keys, mult

    if accel.HAVE_NUMBA:
        run_numba()  # compile
        t_nb, a = timeit(run_numba)
    else:
        t_nb, a = math.inf, None
    t_np, b = timeit(_enum_canonical_numpy, t, lo, hi, powtab, facts)
    if a is not None:
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    rows.append((f"canonical enumeration ({total} tuples, k=2)", t_nb, t_np))


def bench_convolution(rows):
    m = 243  # 3^5, a typical counting modulus
    rng = np.random.default_rng(1)
    H = rng.integers(0, 50, size=(m, m)).astype(np.int64)
    shifts = np.array([[(x) % m, (x * x) % m] for x in range(m)],
                      dtype=np.int64)
    if accel.HAVE_NUMBA:
        _conv_mod_2d_numba(H[:4, :4].copy(), shifts[:2] % 4)  # compile
        t_nb, a = timeit(_conv_mod_2d_numba, H, shifts)
    else:
        t_nb, a = math.inf, None
    t_np, b = timeit(_conv_mod_numpy, H, shifts)
    if a is not None:
        assert np.array_equal(a, b)
    rows.append((f"modular convolution step (m={m}, k=2)", t_nb, t_np))


def main():
    print(f"numba available: {accel.HAVE_NUMBA}; "
          f"selected path: {'numba' if accel.USE_NUMBA else 'numpy'} "
          f"(HK_NO_NUMBA toggles)")
    rows = []
    bench_phase_sums(rows)
    bench_enumeration(rows)
    bench_convolution(rows)
    width = max(len(r[0]) for r in rows)
    print(f"\n{'kernel'.ljust(width)}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for name, t_nb, t_np in rows:
        speed = t_np / t_nb if t_nb > 0 and math.isfinite(t_nb) else float("nan")
        nb = f"{t_nb * 1e3:9.2f}ms" if math.isfinite(t_nb) else "       n/a"
        print(f"{name.ljust(width)}  {nb}  {t_np * 1e3:9.2f}ms  {speed:7.1f}x")


if __name__ == "__main__":
    main()
