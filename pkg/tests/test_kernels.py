"""Both kernel paths must compute the same values in the same order."""

import collections
import itertools
import math

import numpy as np
import pytest

from hklab import accel
from hklab.kernels import (
    _conv_mod_numpy,
    _enum_canonical_numpy,
    _phase_poly_sums_numpy,
    canonical_powersum_run,
    conv_mod,
    phase_poly_sums,
)

if accel.HAVE_NUMBA:
    from hklab.kernels import (
        _conv_mod_2d_numba,
        _enum_canonical_numba,
        _phase_poly_sums_numba,
    )


def _direct_phase_sum(coeffs, u0, u1):
    out = []
    for row in coeffs:
        acc = 0j
        for u in range(u0, u1 + 1):
            t = sum(c * float(u) ** (j + 1) for j, c in enumerate(row))
            acc += np.exp(2j * np.pi * (t % 1.0))
        out.append(acc)
    return np.array(out)


def test_phase_poly_sums_matches_direct():
    rng = np.random.default_rng(0)
    coeffs = rng.random((8, 3))
    got = phase_poly_sums(coeffs, 0, 25)
    want = _direct_phase_sum(coeffs, 0, 25)
    assert np.abs(got - want).max() < 1e-10


def test_phase_poly_sums_negative_range():
    rng = np.random.default_rng(1)
    coeffs = rng.random((4, 2))
    got = phase_poly_sums(coeffs, -9, 14)
    want = _direct_phase_sum(coeffs, -9, 14)
    assert np.abs(got - want).max() < 1e-9


def test_phase_poly_sums_empty_range():
    assert phase_poly_sums(np.ones((3, 2)), 5, 4).tolist() == [0, 0, 0]


def test_phase_poly_sums_rejects_nonfinite():
    with pytest.raises(ValueError):
        phase_poly_sums(np.array([[np.nan]]), 0, 3)


@pytest.mark.skipif(not accel.HAVE_NUMBA, reason="numba unavailable")
def test_phase_paths_agree_small_range():
    rng = np.random.default_rng(2)
    coeffs = np.ascontiguousarray(rng.random((6, 3)))
    a = _phase_poly_sums_numba(coeffs, 0, 50)
    b = _phase_poly_sums_numpy(coeffs, 0, 50)
    # difference-table init rounding amplifies ~ n^k ulp(table)
    assert np.abs(a - b).max() < 1e-7


@pytest.mark.skipif(not accel.HAVE_NUMBA, reason="numba unavailable")
def test_phase_paths_agree_large_range():
    rng = np.random.default_rng(3)
    coeffs = np.ascontiguousarray(rng.random((3, 3)))
    n = 10_000
    a = _phase_poly_sums_numba(coeffs, 0, n)
    b = _phase_poly_sums_numpy(coeffs, 0, n)
    # n^k eps phase drift, summed over n unimodular terms
    assert np.abs(a - b).max() < 1e-5 * (n + 1)


def _reference_histogram(t, lo, hi, k):
    ref = collections.Counter()
    for tup in itertools.product(range(lo, hi + 1), repeat=t):
        ref[tuple(sum(v ** j for v in tup) for j in range(1, k + 1))] += 1
    return ref


@pytest.mark.parametrize("t,lo,hi,k", [(1, 0, 6, 2), (2, 1, 5, 3), (3, 0, 4, 2),
                                       (4, 0, 3, 2)])
def test_canonical_run_covers_ordered_tuples(t, lo, hi, k):
    keys, mult = canonical_powersum_run(t, lo, hi, k)
    mine = collections.Counter()
    for kk, mm in zip(keys, mult):
        mine[tuple(int(v) for v in kk)] += int(mm)
    assert mine == _reference_histogram(t, lo, hi, k)
    assert int(mult.sum()) == (hi - lo + 1) ** t


def test_canonical_run_coefficient_scaling():
    keys, mult = canonical_powersum_run(2, 0, 3, 2, coeff=-1)
    assert keys.min() <= -1
    assert int(mult.sum()) == 16


def test_canonical_run_empty_tuple():
    keys, mult = canonical_powersum_run(0, 0, 5, 3)
    assert keys.shape == (1, 3) and keys.sum() == 0 and mult[0] == 1


@pytest.mark.skipif(not accel.HAVE_NUMBA, reason="numba unavailable")
def test_enum_paths_agree():
    t, lo, hi, k = 3, 0, 7, 3
    vals = np.arange(lo, hi + 1, dtype=np.int64)
    powtab = np.stack([vals ** j for j in range(1, k + 1)], axis=1)
    facts = np.array([math.factorial(i) for i in range(t + 1)], dtype=np.int64)
    total = math.comb(hi - lo + t, t)
    keys = np.empty((total, k), dtype=np.int64)
    mult = np.empty(total, dtype=np.int64)
    n = _enum_canonical_numba(t, lo, hi, powtab, facts, keys, mult)
    k2, m2 = _enum_canonical_numpy(t, lo, hi, powtab, facts)
    assert n == total == len(k2)
    assert np.array_equal(keys[:n], k2)
    assert np.array_equal(mult[:n], m2)


def test_conv_mod_matches_reference():
    rng = np.random.default_rng(4)
    H = rng.integers(0, 5, size=(7, 7)).astype(np.int64)
    shifts = rng.integers(0, 7, size=(11, 2)).astype(np.int64)
    got = conv_mod(H, shifts)
    want = np.zeros_like(H)
    for a, b in shifts:
        for i in range(7):
            for j in range(7):
                want[(i + a) % 7, (j + b) % 7] += H[i, j]
    assert np.array_equal(got, want)


@pytest.mark.skipif(not accel.HAVE_NUMBA, reason="numba unavailable")
def test_conv_paths_agree_2d_3d():
    rng = np.random.default_rng(5)
    H2 = rng.integers(0, 4, size=(6, 6)).astype(np.int64)
    sh2 = rng.integers(0, 6, size=(5, 2)).astype(np.int64)
    assert np.array_equal(_conv_mod_2d_numba(H2, sh2), _conv_mod_numpy(H2, sh2))
    H3 = rng.integers(0, 4, size=(4, 4, 4)).astype(np.int64)
    sh3 = rng.integers(0, 4, size=(5, 3)).astype(np.int64)
    assert np.array_equal(conv_mod(H3, sh3), _conv_mod_numpy(H3, sh3))
