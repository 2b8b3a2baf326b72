"""Hot numeric kernels, each with a numba and a pure-numpy implementation.

The two implementations of a kernel use the same algorithm and the same
summation order; ``HK_NO_NUMBA=1`` selects the numpy path (see
:mod:`hklab.accel`).  Public dispatchers sit at the bottom of the module.

Phase sums use a forward-difference engine: the phase polynomial
``p(u) = c_1 u + ... + c_k u^k`` is advanced by its difference table, with
every accumulator reduced mod 1 per step.  Rounding noise in the table
amplifies like ``n^k * eps`` over ``n`` steps (about 1e-4 radians at
``n = 10^4, k = 3``), tiny relative to the tolerances of the large-scale
sampling experiments; identity checks run at small ranges where the error
is near machine epsilon.  For large ``|u0|`` the initial table evaluation
adds about ``|c_k| * |u0|^k * eps``.
"""

import math

import numpy as np

from . import accel
from .accel import njit

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# batched phase-polynomial sums:  sum_{u=u0}^{u1} e(c_1 u + ... + c_k u^k)
# ---------------------------------------------------------------------------

@njit
def _phase_poly_sums_numba(coeffs, u0, u1):
    m, k = coeffs.shape
    out = np.zeros(m, dtype=np.complex128)
    n = u1 - u0 + 1
    if n <= 0:
        return out
    d = np.empty(k + 1, dtype=np.float64)
    for r in range(m):
        for i in range(k + 1):
            u = float(u0 + i)
            acc = 0.0
            up = u
            for j in range(k):
                acc += coeffs[r, j] * up
                up *= u
            d[i] = acc - math.floor(acc)
        for lvl in range(1, k + 1):
            for i in range(k, lvl - 1, -1):
                d[i] -= d[i - 1]
        re = 0.0
        im = 0.0
        for _ in range(n):
            t = TWO_PI * d[0]
            re += math.cos(t)
            im += math.sin(t)
            for j in range(k):
                d[j] += d[j + 1]
                d[j] -= math.floor(d[j])
        out[r] = complex(re, im)
    return out


def _phase_poly_sums_numpy(coeffs, u0, u1):
    m, k = coeffs.shape
    n = u1 - u0 + 1
    if n <= 0:
        return np.zeros(m, dtype=np.complex128)
    d = np.empty((k + 1, m), dtype=np.float64)
    for i in range(k + 1):
        u = float(u0 + i)
        powers = u ** np.arange(1, k + 1)
        vals = coeffs @ powers
        d[i] = vals - np.floor(vals)
    for lvl in range(1, k + 1):
        for i in range(k, lvl - 1, -1):
            d[i] -= d[i - 1]
    acc = np.zeros(m, dtype=np.complex128)
    for _ in range(n):
        acc += np.exp(2j * np.pi * d[0])
        for j in range(k):
            d[j] += d[j + 1]
            d[j] -= np.floor(d[j])
    return acc


# ---------------------------------------------------------------------------
# canonical (non-decreasing) tuple enumeration with power-sum keys
# ---------------------------------------------------------------------------

@njit
def _enum_canonical_numba(t, lo, hi, powtab, facts, out_keys, out_mult):
    k = powtab.shape[1]
    x = np.full(t, lo, dtype=np.int64)
    idx = 0
    while True:
        for j in range(k):
            s = 0
            for i in range(t):
                s += powtab[x[i] - lo, j]
            out_keys[idx, j] = s
        mult = facts[t]
        run = 1
        for i in range(1, t):
            if x[i] == x[i - 1]:
                run += 1
            else:
                mult //= facts[run]
                run = 1
        mult //= facts[run]
        out_mult[idx] = mult
        idx += 1
        i = t - 1
        while i >= 0 and x[i] == hi:
            i -= 1
        if i < 0:
            break
        v = x[i] + 1
        for j2 in range(i, t):
            x[j2] = v
    return idx


def _enum_canonical_numpy(t, lo, hi, powtab, facts):
    rows = np.arange(lo, hi + 1, dtype=np.int64).reshape(-1, 1)
    for _ in range(t - 1):
        counts = hi - rows[:, -1] + 1
        total = int(counts.sum())
        rep = np.repeat(np.arange(len(rows)), counts)
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        within = np.arange(total) - np.repeat(starts, counts)
        new_last = rows[rep, -1] + within
        rows = np.column_stack([rows[rep], new_last])
    keys = powtab[rows - lo].sum(axis=1, dtype=np.int64)
    mult = facts[t] // _run_factorial_products(rows, facts)
    return keys, mult


def _run_factorial_products(rows, facts):
    n, t = rows.shape
    prod = np.ones(n, dtype=np.int64)
    run = np.ones(n, dtype=np.int64)
    for i in range(1, t):
        same = rows[:, i] == rows[:, i - 1]
        prod = np.where(same, prod, prod * facts[run])
        run = np.where(same, run + 1, 1)
    prod *= facts[run]
    return prod


# ---------------------------------------------------------------------------
# modular convolution step for counting solutions mod m
# ---------------------------------------------------------------------------

@njit
def _conv_mod_1d_numba(H, sh):
    m = H.shape[0]
    out = np.zeros_like(H)
    for s in range(sh.shape[0]):
        a = sh[s, 0]
        for i in range(m):
            ii = i + a
            if ii >= m:
                ii -= m
            out[ii] += H[i]
    return out


@njit
def _conv_mod_2d_numba(H, sh):
    m1, m2 = H.shape
    out = np.zeros_like(H)
    for s in range(sh.shape[0]):
        a = sh[s, 0]
        b = sh[s, 1]
        for i in range(m1):
            ii = i + a
            if ii >= m1:
                ii -= m1
            for j in range(m2):
                jj = j + b
                if jj >= m2:
                    jj -= m2
                out[ii, jj] += H[i, j]
    return out


@njit
def _conv_mod_3d_numba(H, sh):
    m1, m2, m3 = H.shape
    out = np.zeros_like(H)
    for s in range(sh.shape[0]):
        a = sh[s, 0]
        b = sh[s, 1]
        c = sh[s, 2]
        for i in range(m1):
            ii = i + a
            if ii >= m1:
                ii -= m1
            for j in range(m2):
                jj = j + b
                if jj >= m2:
                    jj -= m2
                for l in range(m3):
                    ll = l + c
                    if ll >= m3:
                        ll -= m3
                    out[ii, jj, ll] += H[i, j, l]
    return out


def _conv_mod_numpy(H, sh):
    out = np.zeros_like(H)
    axes = tuple(range(H.ndim))
    for row in sh:
        out += np.roll(H, tuple(int(v) for v in row), axis=axes)
    return out


# ---------------------------------------------------------------------------
# dispatchers
# ---------------------------------------------------------------------------

def phase_poly_sums(coeffs, u0, u1):
    """Batch of sums ``sum_{u=u0}^{u1} e(sum_j coeffs[r,j] u^(j+1))``.

    ``coeffs`` is ``(m, k)`` float64; returns ``(m,)`` complex128.
    """
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    if coeffs.ndim != 2:
        raise ValueError("coeffs must be 2-d (batch, degree)")
    if not np.all(np.isfinite(coeffs)):
        raise ValueError("non-finite frequency")
    if accel.USE_NUMBA:
        return _phase_poly_sums_numba(coeffs, int(u0), int(u1))
    return _phase_poly_sums_numpy(coeffs, int(u0), int(u1))


def canonical_powersum_run(t, lo, hi, k, coeff=1):
    """Keys and multiplicities of non-decreasing ``t``-tuples in ``[lo, hi]``.

    Key of a tuple is ``coeff * (sum x, sum x^2, ..., sum x^k)``;
    multiplicity is the number of ordered rearrangements.  Returns
    ``(keys (N,k) int64, mult (N,) int64)``.  Caller is responsible for
    ensuring int64 headroom (``t * max(|lo|,|hi|)^k * |coeff|`` well below 2^63).
    """
    if t == 0:
        return np.zeros((1, k), dtype=np.int64), np.ones(1, dtype=np.int64)
    vals = np.arange(lo, hi + 1, dtype=np.int64)
    powtab = np.empty((len(vals), k), dtype=np.int64)
    acc = vals.copy()
    for j in range(k):
        powtab[:, j] = acc
        if j < k - 1:
            acc = acc * vals
    facts = np.array([math.factorial(i) for i in range(t + 1)], dtype=np.int64)
    if accel.USE_NUMBA:
        total = math.comb(hi - lo + t, t)
        keys = np.empty((total, k), dtype=np.int64)
        mult = np.empty(total, dtype=np.int64)
        n = _enum_canonical_numba(t, lo, hi, powtab, facts, keys, mult)
        keys, mult = keys[:n], mult[:n]
    else:
        keys, mult = _enum_canonical_numpy(t, lo, hi, powtab, facts)
    if coeff != 1:
        keys = keys * np.int64(coeff)
    return keys, mult


def conv_mod(H, shifts):
    """One convolution step: ``out[(v + shift) mod m] += H[v]`` over all shifts.

    ``H`` is an int64 array of 1-3 dims (all axes share their own modulus);
    ``shifts`` is ``(n, ndim)`` int64 with entries already reduced mod the
    axis sizes.
    """
    H = np.ascontiguousarray(H, dtype=np.int64)
    shifts = np.ascontiguousarray(shifts, dtype=np.int64)
    if accel.USE_NUMBA and H.ndim <= 3:
        if H.ndim == 1:
            return _conv_mod_1d_numba(H, shifts)
        if H.ndim == 2:
            return _conv_mod_2d_numba(H, shifts)
        return _conv_mod_3d_numba(H, shifts)
    return _conv_mod_numpy(H, shifts)
