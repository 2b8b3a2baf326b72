import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hklab.errors import AliasingError, ToleranceError, ValidationError
from hklab.expsums import (
    RationalPoint,
    complete_sum,
    direct_weyl_sum,
    g_sum,
    kernel_sum,
    major_arc_approximant,
    oscillatory_integral,
    shift_polynomials,
    shift_profile,
    shifted_sum,
    verify_binomial_transform,
    verify_resolution_identity,
    verify_shift_reindex,
    weyl_sum,
    weyl_sum_batch,
)


# ---------------------------------------------------------------------------
# weyl sums
# ---------------------------------------------------------------------------

def test_weyl_examples():
    assert weyl_sum([0.0, 0.0], 7.5) == 8
    assert abs(weyl_sum([0.5], 3)) < 1e-12                 # alternating
    assert abs(weyl_sum([0.0, 0.25], 4) - (3 + 2j)) < 1e-12


def test_weyl_matches_direct_reference():
    rng = np.random.default_rng(0)
    for _ in range(10):
        alpha = rng.random(3)
        X = int(rng.integers(5, 40))
        assert abs(weyl_sum(alpha, X) - direct_weyl_sum(alpha, X)) < 1e-9


def test_weyl_trivial_bound_and_periodicity():
    rng = np.random.default_rng(1)
    for _ in range(20):
        alpha = rng.random(2)
        X = 23.7
        f = weyl_sum(alpha, X)
        assert abs(f) <= math.floor(X) + 1 + 1e-9
        shift = rng.integers(-3, 4, size=2).astype(float)
        assert abs(f - weyl_sum(alpha + shift, X)) < 1e-9


def test_weyl_reflection():
    rng = np.random.default_rng(2)
    for _ in range(20):
        alpha = rng.random(3)
        f = weyl_sum(alpha, 31)
        assert abs(np.conj(f) - weyl_sum(-alpha, 31)) < 1e-9


def test_weyl_batch_matches_scalar():
    rng = np.random.default_rng(3)
    alphas = rng.random((7, 2))
    batch = weyl_sum_batch(alphas, 19)
    for i, a in enumerate(alphas):
        assert abs(batch[i] - weyl_sum(a, 19)) < 1e-12


# ---------------------------------------------------------------------------
# complete sums
# ---------------------------------------------------------------------------

def test_complete_sum_examples():
    assert abs(complete_sum(1, [0, 0]) - 1) < 1e-15
    assert abs(complete_sum(2, [1])) < 1e-12               # k=1 geometric
    assert abs(abs(complete_sum(3, [0, 1])) - math.sqrt(3)) < 1e-12


def test_complete_sum_quadratic_magnitudes():
    for p in (5, 7, 11, 13):
        assert abs(abs(complete_sum(p, [0, 1])) - math.sqrt(p)) < 1e-9


def test_complete_sum_unit_scaling_invariance():
    # scaling the numerators by a unit permutes residues: modulus unchanged
    rng = np.random.default_rng(4)
    for q in (5, 9, 12, 17):
        a = [int(v) for v in rng.integers(0, q, size=2)]
        base = abs(complete_sum(q, a))
        for u in range(2, q):
            if math.gcd(u, q) == 1:
                scaled = [(u * v) % q for v in a]
                assert abs(abs(complete_sum(q, scaled)) - base) < 1e-10


def test_complete_sum_trivial_bound():
    rng = np.random.default_rng(5)
    for _ in range(10):
        q = int(rng.integers(1, 30))
        a = [int(v) for v in rng.integers(0, q + 1, size=3)]
        assert abs(complete_sum(q, a)) <= q + 1e-9


def test_rational_point():
    rp = RationalPoint(6, (2, 3))
    assert rp.primitive
    assert not RationalPoint(6, (2, 4)).primitive
    with pytest.raises(ValidationError):
        RationalPoint(0, (1,))
    with pytest.raises(ValidationError):
        RationalPoint(3, (4,))


# ---------------------------------------------------------------------------
# oscillatory integral
# ---------------------------------------------------------------------------

def test_integral_trivial_cases():
    r = oscillatory_integral([0.0, 0.0], 5.0)
    assert abs(r.value - 5.0) < 1e-12
    r = oscillatory_integral([1.0], 1.0)
    assert abs(r.value) < 1e-12                            # full period


def test_integral_fresnel_frozen_value():
    # frozen from the 10x-density composite quadrature oracle below
    r = oscillatory_integral([0.0, 1.0], 1.0)
    expected = _fresnel_oracle()
    assert abs(r.value - expected) < 1e-10
    assert abs(r.value - (0.2441267030376 + 0.1717078391818j)) < 1e-9


def _fresnel_oracle():
    # independent: plain midpoint rule at very high density
    n = 200_000
    g = (np.arange(n) + 0.5) / n
    return np.sum(np.exp(2j * np.pi * g * g)) / n


def test_integral_modulus_bound_and_error_estimate():
    rng = np.random.default_rng(6)
    for _ in range(10):
        beta = rng.uniform(-3, 3, size=2)
        X = float(rng.uniform(0.5, 4.0))
        r = oscillatory_integral(beta, X)
        assert abs(r.value) <= X + 1e-9
        assert r.error_estimate < 1e-8


def test_integral_tolerance_error():
    with pytest.raises(ToleranceError) as ei:
        oscillatory_integral([40.0, 170.0], 9.0, tol=1e-30, max_panels=64)
    assert ei.value.achieved is not None


# ---------------------------------------------------------------------------
# shifted sums and identities
# ---------------------------------------------------------------------------

def test_shifted_sum_examples():
    a = [0.3, 0.1]
    assert abs(shifted_sum(a, 0.0, 0, 5) - weyl_sum(a, 10)) < 1e-11
    assert shifted_sum([0.0, 0.0], 0.0, 2, 5) == 11
    assert abs(shifted_sum([0.5], 0.5, 1, 1) - 3) < 1e-12
    with pytest.raises(ValidationError):
        shifted_sum(a, 0.0, 9, 5)


def test_kernel_sum_geometric():
    g = 0.37
    X = 12
    direct = sum(np.exp(-2j * np.pi * g * z) for z in range(X + 1))
    assert abs(kernel_sum(g, X) - direct) < 1e-12


def test_shift_reindex_zero_shift_exact():
    assert verify_shift_reindex([0.291, 0.77], 10, 0) < 1e-12


def test_shift_reindex_more_instances():
    assert verify_shift_reindex([1 / 3, 1 / 7], 5, 5) <= 1e-9 * 6
    rng = np.random.default_rng(7)
    for _ in range(10):
        alpha = rng.integers(0, 60, size=3) / rng.integers(1, 60, size=3)
        assert verify_shift_reindex(alpha % 1.0, 20, 7) <= 1e-9 * 21


def test_resolution_identity_instances():
    assert verify_resolution_identity([0.2, 2 / 7], 10, 3, 40) <= 1e-8 * 121
    rng = np.random.default_rng(8)
    for _ in range(5):
        alpha = rng.random(3)
        assert verify_resolution_identity(alpha, 15, 15, 64) <= 1e-8 * 256


def test_resolution_identity_trivial_y0_alpha0():
    # N-point average of f_0 * K at alpha = 0 collapses to the diagonal count
    assert verify_resolution_identity([0.0, 0.0], 8, 0, 27) < 1e-10


def test_resolution_identity_aliasing_guard():
    with pytest.raises(AliasingError):
        verify_resolution_identity([0.1, 0.2], 10, 3, 12)
    # adversarially small N really does corrupt the average:
    # at alpha = 0 the aliases x - y - z = +-N contribute positive mass
    disc = verify_resolution_identity([0.0, 0.0], 10, 0, 10, allow_alias=True)
    assert disc > 1.0


# ---------------------------------------------------------------------------
# binomial transform
# ---------------------------------------------------------------------------

def test_shift_polynomials_structure():
    nu = shift_polynomials([5, 7, 2], 4, 3)
    assert [nu.leading(j) for j in (1, 2, 3)] == [4, 4, 4]
    assert [nu.evaluate(j, 0) for j in (1, 2, 3)] == [5, 7, 2]


@given(st.lists(st.integers(-20, 20), min_size=2, max_size=5),
       st.integers(-8, 8))
@settings(max_examples=60)
def test_nu1_is_affine(h_and_more, y):
    h = h_and_more
    s = 3
    nu = shift_polynomials(h, s, len(h))
    assert nu.evaluate(1, y) == h[0] + s * y


def test_binomial_transform_examples():
    assert verify_binomial_transform([2, 3], 1, 2)
    # y = 0: identity degenerates to the defining profile
    assert verify_binomial_transform([4, 9, 1], 0, 3)


@given(st.lists(st.integers(0, 25), min_size=2, max_size=6),
       st.integers(0, 12), st.integers(2, 4))
@settings(max_examples=80)
def test_binomial_transform_random_tuples(x, y, k):
    assert verify_binomial_transform(x, y, k)


def test_binomial_transform_profile_mismatch():
    h = shift_profile([2, 3], 1, 2)
    h[0] += 1
    with pytest.raises(ValidationError):
        verify_binomial_transform([2, 3], 1, 2, h=h)


# ---------------------------------------------------------------------------
# G-sum
# ---------------------------------------------------------------------------

def test_g_sum_examples():
    assert abs(g_sum([0.0, 0.0], [0, 0], [0.0, 0.0, 0.0], 4) - 5) < 1e-12
    assert abs(g_sum([0.25], [0], [0.0, 0.0], 2) - 1) < 1e-12


def test_g_sum_conjugate_identity():
    rng = np.random.default_rng(9)
    for _ in range(10):
        alpha = rng.random(2)
        gam = rng.random(3)
        gam[-1] = -gam[:-1].sum()  # zero-sum gammas
        g = g_sum(alpha, [0, 0], gam, 9, s=3)
        assert abs(g - np.conj(weyl_sum(3 * alpha, 9))) < 1e-9


def test_g_sum_term_by_term_oracle():
    from hklab.core import unit_phase
    from hklab.expsums import ShiftPolynomials

    rng = np.random.default_rng(10)
    for _ in range(20):
        k = int(rng.integers(1, 4))
        s = int(rng.integers(2, 5))
        alpha = rng.random(k)
        h = [int(v) for v in rng.integers(-5, 6, size=k)]
        gam = rng.random(s)
        X = int(rng.integers(3, 15))
        nu = ShiftPolynomials(h, s, k)
        # reordered independent summation
        acc = 0j
        for y in range(X, -1, -1):
            t = -(sum(alpha[j - 1] * nu.evaluate(j, y) for j in range(1, k + 1))
                  + y * gam.sum())
            acc += unit_phase(t % 1.0)
        assert abs(g_sum(alpha, h, gam, X, s=s) - acc) <= 1e-10 * (X + 1)


# ---------------------------------------------------------------------------
# major-arc approximant
# ---------------------------------------------------------------------------

def test_approximant_at_rational_center():
    rep = major_arc_approximant([0.0, 0.0], 1, [0, 0], 10.0)
    assert abs(rep.value - 10.0) < 1e-9                   # I(0;X) = X
    assert rep.err <= 1.0 + 1e-9                          # fractional defect


def test_approximant_k2_center():
    X = 16.0
    rep = major_arc_approximant([0.5, 0.5], 2, [1, 1], X)
    S = complete_sum(2, [1, 1])
    assert abs(rep.value - S / 2 * X) < 1e-6 * X
    assert rep.err <= 4 * rep.bound                        # C fitted, small


def test_approximant_error_ratio_on_narrow_box():
    rng = np.random.default_rng(11)
    X = 1000.0
    ratios = []
    for _ in range(12):
        q = int(rng.integers(1, 4))
        a = [int(v) for v in rng.integers(0, q + 1, size=3)]
        beta = rng.uniform(-1, 1, size=3) * [X ** -1, X ** -2, X ** -3]
        alpha = np.array(a) / q + beta
        rep = major_arc_approximant(alpha, q, a, X)
        ratios.append(rep.ratio)
    assert max(ratios) <= 10.0
