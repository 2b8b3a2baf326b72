"""Generating functions and their exact identities.

Covers the degree-k exponential sum over an integer range (``weyl_sum``),
complete rational sums over residues (``complete_sum``), the oscillatory
integral ``I(beta; X)``, shifted sums, and exact verifiers for the
reindexing / resolution / binomial-transform identities that drive the
shift argument.
"""

import logging
import math
from dataclasses import dataclass
from math import comb, gcd

import numpy as np

from .core import FrequencyPoint, reduce_mod1, unit_phase
from .errors import AliasingError, BudgetExceededError, ToleranceError, ValidationError
from .kernels import phase_poly_sums

log = logging.getLogger(__name__)

# empirical constants for soft sanity bounds; violations are logged, never raised
SANITY_COMPLETE_SUM_C = 3.0
SANITY_INTEGRAL_C = 4.0


def _coords(alpha):
    if isinstance(alpha, FrequencyPoint):
        arr = alpha.coords
    else:
        arr = np.atleast_1d(np.asarray(alpha, dtype=np.float64))
    if not np.all(np.isfinite(arr)):
        raise ValidationError("non-finite frequency")
    return arr


@dataclass(frozen=True)
class RationalPoint:
    """Rational frequency center ``a / q`` with integer numerator vector."""

    q: int
    a: tuple

    def __post_init__(self):
        if self.q < 1:
            raise ValidationError("modulus must be positive")
        object.__setattr__(self, "a", tuple(int(v) for v in self.a))
        if any(v < 0 or v > self.q for v in self.a):
            raise ValidationError("numerators must lie in [0, q]")

    @property
    def primitive(self):
        g = self.q
        for v in self.a:
            g = gcd(g, v)
        return g == 1

    @property
    def coords(self):
        return np.array([v / self.q for v in self.a])


# ---------------------------------------------------------------------------
# exponential sums
# ---------------------------------------------------------------------------

def weyl_sum(alpha, X, budget=200_000_000):
    """``sum_{0 <= x <= X} e(alpha_1 x + ... + alpha_k x^k)``."""
    return weyl_sum_batch(_coords(alpha)[None, :], X, budget=budget)[0]


def weyl_sum_batch(alphas, X, budget=200_000_000):
    """Batched ``weyl_sum`` over rows of ``alphas``; deterministic order."""
    alphas = np.atleast_2d(np.asarray(alphas, dtype=np.float64))
    if X < 0:
        raise ValidationError("range must be non-negative")
    n = int(math.floor(X)) + 1
    if n * len(alphas) > budget:
        raise BudgetExceededError("phase-sum budget exceeded", work_done=0)
    return phase_poly_sums(alphas, 0, n - 1)


def direct_weyl_sum(alpha, X):
    """Term-by-term reference evaluation (independent of the kernel path)."""
    a = _coords(alpha)
    total = 0j
    for x in range(int(math.floor(X)) + 1):
        t = 0.0
        for j, c in enumerate(a, start=1):
            t += reduce_mod1(c * float(x) ** j)
        total += unit_phase(t)
    return total


def complete_sum(q, a):
    """``S(q, a) = sum_{r=1}^{q} e_q(a_1 r + ... + a_k r^k)`` (exact residues)."""
    if isinstance(q, RationalPoint):
        q, a = q.q, q.a
    q = int(q)
    if q < 1:
        raise ValidationError("modulus must be positive")
    a = [int(v) for v in a]
    k = len(a)
    table = np.exp(2j * np.pi * np.arange(q) / q)
    total = 0j
    for r in range(1, q + 1):
        t = 0
        rp = r
        for c in a:
            t = (t + c * rp) % q
            rp = rp * r
        total += table[t]
    g = q
    for v in a:
        g = gcd(g, v)
    if g == 1 and q > 1:
        bound = q ** (1.0 - 1.0 / k + 0.01)
        if abs(total) > SANITY_COMPLETE_SUM_C * bound:
            log.info("complete_sum sanity constant exceeded: |S(%d,%s)|=%.3f vs C*q^(1-1/k+0.01)=%.3f",
                     q, a, abs(total), SANITY_COMPLETE_SUM_C * bound)
    return total


# ---------------------------------------------------------------------------
# oscillatory integral
# ---------------------------------------------------------------------------

@dataclass
class OscillatoryIntegral:
    value: complex
    error_estimate: float
    panels: int


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _osc_quad(beta, X, panels):
    edges = np.linspace(0.0, X, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    phase = np.zeros_like(nodes)
    p = nodes.copy()
    for c in beta:
        phase += c * p
        p = p * nodes
    return np.sum(weights * np.exp(2j * np.pi * phase))


def default_panels(beta, X):
    """Phase-variation-proportional panel count for the oscillatory integral."""
    beta = np.asarray(beta, dtype=np.float64)
    var = sum(abs(c) * float(X) ** j for j, c in enumerate(beta, start=1))
    return int(math.ceil(4.0 * (var + 1.0)))


def oscillatory_integral(beta, X, tol=None, panels=None, max_panels=1 << 15):
    """``I(beta; X) = integral_0^X e(beta_1 g + ... + beta_k g^k) dg``.

    Composite 8-node Gauss-Legendre with the panel count proportional to the
    total phase variation; the error estimate comes from panel doubling.
    """
    beta = _coords(beta)
    if X < 0:
        raise ValidationError("range must be non-negative")
    if X == 0:
        return OscillatoryIntegral(0j, 0.0, 0)
    p = panels if panels is not None else default_panels(beta, X)
    coarse = _osc_quad(beta, X, p)
    fine = _osc_quad(beta, X, 2 * p)
    err = abs(fine - coarse)
    while tol is not None and err > tol:
        if 4 * p > max_panels:
            raise ToleranceError("quadrature tolerance unreachable within panel budget",
                                 value=fine, achieved=err)
        p *= 2
        coarse = fine
        fine = _osc_quad(beta, X, 2 * p)
        err = abs(fine - coarse)
    denom = 1.0 + sum(abs(c) * float(X) ** j for j, c in enumerate(beta, start=1))
    bound = X * denom ** (-1.0 / len(beta))
    if abs(fine) > SANITY_INTEGRAL_C * bound:
        log.info("oscillatory integral decay constant exceeded: |I|=%.4g vs C*bound=%.4g",
                 abs(fine), SANITY_INTEGRAL_C * bound)
    return OscillatoryIntegral(complex(fine), float(err), 2 * p)


# ---------------------------------------------------------------------------
# shifted sums and the exact identities behind the extra-variable trick
# ---------------------------------------------------------------------------

def shifted_sum(alpha, gamma, y, X):
    """``sum_{0 <= x <= 2X} e(psi(x - y; alpha) + gamma (x - y))`` for ``0<=y<=X``."""
    a = _coords(alpha)
    if not (0 <= y <= X):
        raise ValidationError("shift must satisfy 0 <= y <= X")
    coeffs = a.copy()
    coeffs[0] += gamma
    hi = int(math.floor(2 * X))
    return phase_poly_sums(coeffs[None, :], -int(y), hi - int(y))[0]


def kernel_sum(gamma, X):
    """``K(gamma) = sum_{0 <= z <= X} e(-gamma z)``."""
    return phase_poly_sums(np.array([[-float(gamma)]]), 0, int(math.floor(X)))[0]


def verify_shift_reindex(alpha, X, y):
    """Absolute discrepancy of the reindexing identity under an integer shift.

    The reindexed sum is evaluated term by term through an independent code
    path, so a zero discrepancy is meaningful.
    """
    a = _coords(alpha)
    X = int(X)
    y = int(y)
    if not (0 <= y <= X):
        raise ValidationError("shift must satisfy 0 <= y <= X")
    lhs = weyl_sum(a, X)
    acc = 0j
    for x in range(y, X + y + 1):
        u = x - y
        t = 0.0
        for j, c in enumerate(a, start=1):
            t += reduce_mod1(c * float(u) ** j)
        acc += unit_phase(t)
    return abs(lhs - acc)


def verify_resolution_identity(alpha, X, y, N, allow_alias=False):
    """Discrepancy of resolving the range sum through the shifted sum.

    The gamma-integral is replaced by the exact N-point average; the
    integrand is a trigonometric polynomial in gamma with integer
    frequencies of absolute value at most ``3 X``, so any ``N >= 3*floor(X)+3``
    resolves it exactly.  Smaller ``N`` raises unless ``allow_alias`` is set
    (useful for demonstrating the aliasing failure).
    """
    a = _coords(alpha)
    X = int(X)
    y = int(y)
    if not (0 <= y <= X):
        raise ValidationError("shift must satisfy 0 <= y <= X")
    if N < 3 * X + 3 and not allow_alias:
        raise AliasingError(f"aliasing: need N >= {3 * X + 3}, got {N}")
    gammas = np.arange(N) / N
    coeffs = np.tile(a, (N, 1))
    coeffs[:, 0] += gammas
    fvals = phase_poly_sums(coeffs, -y, 2 * X - y)
    kvals = phase_poly_sums(-gammas[:, None], 0, X)
    avg = np.mean(fvals * kvals)
    return abs(avg - weyl_sum(a, X))


# ---------------------------------------------------------------------------
# binomial-transform polynomials
# ---------------------------------------------------------------------------

class ShiftPolynomials:
    """Integer polynomials ``nu_j(y) = sum_{l=0}^{j} C(j,l) h_{j-l} y^l``.

    Convention ``h_0 = s``; the leading coefficient of every ``nu_j`` is
    therefore ``s`` and ``nu_j(0) = h_j``.
    """

    def __init__(self, h, s, k):
        h = [int(v) for v in h]
        if len(h) != k:
            raise ValidationError("shift profile must have length k")
        self.h = [s] + h  # h[0] = s
        self.s = int(s)
        self.k = int(k)
        self.coeffs = [[comb(j, l) * self.h[j - l] for l in range(j + 1)]
                       for j in range(1, k + 1)]

    def evaluate(self, j, y):
        """Exact integer value of ``nu_j(y)``."""
        return sum(c * y ** l for l, c in enumerate(self.coeffs[j - 1]))

    def leading(self, j):
        return self.coeffs[j - 1][j]


def shift_polynomials(h, s, k):
    return ShiftPolynomials(h, s, k)


def shift_profile(x, y, k):
    """``h_j = sum_i (x_i - y)^j`` for ``j = 1..k`` (exact integers)."""
    return [sum((int(v) - int(y)) ** j for v in x) for j in range(1, k + 1)]


def verify_binomial_transform(x, y, k, h=None):
    """Exact check that power sums of a shifted tuple obey the nu-polynomials.

    When ``h`` is supplied its first ``k-1`` entries must match the profile of
    ``(x, y)``; otherwise the profile is derived from the tuple.
    """
    x = [int(v) for v in x]
    y = int(y)
    s = len(x)
    derived = shift_profile(x, y, k)
    if h is not None:
        h = [int(v) for v in h]
        if list(h[:k - 1]) != derived[:k - 1]:
            raise ValidationError("not a valid h-profile for this tuple")
    nu = ShiftPolynomials(derived, s, k)
    for j in range(1, k):
        if sum(v ** j for v in x) != nu.evaluate(j, y):
            return False
    lhs = sum(v ** k for v in x)
    rhs = (s * y ** k
           + sum(comb(k, l) * derived[k - l - 1] * y ** l for l in range(1, k))
           + sum((v - y) ** k for v in x))
    if lhs != rhs:
        return False
    return lhs == nu.evaluate(k, y)


def g_sum(alpha, h, gammas, X, s=None):
    """``sum_{0 <= y <= X} e(-(alpha . nu(y; h) + y sum_i gamma_i))``.

    With ``h = 0`` and the gammas summing to zero this reduces to the
    conjugate of ``weyl_sum(s * alpha, X)``.
    """
    a = _coords(alpha)
    gammas = np.atleast_1d(np.asarray(gammas, dtype=np.float64))
    if s is None:
        s = len(gammas)
    k = len(a)
    nu = ShiftPolynomials(h, s, k)
    # exponent polynomial in y: c_l = -sum_j alpha_j [y^l] nu_j, minus sum(gammas) at l=1
    c = np.zeros(k + 1)
    for j in range(1, k + 1):
        for l, coef in enumerate(nu.coeffs[j - 1]):
            c[l] -= a[j - 1] * coef
    c[1] -= float(gammas.sum())
    body = phase_poly_sums(c[1:][None, :], 0, int(math.floor(X)))[0]
    return unit_phase(reduce_mod1(c[0])) * body


# ---------------------------------------------------------------------------
# major-arc approximant
# ---------------------------------------------------------------------------

@dataclass
class ApproximantReport:
    value: complex
    f_value: complex
    err: float
    bound: float

    @property
    def ratio(self):
        return self.err / self.bound if self.bound > 0 else math.inf


def major_arc_approximant(alpha, q, a, X):
    """``V(alpha; q, a) = q^{-1} S(q, a) I(alpha - a/q; X)`` with its error report.

    The report compares ``|f(alpha) - V|`` against the classical bound
    ``q + X|q alpha_1 - a_1| + ... + X^k |q alpha_k - a_k|``.
    """
    al = _coords(alpha)
    a = [int(v) for v in a]
    q = int(q)
    beta = al - np.array(a, dtype=np.float64) / q
    S = complete_sum(q, a)
    integral = oscillatory_integral(beta, X)
    V = S / q * integral.value
    f = weyl_sum(al, X)
    bound = q + sum(float(X) ** j * abs(q * al[j - 1] - a[j - 1])
                    for j in range(1, len(al) + 1))
    return ApproximantReport(V, f, abs(f - V), bound)
