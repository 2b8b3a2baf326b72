"""Singular series and singular integral evaluation, and the main term.

The series has two independent computational routes:

* ``singular_series_qsum`` sums modulus terms ``A(q)`` built from complete
  exponential sums over residues (exact residue arithmetic feeding a DFT,
  with a direct small-q evaluator as the oracle);
* ``singular_series_euler`` multiplies p-adic solution densities
  ``chi_p(h) = p^{-h(s-k)} M_p(h)`` obtained by pure integer counting
  (convolution powers of residue histograms).

The integral likewise has a tensor-quadrature route cross-checked against a
Monte-Carlo volume oracle.  Truncation tails are empirical fits and labeled
as such in the returned estimates.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import Target
from .errors import BudgetExceededError, NonConvergedError, ToleranceError, ValidationError
from .expsums import complete_sum
from .kernels import conv_mod
from .local import small_primes
from .streams import substream

INT64_SAFE = 2 ** 62


def _target_vector(n):
    if isinstance(n, Target):
        return list(n.n)
    return [int(v) for v in n]


def _mu_raw(n):
    n = _target_vector(n)
    scale = max(abs(v) ** (1.0 / j) for j, v in enumerate(n, start=1))
    if scale == 0:
        return np.zeros(len(n)), 0.0
    return np.array([v / scale ** j for j, v in enumerate(n, start=1)]), scale


@dataclass
class DensityEstimate:
    value: float
    method: str
    error_estimate: float
    converged: bool
    imag_diagnostic: float = 0.0
    detail: dict = field(default_factory=dict)


@dataclass
class SeriesTerm:
    q: int
    value: float          # real part of A(q)
    imag: float           # diagnostic, should vanish
    n_primitive: int


# ---------------------------------------------------------------------------
# series terms A(q)
# ---------------------------------------------------------------------------

def complete_sum_all(q, k):
    """``S(q, a)`` for every ``a`` in ``[0, q)^k`` via the residue-histogram DFT."""
    hist = np.zeros((q,) * k)
    for r in range(1, q + 1):
        idx = tuple(pow(r, j, q) for j in range(1, k + 1))
        hist[idx] += 1.0
    return np.conj(np.fft.fftn(hist))


def _primitive_mask(q, k):
    g = np.full((q,) * k, q, dtype=np.int64)
    for axis in range(k):
        shape = [1] * k
        shape[axis] = q
        g = np.gcd(g, np.arange(q, dtype=np.int64).reshape(shape))
    return g == 1


def series_term(q, n, params, budget=8_000_000):
    """``A(q) = q^{-s} sum_{primitive a mod q} S(q,a)^s e_q(-a.n)`` (bulk path)."""
    q = int(q)
    if q < 1:
        raise ValidationError("modulus must be positive")
    n = _target_vector(n)
    k = params.k
    if len(n) != k:
        raise ValidationError("target length must equal k")
    if q ** k > budget:
        raise BudgetExceededError(
            f"series term at q={q}, k={k} exceeds the numerator-grid budget")
    if q == 1:
        return SeriesTerm(1, 1.0, 0.0, 1)
    if not params.is_pure:
        raise ValidationError("series terms are defined for the pure system")
    S = complete_sum_all(q, k)
    mask = _primitive_mask(q, k)
    phase_idx = np.zeros((q,) * k, dtype=np.int64)
    for axis in range(k):
        shape = [1] * k
        shape[axis] = q
        phase_idx = (phase_idx + (-(n[axis] % q)) *
                     np.arange(q, dtype=np.int64).reshape(shape)) % q
    table = np.exp(2j * np.pi * np.arange(q) / q)
    total = np.sum((S[mask] ** params.s) * table[phase_idx[mask]]) / q ** params.s
    return SeriesTerm(q, float(total.real), float(total.imag), int(mask.sum()))


def series_term_direct(q, n, params):
    """Small-q oracle for ``A(q)``: explicit loop over primitive tuples."""
    from itertools import product

    q = int(q)
    n = _target_vector(n)
    k = params.k
    total = 0j
    count = 0
    for a in product(range(1, q + 1), repeat=k):
        g = q
        for v in a:
            g = math.gcd(g, v)
        if g != 1:
            continue
        count += 1
        t = (-sum(av * nv for av, nv in zip(a, n))) % q
        total += complete_sum(q, a) ** params.s * np.exp(2j * np.pi * t / q)
    total /= q ** params.s
    return SeriesTerm(q, float(total.real), float(total.imag), count)


def _fit_power_tail(xs, ys, cutoff):
    """Fit ``y = C x^b`` on positive data; return tail ``sum_{x>cutoff} C x^b``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    keep = ys > 0
    if keep.sum() < 2:
        return 0.0, {"C": 0.0, "b": 0.0}
    b, logC = np.polyfit(np.log(xs[keep]), np.log(ys[keep]), 1)
    C = math.exp(logC)
    if b >= -1.0:
        return math.inf, {"C": C, "b": float(b)}
    tail = C * cutoff ** (b + 1) / (-b - 1)
    return tail, {"C": C, "b": float(b)}


def singular_series_qsum(n, params, Q_max=None, tol=0.02):
    """Truncated modulus sum for the series, with an empirical tail fit."""
    if Q_max is None:
        Q_max = 50 if params.k == 2 else 30
    n = _target_vector(n)
    terms = [series_term(q, n, params) for q in range(1, Q_max + 1)]
    value = 0.0
    partials = []
    for t in terms:
        value += t.value
        partials.append(value)
    qs = [t.q for t in terms if t.q > max(4, Q_max // 4)]
    amps = [abs(t.value) for t in terms if t.q > max(4, Q_max // 4)]
    tail, fit = _fit_power_tail(qs, amps, Q_max)
    threshold_ok = params.s > params.k * (params.k + 1) / 2 + 2
    imag = max(abs(t.imag) for t in terms)
    return DensityEstimate(
        value=value,
        method=f"TruncatedSum{{Q_max={Q_max}}}",
        error_estimate=tail,
        converged=bool((threshold_ok or tail < 1e-12) and tail < tol),
        imag_diagnostic=imag,
        detail={"terms": [(t.q, t.value) for t in terms],
                "partials": partials, "tail_fit": fit,
                "convergence_threshold_ok": threshold_ok},
    )


# ---------------------------------------------------------------------------
# p-adic densities by exact counting
# ---------------------------------------------------------------------------

_HIST_CACHE = {}


def _halves_mod(m, k, coeffs):
    """Cached half histograms of power-sum keys mod m for the variable split."""
    key = (m, k, tuple(coeffs))
    if key in _HIST_CACHE:
        return _HIST_CACHE[key]
    s = len(coeffs)
    s1 = (s + 1) // 2
    if m ** s >= INT64_SAFE:
        dtype = object
    else:
        dtype = np.int64

    def build(cs):
        H = np.zeros((m,) * k, dtype=dtype)
        H[(0,) * k] = 1
        for c in cs:
            shifts = np.array([[(c * pow(x, j, m)) % m for j in range(1, k + 1)]
                               for x in range(m)], dtype=np.int64)
            if dtype is object:
                out = np.zeros_like(H)
                for row in shifts:
                    out += np.roll(H, tuple(int(v) for v in row),
                                   axis=tuple(range(k)))
                H = out
            else:
                H = conv_mod(H, shifts)
        return H
    halves = (build(coeffs[:s1]), build(coeffs[s1:]))
    if len(_HIST_CACHE) > 64:
        _HIST_CACHE.clear()
    _HIST_CACHE[key] = halves
    return halves


def solution_count_mod(m, n, params, budget=3_000_000_000):
    """Exact ``M(m) = #{x in [0,m)^s : sum_i c_i x_i^j = n_j mod m, all j}``."""
    n = _target_vector(n)
    k = params.k
    if m ** (k + 1) > budget:
        raise BudgetExceededError(
            f"residue convolution at modulus {m}, k={k} exceeds the budget")
    H1, H2 = _halves_mod(m, k, params.coeffs)
    idxs = [((n[j] % m) - np.arange(m)) % m for j in range(k)]
    H2c = H2[np.ix_(*idxs)]
    if H1.dtype == object:
        return int((H1 * H2c).sum())
    return int((H1.astype(object) * H2c.astype(object)).sum())


def padic_density(p, h, n, params):
    """``chi_p(h) = p^{-h(s-k)} M_p(h)`` as an exact rational."""
    if h == 0:
        return Fraction(1)
    m = p ** h
    M = solution_count_mod(m, n, params)
    return Fraction(M, p ** (h * (params.s - params.k)))


def singular_series_euler(n, params, p_max=13, tol=1e-9, modulus_cap=1024):
    """Euler product of p-adic densities with adaptive per-prime depth.

    Depth increases until the density stabilizes within ``tol`` or the
    modulus would exceed ``modulus_cap``; the omitted-prime tail is an
    empirical power-law fit on ``|chi_p - 1|``.
    """
    n = _target_vector(n)
    product = 1.0
    per_prime = {}
    deviations = []
    for p in small_primes(p_max):
        prev = padic_density(p, 1, n, params)
        h = 1
        while p ** (h + 1) <= modulus_cap:
            nxt = padic_density(p, h + 1, n, params)
            h += 1
            if abs(float(nxt - prev)) < tol:
                prev = nxt
                break
            prev = nxt
        chi = float(prev)
        per_prime[p] = {"chi": chi, "depth": h}
        product *= chi
        deviations.append((p, abs(chi - 1.0)))
        if chi == 0.0:
            return DensityEstimate(0.0, f"EulerProduct{{p_max={p_max}}}", 0.0, True,
                                   detail={"per_prime": per_prime,
                                           "vanishing_prime": p})
    ps = [p for p, d in deviations]
    ds = [d for p, d in deviations]
    tail_sum, fit = _fit_power_tail(ps, ds, p_max)
    # prime-density correction: only ~1/ln t of integers near t are prime
    if math.isfinite(tail_sum) and tail_sum > 0:
        tail_sum /= math.log(max(p_max, 3))
    err = abs(product) * tail_sum if math.isfinite(tail_sum) else math.inf
    threshold_ok = params.s > params.k * (params.k + 1) / 2 + 2
    return DensityEstimate(
        value=product,
        method=f"EulerProduct{{p_max={p_max}}}",
        error_estimate=err,
        converged=bool((threshold_ok or err < 1e-12)
                       and err < max(0.05 * abs(product), 1e-9)),
        detail={"per_prime": per_prime, "tail_fit": fit,
                "convergence_threshold_ok": threshold_ok},
    )


# ---------------------------------------------------------------------------
# singular integral
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _axis_nodes(B, panels):
    edges = np.linspace(-B, B, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return nodes, weights


def _unit_osc_on_axes(axis_nodes, gamma_panels):
    """``I(beta; 1)`` on the tensor grid of the given per-axis nodes.

    Separable evaluation: one Gauss-Legendre rule in gamma serves the whole
    grid through per-axis phase matrices.
    """
    edges = np.linspace(0.0, 1.0, gamma_panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    g = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    mats = []
    for j, nodes in enumerate(axis_nodes, start=1):
        mats.append(np.exp(2j * np.pi * np.outer(g ** j, nodes)))
    k = len(axis_nodes)
    if k == 1:
        return (w[:, None] * mats[0]).sum(axis=0)
    if k == 2:
        return (w[:, None] * mats[0]).T @ mats[1]
    if k == 3:
        return np.einsum("g,gi,gj,gl->ijl", w, mats[0], mats[1], mats[2],
                         optimize=True)
    raise ValidationError("tensor quadrature supports k <= 3")


def _integral_once(mu, s, B, panel_scale):
    k = len(mu)
    axis_nodes = []
    axis_weights = []
    for j in range(k):
        panels = max(4, int(math.ceil(panel_scale * B * (1.0 + abs(mu[j])))))
        nd, wt = _axis_nodes(B, panels)
        axis_nodes.append(nd)
        axis_weights.append(wt)
    gamma_panels = int(math.ceil(4 * (k * B + 1)))
    Igrid = _unit_osc_on_axes(axis_nodes, gamma_panels)
    phase = np.zeros(Igrid.shape)
    for j in range(k):
        shape = [1] * k
        shape[j] = len(axis_nodes[j])
        phase = phase + (-mu[j]) * axis_nodes[j].reshape(shape)
    integrand = Igrid ** s * np.exp(2j * np.pi * phase)
    for j in range(k):
        shape = [1] * k
        shape[j] = len(axis_nodes[j])
        integrand = integrand * axis_weights[j].reshape(shape)
    return complex(integrand.sum())


def _l1_tail_bound(mu, s, B):
    """Union-bound tail of the absolutely-converging integrand outside the box.

    Provably valid but very pessimistic (it ignores oscillation); reported as
    a reference in the detail dict, not used as the error estimate.
    """
    k = len(mu)
    a = s / k
    if a <= k:
        return math.inf
    probe = [np.eye(k)[j] * B for j in range(k)] + [np.full(k, B)]
    Cfit = 0.0
    for beta in probe:
        Iv = _unit_osc_probe(beta)
        Cfit = max(Cfit, abs(Iv) ** s * (1.0 + np.sum(np.abs(beta))) ** a)
    return (Cfit * k * 2 ** k * math.gamma(a - k + 1) / math.gamma(a)
            * (1.0 + B) ** (k - a) / (a - k))


def singular_integral_quadrature(n, params, B=None, tol=5e-3, scale="raw",
                                 panel_scale=1.0, strict=False):
    """Box-truncated tensor quadrature for the archimedean density.

    Error estimate = panel-doubling difference + box-doubling difference
    (both empirical); the provable union-bound tail goes to ``detail``.
    With ``strict`` an unreached tolerance raises instead of returning a
    non-converged estimate.
    """
    s, k = params.s, params.k
    if B is None:
        B = 48.0 if k <= 2 else 6.0
    mu, _ = _mu_raw(n)
    if scale == "dissection":
        mu = mu / 2.0 ** np.arange(1, k + 1)
    coarse = _integral_once(mu, s, B, panel_scale=panel_scale)
    fine = _integral_once(mu, s, B, panel_scale=1.5 * panel_scale)
    half_box = _integral_once(mu, s, B / 2, panel_scale=1.5 * panel_scale)
    quad_err = abs(fine - coarse)
    box_err = abs(fine - half_box)
    value = fine
    err = quad_err + box_err
    converged = err < max(tol, 0.05 * abs(value.real))
    if strict and not converged:
        raise ToleranceError("quadrature tolerance unreachable at this box",
                             value=float(value.real), achieved=float(err))
    return DensityEstimate(
        value=float(value.real),
        method=f"BoxQuadrature{{B={B}}}",
        error_estimate=float(err),
        converged=bool(converged),
        imag_diagnostic=abs(value.imag),
        detail={"quad_err": float(quad_err), "box_err": float(box_err),
                "l1_tail_bound": float(_l1_tail_bound(mu, s, B)),
                "B": B, "scale": scale},
    )


def _unit_osc_probe(beta):
    panels = int(math.ceil(4 * (np.sum(np.abs(beta)) + 1)))
    edges = np.linspace(0.0, 1.0, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    g = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    phase = np.zeros_like(g)
    p = g.copy()
    for c in beta:
        phase += c * p
        p = p * g
    return np.sum(w * np.exp(2j * np.pi * phase))


def mc_volume_oracle(n, params, eta=0.05, samples=2_000_000, seed=7):
    """Monte-Carlo estimate of the normalized solution-slab volume.

    ``(2 eta)^{-k} vol{u in [0,1]^s : |sum_i u_i^j - mu_j| <= eta for all j}``
    with a binomial confidence half-width; a second run at ``eta/2`` is
    reported to expose the eta-bias.
    """
    mu, _ = _mu_raw(n)
    s, k = params.s, params.k
    if not params.is_pure:
        raise ValidationError("volume oracle is defined for the pure system")

    def run(e, stream):
        rng = substream(seed, stream)
        hits = 0
        done = 0
        chunk = 500_000
        while done < samples:
            m = min(chunk, samples - done)
            u = rng.random((m, s))
            ok = np.ones(m, dtype=bool)
            p = u.copy()
            for j in range(k):
                if j > 0:
                    p = p * u
                ok &= np.abs(p.sum(axis=1) - mu[j]) <= e
            hits += int(ok.sum())
            done += m
        phat = hits / samples
        norm = (2.0 * e) ** (-k)
        if hits == 0:
            return 0.0, 3.0 / samples * norm, hits
        hw = 1.96 * math.sqrt(phat * (1 - phat) / samples) * norm
        return phat * norm, hw, hits

    v1, h1, hits1 = run(eta, 0)
    v2, h2, hits2 = run(eta / 2, 1)
    # quadratic-bias (Richardson) extrapolation across the two slab widths
    extrap = (4.0 * v2 - v1) / 3.0
    extrap_hw = math.sqrt((4.0 / 3.0 * h2) ** 2 + (h1 / 3.0) ** 2)
    return DensityEstimate(
        value=v1,
        method=f"MonteCarloVolume{{eta={eta},samples={samples},seed={seed}}}",
        error_estimate=h1,
        converged=hits1 >= 100,
        detail={"hits": hits1,
                "half_eta": {"value": v2, "half_width": h2, "hits": hits2},
                "extrapolated": {"value": extrap, "half_width": extrap_hw}},
    )


# ---------------------------------------------------------------------------
# main term
# ---------------------------------------------------------------------------

def main_term(n, params, series, integral):
    """``S * J * X^(s - k(k+1)/2)`` with propagated error bars (raw scale)."""
    if not series.converged:
        raise NonConvergedError("singular series estimate not converged")
    if not integral.converged:
        raise NonConvergedError("singular integral estimate not converged")
    _, scale = _mu_raw(n)
    expo = params.s - params.k * (params.k + 1) / 2
    power = scale ** expo
    value = series.value * integral.value * power
    err = (abs(series.error_estimate * integral.value)
           + abs(integral.error_estimate * series.value)) * power
    return {
        "value": value,
        "error": err,
        "series": series.value,
        "integral": integral.value,
        "scale": scale,
        "scale_convention": "raw",
        "exponent": expo,
    }
