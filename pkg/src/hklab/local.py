"""Local solubility machinery.

Necessary conditions (power-mean inequalities in exact integer form, the
small-prime congruence system) plus searches for certified witnesses: a
residue solution that lifts p-adically in the multivariate Hensel sense
(some k-by-k Jacobian minor of valuation ``tau`` found at depth
``gamma > 2 tau``), and a positive non-singular real solution located by
Newton iteration with seeded random restarts.

``NotFound`` from the p-adic search proves there is no primitive p-adic
solution (an exhausted residue tree); the real search is heuristic and its
failures are reported as inconclusive, never as insolubility.
"""

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .core import Target
from .errors import ValidationError
from .streams import substream


def _target_vector(n):
    if isinstance(n, Target):
        return list(n.n)
    return [int(v) for v in n]


# ---------------------------------------------------------------------------
# necessary conditions
# ---------------------------------------------------------------------------

def holder_necessary(n, s):
    """Power-mean necessity: ``n_l^j <= n_j^l`` and ``n_j^l <= s^(l-j) n_l^j``.

    Evaluated for every pair ``1 <= j <= l <= k`` in exact integer arithmetic.
    Returns ``(ok, details)`` with one record per pair.
    """
    n = _target_vector(n)
    k = len(n)
    details = []
    ok = True
    for l in range(1, k + 1):
        for j in range(1, l + 1):
            lower = n[l - 1] ** j <= n[j - 1] ** l
            upper = n[j - 1] ** l <= s ** (l - j) * n[l - 1] ** j
            details.append({"j": j, "l": l, "lower_ok": lower, "upper_ok": upper})
            ok = ok and lower and upper
    return ok, details


def small_primes(limit):
    sieve = np.ones(max(limit + 1, 2), dtype=bool)
    sieve[:2] = False
    for p in range(2, int(limit ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return [int(p) for p in np.flatnonzero(sieve) if p <= limit]


def fermat_congruences(n):
    """Congruence necessity: ``n_l = n_j (mod p)`` when ``l = j (mod p-1)``.

    Only primes with ``p - 1 <= k - 1`` produce constrained pairs; ``p = 2``
    forces all entries to share parity.
    """
    n = _target_vector(n)
    k = len(n)
    details = []
    ok = True
    for p in small_primes(k):
        bad = []
        for j in range(1, k + 1):
            for l in range(j + 1, k + 1):
                if (l - j) % (p - 1) == 0 and (n[l - 1] - n[j - 1]) % p != 0:
                    bad.append((j, l))
        details.append({"p": p, "ok": not bad, "violations": bad})
        ok = ok and not bad
    return ok, details


# ---------------------------------------------------------------------------
# Jacobian rank
# ---------------------------------------------------------------------------

def jacobian_matrix(x, k):
    """Exact integer Jacobian of the power-sum map: rows ``j * x_i^(j-1)``."""
    return [[j * int(v) ** (j - 1) for v in x] for j in range(1, k + 1)]


def jacobian_rank(x, k, p=None):
    """Rank of the power-sum Jacobian over the rationals or over Z/p.

    Computed by exact Gaussian elimination (Fractions resp. modular
    inverse pivots).  Over characteristic 0 or ``p > k`` this equals
    ``min(k, #distinct coordinates)`` through the Vandermonde factorization;
    that shortcut is what the property tests cross-check.
    """
    M = jacobian_matrix(x, k)
    if p is None:
        rows = [[Fraction(v) for v in row] for row in M]
        return _rank_field(rows, len(M), len(M[0]), lambda a: a == 0,
                           lambda a, b: a / b)
    rows = [[v % p for v in row] for row in M]
    return _rank_field(rows, len(M), len(M[0]), lambda a: a % p == 0,
                       lambda a, b: (a * pow(b, -1, p)) % p)


def _rank_field(rows, nr, nc, is_zero, div):
    rank = 0
    col = 0
    r = 0
    while r < nr and col < nc:
        piv = None
        for rr in range(r, nr):
            if not is_zero(rows[rr][col]):
                piv = rr
                break
        if piv is None:
            col += 1
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for rr in range(r + 1, nr):
            if not is_zero(rows[rr][col]):
                f = div(rows[rr][col], rows[r][col])
                for cc in range(col, nc):
                    rows[rr][cc] = rows[rr][cc] - f * rows[r][cc]
        rank += 1
        r += 1
        col += 1
    return rank


def vandermonde_rank_prediction(x, k):
    """``min(k, #distinct coordinates)`` (valid in char 0 or ``p > k``)."""
    return min(k, len(set(int(v) for v in x)))


# ---------------------------------------------------------------------------
# p-adic witness search
# ---------------------------------------------------------------------------

@dataclass
class PadicResult:
    status: str                # "found" | "not_found" | "inconclusive"
    p: int
    witness: tuple = None      # residues mod p^depth
    depth: int = 0             # gamma at which the certificate was issued
    tau: int = None            # minimal minor valuation of the witness
    lifted: bool = False       # one extra refinement level verified
    work: int = 0
    reason: str = ""


def default_depth_max(p, k):
    """Deep enough to certify the small primes where singularity concentrates."""
    return 2 * (1 + int(math.log(k, p))) + 3


def _det_int(M):
    k = len(M)
    if k == 1:
        return M[0][0]
    if k == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    total = 0
    for perm in itertools.permutations(range(k)):
        sign = 1
        seen = list(perm)
        # parity via inversion count (k is small)
        inv = sum(1 for i in range(k) for j in range(i + 1, k) if seen[i] > seen[j])
        sign = -1 if inv % 2 else 1
        prod = 1
        for i in range(k):
            prod *= M[i][perm[i]]
        total += sign * prod
    return total


def _valuation(v, p, cap):
    if v == 0:
        return cap
    t = 0
    while v % p == 0 and t < cap:
        v //= p
        t += 1
    return t


def minor_valuation(x, k, p, cap):
    """Minimal p-adic valuation over all k-by-k Jacobian minors (capped)."""
    M = jacobian_matrix(x, k)
    s = len(x)
    best = cap
    for cols in itertools.combinations(range(s), k):
        sub = [[M[j][i] for i in cols] for j in range(k)]
        best = min(best, _valuation(_det_int(sub), p, cap))
        if best == 0:
            break
    return best


def _solve_affine_mod_p(J, r, p):
    """All solutions t of ``J t = r (mod p)``: (particular, nullspace basis).

    Returns None when inconsistent.  ``J`` is k x s over Z/p.
    """
    k = len(J)
    s = len(J[0])
    A = [row[:] + [r[i] % p] for i, row in enumerate(J)]
    pivots = []
    rr = 0
    for col in range(s):
        piv = None
        for i in range(rr, k):
            if A[i][col] % p:
                piv = i
                break
        if piv is None:
            continue
        A[rr], A[piv] = A[piv], A[rr]
        inv = pow(A[rr][col], -1, p)
        A[rr] = [(v * inv) % p for v in A[rr]]
        for i in range(k):
            if i != rr and A[i][col] % p:
                f = A[i][col]
                A[i] = [(a - f * b) % p for a, b in zip(A[i], A[rr])]
        pivots.append(col)
        rr += 1
        if rr == k:
            break
    for i in range(rr, k):
        if A[i][s] % p:
            return None
    part = [0] * s
    for i, col in enumerate(pivots):
        part[col] = A[i][s]
    free = [c for c in range(s) if c not in pivots]
    basis = []
    for fc in free:
        vec = [0] * s
        vec[fc] = 1
        for i, col in enumerate(pivots):
            vec[col] = (-A[i][fc]) % p
        basis.append(vec)
    return part, basis


def padic_witness(n, s, p, depth_max=None, budget=2_000_000, frontier_cap=4096):
    """Search for a primitive residue solution certified to lift p-adically.

    Iterative deepening over depth gamma: level-1 solutions come from direct
    enumeration (last variable by lookup); refinements solve the linearized
    system mod p.  A witness is accepted at depth gamma when its minimal
    Jacobian-minor valuation tau satisfies ``2 tau < gamma``.  The frontier
    is kept at the candidates with the smallest minor valuation (the ones a
    certificate can come from); ``not_found`` is only reported when the tree
    emptied without any such pruning, so it remains a proof of emptiness.
    """
    n = _target_vector(n)
    k = len(n)
    if depth_max is None:
        depth_max = default_depth_max(p, k)
    work = 0

    # depth 1: enumerate solutions mod p
    powvec = {}
    for v in range(p):
        key = tuple(pow(v, j, p) for j in range(1, k + 1))
        powvec.setdefault(key, []).append(v)
    vec_of = [tuple(pow(v, j, p) for j in range(1, k + 1)) for v in range(p)]
    frontier = []
    pruned = False
    target = tuple(v % p for v in n)
    for head in itertools.product(range(p), repeat=s - 1):
        work += 1
        if work > budget:
            return PadicResult("inconclusive", p, work=work,
                               reason="budget exceeded during level-1 enumeration")
        resid = list(target)
        for v in head:
            pv = vec_of[v]
            for j in range(k):
                resid[j] = (resid[j] - pv[j]) % p
        for last in powvec.get(tuple(resid), ()):
            x = head + (last,)
            if any(v % p for v in x):  # primitivity: not all = 0 mod p
                frontier.append(x)

    if not frontier:
        return PadicResult("not_found", p, depth=1, work=work,
                           reason="no primitive solutions mod p")

    mod = p
    for gamma in range(1, depth_max + 1):
        taus = []
        for x in frontier:
            work += 1
            tau = minor_valuation(x, k, p, cap=gamma)
            if 2 * tau < gamma:
                lifted = bool(_refine(x, n, s, k, p, mod))
                return PadicResult("found", p, witness=tuple(x), depth=gamma,
                                   tau=tau, lifted=lifted, work=work)
            taus.append(tau)
        if gamma == depth_max:
            break
        if len(frontier) > frontier_cap:
            order = sorted(range(len(frontier)), key=lambda i: (taus[i], i))
            frontier = [frontier[i] for i in order[:frontier_cap]]
            pruned = True
        new_frontier = []
        for x in frontier:
            kids = _refine(x, n, s, k, p, mod)
            work += max(1, len(kids))
            if work > budget:
                return PadicResult("inconclusive", p, depth=gamma, work=work,
                                   reason="budget exceeded while deepening")
            new_frontier.extend(kids)
        if not new_frontier:
            if pruned:
                return PadicResult("inconclusive", p, depth=gamma + 1, work=work,
                                   reason="frontier emptied after pruning")
            return PadicResult("not_found", p, depth=gamma + 1, work=work,
                               reason=f"no primitive solutions mod p^{gamma + 1}")
        frontier = new_frontier
        mod *= p

    return PadicResult("inconclusive", p, depth=depth_max, work=work,
                       reason="no certified witness within depth_max")


def _refine(x, n, s, k, p, mod):
    """Children of a solution mod ``mod`` at level ``mod * p`` (linear step)."""
    resid = []
    for j in range(1, k + 1):
        fj = sum(int(v) ** j for v in x)
        d = (n[j - 1] - fj) % (mod * p)
        if d % mod:
            return []
        resid.append((d // mod) % p)
    J = [[(j * pow(int(v), j - 1, p)) % p for v in x] for j in range(1, k + 1)]
    sol = _solve_affine_mod_p(J, resid, p)
    if sol is None:
        return []
    part, basis = sol
    kids = []
    for combo in itertools.product(range(p), repeat=len(basis)):
        t = list(part)
        for c, vec in zip(combo, basis):
            if c:
                for i in range(s):
                    t[i] = (t[i] + c * vec[i]) % p
        kids.append(tuple(int(v) + mod * t[i] for i, v in enumerate(x)))
    return kids


def lift_witness(result, n, s, extra_depth=1):
    """Extend a found witness by ``extra_depth`` levels; returns refinements."""
    n = _target_vector(n)
    k = len(n)
    p = result.p
    mod = p ** result.depth
    current = [result.witness]
    for _ in range(extra_depth):
        nxt = []
        for x in current:
            nxt.extend(_refine(x, n, s, k, p, mod))
        if not nxt:
            return []
        current = nxt
        mod *= p
    return current


# ---------------------------------------------------------------------------
# real witness search
# ---------------------------------------------------------------------------

@dataclass
class RealResult:
    status: str                 # "found" | "not_found"
    witness: list = None        # positive reals, original scale
    residual: float = None      # normalized infinity norm
    distinct: int = 0
    nonsingular: bool = False
    restart: int = None
    reason: str = ""


def real_witness(n, s, restarts=32, seed=0, newton_steps=60):
    """Newton search for a positive solution with full-rank Jacobian.

    The square subsystem fixes ``s - k`` coordinates at perturbed equal-split
    seeds and solves for the remaining ``k``.  Restarts run on a fixed seed
    schedule; the first success (lowest restart index) is returned, so the
    search is deterministic.  ``not_found`` is inconclusive by design.
    """
    n = _target_vector(n)
    k = len(n)
    if s < k:
        raise ValidationError("need s >= k for the square subsystem")
    ok, _ = holder_necessary(n, s)
    if not ok:
        return RealResult("not_found", reason="power-mean necessity fails")
    scale = max(abs(v) ** (1.0 / j) for j, v in enumerate(n, start=1))
    if scale == 0:
        return RealResult("not_found", reason="zero target has no positive solution")
    mu = np.array([v / scale ** j for j, v in enumerate(n, start=1)])
    tol = 1e-9 * max(1.0, float(np.max(np.abs(mu))))
    base = max(mu[0] / s, 1e-3)
    best_singular = None
    for restart in range(restarts):
        rng = substream(seed, restart)
        z = np.full(s, base)
        if restart > 0:  # restart 0 probes the exact equal-split point
            z *= 1.0 + 0.6 * (rng.random(s) - 0.5)
        fixed = z[: s - k].copy()
        free = z[s - k:].copy()
        converged = False
        for _ in range(newton_steps):
            full = np.concatenate([fixed, free])
            F = np.array([np.sum(full ** j) - mu[j - 1] for j in range(1, k + 1)])
            if np.max(np.abs(F)) <= tol:
                converged = True
                break
            J = np.array([[j * v ** (j - 1) for v in free] for j in range(1, k + 1)])
            try:
                step = np.linalg.solve(J, F)
            except np.linalg.LinAlgError:
                break
            limit = np.max(np.abs(step)) / (0.5 * max(base, 1e-9))
            if limit > 1.0:
                step = step / limit
            free = free - step
            if not np.all(np.isfinite(free)):
                break
        if not converged:
            continue
        full = np.concatenate([fixed, free])
        if np.any(full <= 0):
            continue
        distinct = _distinct_count(full)
        Jfull = np.array([[j * v ** (j - 1) for v in full] for j in range(1, k + 1)])
        sv = np.linalg.svd(Jfull, compute_uv=False)
        nonsingular = distinct >= k and sv[-1] > 1e-8 * sv[0]
        res = RealResult("found", witness=(full * scale).tolist(),
                         residual=float(np.max(np.abs(
                             [np.sum(full ** j) - mu[j - 1] for j in range(1, k + 1)]))),
                         distinct=distinct, nonsingular=nonsingular, restart=restart)
        if nonsingular:
            return res
        if best_singular is None:
            best_singular = res
    if best_singular is not None:
        best_singular.reason = "only singular witnesses located"
        return best_singular
    return RealResult("not_found", reason="all restarts failed to converge")


def _distinct_count(v, rtol=1e-6):
    vs = np.sort(np.asarray(v, dtype=float))
    scale = max(1.0, float(np.max(np.abs(vs))))
    return 1 + int(np.sum(np.diff(vs) > rtol * scale))


# ---------------------------------------------------------------------------
# consolidated report
# ---------------------------------------------------------------------------

@dataclass
class SolubilityReport:
    holder_ok: bool
    holder_detail: list
    fermat_ok: bool
    fermat_detail: list
    padic: dict
    real: RealResult
    verdict: str
    warnings: list = field(default_factory=list)

    def to_json(self, **kwargs):
        out = {
            "holder_ok": self.holder_ok,
            "fermat_ok": self.fermat_ok,
            "holder_detail": self.holder_detail,
            "fermat_detail": self.fermat_detail,
            "padic": {str(p): asdict(r) for p, r in sorted(self.padic.items())},
            "real": asdict(self.real),
            "verdict": self.verdict,
            "warnings": self.warnings,
        }
        return json.dumps(out, sort_keys=True, default=str, **kwargs)


def solubility_report(n, s, primes=None, seed=0, depth_max=None, budget=2_000_000):
    """Run every local test and consolidate the verdict.

    Verdict is ``insoluble`` when a hard necessary condition fails (power
    means, congruences, or a proven-empty residue tree), ``locally-soluble``
    when a real and all requested p-adic witnesses certify, else
    ``inconclusive``.
    """
    n = _target_vector(n)
    k = len(n)
    holder_ok, hd = holder_necessary(n, s)
    fermat_ok, fd = fermat_congruences(n)
    if primes is None:
        primes = sorted(set(small_primes(max(k, 13))))
    warnings = []
    if s < 2 ** k - 1:
        warnings.append(
            f"s = {s} < 2^k - 1 = {2 ** k - 1}: p-adic solubility is not assured "
            "in general with this few variables")
    padic = {}
    insoluble = not (holder_ok and fermat_ok)
    all_found = True
    for p in primes:
        r = padic_witness(n, s, p, depth_max=depth_max, budget=budget)
        padic[p] = r
        if r.status == "not_found":
            insoluble = True
        if r.status != "found":
            all_found = False
    real = real_witness(n, s, seed=seed) if holder_ok else RealResult(
        "not_found", reason="power-mean necessity fails")
    if insoluble:
        verdict = "insoluble"
    elif all_found and real.status == "found" and real.nonsingular:
        verdict = "locally-soluble"
    else:
        verdict = "inconclusive"
    return SolubilityReport(holder_ok, hd, fermat_ok, fd, padic, real, verdict,
                            warnings)
