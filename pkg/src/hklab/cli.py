"""Command-line front end: batch experiments, persistence, reporting.

Exit codes: 0 success, 2 validation failure, 3 budget exhaustion,
4 internal error.  Every output blob embeds the config hash, the RNG seed,
the code version, and the wall time; cached runs reproduce byte-identically
(the cache key includes the code version, so upgrades never serve stale
blobs).  ``HK_CACHE_DIR`` overrides the cache location.
"""

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .core import SystemParams
from .counting import count_mitm, count_naive, mvt_scaling_experiment, vinogradov_count
from .circle import (
    DissectionParams,
    classify,
    dilation_containment_check,
    minor_arc_decay_experiment,
    moment_majorant_experiment,
    w4_main_term_experiment,
)
from .densities import (
    main_term,
    mc_volume_oracle,
    singular_integral_quadrature,
    singular_series_euler,
    singular_series_qsum,
)
from .errors import BudgetExceededError, ValidationError
from .expsums import (
    complete_sum,
    oscillatory_integral,
    verify_binomial_transform,
    verify_resolution_identity,
    verify_shift_reindex,
    weyl_sum,
    weyl_sum_batch,
)
from .local import solubility_report
from .streams import substream

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_BUDGET = 3
EXIT_INTERNAL = 4


# ---------------------------------------------------------------------------
# config and cache
# ---------------------------------------------------------------------------

_EXPERIMENT_KEYS = {
    "minor-decay": {"s", "k", "X", "Q_list", "samples", "seed", "budget"},
    "moment-majorant": {"s", "k", "X", "Q_list", "h", "samples", "seed", "budget"},
    "w4-main": {"s", "k", "base_tuple", "scale_list", "l_exponent",
                "series_p_max", "series_modcap", "seed", "budget"},
}


@dataclass
class ExperimentConfig:
    """Validated experiment description; unknown keys are rejected."""

    name: str
    options: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict) or "name" not in raw:
            raise ValidationError("config must be a JSON object with a 'name' field")
        name = raw["name"]
        if name not in _EXPERIMENT_KEYS:
            raise ValidationError(
                f"unknown experiment '{name}'; expected one of {sorted(_EXPERIMENT_KEYS)}")
        options = {k: v for k, v in raw.items() if k != "name"}
        unknown = set(options) - _EXPERIMENT_KEYS[name]
        if unknown:
            raise ValidationError(
                f"unknown config keys for '{name}': {sorted(unknown)}")
        return cls(name, options)

    def canonical(self):
        return json.dumps({"name": self.name, **self.options},
                          sort_keys=True, separators=(",", ":"))


def config_hash(payload):
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


class ResultCache:
    """Content-addressed blob store keyed by (operation, inputs, version)."""

    def __init__(self, root=None):
        if root is None:
            root = os.environ.get("HK_CACHE_DIR",
                                  os.path.join(Path.home(), ".cache", "hklab"))
        self.root = Path(root)

    def key(self, op, inputs):
        canon = json.dumps({"op": op, "inputs": inputs, "version": __version__},
                           sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def get(self, key):
        path = self.root / f"{key}.json"
        if path.exists():
            return path.read_bytes()
        return None

    def put(self, key, blob):
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / f"{key}.json").write_bytes(blob)


def _finalize(payload, args, t0, seed=None):
    payload["meta"] = {
        "code_version": __version__,
        "config_hash": config_hash(json.dumps(
            {k: v for k, v in sorted(vars(args).items())
             if k not in ("func",)}, default=str, sort_keys=True)),
        "seed": seed,
        "wall_time_s": round(time.perf_counter() - t0, 6),
    }
    return payload


def _emit(payload, out=None):
    blob = json.dumps(payload, indent=2, sort_keys=True, default=_jsonable)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(blob + "\n")
        print(f"wrote {out}")
    else:
        print(blob)


def _jsonable(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "__dataclass_fields__"):
        return asdict(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    return str(obj)


def _write_csv(path, header, rows):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path}")


def _parse_intlist(text):
    return [int(v) for v in str(text).split(",") if v != ""]


def _parse_floatlist(text):
    return [float(v) for v in str(text).split(",") if v != ""]


def _params_from_args(args):
    variant = getattr(args, "variant", "pure") or "pure"
    if variant == "pure":
        return SystemParams.pure(args.s, args.k)
    if variant.startswith("mixed:"):
        l, m = (int(v) for v in variant.split(":", 1)[1].split(","))
        return SystemParams.mixed_sign(l, m, args.k)
    if variant.startswith("coeffs:"):
        return SystemParams.with_coefficients(
            _parse_intlist(variant.split(":", 1)[1]), args.k)
    raise ValidationError(f"unknown variant '{variant}'")


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------

def cmd_count(args):
    t0 = time.perf_counter()
    params = _params_from_args(args)
    n = _parse_intlist(args.n)
    kw = {"box": args.box, "budget": args.budget}
    if args.xmin is not None:
        kw["x_min"] = args.xmin
    results = {}
    if args.method in ("naive", "both"):
        results["naive"] = asdict(count_naive(params, n, **kw))
    if args.method in ("mitm", "both"):
        results["mitm"] = asdict(count_mitm(params, n, box=kw.get("box"),
                                            x_min=kw.get("x_min"),
                                            budget=args.budget))
    counts = {m: r["count"] for m, r in results.items()}
    if len(set(counts.values())) > 1:
        raise RuntimeError(f"method disagreement: {counts}")
    print(next(iter(counts.values())))
    payload = _finalize({"n": n, "results": results}, args, t0)
    if args.out:
        _emit(payload, args.out)
    return EXIT_OK


def cmd_vinogradov(args):
    t0 = time.perf_counter()
    X_list = _parse_intlist(args.X)
    if len(X_list) == 1:
        J = vinogradov_count(args.t, args.k, X_list[0], budget=args.budget)
        print(J)
        payload = _finalize({"t": args.t, "k": args.k, "X": X_list[0], "J": J},
                            args, t0)
    else:
        table = mvt_scaling_experiment(args.t, args.k, X_list, budget=args.budget)
        for row in table["rows"]:
            print(f"X={row['X']:>8}  J={row['J']}")
        print(f"slope={table['slope']:.4f}  "
              f"critical={table['critical_exponent']}  "
              f"subcritical={table['subcritical_exponent']}")
        payload = _finalize(table, args, t0)
    if args.out:
        _emit(payload, args.out)
    return EXIT_OK


def cmd_sums(args):
    t0 = time.perf_counter()
    if args.grid or args.csv:
        k = args.k
        if args.csv:
            mesh = np.loadtxt(args.csv, delimiter=",", ndmin=2)[:, :k]
        else:
            N = args.grid
            axes = [np.arange(N) / N for _ in range(k)]
            mesh = np.stack(np.meshgrid(*axes, indexing="ij"),
                            axis=-1).reshape(-1, k)
        vals = weyl_sum_batch(mesh, args.X)
        out = args.out or "weyl_grid.csv"
        header = [f"alpha_{j + 1}" for j in range(k)] + ["re", "im"]
        rows = [list(map(float, mesh[i])) + [vals[i].real, vals[i].imag]
                for i in range(len(mesh))]
        _write_csv(out, header, rows)
        return EXIT_OK
    if args.kind == "weyl":
        v = weyl_sum(_parse_floatlist(args.alpha), args.X)
        print(f"{v.real:.12g} {v.imag:+.12g}i")
    elif args.kind == "complete":
        v = complete_sum(args.q, _parse_intlist(args.a))
        print(f"{v.real:.12g} {v.imag:+.12g}i  |S|={abs(v):.12g}")
    elif args.kind == "integral":
        r = oscillatory_integral(_parse_floatlist(args.beta), args.X,
                                 tol=args.tol)
        print(f"{r.value.real:.12g} {r.value.imag:+.12g}i  "
              f"err~{r.error_estimate:.3g} panels={r.panels}")
    else:
        raise ValidationError(f"unknown sum kind '{args.kind}'")
    return EXIT_OK


def cmd_local(args):
    t0 = time.perf_counter()
    n = _parse_intlist(args.n)
    rep = solubility_report(n, args.s, seed=args.seed, budget=args.budget)
    print(f"power-mean necessity : {'ok' if rep.holder_ok else 'FAIL'}")
    print(f"congruence necessity : {'ok' if rep.fermat_ok else 'FAIL'}")
    for p, r in sorted(rep.padic.items()):
        extra = f" depth={r.depth} tau={r.tau}" if r.status == "found" else f" ({r.reason})"
        print(f"p = {p:<3}: {r.status}{extra}")
    print(f"real witness         : {rep.real.status}"
          + (f" (nonsingular={rep.real.nonsingular})" if rep.real.status == "found" else ""))
    for w in rep.warnings:
        print(f"warning: {w}")
    print(f"verdict              : {rep.verdict}")
    if args.out:
        payload = json.loads(rep.to_json())
        payload = _finalize(payload, args, t0, seed=args.seed)
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(
            json.dumps(payload, indent=2, sort_keys=True, default=_jsonable)
            + "\n")
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_densities(args):
    t0 = time.perf_counter()
    params = _params_from_args(args)
    n = _parse_intlist(args.n)
    out = {"n": n, "s": args.s, "k": args.k}
    if args.method in ("qsum", "both"):
        est = singular_series_qsum(n, params, Q_max=args.qmax, tol=args.tol or 0.02)
        out["series_qsum"] = asdict(est)
        if args.csv:
            _write_csv(args.csv, ["q", "A_q"],
                       [[q, v] for q, v in est.detail["terms"]])
        out["series_qsum"]["detail"].pop("partials", None)
    if args.method in ("euler", "both"):
        est = singular_series_euler(n, params, p_max=args.pmax)
        out["series_euler"] = asdict(est)
    if args.integral:
        quad = singular_integral_quadrature(n, params)
        out["integral"] = asdict(quad)
        if args.mc:
            out["integral_mc"] = asdict(mc_volume_oracle(
                n, params, samples=args.samples, seed=args.seed))
        series = (out.get("series_euler") or out.get("series_qsum"))
        if series:
            from .densities import DensityEstimate

            sd = DensityEstimate(**{k2: v for k2, v in series.items()})
            try:
                out["main_term"] = main_term(n, params, sd, quad)
            except Exception as exc:  # noqa: BLE001 - reported, not fatal
                out["main_term_error"] = str(exc)
    payload = _finalize(out, args, t0, seed=args.seed)
    _emit(payload, args.out)
    return EXIT_OK


def cmd_arcs(args):
    t0 = time.perf_counter()
    d = DissectionParams.from_scale(args.X, args.k, l_exponent=args.l_exponent)
    rows = []
    if args.csv:
        data = np.loadtxt(args.csv, delimiter=",", ndmin=2)
        pts = data[:, : args.k]
    elif args.alpha:
        pts = np.array([_parse_floatlist(args.alpha)])
    else:
        rng = substream(args.seed, 0)
        pts = rng.random((args.points, args.k))
    if args.Q is not None:
        # 1-d membership mode: test the final coordinate at an explicit cutoff
        from .circle import in_major_1d

        major = 0
        for p in pts:
            ok, lab = in_major_1d(p[-1], args.Q, args.X, args.k)
            major += ok
            if len(pts) <= 20:
                print(f"{float(p[-1]):.6f} -> "
                      + (f"major (q={lab.q}, a={lab.a[0]})" if ok else "minor"))
        print(f"major: {major}/{len(pts)} at Q={args.Q}, X={args.X}, k={args.k}")
        return EXIT_OK
    for p in pts:
        cls, label = classify(p, d)
        rows.append([*map(float, p), cls,
                     label.q if label else "", label.a if label else ""])
        if len(pts) <= 20:
            print(f"{np.round(p, 6).tolist()} -> {cls}"
                  + (f" (q={label.q}, a={label.a})" if label else ""))
    if args.out:
        _write_csv(args.out,
                   [f"alpha_{j + 1}" for j in range(args.k)] + ["class", "q", "a"],
                   rows)
    counts = {}
    for r in rows:
        counts[r[args.k]] = counts.get(r[args.k], 0) + 1
    print(f"classes: {counts}  (L={d.L:.4g}, Q={d.Q:.4g}, X={d.X:.4g})")
    return EXIT_OK


def cmd_experiment(args):
    t0 = time.perf_counter()
    cfg = ExperimentConfig.load(args.config)
    cache = ResultCache()
    key = cache.key("experiment:" + cfg.name, cfg.canonical())
    out_path = args.out or f"{cfg.name}_result.json"
    if not args.no_cache:
        hit = cache.get(key)
        if hit is not None:
            Path(out_path).parent.mkdir(parents=True, exist_ok=True)
            Path(out_path).write_bytes(hit)
            print(f"cache hit -> {out_path}")
            return EXIT_OK
    o = dict(cfg.options)
    o.pop("budget", None)
    try:
        if cfg.name == "minor-decay":
            result = minor_arc_decay_experiment(
                o["s"], o["k"], o["X"], o["Q_list"],
                samples=o.get("samples", 400), seed=o.get("seed", 0))
        elif cfg.name == "moment-majorant":
            result = moment_majorant_experiment(
                o["s"], o["k"], o["X"], o["Q_list"], o["h"],
                samples=o.get("samples", 60000), seed=o.get("seed", 0))
            result["containment"] = dilation_containment_check(
                o["s"], max(o["Q_list"]), o["X"], o["k"], seed=o.get("seed", 0))
        elif cfg.name == "w4-main":
            result = w4_main_term_experiment(
                o["s"], o["k"], o["base_tuple"], o["scale_list"],
                l_exponent=o.get("l_exponent", 1.0 / 3),
                series_p_max=o.get("series_p_max", 101),
                series_modcap=o.get("series_modcap", 512))
        else:  # pragma: no cover - names validated at load
            raise ValidationError(f"unhandled experiment '{cfg.name}'")
    except BudgetExceededError as exc:
        partial = {"experiment": cfg.name, "partial": True,
                   "work_done": exc.work_done, "error": str(exc)}
        Path(out_path).parent.mkdir(parents=True, exist_ok=True)
        Path(out_path).write_text(json.dumps(partial, indent=2) + "\n")
        print(f"wrote partial artifact {out_path}")
        raise
    payload = _finalize({"experiment": cfg.name, "config": json.loads(cfg.canonical()),
                         "result": result}, args, t0, seed=cfg.options.get("seed"))
    payload["meta"]["config_hash"] = config_hash(cfg.canonical())
    blob = json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n"
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    Path(out_path).write_text(blob)
    cache.put(key, blob.encode())
    if "rows" in result:
        csv_path = str(Path(out_path).with_suffix(".csv"))
        header = sorted({k2 for row in result["rows"] for k2 in row
                         if not isinstance(row[k2], (dict, list))})
        _write_csv(csv_path, header,
                   [[row.get(h, "") for h in header] for row in result["rows"]])
    print(f"wrote {out_path}")
    if cfg.name == "minor-decay":
        print(f"summary: sup slope {result['sup_slope']:.4f} "
              f"(reference {result['reference_sigma']:.4f}), strictly "
              f"decreasing: {result['strictly_decreasing']}")
    elif cfg.name == "moment-majorant":
        ratios = [row["ratio"] for row in result["rows"]]
        print(f"summary: bound ratios {[f'{r:.3g}' for r in ratios]}, "
              f"containment {result['containment']['passed']}"
              f"/{result['containment']['checked']}")
    elif cfg.name == "w4-main":
        ratios = [round(row["ratio"], 4) for row in result["rows"]]
        print(f"summary: count/main-term ratios {ratios} at scales "
              f"{[row['X0'] for row in result['rows']]}")
    return EXIT_OK


def cmd_verify(args):
    t0 = time.perf_counter()
    if args.what != "identities":
        raise ValidationError("only 'identities' verification is available")
    rng = substream(args.seed, 0)
    k, X = args.k, args.X
    failures = 0

    def rand_alpha():
        num = rng.integers(0, 64, size=k)
        den = rng.integers(1, 64, size=k)
        return num / den % 1.0

    worst_reindex = 0.0
    worst_resolution = 0.0
    for t in range(args.trials):
        alpha = rand_alpha()
        y = int(rng.integers(0, X + 1))
        worst_reindex = max(worst_reindex, verify_shift_reindex(alpha, X, y))
        N = 3 * X + 3 + int(rng.integers(0, 8))
        worst_resolution = max(worst_resolution,
                               verify_resolution_identity(alpha, X, y, N))
        x = rng.integers(0, 30, size=args.s)
        yb = int(rng.integers(0, 10))
        if not verify_binomial_transform([int(v) for v in x], yb, k):
            failures += 1
    tol_reindex = 1e-9 * (X + 1)
    tol_resolution = 1e-8 * (X + 1) ** 2
    ok_re = worst_reindex <= tol_reindex
    ok_rs = worst_resolution <= tol_resolution
    print(f"reindex identity    : worst {worst_reindex:.3e} vs {tol_reindex:.1e} "
          f"{'pass' if ok_re else 'FAIL'}")
    print(f"resolution identity : worst {worst_resolution:.3e} vs {tol_resolution:.1e} "
          f"{'pass' if ok_rs else 'FAIL'}")
    print(f"binomial transform  : {args.trials - failures}/{args.trials} pass")
    all_ok = ok_re and ok_rs and failures == 0
    print("all identity checks pass" if all_ok else "IDENTITY CHECKS FAILED")
    return EXIT_OK if all_ok else EXIT_INTERNAL


def cmd_report(args):
    t0 = time.perf_counter()
    root = Path(args.dir)
    blobs = sorted(root.glob("*.json"))
    if not blobs:
        raise ValidationError(f"no result blobs in {root}")
    by_experiment = {}
    versions = set()
    for path in blobs:
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError:
            continue
        meta = data.get("meta", {})
        versions.add(meta.get("code_version", "?"))
        name = data.get("experiment", data.get("name", path.stem))
        by_experiment.setdefault(name, []).append((path.name, data))
    if len(versions) > 1:
        print(f"WARNING: mixed code versions in results: {sorted(versions)}")
    for name, items in sorted(by_experiment.items()):
        rows = []
        for fname, data in items:
            result = data.get("result", data)
            for row in result.get("rows", []):
                flat = {k2: v for k2, v in row.items()
                        if not isinstance(v, (dict, list))}
                flat["source"] = fname
                rows.append(flat)
        print(f"== {name}: {len(items)} result(s), {len(rows)} row(s)")
        if rows:
            header = sorted({k2 for r in rows for k2 in r})
            out = root / f"merged_{name}.csv"
            _write_csv(out, header, [[r.get(h, "") for h in header] for r in rows])
            slopes = [data.get("result", {}).get("sup_slope")
                      for _, data in items]
            slopes = [s for s in slopes if isinstance(s, (int, float))]
            if slopes:
                print(f"   fitted slope(s): {[round(s, 4) for s in slopes]}")
    return EXIT_OK


def cmd_run(args):
    return cmd_experiment(args)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="hk",
                                description="power-sum system laboratory")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("count", help="exact representation count")
    c.add_argument("--s", type=int, required=True)
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--n", required=True, help="comma-separated target vector")
    c.add_argument("--variant", default="pure",
                   help="pure | mixed:l,m | coeffs:c1,c2,...")
    c.add_argument("--box", type=int, default=None)
    c.add_argument("--xmin", type=int, default=None)
    c.add_argument("--method", choices=["naive", "mitm", "both"], default="mitm")
    c.add_argument("--budget", type=int, default=50_000_000)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_count)

    v = sub.add_parser("vinogradov", help="translation-invariant mean values")
    v.add_argument("--t", type=int, required=True)
    v.add_argument("--k", type=int, required=True)
    v.add_argument("--X", required=True, help="scale or comma list of scales")
    v.add_argument("--budget", type=int, default=50_000_000)
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_vinogradov)

    s = sub.add_parser("sums", help="exponential sums and integrals")
    s.add_argument("kind", choices=["weyl", "complete", "integral"])
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--alpha", default=None)
    s.add_argument("--beta", default=None)
    s.add_argument("--q", type=int, default=None)
    s.add_argument("--a", default=None)
    s.add_argument("--X", type=float, default=10.0)
    s.add_argument("--tol", type=float, default=None)
    s.add_argument("--grid", type=int, default=None,
                   help="emit CSV of f on the N^k lattice of [0,1)^k")
    s.add_argument("--csv", default=None,
                   help="CSV of alpha rows to evaluate in batch")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_sums)

    lo = sub.add_parser("local", help="local solubility report")
    lo.add_argument("--s", type=int, required=True)
    lo.add_argument("--k", type=int, required=True)
    lo.add_argument("--n", required=True)
    lo.add_argument("--seed", type=int, default=0)
    lo.add_argument("--budget", type=int, default=2_000_000)
    lo.add_argument("--out", default=None)
    lo.set_defaults(func=cmd_local)

    d = sub.add_parser("densities", help="series / integral / main term")
    d.add_argument("--s", type=int, required=True)
    d.add_argument("--k", type=int, required=True)
    d.add_argument("--n", required=True)
    d.add_argument("--variant", default="pure")
    d.add_argument("--method", choices=["qsum", "euler", "both"], default="both")
    d.add_argument("--qmax", type=int, default=None)
    d.add_argument("--pmax", type=int, default=13)
    d.add_argument("--tol", type=float, default=None)
    d.add_argument("--integral", action="store_true")
    d.add_argument("--mc", action="store_true")
    d.add_argument("--samples", type=int, default=2_000_000)
    d.add_argument("--seed", type=int, default=7)
    d.add_argument("--csv", default=None, help="dump (q, A(q)) rows")
    d.add_argument("--out", default=None)
    d.set_defaults(func=cmd_densities)

    a = sub.add_parser("arcs", help="classify frequency points")
    a.add_argument("--k", type=int, required=True)
    a.add_argument("--X", type=float, required=True)
    a.add_argument("--Q", type=float, default=None,
                   help="1-d membership mode at this explicit cutoff")
    a.add_argument("--l-exponent", dest="l_exponent", type=float, default=None)
    a.add_argument("--csv", default=None, help="CSV of alpha rows to classify")
    a.add_argument("--alpha", default=None)
    a.add_argument("--points", type=int, default=10)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--out", default=None)
    a.set_defaults(func=cmd_arcs)

    e = sub.add_parser("experiment", help="run a named experiment from JSON config")
    e.add_argument("--config", required=True)
    e.add_argument("--out", default=None)
    e.add_argument("--no-cache", action="store_true")
    e.set_defaults(func=cmd_experiment)

    r = sub.add_parser("run", help="alias of 'experiment'")
    r.add_argument("--config", required=True)
    r.add_argument("--out", default=None)
    r.add_argument("--no-cache", action="store_true")
    r.set_defaults(func=cmd_run)

    ver = sub.add_parser("verify", help="identity suite")
    ver.add_argument("what", choices=["identities"])
    ver.add_argument("--k", type=int, default=2)
    ver.add_argument("--s", type=int, default=6)
    ver.add_argument("--X", type=int, default=20)
    ver.add_argument("--trials", type=int, default=50)
    ver.add_argument("--seed", type=int, default=0)
    ver.set_defaults(func=cmd_verify)

    rep = sub.add_parser("report", help="merge result blobs into summary CSVs")
    rep.add_argument("--dir", required=True)
    rep.set_defaults(func=cmd_report)

    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except BudgetExceededError as exc:
        print(f"budget exhausted: {exc} (partial work: {exc.work_done})",
              file=sys.stderr)
        return EXIT_BUDGET
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
