"""Command-line front end: ``affinemetric <command> [options]``.

Every command writes a JSON report (and, where it makes sense, a CSV of
plot-ready polylines or tables). Exit status: 0 when every asserted property
holds, 1 when one fails (the report is still written), 2 for unreadable
input, 3 when a solver or numerical routine fails.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .affinesep import (
    all_pairs,
    build_constraints,
    embedding_affinity_defect,
    evaluation_embedding,
    separate_all,
)
from .busemann import (
    SampledRay,
    busemann_linear,
    busemann_linear_far,
    busemann_metric_ray,
    level_polylines,
)
from .corpus import lattice_directions, named_norm
from .estimators import sample_directions
from .exceptions import (
    AffineMetricError,
    DegenerateBody,
    DimensionMismatch,
    EpsInconsistent,
    InsufficientRepresentations,
    InvalidGeodesic,
    InvalidNorm,
    NonConvergent,
    NotSeparated,
    ParseError,
    SolverFailure,
    UnknownPointId,
)
from .finslerrec import (
    _base_directions,
    constancy_check,
    first_variation_check,
    oracle_from_json,
    reconstruct_norm,
    translation_invariance_check,
)
from .io import dumps, load_geodesics, load_json, load_space, polylines_csv, table_csv, write_atomic
from .normcore import (
    ConvexityVerdict,
    NormSpec,
    PNorm,
    circle_directions,
    is_smooth_point,
    norm_from_json,
    sphere_directions,
    strict_convexity_witness,
    unit_sphere_polyline,
)

CORPUS_ENV = "AFFINEMETRIC_CORPUS"

EXIT_OK, EXIT_VIOLATION, EXIT_PARSE, EXIT_SOLVER = 0, 1, 2, 3

DEFAULT_TOLERANCES = {
    "norm-check": {"homogeneity": 1e-12, "triangle": 1e-12, "convexity": 1e-9},
    "busemann": {"axiom": 1e-6, "oracle": 1e-5, "derivative": 1e-8, "ray": 1e-5, "geodesic": 1e-7},
    "smooth-scan": {"smooth": 1e-7},
    "separate": {"separation": 1e-6, "geodesic": 1e-7},
    "embed": {"separation": 1e-6, "pivot": 1e-8, "geodesic": 1e-7},
    "reconstruct": {"welldef": 1e-8, "parallel": 1e-9},
    "finsler-verify": {"translation": 1e-6, "constancy": 1e-6, "first_variation": 1e-4,
                       "smooth": 1e-7},
}

COMMANDS = tuple(DEFAULT_TOLERANCES)


@dataclass
class RunConfig:
    """A fully resolved invocation: command, inputs, tolerances and seed."""

    command: str
    inputs: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    out: str | None = None
    fmt: str = "json"

    def __post_init__(self):
        if self.command not in DEFAULT_TOLERANCES:
            raise ParseError(f"unknown command {self.command!r}")
        resolved = dict(DEFAULT_TOLERANCES[self.command])
        for name, value in self.tolerances.items():
            if name not in resolved:
                raise ParseError(f"{self.command} has no tolerance {name!r}; "
                                 f"known: {', '.join(sorted(resolved))}")
            value = float(value)
            if not math.isfinite(value) or value < 0:
                raise ParseError(f"tolerance {name} must be finite and non-negative, got {value}")
            resolved[name] = value
        self.tolerances = resolved

    def header(self) -> dict:
        return {"command": self.command, "inputs": self.inputs, "seed": self.seed,
                "tolerances": self.tolerances, "version": __version__}


@dataclass
class Outcome:
    passed: bool
    report: dict
    csv: str | None = None


# -- input resolution --------------------------------------------------------

def corpus_dir() -> Path:
    env = os.environ.get(CORPUS_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("affinemetric") / "data"))


def resolve_path(name: str) -> Path:
    """A path as given, else relative to the corpus directory."""
    p = Path(name)
    if p.exists():
        return p
    q = corpus_dir() / name
    if q.exists():
        return q
    raise ParseError(f"no such file {name!r} (also looked in {corpus_dir()})")


def parse_norm(text: str, dim: int) -> NormSpec:
    """``pnorm:<p>``, a named norm (``l1``, ``linf``, ``hexagon``) or a NormSpec JSON file."""
    try:
        if text.startswith("pnorm:"):
            p = text.split(":", 1)[1]
            return PNorm(p if p == "inf" else float(p), dim)
        if text in ("hexagon",) or (text.startswith("l") and not text.endswith(".json")):
            return named_norm(text, dim)
    except (ValueError, KeyError, InvalidNorm) as exc:
        raise ParseError(f"bad norm {text!r}: {exc}") from exc
    obj = load_json(resolve_path(text))
    try:
        return norm_from_json(obj.get("generator", obj) if isinstance(obj, dict) else obj)
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ParseError(f"bad norm file {text!r}: {exc}") from exc


def parse_vector(text: str, dim: int | None = None) -> np.ndarray:
    try:
        v = np.array([float(x) for x in text.split(",")])
    except ValueError as exc:
        raise ParseError(f"bad vector {text!r}") from exc
    if dim is not None and len(v) != dim:
        raise ParseError(f"vector {text!r} must have {dim} entries")
    return v


def parse_tol(items) -> dict:
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise ParseError(f"--tol expects name=value, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError as exc:
            raise ParseError(f"bad tolerance value in {item!r}") from exc
    return out


def _load_space_and_geodesics(args):
    doc = load_json(resolve_path(args.space))
    if not isinstance(doc, dict):
        raise ParseError("space file must hold a JSON object")
    space = load_space(doc)
    if getattr(args, "geodesics", None):
        geodesics = load_geodesics(load_json(resolve_path(args.geodesics)))
    else:
        geodesics = load_geodesics(doc.get("geodesics", []))
    return doc, space, geodesics


def _resolve_pairs(spec: str, doc: dict, space):
    if spec == "all":
        return all_pairs(space.ids)
    if spec == "grid":
        if "grid_ids" not in doc:
            raise ParseError("--pairs grid needs a 'grid_ids' entry in the space file")
        return all_pairs(doc["grid_ids"])
    obj = load_json(resolve_path(spec))
    try:
        return [(a, b) for a, b in obj]
    except (TypeError, ValueError) as exc:
        raise ParseError(f"pairs file must list [id, id] pairs: {exc}") from exc


# -- commands ----------------------------------------------------------------

def _random_vectors(rng, n, dim):
    return rng.normal(size=(n, dim))


def cmd_norm_check(cfg: RunConfig, args) -> Outcome:
    tol = cfg.tolerances
    norm = parse_norm(args.norm, args.dim)
    rng = np.random.default_rng(cfg.seed)
    V = _random_vectors(rng, args.samples, norm.dim)
    W = _random_vectors(rng, args.samples, norm.dim)
    T = rng.uniform(-5, 5, size=args.samples)
    hom = max(abs(norm(t * v) - abs(t) * norm(v)) / max(abs(t) * norm(v), 1e-300)
              for t, v in zip(T, V))
    tri = max((norm(v + w) - norm(v) - norm(w)) / (norm(v) + norm(w)) for v, w in zip(V, W))
    verdict = strict_convexity_witness(norm, budget=args.budget, seed=cfg.seed,
                                       tol=tol["convexity"])
    strictly = verdict.status != ConvexityVerdict.WITNESS
    report = {
        "norm": norm.to_json(),
        "homogeneity_residual": hom,
        "triangle_excess": max(tri, 0.0),
        "strict_convexity": {
            "status": verdict.status,
            "witness": None if verdict.witness is None else [list(map(float, w)) for w in verdict.witness],
            "pairs_tried": verdict.pairs_tried,
        },
        "checks": {"homogeneity": hom <= tol["homogeneity"], "triangle": tri <= tol["triangle"],
                   "strictly_convex": strictly},
    }
    csv = polylines_csv([("unit_sphere", _with_param(unit_sphere_polyline(norm)))]) \
        if norm.dim == 2 else None
    return Outcome(all(report["checks"].values()), report, csv)


def _with_param(points: np.ndarray) -> np.ndarray:
    return np.column_stack([np.arange(len(points), dtype=float), points])


def cmd_busemann(cfg: RunConfig, args) -> Outcome:
    tol = cfg.tolerances
    if args.space:
        return _busemann_sampled(cfg, args)
    norm = parse_norm(args.norm, args.dim)
    rng = np.random.default_rng(cfg.seed)
    n, dim = args.samples, norm.dim
    H = _random_vectors(rng, n, dim)
    if args.h:
        H[:] = parse_vector(args.h, dim)
    V1, V2 = _random_vectors(rng, n, dim), _random_vectors(rng, n, dim)
    T = rng.uniform(0, 5, size=n)

    def b(h, v):
        return busemann_linear(norm, h, v, tol["derivative"])

    worst = {"homogeneity": 0.0, "subadditivity": 0.0, "symmetry": 0.0, "far_oracle": 0.0}
    for h, v1, v2, t in zip(H, V1, V2, T):
        b1, b2 = b(h, v1), b(h, v2)
        worst["homogeneity"] = max(worst["homogeneity"], abs(b(h, t * v1) - t * b1))
        worst["subadditivity"] = max(worst["subadditivity"], b(h, v1 + v2) - b1 - b2)
        worst["symmetry"] = max(worst["symmetry"], abs(b1 - b(-h, -v1)))
        worst["far_oracle"] = max(worst["far_oracle"], abs(b1 - busemann_linear_far(norm, h, v1)))
    checks = {k: v <= (tol["oracle"] if k == "far_oracle" else tol["axiom"]) for k, v in worst.items()}
    report = {"norm": norm.to_json(), "samples": n, "worst": worst, "checks": checks}
    csv = None
    if dim == 2:
        h0 = H[0]
        report["level_base"] = h0.tolist()
        lines = level_polylines(norm, h0, levels=args.levels)
        csv = polylines_csv([(f"level={c:g}", pts) for c, pts in lines])
    return Outcome(all(checks.values()), report, csv)


def _busemann_sampled(cfg: RunConfig, args) -> Outcome:
    tol = cfg.tolerances
    doc = load_json(resolve_path(args.space))
    space = load_space(doc)
    ray_obj = load_json(resolve_path(args.ray)) if args.ray else doc.get("ray")
    if ray_obj is None:
        raise ParseError("a sampled ray is needed (--ray or a 'ray' entry in the space file)")
    ray = SampledRay.from_json(ray_obj)
    on_ray = {p for _, p in ray.stations}
    targets = [p for p in space.ids if p not in on_ray]
    values, failures = {}, []
    for p in targets:
        try:
            values[p] = busemann_metric_ray(space, ray, p, tol["ray"], geodesic_tol=tol["geodesic"])
        except NonConvergent as exc:
            failures.append({"point": p, "reason": str(exc)})
    lip = 0.0
    keys = list(values)
    for i, a in enumerate(keys):
        for c in keys[i + 1:]:
            lip = max(lip, abs(values[a] - values[c]) - space.distance(a, c))
    checks = {"converged": not failures, "lipschitz": lip <= tol["axiom"]}
    report = {"values": [{"point": p, "value": v} for p, v in values.items()],
              "failures": failures, "lipschitz_excess": max(lip, 0.0), "checks": checks}
    return Outcome(all(checks.values()), report, None)


def cmd_smooth_scan(cfg: RunConfig, args) -> Outcome:
    tol = cfg.tolerances["smooth"]
    norm = parse_norm(args.norm, args.dim)
    if norm.dim == 2:
        H = circle_directions(args.count)
        probes = circle_directions(args.probes, offset=0.5 / args.probes)
    else:
        H = sphere_directions(norm.dim, args.count, cfg.seed)
        probes = sphere_directions(norm.dim, args.probes, cfg.seed + 1)
    rows, mismatches = [], 0
    for k, h in enumerate(H):
        verdict = is_smooth_point(norm, h, probes, tol=tol)
        linear_defect = max(abs(busemann_linear(norm, h, v) + busemann_linear(norm, h, -v))
                            for v in probes)
        linear = linear_defect <= tol
        mismatches += linear != verdict.smooth
        rows.append({"index": k, "h": h.tolist(), "smooth": verdict.smooth,
                     "defect": verdict.worst_defect, "linearity_defect": linear_defect})
    kinks = [r["index"] for r in rows if not r["smooth"]]
    report = {"norm": norm.to_json(), "count": len(H), "probes": len(probes),
              "kinks": kinks, "scan": rows, "mismatches": mismatches,
              "checks": {"smooth_iff_linear": mismatches == 0}}
    curve = np.array([[k, r["defect"], r["linearity_defect"]] for k, r in enumerate(rows)], float)
    csv = polylines_csv([("defect", curve[:, :2]), ("linearity_defect", curve[:, [0, 2]])])
    return Outcome(mismatches == 0, report, csv)


def cmd_separate(cfg: RunConfig, args) -> Outcome:
    tol = cfg.tolerances
    doc, space, geodesics = _load_space_and_geodesics(args)
    pairs = _resolve_pairs(args.pairs, doc, space)
    system = build_constraints(space, geodesics, tol=tol["geodesic"])
    sep = separate_all(system, pairs, tol["separation"])
    report = {"points": len(space), "geodesics": len(geodesics), "rows": len(system.rows),
              "feasible_dimension": int(system.feasible_basis().shape[1]),
              "separation": sep.to_json(), "checks": {"all_separated": sep.all_separated}}
    return Outcome(sep.all_separated, report, None)


def cmd_embed(cfg: RunConfig, args) -> Outcome:
    tol = cfg.tolerances
    doc, space, geodesics = _load_space_and_geodesics(args)
    pairs = _resolve_pairs(args.pairs, doc, space)
    system = build_constraints(space, geodesics, tol=tol["geodesic"])
    try:
        emb = evaluation_embedding(system, pairs, tol["separation"], tol["pivot"])
    except NotSeparated as exc:
        report = {"error": str(exc), "unseparated": [list(p) for p in exc.pairs],
                  "checks": {"all_separated": False}}
        return Outcome(False, report, None)
    defect = embedding_affinity_defect(emb, geodesics)
    report = {"k": emb.k, "affinity_defect": defect,
              "functions": [{"pair": list(w.pair), "optimum": w.optimum} for w in emb.witnesses],
              "checks": {"all_separated": True}}
    header = ["id"] + [f"e{i + 1}" for i in range(emb.k)]
    csv = table_csv(header, [[p] + [float(x) for x in emb[p]] for p in emb.ids])
    return Outcome(True, report, csv)


def parse_dirs(spec: str, X: np.ndarray) -> np.ndarray:
    kind, _, count = spec.partition(":")
    try:
        n = int(count) if count else None
    except ValueError as exc:
        raise ParseError(f"bad direction count in {spec!r}") from exc
    if kind == "grid":
        if X.shape[1] != 2:
            raise ParseError("grid directions need a planar sample")
        return lattice_directions(64 if n is None else n)
    if kind == "auto":
        return sample_directions(X, n)
    obj = load_json(resolve_path(spec))
    try:
        return np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"directions file must hold a list of vectors: {exc}") from exc


def cmd_reconstruct(cfg: RunConfig, args) -> Outcome:
    tol = cfg.tolerances
    doc = load_json(resolve_path(args.space))
    space = load_space(doc)
    if space.coords is None:
        raise ParseError("reconstruction needs point coordinates")
    dirs = parse_dirs(args.dirs, space.coords)
    try:
        rep = reconstruct_norm(space, dirs, tol=tol["welldef"], strict=False,
                               parallel_tol=tol["parallel"])
    except InsufficientRepresentations as exc:
        raise ParseError(str(exc)) from exc
    report = rep.to_json()
    consistent = rep.verdict == "consistent"
    report["checks"] = {"well_defined": consistent}
    if isinstance(doc.get("generator"), dict):
        gen = norm_from_json(doc["generator"])
        err = max(abs(v - gen(d)) / gen(d) for d, v in zip(rep.directions, rep.values))
        report["generator"] = doc["generator"]
        report["max_relative_error"] = err
    csv = None
    if space.dim == 2 and consistent:
        P = rep.directions / rep.values[:, None]
        lines = [("table_points", _with_param(np.vstack([P, -P])))]
        try:
            lines.insert(0, ("unit_sphere", _with_param(unit_sphere_polyline(rep.as_norm()))))
        except DegenerateBody:
            pass  # too few directions to span the plane; only the table points are plotted
        csv = polylines_csv(lines)
    return Outcome(consistent, report, csv)


def _bounds(domain) -> tuple[np.ndarray, np.ndarray]:
    from scipy.optimize import linprog

    lo, hi = np.empty(domain.dim), np.empty(domain.dim)
    for i in range(domain.dim):
        c = np.zeros(domain.dim)
        c[i] = 1.0
        a = linprog(c, A_ub=domain.A, b_ub=domain.b, bounds=(None, None), method="highs")
        b = linprog(-c, A_ub=domain.A, b_ub=domain.b, bounds=(None, None), method="highs")
        if a.status != 0 or b.status != 0:
            raise SolverFailure("could not bound the oracle domain")
        lo[i], hi[i] = a.x[i], b.x[i]
    return lo, hi


def parse_oracle(text: str):
    if text.startswith("pnorm:"):
        p = text.split(":", 1)[1]
        return oracle_from_json({"generator": "pnorm", "p": p if p == "inf" else float(p)})
    from .finslerrec import BUILTIN_ORACLES

    if text in BUILTIN_ORACLES:
        return oracle_from_json(text)
    return oracle_from_json(load_json(resolve_path(text)),
                            sample_loader=lambda name: load_space(load_json(resolve_path(name))))


def cmd_finsler_verify(cfg: RunConfig, args) -> Outcome:
    tol = cfg.tolerances
    oracle = parse_oracle(args.oracle)
    rng = np.random.default_rng(cfg.seed)
    lo, hi = _bounds(oracle.domain)
    width = float(np.min(hi - lo))
    dim = oracle.dim

    def interior_points(n):
        pts = []
        while len(pts) < n:
            x = rng.uniform(lo, hi)
            if oracle.domain.inradius(x) >= 0.1 * width:
                pts.append(x)
        return np.array(pts)

    try:
        fv, smooth_count = [], 0
        for x in interior_points(args.triples):
            h, v = rng.normal(size=dim), rng.normal(size=dim)
            r = first_variation_check(oracle, x, h, v, tol["first_variation"], tol["smooth"])
            smooth_count += r.smooth_at_base
            fv.append({"x": x.tolist(), "h": h.tolist(), "v": v.tolist(),
                       "derivative": r.derivative, "relative": abs(r.derivative) / np.linalg.norm(h),
                       "smooth": r.smooth_at_base, "violation": r.violation})
        trans = []
        for x in interior_points(args.lines):
            u = rng.normal(size=dim)
            v = 0.5 * oracle.domain.inradius(x) * u / np.linalg.norm(u)
            t = translation_invariance_check(oracle, x, v, np.linspace(-1, 1, 5), tol["translation"])
            trans.append({"x": x.tolist(), "v": v.tolist(), "residual": t.residual, "passed": t.passed})
        g = np.linspace(0.1, 0.9, args.grid)
        axes = [lo[i] + g * (hi[i] - lo[i]) for i in range(dim)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
        grid = np.array([p for p in grid if oracle.domain.contains(p)])
        const = constancy_check(oracle, grid, _base_directions(dim, 8), tol["constancy"])
    except EpsInconsistent as exc:
        report = {"oracle": oracle.name, "error": str(exc), "eps_residual": exc.residual,
                  "checks": {"eps_consistent": False}}
        return Outcome(False, report, None)
    violations = [r for r in fv if r["violation"]]
    checks = {"first_variation": not violations,
              "translation": all(t["passed"] for t in trans),
              "constancy": const.passed}
    report = {
        "oracle": oracle.name,
        "triples": len(fv), "smooth_triples": smooth_count,
        "worst_first_variation": max((abs(r["derivative"]) for r in fv if r["smooth"]), default=0.0),
        "first_variation_violations": violations,
        "translation": {"worst": max(t["residual"] for t in trans), "lines": trans},
        "constancy": {"residual": const.residual,
                      "worst": None if const.worst is None else [w.tolist() for w in const.worst]},
        "checks": checks,
    }
    return Outcome(all(checks.values()), report, None)


HANDLERS = {
    "norm-check": cmd_norm_check,
    "busemann": cmd_busemann,
    "smooth-scan": cmd_smooth_scan,
    "separate": cmd_separate,
    "embed": cmd_embed,
    "reconstruct": cmd_reconstruct,
    "finsler-verify": cmd_finsler_verify,
}


# -- argument parsing and dispatch -------------------------------------------

def _levels(text: str):
    return [float(x) for x in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", action="append", metavar="NAME=VALUE",
                        help="override a named tolerance (repeatable)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="report path; a CSV, if any, goes next to it")
    common.add_argument("--format", choices=("json", "csv"), default="json", dest="fmt",
                        help="primary output: printed to stdout, or written to --out")

    parser = argparse.ArgumentParser(prog="affinemetric", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm-check", parents=[common], help="norm axioms and strict convexity")
    p.add_argument("--norm", required=True, help="pnorm:<p>, l1/l2/linf/hexagon, or a JSON file")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--budget", type=int, default=10_000)

    p = sub.add_parser("busemann", parents=[common], help="Busemann function properties")
    p.add_argument("--norm", default="pnorm:2")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--h", help="fix the ray direction, e.g. 1,0")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--levels", type=_levels, default=[-1.0, -0.5, 0.5, 1.0])
    p.add_argument("--space", help="metric sample with a sampled ray (switches to ray mode)")
    p.add_argument("--ray", help="SampledRay JSON file")

    p = sub.add_parser("smooth-scan", parents=[common], help="classify smooth directions")
    p.add_argument("--norm", required=True)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--count", type=int, default=360)
    p.add_argument("--probes", type=int, default=16)

    for name, text in (("separate", "separate point pairs by affine functions"),
                       ("embed", "affine evaluation embedding as CSV")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--space", required=True)
        p.add_argument("--geodesics")
        p.add_argument("--pairs", default="all", help="all, grid, or a JSON file of id pairs")

    p = sub.add_parser("reconstruct", parents=[common], help="rebuild a norm from distances")
    p.add_argument("--space", required=True)
    p.add_argument("--dirs", default="grid:64", help="grid:<n>, auto[:<n>] or a JSON file")

    p = sub.add_parser("finsler-verify", parents=[common], help="Finsler structure checks")
    p.add_argument("--oracle", required=True,
                   help="pnorm:<p>, a built-in oracle name, or an oracle JSON file")
    p.add_argument("--triples", type=int, default=100)
    p.add_argument("--lines", type=int, default=10)
    p.add_argument("--grid", type=int, default=4)
    return parser


def _emit(cfg: RunConfig, outcome: Outcome) -> None:
    doc = dict(cfg.header())
    doc.update(outcome.report)
    doc["passed"] = outcome.passed
    text = {"json": dumps(doc), "csv": outcome.csv}
    primary = cfg.fmt if text[cfg.fmt] is not None else "json"
    if cfg.out is None:
        sys.stdout.write(text[primary])
        return
    out = Path(cfg.out)
    write_atomic(out, text[primary])
    other = "csv" if primary == "json" else "json"
    if text[other] is not None:
        write_atomic(out.with_suffix("." + other), text[other])


def run(cfg: RunConfig, args) -> int:
    outcome = HANDLERS[cfg.command](cfg, args)
    _emit(cfg, outcome)
    return EXIT_OK if outcome.passed else EXIT_VIOLATION


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    inputs = {k: v for k, v in sorted(vars(args).items())
              if k not in ("command", "tol", "seed", "out", "fmt") and v is not None}
    try:
        cfg = RunConfig(args.command, inputs, parse_tol(args.tol), args.seed, args.out, args.fmt)
        return run(cfg, args)
    except (ParseError, InvalidNorm, InvalidGeodesic, UnknownPointId, DimensionMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (SolverFailure, NonConvergent) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except AffineMetricError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
