"""Finsler structure of a metric on a convex open set, and norm reconstruction.

For a metric ``d`` on an open convex ``C`` in R^n whose linear intervals are
constant-speed geodesics, ``|v|_x = d(x, x + eps v) / eps`` does not depend on
``eps``. The probes below measure that quantity, test whether it is constant
in ``x``, estimate the first variation of ``t -> |h|_{x + t v}``, and rebuild
the norm ``||v|| = lam * d(x, x_bar)`` from any representation
``v = lam (x - x_bar)`` inside a finite sample.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._validation import check_points, check_tolerance, check_vector, is_zero
from .exceptions import (
    EpsInconsistent,
    InsufficientRepresentations,
    NotSmoothAtBase,
    OutOfDomain,
    ParseError,
    WellDefinednessViolation,
)
from .geodesy import MetricSample
from .normcore import (
    NormSpec,
    PolytopeGauge,
    circle_directions,
    is_smooth_point,
    norm_from_json,
    sphere_directions,
)

EPS_SCHEDULE = (1e-1, 5e-2, 1e-2, 5e-3)
DEFAULT_EPS_TOL = 1e-7
DEFAULT_TRANSLATION_TOL = 1e-6
DEFAULT_CONSTANCY_TOL = 1e-6
DEFAULT_FIRST_VARIATION_TOL = 1e-4
DEFAULT_WELLDEF_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ConvexDomain:
    """The open polytope ``{x : A x < b}``."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = check_points(self.A, name="A")
        b = check_vector(self.b, name="b")
        if A.shape[0] != b.shape[0]:
            raise ValueError("A and b disagree on the number of inequalities")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @classmethod
    def box(cls, lower, upper) -> "ConvexDomain":
        lo, hi = check_vector(lower, name="lower"), check_vector(upper, len(lower), "upper")
        if np.any(hi <= lo):
            raise ValueError("box must have positive extent in every coordinate")
        n = lo.shape[0]
        return cls(np.vstack([np.eye(n), -np.eye(n)]), np.concatenate([hi, -lo]))

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def inradius(self, x) -> float:
        """Euclidean distance from ``x`` to the boundary (negative outside)."""
        x = check_vector(x, self.dim, "x")
        return float(np.min((self.b - self.A @ x) / np.linalg.norm(self.A, axis=1)))

    def contains(self, x) -> bool:
        return self.inradius(x) > 0

    def to_json(self) -> dict:
        return {"A": self.A.tolist(), "b": self.b.tolist()}

    @classmethod
    def from_json(cls, obj) -> "ConvexDomain":
        if "box" in obj:
            lo, hi = obj["box"]
            return cls.box(lo, hi)
        return cls(np.asarray(obj["A"], float), np.asarray(obj["b"], float))


UNIT_BOX = ConvexDomain.box([0.0, 0.0], [1.0, 1.0])


@dataclass(frozen=True, eq=False)
class MetricOracle:
    """A distance procedure on a convex open domain.

    ``eps_scale`` shrinks the probe schedule of :func:`finsler_at`; oracles
    whose linear intervals are not constant-speed only give meaningful probes
    at tiny ``eps``.
    """

    domain: ConvexDomain
    dist: Callable[[np.ndarray, np.ndarray], float]
    eps_scale: float = 1.0
    name: str = "custom"
    generator: NormSpec | None = None

    def __call__(self, x, y) -> float:
        return float(self.dist(np.asarray(x, float), np.asarray(y, float)))

    @property
    def dim(self) -> int:
        return self.domain.dim

    @classmethod
    def from_norm(cls, norm: NormSpec, domain: ConvexDomain | None = None) -> "MetricOracle":
        domain = ConvexDomain.box(np.zeros(norm.dim), np.ones(norm.dim)) if domain is None else domain
        return cls(domain, lambda x, y: norm._evaluate(x - y) if np.any(x != y) else 0.0,
                   name="minkowski", generator=norm)

    @classmethod
    def from_sample(cls, space: MetricSample, decimals: int = 12) -> "MetricOracle":
        """Oracle answering only for sample points, looked up by coordinates."""
        if space.coords is None:
            raise ValueError("sample needs coordinates")
        lookup = {tuple(np.round(c, decimals) + 0.0): p for c, p in zip(space.coords, space.ids)}

        def dist(x, y):
            try:
                a = lookup[tuple(np.round(x, decimals) + 0.0)]
                b = lookup[tuple(np.round(y, decimals) + 0.0)]
            except KeyError:
                raise OutOfDomain("point is not in the distance table") from None
            return space.distance(a, b)

        lo, hi = space.coords.min(axis=0), space.coords.max(axis=0)
        pad = 1e-9 * max(1.0, float(np.max(hi - lo)))
        return cls(ConvexDomain.box(lo - pad, hi + pad), dist, name="table")


def affine_scaled_euclidean(domain: ConvexDomain | None = None) -> MetricOracle:
    """``d(x, y) = (1 + (x_1 + y_1)/2) |x - y|_2``, probed with tiny eps.

    Its linear intervals are not constant-speed, so its Finsler structure
    ``(1 + x_1) |v|_2`` depends on the base point.
    """
    def dist(x, y):
        return (1.0 + (x[0] + y[0]) / 2.0) * float(np.linalg.norm(x - y))

    return MetricOracle(UNIT_BOX if domain is None else domain, dist, eps_scale=1e-6,
                        name="affine_scaled_euclidean")


BUILTIN_ORACLES = {"affine_scaled_euclidean": affine_scaled_euclidean}


def oracle_from_json(obj, sample_loader=None) -> MetricOracle:
    """Build an oracle from ``{"generator": "pnorm" | "polytope" | "table" | "builtin", ...}``."""
    if isinstance(obj, str):
        obj = {"generator": "builtin", "name": obj}
    try:
        gen = obj["generator"]
        domain = ConvexDomain.from_json(obj["domain"]) if "domain" in obj else None
        if gen == "pnorm":
            dim = int(obj.get("dim", 2 if domain is None else domain.dim))
            return MetricOracle.from_norm(norm_from_json({"variant": "pnorm", "p": obj["p"], "dim": dim}),
                                          domain)
        if gen == "polytope":
            return MetricOracle.from_norm(norm_from_json({"variant": "polytope",
                                                          "vertices": obj["vertices"]}), domain)
        if gen == "builtin":
            return BUILTIN_ORACLES[obj["name"]](domain)
        if gen == "table":
            if "space" in obj and isinstance(obj["space"], dict):
                space = MetricSample.from_json(obj["space"])
            elif sample_loader is not None:
                space = sample_loader(obj["space"])
            else:
                raise ParseError("table oracle needs an inline space")
            return MetricOracle.from_sample(space)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed oracle JSON: {exc}") from exc
    raise ParseError(f"unknown oracle generator {gen!r}")


# -- probes ------------------------------------------------------------------

@dataclass(frozen=True)
class FinslerProbe:
    x: np.ndarray
    v: np.ndarray
    value: float
    eps_residual: float


def _interior(oracle: MetricOracle, x) -> tuple[np.ndarray, float]:
    x = check_vector(x, oracle.dim, "x")
    r = oracle.domain.inradius(x)
    if r <= 0:
        raise OutOfDomain(f"{x.tolist()} is not interior to the domain")
    return x, r


def eps_noise_floor(oracle: MetricOracle) -> float:
    """Relative spread that rounding alone produces at the smallest probe step."""
    return 100 * np.finfo(float).eps / (min(EPS_SCHEDULE) * oracle.eps_scale)


def probe_noise(oracle: MetricOracle, x) -> float:
    """Relative rounding error of one probe ``d(x, x + eps v) / eps`` at ``x``.

    Forming ``x + eps v`` loses ``machine_eps * |x|`` against a step of length
    ``min(EPS_SCHEDULE) * eps_scale * inradius``.
    """
    x = np.asarray(x, dtype=float)
    r = oracle.domain.inradius(x)
    scale = 1.0 + float(np.max(np.abs(x)))
    return float(np.finfo(float).eps * scale / (min(EPS_SCHEDULE) * oracle.eps_scale * r))


def finsler_at(oracle: MetricOracle, x, v, tol: float = DEFAULT_EPS_TOL,
               check: bool = True) -> FinslerProbe:
    """``|v|_x`` as the common value of ``d(x, x + eps v)/eps`` over an eps schedule.

    ``eps_residual`` is the relative spread of the quotients; above ``tol`` it
    raises :class:`EpsInconsistent` (unless ``check`` is false). ``tol`` never
    drops below the rounding floor of the smallest probe step.
    """
    tol = max(tol, eps_noise_floor(oracle))
    x, r = _interior(oracle, x)
    v = check_vector(v, oracle.dim, "v")
    if is_zero(v):
        return FinslerProbe(x, v, 0.0, 0.0)
    # |v|_x = s |v/s|_x; probing at unit scale keeps tiny v from underflowing
    s = float(np.max(np.abs(v)))
    u = v / s
    eps = np.array(EPS_SCHEDULE) * oracle.eps_scale * r / float(np.linalg.norm(u))
    q = np.array([oracle(x, x + e * u) / e for e in eps])
    value = s * float(np.mean(q))
    spread = float(q.max() - q.min()) / max(abs(float(np.mean(q))), 1e-300)
    if check and spread > tol:
        raise EpsInconsistent(f"eps-quotients spread {spread:.3e} > {tol:.1e} at x={x.tolist()}",
                              spread)
    return FinslerProbe(x, v, value, spread)


class FinslerNorm(NormSpec):
    """The norm ``v -> |v|_x`` extracted from an oracle at a fixed base point."""

    def __init__(self, oracle: MetricOracle, x, tol: float = DEFAULT_EPS_TOL):
        self.oracle = oracle
        self.x, _ = _interior(oracle, x)
        self.dim = oracle.dim
        self.tol = tol
        self.eval_noise = probe_noise(oracle, self.x)

    def _evaluate(self, v):
        return finsler_at(self.oracle, self.x, v, self.tol).value


@dataclass(frozen=True)
class TranslationReport:
    passed: bool
    residual: float
    worst_t: float | None
    values: np.ndarray


def translation_invariance_check(oracle: MetricOracle, x, v, t_grid: Sequence[float],
                                 tol: float = DEFAULT_TRANSLATION_TOL) -> TranslationReport:
    """Compare ``|v|_{x + t v}`` with ``|v|_x`` along the line through ``x``."""
    tol = check_tolerance(tol)
    x, _ = _interior(oracle, x)
    v = check_vector(v, oracle.dim, "v")
    ts = np.asarray(list(t_grid), dtype=float)
    for t in ts:
        _interior(oracle, x + t * v)
    if is_zero(v):
        return TranslationReport(True, 0.0, None, np.zeros(len(ts)))
    base = finsler_at(oracle, x, v).value
    vals = np.array([finsler_at(oracle, x + t * v, v).value for t in ts])
    dev = np.abs(vals - base)
    i = int(np.argmax(dev)) if len(dev) else None
    residual = float(dev[i]) if i is not None else 0.0
    return TranslationReport(residual <= tol, residual, None if i is None else float(ts[i]), vals)


@dataclass(frozen=True)
class FirstVariationReport:
    derivative: float
    smooth_at_base: bool
    smooth_defect: float
    within_tol: bool
    tol: float

    @property
    def violation(self) -> bool:
        """The lemma's hypothesis holds but the derivative is not zero."""
        return self.smooth_at_base and not self.within_tol


def _base_directions(dim: int, n: int = 16) -> np.ndarray:
    if dim == 2:
        return circle_directions(n, offset=0.1)
    return sphere_directions(dim, n * dim)


def probe_tolerances(oracle: MetricOracle, x, smooth_tol: float = 1e-7) -> tuple[float, float]:
    """Derivative and smoothness tolerances achievable through probes at ``x``.

    A probe loses about :func:`probe_noise` to cancellation in ``x + eps v - x``,
    so points near the boundary and oracles with a small ``eps_scale`` get
    proportionally looser tolerances.
    """
    rtol = min(max(1e-9, 1e5 * probe_noise(oracle, x)), 1e-3)
    return rtol, max(smooth_tol, 10 * rtol)


def first_variation_check(oracle: MetricOracle, x, h, v,
                          tol: float = DEFAULT_FIRST_VARIATION_TOL,
                          smooth_tol: float = 1e-7, directions=None,
                          require_smooth: bool = False) -> FirstVariationReport:
    """Estimate ``f'(0)`` for ``f(t) = |h|_{x + t v}``.

    Central differences at ``t0, t0/2, t0/4`` with ``t0 = 1e-2 * inradius / |v|``
    and two Richardson stages. Smoothness of ``h`` is tested in the norm
    ``|.|_x`` itself; when it fails the estimate is still returned but not
    judged (or :class:`NotSmoothAtBase` is raised if ``require_smooth``).
    """
    tol = check_tolerance(tol)
    x, r = _interior(oracle, x)
    h = check_vector(h, oracle.dim, "h")
    v = check_vector(v, oracle.dim, "v")
    if is_zero(h):
        raise ValueError("h must be nonzero")
    D = _base_directions(oracle.dim) if directions is None else directions
    rtol, smooth_tol = probe_tolerances(oracle, x, smooth_tol)
    verdict = is_smooth_point(FinslerNorm(oracle, x), h, D, tol=smooth_tol, rtol=rtol)
    if is_zero(v):
        deriv = 0.0
    else:
        t0 = 1e-2 * r / float(np.linalg.norm(v))

        def f(t):
            return finsler_at(oracle, x + t * v, h).value

        central = [(f(t) - f(-t)) / (2 * t) for t in (t0, t0 / 2, t0 / 4)]
        r1 = [(4 * central[k + 1] - central[k]) / 3 for k in range(2)]
        deriv = (16 * r1[1] - r1[0]) / 15
    report = FirstVariationReport(float(deriv), verdict.smooth, verdict.worst_defect,
                                  abs(deriv) <= tol, tol)
    if require_smooth and not verdict.smooth:
        raise NotSmoothAtBase(f"h is not smooth at x (defect {verdict.worst_defect:.3e})", report)
    return report


@dataclass(frozen=True)
class ConstancyReport:
    passed: bool
    residual: float
    worst: tuple | None  # (x, y, v)


def constancy_check(oracle: MetricOracle, grid, directions,
                    tol: float = DEFAULT_CONSTANCY_TOL) -> ConstancyReport:
    """Largest ``| |v|_x - |v|_y |`` over grid pairs and directions."""
    tol = check_tolerance(tol)
    G = check_points(grid, oracle.dim, "grid")
    V = check_points(directions, oracle.dim, "directions")
    for x in G:
        _interior(oracle, x)
    vals = np.array([[finsler_at(oracle, x, v).value for v in V] for x in G])
    if len(G) < 2:
        return ConstancyReport(True, 0.0, None)
    spread = vals.max(axis=0) - vals.min(axis=0)
    k = int(np.argmax(spread))
    worst = (G[int(np.argmax(vals[:, k]))], G[int(np.argmin(vals[:, k]))], V[k])
    return ConstancyReport(bool(spread[k] <= tol), float(spread[k]), worst)


# -- reconstruction ----------------------------------------------------------

@dataclass(frozen=True)
class Representation:
    """``v = lam * (x - x_bar)`` with its candidate length ``lam * d(x, x_bar)``."""

    x: object
    x_bar: object
    lam: float
    value: float


@dataclass
class ReconstructionReport:
    directions: np.ndarray
    values: np.ndarray
    representations: list
    welldef_residual: float
    witnesses: list
    tol: float
    triangle_excess: float = 0.0
    homogeneity_residual: float = 0.0

    @property
    def verdict(self) -> str:
        return "consistent" if self.welldef_residual <= self.tol and not self.witnesses else "violated"

    @property
    def norm_table(self) -> dict:
        return {tuple(d.tolist()): float(val) for d, val in zip(self.directions, self.values)}

    def as_norm(self) -> PolytopeGauge:
        """Gauge of the hull of the table points ``+-v/||v||``."""
        P = self.directions / self.values[:, None]
        return PolytopeGauge(np.vstack([P, -P]))

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "tol": self.tol,
            "welldef_residual": self.welldef_residual,
            "triangle_excess": self.triangle_excess,
            "homogeneity_residual": self.homogeneity_residual,
            "norm_table": [{"direction": d.tolist(), "value": float(v), "representations": len(r)}
                           for d, v, r in zip(self.directions, self.values, self.representations)],
            "witnesses": self.witnesses,
        }


def representations(space: MetricSample, v, parallel_tol: float = 1e-9) -> list[Representation]:
    """Every sample pair with ``x - x_bar`` parallel to ``v``, oriented so ``lam > 0``."""
    if space.coords is None:
        raise ValueError("reconstruction needs ambient coordinates")
    v = check_vector(v, space.dim, "v")
    X = space.coords
    i, j = np.triu_indices(len(X), k=1)
    W = X[i] - X[j]
    wn = np.linalg.norm(W, axis=1)
    vn = float(np.linalg.norm(v))
    proj = W @ (v / vn)
    perp = np.linalg.norm(W - proj[:, None] * (v / vn), axis=1)
    hit = np.flatnonzero((wn > 0) & (perp <= parallel_tol * np.maximum(wn, 1.0)))
    reps = []
    for k in hit:
        a, b = space.ids[i[k]], space.ids[j[k]]
        if proj[k] < 0:
            a, b = b, a
        lam = vn / wn[k]
        reps.append(Representation(a, b, float(lam), float(lam * space.distance(a, b))))
    return reps


def _table_audit(D: np.ndarray, vals: np.ndarray, parallel_tol: float) -> tuple[float, float, list]:
    """Homogeneity among parallel table entries and the triangle inequality on sums."""
    U = D / np.linalg.norm(D, axis=1)[:, None]
    hom, tri, worst = 0.0, 0.0, None

    def parallel_to(w):
        wn = np.linalg.norm(w)
        if wn == 0:
            return None, 0.0
        proj = U @ w
        perp = np.linalg.norm(w[None, :] - proj[:, None] * U, axis=1)
        k = int(np.argmin(perp))
        if perp[k] > parallel_tol * max(wn, 1.0):
            return None, 0.0
        return k, abs(proj[k]) / np.linalg.norm(D[k])

    for a, b in itertools.combinations(range(len(D)), 2):
        k, mu = parallel_to(D[b])
        if k == a:
            hom = max(hom, abs(vals[b] - mu * vals[a]) / vals[b])
        for w in (D[a] + D[b], D[a] - D[b]):
            k, mu = parallel_to(w)
            if k is None:
                continue
            excess = (mu * vals[k] - vals[a] - vals[b]) / (vals[a] + vals[b])
            if excess > tri:
                tri = excess
                worst = {"kind": "triangle", "u": D[a].tolist(), "w": D[b].tolist(),
                         "excess": float(excess)}
    return hom, tri, [] if worst is None else [worst]


def reconstruct_norm(space: MetricSample, sample_dirs, tol: float = DEFAULT_WELLDEF_TOL,
                     min_representations: int = 2, strict: bool = True,
                     parallel_tol: float = 1e-9) -> ReconstructionReport:
    """Rebuild ``||v||`` on ``sample_dirs`` from representations ``v = lam (x - x_bar)``.

    The table value is the mean over representations; ``welldef_residual`` is
    the largest relative spread. With ``strict`` a spread above ``tol`` raises
    :class:`WellDefinednessViolation` carrying the two extreme representations.
    A consistent table is further audited for homogeneity and the triangle
    inequality; failures there are recorded as witnesses.
    """
    tol = check_tolerance(tol)
    D = check_points(sample_dirs, space.dim, "sample_dirs")
    if any(is_zero(d) for d in D):
        raise ValueError("directions must be nonzero")
    values, reps_all, witnesses = [], [], []
    residual = 0.0
    for d in D:
        reps = representations(space, d, parallel_tol)
        if len(reps) < min_representations:
            raise InsufficientRepresentations(
                f"direction {d.tolist()} has {len(reps)} representation(s) in the sample")
        vals = np.array([r.value for r in reps])
        mean = float(vals.mean())
        spread = float(vals.max() - vals.min()) / mean
        if spread > tol:
            lo, hi = reps[int(np.argmin(vals))], reps[int(np.argmax(vals))]
            witnesses.append({
                "kind": "welldefinedness",
                "direction": d.tolist(),
                "spread": spread,
                "pair": [_rep_json(lo), _rep_json(hi)],
            })
        residual = max(residual, spread)
        values.append(mean)
        reps_all.append(reps)
    report = ReconstructionReport(D, np.array(values), reps_all, residual, witnesses, tol)
    if not witnesses:
        hom, tri, notes = _table_audit(D, report.values, parallel_tol)
        report.homogeneity_residual, report.triangle_excess = hom, tri
        if hom > tol:
            witnesses.append({"kind": "homogeneity", "residual": hom})
        if tri > tol:
            witnesses.extend(notes)
    if strict and witnesses and witnesses[0]["kind"] == "welldefinedness":
        w = witnesses[0]
        raise WellDefinednessViolation(
            f"direction {w['direction']} has representations disagreeing by {w['spread']:.3e}",
            witness=w["pair"], report=report)
    return report


def _rep_json(r: Representation) -> dict:
    return {"x": r.x, "x_bar": r.x_bar, "lam": float(r.lam), "value": float(r.value)}
