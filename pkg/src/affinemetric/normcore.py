"""Finite-dimensional norms and their first-order calculus.

Two concrete norms are provided, :class:`PNorm` and :class:`PolytopeGauge`.
Anything that subclasses :class:`NormSpec` and implements ``_evaluate`` can be
fed to the derivative, smoothness and convexity routines below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError
from scipy.stats import qmc, norm as _gaussian

from ._validation import check_points, check_tolerance, check_vector, is_zero
from .exceptions import (
    DegenerateBody,
    DimensionMismatch,
    InvalidNorm,
    NonConvergent,
    SolverFailure,
    ZeroBasePoint,
)

DEFAULT_T0 = 1e-2
DEFAULT_DERIVATIVE_RTOL = 1e-9
DEFAULT_MAX_LEVELS = 30
AITKEN_RTOL = 1e-7
DEFAULT_SMOOTH_TOL = 1e-7
DEFAULT_CONVEXITY_TOL = 1e-9
DEFAULT_CONVEXITY_BUDGET = 10_000


class NormSpec:
    """Base class for a norm on R^dim."""

    dim: int
    # relative rounding error of one evaluation; probe-based norms are noisier
    eval_noise = float(np.finfo(float).eps)

    def __call__(self, v) -> float:
        return evaluate_norm(self, v)

    def _evaluate(self, v: np.ndarray) -> float:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise TypeError(f"{type(self).__name__} has no JSON form")


@dataclass(frozen=True)
class PNorm(NormSpec):
    """The l^p norm. ``p`` may be ``math.inf`` (or the string ``"inf"``)."""

    p: float
    dim: int

    def __post_init__(self):
        p = self.p
        if isinstance(p, str):
            if p.strip().lower() not in ("inf", "infinity", "∞"):
                raise InvalidNorm(f"unrecognised p {p!r}")
            p = math.inf
        p = float(p)
        if math.isnan(p) or p < 1:
            raise InvalidNorm(f"p must be >= 1, got {self.p!r}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise InvalidNorm(f"dim must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def is_inf(self) -> bool:
        return math.isinf(self.p)

    def _evaluate(self, v):
        a = np.abs(v)
        if self.p == 1:
            return float(a.sum())
        if self.p == 2:
            return float(np.linalg.norm(a))
        m = float(a.max())
        if self.is_inf or m == 0.0:
            return m
        # scale by the max coordinate so large p cannot overflow
        return m * float(np.sum((a / m) ** self.p)) ** (1.0 / self.p)

    def to_json(self):
        return {"variant": "pnorm", "p": "inf" if self.is_inf else self.p, "dim": self.dim}


@dataclass(frozen=True, eq=False)
class PolytopeGauge(NormSpec):
    """Minkowski gauge of the convex hull of a centrally symmetric vertex set.

    The vertex list must already be symmetric: for every vertex ``u`` the
    exact negation ``-u`` must be present. Evaluation uses the facet
    description of the hull; :func:`polytope_gauge` solves the defining LP
    instead and serves as an independent route.
    """

    vertices: np.ndarray
    dim: int = field(init=False)
    _facets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        V = check_points(self.vertices, name="vertices")
        V.setflags(write=False)
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "dim", V.shape[1])
        _check_symmetric(V)
        object.__setattr__(self, "_facets", _facet_functionals(V))

    def _evaluate(self, v):
        return max(0.0, float(np.max(self._facets @ v)))

    @property
    def facets(self) -> np.ndarray:
        """Rows ``a`` with ``gauge(v) = max_a <a, v>``."""
        return self._facets

    def to_json(self):
        return {"variant": "polytope", "vertices": self.vertices.tolist()}


def _check_symmetric(V: np.ndarray) -> None:
    keys = {tuple(row) for row in V.tolist()}
    for row in V.tolist():
        if tuple(-x for x in row) not in keys:
            raise InvalidNorm(f"vertex set is not centrally symmetric: -{row} missing")


def _facet_functionals(V: np.ndarray) -> np.ndarray:
    n, dim = V.shape
    if np.linalg.matrix_rank(V) < dim:
        raise DegenerateBody("vertices do not span the ambient space")
    if dim == 1:
        return np.array([[1.0 / np.abs(V).max()], [-1.0 / np.abs(V).max()]])
    try:
        hull = ConvexHull(V)
    except QhullError as exc:
        raise DegenerateBody(f"convex hull is degenerate: {exc}") from exc
    normals, offsets = hull.equations[:, :-1], hull.equations[:, -1]
    if np.any(offsets >= 0):
        raise DegenerateBody("origin is not interior to the convex hull")
    return normals / (-offsets)[:, None]


def norm_from_json(obj: dict) -> NormSpec:
    variant = obj.get("variant")
    if variant == "pnorm":
        return PNorm(obj["p"], int(obj["dim"]))
    if variant == "polytope":
        return PolytopeGauge(np.asarray(obj["vertices"], dtype=float))
    raise InvalidNorm(f"unknown norm variant {variant!r}")


def evaluate_norm(norm: NormSpec, v) -> float:
    v = check_vector(v, name="v")
    if v.shape[0] != norm.dim:
        raise DimensionMismatch(f"vector of dimension {v.shape[0]} for a norm on R^{norm.dim}")
    if is_zero(v):
        return 0.0
    return norm._evaluate(v)


def polytope_gauge(vertices, v) -> float:
    """Least ``lam >= 0`` with ``v`` in ``lam * conv(vertices)``, by linear programming.

    Writing ``v = sum_i mu_i u_i`` with ``mu >= 0``, the gauge is the minimum of
    ``sum_i mu_i``.
    """
    V = check_points(vertices, name="vertices")
    _check_symmetric(V)
    _facet_functionals(V)  # raises DegenerateBody
    v = check_vector(v, V.shape[1])
    if is_zero(v):
        return 0.0
    # the solver's feasibility tolerance is absolute, so solve at unit scale
    scale = float(np.max(np.abs(v)))
    res = linprog(np.ones(V.shape[0]), A_eq=V.T, b_eq=v / scale, bounds=(0, None), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise SolverFailure(f"gauge LP failed: {res.message}")
    return scale * float(res.fun)


# -- directional derivatives -------------------------------------------------

@dataclass(frozen=True)
class DerivativeTrace:
    """Step sizes, forward quotients and extrapolants behind one derivative."""

    steps: np.ndarray
    quotients: np.ndarray
    extrapolants: np.ndarray
    value: float


def richardson_right_derivative(
    phi: Callable[[float], float],
    t0: float,
    scale: float,
    rtol: float = DEFAULT_DERIVATIVE_RTOL,
    max_levels: int = DEFAULT_MAX_LEVELS,
    noise: float = float(np.finfo(float).eps),
) -> DerivativeTrace:
    """Right derivative of ``phi`` at 0 from forward quotients on ``t0 * 2**-k``.

    Two Richardson stages remove the O(t) and O(t^2) terms. Convergence is
    declared once two successive second-stage values agree to ``rtol * scale``.
    For convex ``phi`` every forward quotient bounds the derivative from
    above, so the extrapolant is capped by the smallest quotient. ``noise``
    is the relative rounding error of one ``phi`` evaluation.
    """
    phi0 = phi(0.0)
    steps, quotients, r1, r2 = [], [], [], []
    capped = None  # last candidate rejected by the quotient bound, for the error message

    def accept(value, slack):
        nonlocal capped
        upper = _quotient_bound(quotients, steps, phi0, scale, t0, noise)
        if value - upper > slack:
            capped = (value, upper)
            return None
        return DerivativeTrace(np.array(steps), np.array(quotients), np.array(r2),
                               float(min(value, upper)))

    for k in range(max_levels):
        t = t0 * 2.0 ** (-k)
        steps.append(t)
        quotients.append((phi(t) - phi0) / t)
        if k >= 1:
            r1.append(2.0 * quotients[k] - quotients[k - 1])
        if k >= 2:
            r2.append((4.0 * r1[k - 1] - r1[k - 2]) / 3.0)
        # below this step the quotients carry more rounding than the tolerance allows
        qnoise = _quotient_noise(phi0, t, scale, t0, noise)
        trusted = qnoise <= rtol * scale
        # Candidates above the smallest quotient are premature (coarse levels
        # agreeing by chance, or a kink not yet passed) and are skipped.
        # Three equal quotients: phi is linear on [0, t_{k-2}] (a face of a
        # polyhedral ball). A face that starts just above the trusted range may
        # only show its plateau a level or two further down.
        if (k >= 2 and qnoise <= 10 * rtol * scale
                and np.ptp(quotients[-3:]) <= max(rtol * scale, 3 * qnoise)):
            found = accept(quotients[-1], rtol * scale + qnoise)
            if found is not None:
                return found
        # the two Richardson stages amplify the last quotient's noise about fourfold
        if k >= 3 and trusted and abs(r2[-1] - r2[-2]) < rtol * scale:
            found = accept(r2[-1], rtol * scale + 5 * qnoise)
            if found is not None:
                return found
    # Fractional-power error terms (l^p near an axis, 1 < p < 2) defeat the
    # integer-order stages; Aitken's delta-squared removes c * t^alpha for any alpha.
    # Rounding noise grows at the smallest steps, so the tightest window wins.
    best = _best_aitken_window(np.array(quotients),
                               _quotient_noise(phi0, np.array(steps), scale, t0, noise))
    if best is not None and best[0] < max(rtol, AITKEN_RTOL) * scale:
        found = accept(best[1], max(rtol, AITKEN_RTOL) * scale)
        if found is not None:
            return found
    if capped is not None:
        raise NonConvergent(f"extrapolant {capped[0]:.6g} exceeds the quotient bound "
                            f"{capped[1]:.6g}; a kink lies below the smallest resolvable step")
    raise NonConvergent(
        f"extrapolated quotients did not settle within {max_levels} halvings "
        f"(last change {abs(r2[-1] - r2[-2]):.3e})"
    )


def _quotient_bound(quotients, steps, phi0, scale, t0, noise) -> float:
    """Smallest quotient plus its rounding: for convex phi the derivative lies below it."""
    qnoise = _quotient_noise(phi0, np.asarray(steps), scale, t0, noise)
    return float(np.min(np.asarray(quotients) + qnoise))


def _quotient_noise(phi0, t, scale, t0, noise):
    return 2 * noise * max(abs(phi0), scale * t0) / t


def _aitken(q: np.ndarray, noise: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Delta-squared transform; entries whose differences drown in ``noise`` are NaN."""
    d1 = np.diff(q)
    out = np.full(len(q) - 2, np.nan)
    for k in range(len(out)):
        den = d1[k + 1] - d1[k]
        # only a converging geometric tail (ratio in (0, 1)) has a limit to find
        ratio = d1[k + 1] / d1[k] if d1[k] != 0 else np.inf
        if 0 < ratio < 1 and min(abs(d1[k]), abs(d1[k + 1]), abs(den)) > 10 * noise[k + 2]:
            out[k] = q[k + 2] - d1[k + 1] ** 2 / den
    return out, 10 * noise[2:]


def _best_aitken_window(q: np.ndarray, noise: np.ndarray):
    """``(spread, value)`` of the tightest run of three valid values over two Aitken passes."""
    best = None
    seq, nz = q, noise
    for _ in range(2):
        if len(seq) < 3:
            break
        seq, nz = _aitken(seq, nz)
        for k in range(len(seq) - 2):
            w = seq[k:k + 3]
            if np.all(np.isfinite(w)):
                spread = float(np.ptp(w))
                if best is None or spread < best[0]:
                    best = (spread, float(w[-1]))
    return best


def derivative_trace(norm: NormSpec, h, v, *, t0: float = DEFAULT_T0,
                     rtol: float = DEFAULT_DERIVATIVE_RTOL,
                     max_levels: int = DEFAULT_MAX_LEVELS) -> DerivativeTrace:
    h = check_vector(h, norm.dim, "h")
    v = check_vector(v, norm.dim, "v")
    if is_zero(h):
        raise ZeroBasePoint("base point h must be nonzero")
    nv = evaluate_norm(norm, v)
    if nv == 0.0:
        return DerivativeTrace(np.zeros(0), np.zeros(0), np.zeros(0), 0.0)
    # D(h, v) = ||v|| D(h/||h||, v/||v||); unit inputs keep the steps finite
    nh = evaluate_norm(norm, h)
    u, w = h / nh, v / nv
    trace = richardson_right_derivative(lambda t: norm._evaluate(u + t * w), t0, 1.0, rtol, max_levels,
                                        noise=norm.eval_noise)
    value = nv * min(max(trace.value, -1.0), 1.0)
    with np.errstate(over="ignore"):  # steps for a subnormal v are reported as inf
        steps = trace.steps * nh / nv
    return DerivativeTrace(steps, nv * trace.quotients, nv * trace.extrapolants, value)


def one_sided_derivative(norm: NormSpec, h, v, **kwargs) -> float:
    """Right derivative of ``t -> ||h + t v||`` at ``t = 0``.

    The initial step is ``t0 * ||h|| / ||v||`` so the schedule does not depend
    on how ``h`` and ``v`` are scaled. The result is clipped to
    ``[-||v||, ||v||]``.

    >>> round(one_sided_derivative(PNorm(2, 2), [3, 4], [1, 0]), 12)
    0.6
    """
    return derivative_trace(norm, h, v, **kwargs).value


# -- smoothness and strict convexity ---------------------------------------

@dataclass(frozen=True)
class SmoothnessVerdict:
    smooth: bool
    worst_defect: float
    worst_direction: np.ndarray
    tol: float


def circle_directions(n: int, offset: float = 0.0) -> np.ndarray:
    """``n`` evenly spaced unit vectors in the plane, starting at angle ``offset``."""
    theta = offset + 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([np.cos(theta), np.sin(theta)])


def sphere_directions(dim: int, n: int, seed: int = 0) -> np.ndarray:
    """Low-discrepancy unit vectors (scrambled Halton mapped through the Gaussian)."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        u = qmc.Halton(d=1, seed=seed).random(n)[:, 0]
        return np.column_stack([np.cos(2 * np.pi * u), np.sin(2 * np.pi * u)])
    u = qmc.Halton(d=dim, seed=seed).random(n)
    g = _gaussian.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1)[:, None]


def default_directions(dim: int) -> np.ndarray:
    """Direction set used when none is given: 1024 on the circle, 512*dim otherwise."""
    if dim == 2:
        return circle_directions(1024)
    return sphere_directions(dim, 512 * dim)


def smoothness_defect(norm: NormSpec, h, v, **kwargs) -> float:
    v = np.asarray(v, dtype=float)
    return abs(one_sided_derivative(norm, h, v, **kwargs)
               + one_sided_derivative(norm, h, -v, **kwargs))


def is_smooth_point(norm: NormSpec, h, directions=None,
                    tol: float = DEFAULT_SMOOTH_TOL, **kwargs) -> SmoothnessVerdict:
    """Decide whether the norm is Gateaux-differentiable at ``h``.

    For each direction ``v`` the defect ``|D(h, v) + D(h, -v)|`` is computed;
    ``h`` is smooth iff the largest defect is at most ``tol``.
    """
    tol = check_tolerance(tol)
    h = check_vector(h, norm.dim, "h")
    if is_zero(h):
        raise ZeroBasePoint("base point h must be nonzero")
    D = default_directions(norm.dim) if directions is None else check_points(directions, norm.dim)
    if any(is_zero(v) for v in D):
        raise ValueError("directions must be nonzero")
    defects = np.array([smoothness_defect(norm, h, v, **kwargs) for v in D])
    i = int(np.argmax(defects))
    return SmoothnessVerdict(bool(defects[i] <= tol), float(defects[i]), D[i].copy(), tol)


@dataclass(frozen=True)
class ConvexityVerdict:
    status: str  # certified_strictly_convex | witness_not_strictly_convex | inconclusive
    witness: tuple[np.ndarray, np.ndarray] | None = None
    pairs_tried: int = 0

    CERTIFIED = "certified_strictly_convex"
    WITNESS = "witness_not_strictly_convex"
    INCONCLUSIVE = "inconclusive"


def _independent(v, w) -> bool:
    s = np.linalg.svd(np.vstack([v, w]), compute_uv=False)
    return s[-1] > 1e-8 * s[0]


def _candidate_pairs(norm: NormSpec):
    n = norm.dim
    eye = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            yield eye[i], eye[j]
    for i in range(n):
        for j in range(i + 1, n):
            yield eye[i] + eye[j], eye[i] - eye[j]
    if isinstance(norm, PolytopeGauge):
        # two vertices on one facet span a flat piece of the unit sphere
        V = norm.vertices
        levels = V @ norm.facets.T
        for f in range(levels.shape[1]):
            on = np.flatnonzero(np.abs(levels[:, f] - 1.0) < 1e-12)
            for a in range(len(on)):
                for b in range(a + 1, len(on)):
                    yield V[on[a]], V[on[b]]


def strict_convexity_witness(norm: NormSpec, budget: int = DEFAULT_CONVEXITY_BUDGET,
                             seed: int = 0, tol: float = DEFAULT_CONVEXITY_TOL) -> ConvexityVerdict:
    """Look for linearly independent ``v, w`` with ``||v + w|| = ||v|| + ||w||``.

    l^p with 1 < p < inf is certified analytically. Otherwise a short list of
    structured candidates is tried first (coordinate pairs, then diagonal
    pairs, then vertex pairs on a common facet), then up to ``budget``
    low-discrepancy pairs of unit vectors.
    """
    if norm.dim < 2:
        raise ValueError("strict convexity needs dim >= 2")
    tol = check_tolerance(tol)
    if isinstance(norm, PNorm) and 1 < norm.p < math.inf:
        return ConvexityVerdict(ConvexityVerdict.CERTIFIED)

    def gap(v, w):
        nv, nw = norm(v), norm(w)
        return (nv + nw - norm(v + w)) / max(nv + nw, 1e-300)

    tried = 0
    for v, w in _candidate_pairs(norm):
        tried += 1
        if _independent(v, w) and gap(v, w) <= tol:
            return ConvexityVerdict(ConvexityVerdict.WITNESS, (v.copy(), w.copy()), tried)
    if budget > 0:
        for row in sphere_directions(2 * norm.dim, budget, seed):
            v, w = row[: norm.dim], row[norm.dim:]
            tried += 1
            if is_zero(v) or is_zero(w) or not _independent(v, w):
                continue
            v, w = v / norm(v), w / norm(w)
            if gap(v, w) <= tol:
                return ConvexityVerdict(ConvexityVerdict.WITNESS, (v, w), tried)
    return ConvexityVerdict(ConvexityVerdict.INCONCLUSIVE, None, tried)


def unit_sphere_polyline(norm: NormSpec, n: int = 256) -> np.ndarray:
    """Closed polyline through ``n`` points of the planar unit sphere."""
    if norm.dim != 2:
        raise DimensionMismatch("unit sphere polylines are only drawn for dim = 2")
    U = circle_directions(n)
    pts = np.array([u / norm(u) for u in U])
    return np.vstack([pts, pts[:1]])
