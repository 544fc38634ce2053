"""Busemann functions of linear rays in normed spaces and of sampled rays."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_tolerance, check_vector, is_zero
from .exceptions import InvalidGeodesic, NotConverged, ParseError, ZeroBasePoint
from .geodesy import GeodesicRecord, MetricSample, validate_geodesic
from .normcore import NormSpec, evaluate_norm, one_sided_derivative

DEFAULT_LINEAR_TOL = 1e-8
DEFAULT_RAY_TOL = 1e-5


@dataclass(frozen=True)
class LinearRay:
    """The ray ``t -> t h / ||h||``."""

    h: np.ndarray

    def __post_init__(self):
        h = check_vector(self.h, name="h")
        if is_zero(h):
            raise ZeroBasePoint("ray direction must be nonzero")
        object.__setattr__(self, "h", h)

    def point(self, norm: NormSpec, t: float) -> np.ndarray:
        return t * self.h / evaluate_norm(norm, self.h)


def busemann_linear(norm: NormSpec, h, v, tol: float = DEFAULT_LINEAR_TOL) -> float:
    """``b_h(v)`` as the right derivative of ``t -> ||h - t v||`` at 0.

    >>> round(busemann_linear(PNorm(2, 2), [3, 4], [1, 0]), 9)
    -0.6
    """
    h = check_vector(h, norm.dim, "h")
    if is_zero(h):
        raise ZeroBasePoint("h must be nonzero")
    v = check_vector(v, norm.dim, "v")
    return one_sided_derivative(norm, h, -v, rtol=min(tol, 1e-9))


def busemann_linear_far(norm: NormSpec, h, v, t: float = 1e7) -> float:
    """``||t h/||h|| - v|| - t`` for one large ``t``; an approximation of ``b_h(v)``.

    Evaluated at ``v/||v||`` and rescaled, since the error of the large-``t``
    form grows like ``||v||^2 / t`` but ``b_h`` is positively homogeneous.
    """
    h = check_vector(h, norm.dim, "h")
    v = check_vector(v, norm.dim, "v")
    if is_zero(h):
        raise ZeroBasePoint("h must be nonzero")
    nv = evaluate_norm(norm, v)
    if nv == 0.0:
        return 0.0
    u = h / evaluate_norm(norm, h)
    return nv * (evaluate_norm(norm, t * u - v / nv) - t)


@dataclass(frozen=True)
class SampledRay:
    """A ray in a metric sample given by stations ``(t, id)``; ``base`` sits at ``t = 0``."""

    base: object
    stations: tuple

    def __post_init__(self):
        st = tuple((float(t), p) for t, p in self.stations)
        if not st or st[0][0] != 0.0:
            st = ((0.0, self.base),) + st
        elif st[0][1] != self.base:
            raise InvalidGeodesic("station at t=0 must be the base point")
        object.__setattr__(self, "stations", st)

    def as_record(self) -> GeodesicRecord:
        return GeodesicRecord(self.stations)

    def to_json(self) -> dict:
        return {"base": self.base, "stations": [[t, p] for t, p in self.stations]}

    @classmethod
    def from_json(cls, obj) -> "SampledRay":
        try:
            return cls(obj["base"], tuple((t, p) for t, p in obj["stations"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed SampledRay JSON: {exc}") from exc


def busemann_estimates(space: MetricSample, ray: SampledRay, x) -> np.ndarray:
    """``d(g(t), x) - d(g(0), g(t))`` for every station with ``t > 0``."""
    base = ray.stations[0][1]
    return np.array([space.distance(p, x) - space.distance(base, p)
                     for t, p in ray.stations if t > 0])


def busemann_metric_ray(space: MetricSample, ray: SampledRay, x, tol: float = DEFAULT_RAY_TOL,
                        validate: bool = True, geodesic_tol: float = 1e-7) -> float:
    """Busemann function of a sampled ray at the point ``x``.

    The estimates are non-increasing along the ray; the last one is returned
    once it differs from its predecessor by at most ``tol``.
    """
    tol = check_tolerance(tol)
    space.index(x)
    if validate:
        check = validate_geodesic(space, ray.as_record(), geodesic_tol)
        if not check:
            raise InvalidGeodesic(f"ray stations are not isometric (worst {check.worst_violation:.3e})")
    est = busemann_estimates(space, ray, x)
    if len(est) < 2:
        raise NotConverged("need at least two stations beyond the base point")
    if abs(est[-1] - est[-2]) > tol:
        raise NotConverged(f"last estimates differ by {abs(est[-1] - est[-2]):.3e} > {tol:.1e}")
    return float(est[-1])


def linearity_defect(norm: NormSpec, h, directions) -> float:
    """``max_v |b_h(v) + b_h(-v)|``; zero exactly when ``b_h`` is linear on the sample."""
    return max(abs(busemann_linear(norm, h, v) + busemann_linear(norm, h, -np.asarray(v, float)))
               for v in directions)


def level_polylines(norm: NormSpec, h, levels=(-1.0, -0.5, 0.5, 1.0), n: int = 360,
                    radius: float = 5.0) -> list[tuple[float, np.ndarray]]:
    """Planar sample points of the level sets ``{b_h = c}``.

    ``b_h`` is positively homogeneous, so along the unit direction ``u`` the
    level ``c`` is met at ``c / b_h(u)`` when the signs agree. Points beyond
    ``radius`` are dropped.
    """
    if norm.dim != 2:
        raise ValueError("level polylines are only drawn in the plane")
    theta = 2 * np.pi * np.arange(n) / n
    U = np.column_stack([np.cos(theta), np.sin(theta)])
    beta = np.array([busemann_linear(norm, h, u) for u in U])
    out = []
    for c in levels:
        with np.errstate(divide="ignore", invalid="ignore"):
            r = c / beta
        keep = np.isfinite(r) & (r > 0) & (r <= radius)
        out.append((float(c), np.column_stack([theta[keep], U[keep] * r[keep, None]])))
    return out
