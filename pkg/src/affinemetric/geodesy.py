"""Sampled metric spaces, geodesic records and bicombings."""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from ._validation import check_points, check_tolerance, check_vector
from .exceptions import (
    CoincidentEndpoints,
    DimensionMismatch,
    InvalidGeodesic,
    ParameterOutOfRange,
    ParseError,
    UnknownPointId,
)
from .normcore import NormSpec, evaluate_norm

DEFAULT_GEODESIC_TOL = 1e-7

PointId = Hashable


class MetricSample:
    """A finite set of labelled points with a distance table or oracle.

    Parameters
    ----------
    ids : sequence of hashable
        Point labels, in a fixed order.
    coords : array-like of shape (n, dim), optional
        Ambient coordinates, one row per id.
    table : mapping or array-like, optional
        Either an ``(n, n)`` array or a mapping ``{(id_a, id_b): d}``.
    oracle : callable, optional
        ``oracle(id_a, id_b) -> float``. Values are memoised on first use.

    Exactly one of ``table`` and ``oracle`` must be given.
    """

    def __init__(self, ids: Sequence[PointId], coords=None, table=None, oracle=None):
        self.ids = list(ids)
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("point ids must be unique")
        self._index = {p: i for i, p in enumerate(self.ids)}
        self.coords = None if coords is None else check_points(coords, name="coords")
        if self.coords is not None and self.coords.shape[0] != len(self.ids):
            raise ValueError("coords must have one row per id")
        if (table is None) == (oracle is None):
            raise ValueError("give exactly one of table or oracle")
        self._oracle = oracle
        self._cache: dict[tuple[int, int], float] = {}
        self._lock = threading.Lock()
        if table is not None:
            self._load_table(table)

    def _load_table(self, table):
        n = len(self.ids)
        if isinstance(table, Mapping):
            for (a, b), d in table.items():
                i, j = self.index(a), self.index(b)
                self._store(i, j, float(d))
        else:
            D = np.asarray(table, dtype=float)
            if D.shape != (n, n):
                raise ValueError(f"distance table must be {n}x{n}")
            for i in range(n):
                for j in range(i + 1, n):
                    self._store(i, j, float(D[i, j]))

    def _store(self, i, j, d):
        if i == j:
            return
        key = (min(i, j), max(i, j))
        if key in self._cache and self._cache[key] != d:
            raise ValueError(f"conflicting distances for {self.ids[i]!r}, {self.ids[j]!r}")
        self._cache[key] = d

    def __len__(self):
        return len(self.ids)

    def __contains__(self, p):
        return p in self._index

    @property
    def dim(self) -> int | None:
        return None if self.coords is None else self.coords.shape[1]

    def index(self, p: PointId) -> int:
        try:
            return self._index[p]
        except (KeyError, TypeError):
            raise UnknownPointId(p) from None

    def coords_of(self, p: PointId) -> np.ndarray:
        if self.coords is None:
            raise ValueError("this sample carries no ambient coordinates")
        return self.coords[self.index(p)]

    def distance(self, a: PointId, b: PointId) -> float:
        i, j = self.index(a), self.index(b)
        if i == j:
            return 0.0
        key = (min(i, j), max(i, j))
        d = self._cache.get(key)
        if d is None:
            if self._oracle is None:
                raise KeyError(f"no distance stored for {a!r}, {b!r}")
            d = float(self._oracle(self.ids[key[0]], self.ids[key[1]]))
            with self._lock:
                d = self._cache.setdefault(key, d)
        return d

    def distance_matrix(self) -> np.ndarray:
        n = len(self.ids)
        D = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                D[i, j] = D[j, i] = self.distance(self.ids[i], self.ids[j])
        return D

    def to_json(self) -> dict:
        points = []
        for k, p in enumerate(self.ids):
            entry = {"id": p}
            if self.coords is not None:
                entry["coords"] = self.coords[k].tolist()
            points.append(entry)
        D = self.distance_matrix()
        n = len(self.ids)
        dists = [[self.ids[i], self.ids[j], D[i, j]] for i in range(n) for j in range(i + 1, n)]
        return {"points": points, "distances": dists}

    @classmethod
    def from_json(cls, obj: dict) -> "MetricSample":
        try:
            pts = obj["points"]
            ids = [p["id"] for p in pts]
            has = ["coords" in p for p in pts]
            coords = [p["coords"] for p in pts] if all(has) else None
            table = {(a, b): d for a, b, d in obj["distances"]}
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed MetricSample JSON: {exc}") from exc
        return cls(ids, coords=coords, table=table)


def metric_from_norm(norm: NormSpec, points, ids: Sequence[PointId] | None = None) -> MetricSample:
    """Sample with ``d(x, y) = ||x - y||``; distances are computed lazily."""
    X = check_points(points, name="points")
    if X.shape[1] != norm.dim:
        raise DimensionMismatch(f"points in R^{X.shape[1]} for a norm on R^{norm.dim}")
    ids = list(range(len(X))) if ids is None else list(ids)
    index = {p: i for i, p in enumerate(ids)}
    return MetricSample(ids, coords=X,
                        oracle=lambda a, b: evaluate_norm(norm, X[index[a]] - X[index[b]]))


@dataclass(frozen=True)
class MetricAudit:
    ok: bool
    worst_triangle_excess: float
    worst_triple: tuple | None
    symmetry_and_positivity_ok: bool


def audit_metric(space: MetricSample, tol: float = 1e-12) -> MetricAudit:
    """Check positivity and the triangle inequality on every triple (relative ``tol``)."""
    D = space.distance_matrix()
    n = len(space)
    off = D[~np.eye(n, dtype=bool)]
    positive = bool(np.all(off > 0)) if n > 1 else True
    # excess[i, j, k] = D[i, k] - D[i, j] - D[j, k]
    excess = D[:, None, :] - D[:, :, None] - D[None, :, :]
    scale = np.maximum(D.max(), 1e-300)
    idx = np.unravel_index(int(np.argmax(excess)), excess.shape)
    worst = float(excess[idx]) / scale
    triple = tuple(space.ids[i] for i in idx)
    return MetricAudit(positive and worst <= tol, worst, triple, positive)


@dataclass(frozen=True)
class GeodesicRecord:
    """Stations ``(t, id)`` with strictly increasing arclength parameter."""

    stations: tuple[tuple[float, PointId], ...]

    def __post_init__(self):
        st = tuple((float(t), p) for t, p in self.stations)
        if len(st) < 2:
            raise InvalidGeodesic("a geodesic record needs at least its two endpoints")
        ts = [t for t, _ in st]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise InvalidGeodesic("station parameters must be strictly increasing")
        object.__setattr__(self, "stations", st)

    @property
    def start(self) -> PointId:
        return self.stations[0][1]

    @property
    def end(self) -> PointId:
        return self.stations[-1][1]

    @property
    def length(self) -> float:
        return self.stations[-1][0] - self.stations[0][0]

    @property
    def ids(self) -> list:
        return [p for _, p in self.stations]

    def reversed(self) -> "GeodesicRecord":
        T = self.stations[-1][0]
        t0 = self.stations[0][0]
        return GeodesicRecord(tuple((t0 + T - t, p) for t, p in reversed(self.stations)))

    def to_json(self) -> dict:
        return {"stations": [[t, p] for t, p in self.stations]}

    @classmethod
    def from_json(cls, obj) -> "GeodesicRecord":
        try:
            return cls(tuple((t, p) for t, p in obj["stations"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed GeodesicRecord JSON: {exc}") from exc


@dataclass(frozen=True)
class GeodesicValidation:
    valid: bool
    worst_violation: float
    worst_pair: tuple | None

    def __bool__(self):
        return self.valid


def validate_geodesic(space: MetricSample, record: GeodesicRecord,
                      tol: float = DEFAULT_GEODESIC_TOL) -> GeodesicValidation:
    """Check ``d(g(t_i), g(t_j)) == |t_i - t_j|`` over all station pairs."""
    tol = check_tolerance(tol)
    for _, p in record.stations:
        space.index(p)
    worst, pair = 0.0, None
    for (s, a), (t, b) in itertools.combinations(record.stations, 2):
        err = abs(space.distance(a, b) - abs(t - s))
        if err > worst:
            worst, pair = err, (a, b)
    return GeodesicValidation(worst <= tol, worst, pair)


class BicombingTable:
    """A partial bicombing: geodesic records keyed by ordered endpoint pairs.

    Only finitely many pairs can be stored, so this is never a bicombing of
    a whole space. :meth:`get` falls back to reversing the stored opposite
    orientation.
    """

    def __init__(self, records: Iterable[GeodesicRecord] = ()):
        self._records: dict[tuple, GeodesicRecord] = {}
        for r in records:
            self.add(r)

    def add(self, record: GeodesicRecord) -> None:
        self._records[(record.start, record.end)] = record

    def get(self, x, y) -> GeodesicRecord | None:
        if (x, y) in self._records:
            return self._records[(x, y)]
        if (y, x) in self._records:
            return self._records[(y, x)].reversed()
        return None

    def items(self):
        return self._records.items()

    def __len__(self):
        return len(self._records)


@dataclass(frozen=True)
class BicombingViolation:
    kind: str  # "orientation" | "subgeodesic" | "geodesic"
    triple: tuple
    magnitude: float


@dataclass
class BicombingReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def of_kind(self, kind: str) -> list:
        return [v for v in self.violations if v.kind == kind]


def _station_map(record: GeodesicRecord, shift: float) -> list[tuple[float, PointId]]:
    return [(t - shift, p) for t, p in record.stations]


def _compare_pieces(space, outer, inner, tol):
    """Worst mismatch between stations of ``inner`` and ``outer`` sharing a parameter."""
    worst = 0.0
    for s, q in inner:
        for t, p in outer:
            if abs(s - t) <= tol:
                worst = max(worst, space.distance(p, q))
    return worst


def validate_bicombing(space: MetricSample, table: BicombingTable,
                       tol: float = DEFAULT_GEODESIC_TOL) -> BicombingReport:
    """Check orientation reversal and sub-geodesic consistency on stored pairs."""
    tol = check_tolerance(tol)
    report = BicombingReport()
    for (x, y), rec in table.items():
        check = validate_geodesic(space, rec, tol)
        if not check:
            report.violations.append(BicombingViolation("geodesic", (x, None, y), check.worst_violation))
    for (x, y), rec in table.items():
        back = table._records.get((y, x))
        if back is not None and repr(x) < repr(y):
            rev = _station_map(rec.reversed(), rec.stations[0][0])
            other = _station_map(back, back.stations[0][0])
            mismatch = max(_compare_pieces(space, rev, other, tol),
                           _compare_pieces(space, other, rev, tol),
                           abs(back.length - rec.length))
            if mismatch > tol:
                report.violations.append(BicombingViolation("orientation", (x, None, y), mismatch))
        t0 = rec.stations[0][0]
        for t_m, m in rec.stations[1:-1]:
            # tail: gamma_{m y} must be the part of gamma_{x y} after m
            tail = table.get(m, y)
            if tail is not None:
                err = _compare_pieces(space, _station_map(rec, t_m),
                                      _station_map(tail, tail.stations[0][0]), tol)
                err = max(err, abs(tail.length - (rec.stations[-1][0] - t_m)))
                if err > tol:
                    report.violations.append(BicombingViolation("subgeodesic", (x, m, y), err))
            head = table.get(x, m)
            if head is not None:
                err = _compare_pieces(space, _station_map(rec, t0),
                                      _station_map(head, head.stations[0][0]), tol)
                err = max(err, abs(head.length - (t_m - t0)))
                if err > tol:
                    report.violations.append(BicombingViolation("subgeodesic", (x, m, y), err))
    return report


def linear_bicombing_point(norm: NormSpec, x, y, t: float) -> np.ndarray:
    """Point at arclength ``t`` on the linear interval from ``x`` to ``y``."""
    x = check_vector(x, norm.dim, "x")
    y = check_vector(y, norm.dim, "y")
    L = evaluate_norm(norm, y - x)
    if L == 0.0:
        raise CoincidentEndpoints("x and y coincide")
    slack = 1e-12 * L
    if not (-slack <= t <= L + slack):
        raise ParameterOutOfRange(f"t={t} outside [0, {L}]")
    t = min(max(t, 0.0), L)
    if t == 0.0:
        return x.copy()
    if t == L:
        return y.copy()
    return x + t * (y - x) / L


def linear_geodesic_sample(norm: NormSpec, points, pairs=None, n_stations: int = 3,
                           decimals: int = 12):
    """Metric sample plus linear-interval records between point pairs.

    Interior stations become extra points; stations landing on an existing
    point (to ``decimals`` places) reuse it. Returns ``(space, records)`` with
    the original points labelled ``0..len(points)-1``.
    """
    X = check_points(points, norm.dim, "points")
    if n_stations < 2:
        raise ValueError("n_stations must be >= 2")
    coords = [row for row in X]
    keys = {tuple(np.round(row, decimals)): i for i, row in enumerate(coords)}

    def point_id(z):
        k = tuple(np.round(z, decimals) + 0.0)
        if k not in keys:
            keys[k] = len(coords)
            coords.append(z)
        return keys[k]

    if pairs is None:
        pairs = itertools.combinations(range(len(X)), 2)
    specs = []
    for a, b in pairs:
        L = evaluate_norm(norm, X[b] - X[a])
        stations = []
        for k in range(n_stations):
            t = L * k / (n_stations - 1)
            if k == 0:
                stations.append((0.0, a))
            elif k == n_stations - 1:
                stations.append((L, b))
            else:
                stations.append((t, point_id(linear_bicombing_point(norm, X[a], X[b], t))))
        specs.append(stations)
    space = metric_from_norm(norm, np.array(coords))
    return space, [GeodesicRecord(tuple(s)) for s in specs]
