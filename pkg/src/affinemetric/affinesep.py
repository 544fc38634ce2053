"""Affine functions on sampled geodesic spaces.

A function on the sample points is affine along a recorded geodesic when
its values at every three consecutive stations are collinear in the arclength
parameter. Those conditions are linear equalities in the point values; the
feasible functions form the null space of the resulting matrix.

Separation of a pair ``(x, y)`` is decided by the LP

    maximise f(x) - f(y)   subject to   A f = 0,  -1 <= f <= 1,

solved over an orthonormal basis of the null space of ``A`` so that the
equalities hold to rounding. A positive answer means "separated relative to
the recorded geodesics"; nothing is claimed about geodesics not in the sample.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import null_space, qr
from scipy.optimize import linprog

from ._validation import check_tolerance
from .exceptions import InvalidGeodesic, NotSeparated, SamePoint, SolverFailure, UnknownPointId
from .geodesy import GeodesicRecord, MetricSample, validate_geodesic

DEFAULT_SEPARATION_TOL = 1e-6
DEFAULT_PIVOT_TOL = 1e-8
NULLSPACE_RCOND = 1e-10


@dataclass
class AffineConstraintSystem:
    """Sparse linear equalities ``sum_p c_p f(p) = 0`` over sample points."""

    ids: list
    rows: list[dict] = field(default_factory=list)
    coords: np.ndarray | None = None

    def __post_init__(self):
        self.index = {p: i for i, p in enumerate(self.ids)}
        self._basis = None

    def column(self, p) -> int:
        try:
            return self.index[p]
        except (KeyError, TypeError):
            raise UnknownPointId(p) from None

    def matrix(self) -> np.ndarray:
        A = np.zeros((len(self.rows), len(self.ids)))
        for r, row in enumerate(self.rows):
            for p, c in row.items():
                A[r, self.index[p]] += c
        return A

    def residual(self, values) -> float:
        """Largest absolute equality residual of a value assignment."""
        if not self.rows:
            return 0.0
        f = _as_value_vector(self, values)
        return float(np.max(np.abs(self.matrix() @ f)))

    def feasible_basis(self) -> np.ndarray:
        """Orthonormal basis (columns) of all assignments satisfying the rows."""
        if self._basis is None:
            if self.rows:
                self._basis = null_space(self.matrix(), rcond=NULLSPACE_RCOND)
            else:
                self._basis = np.eye(len(self.ids))
        return self._basis

    def ambient_matrix(self) -> np.ndarray:
        """Rows in terms of ``(a, c)`` for the ansatz ``f(p) = <a, coords(p)> + c``."""
        if self.coords is None:
            raise ValueError("system was built from a sample without coordinates")
        X1 = np.column_stack([self.coords, np.ones(len(self.ids))])
        return self.matrix() @ X1

    def ambient_basis(self) -> np.ndarray:
        """Null space of :meth:`ambient_matrix` mapped back to point values."""
        X1 = np.column_stack([self.coords, np.ones(len(self.ids))])
        if not self.rows:
            return X1
        # M can vanish up to rounding (every affine ansatz feasible); a relative
        # cutoff would then call noise full rank, so measure against |A| |X1|
        M = self.matrix() @ X1
        scale = np.linalg.norm(self.matrix(), 2) * np.linalg.norm(X1, 2)
        _, s, Vt = np.linalg.svd(M)
        rank = int(np.sum(s > NULLSPACE_RCOND * scale))
        return X1 @ Vt[rank:].T


def _as_value_vector(system, values) -> np.ndarray:
    if isinstance(values, dict):
        return np.array([values[p] for p in system.ids], dtype=float)
    return np.asarray(values, dtype=float)


def triple_row(a, b, c) -> dict:
    """Row for stations ``(t_a, p_a), (t_b, p_b), (t_c, p_c)``.

    ``(t_c - t_b) f(p_a) - (t_c - t_a) f(p_b) + (t_b - t_a) f(p_c) = 0``
    """
    (ta, pa), (tb, pb), (tc, pc) = a, b, c
    alpha, gamma = tc - tb, tb - ta
    row: dict = {}
    for p, coef in ((pa, alpha), (pb, -(alpha + gamma)), (pc, gamma)):
        row[p] = row.get(p, 0.0) + coef
    return row


def build_constraints(space: MetricSample, geodesics: Iterable[GeodesicRecord],
                      validate: bool = True, tol: float = 1e-7) -> AffineConstraintSystem:
    """One equality per consecutive station triple of every record."""
    system = AffineConstraintSystem(list(space.ids), coords=space.coords)
    for rec in geodesics:
        if validate:
            check = validate_geodesic(space, rec, tol)
            if not check:
                raise InvalidGeodesic(
                    f"record {rec.start!r}->{rec.end!r} fails validation "
                    f"(worst {check.worst_violation:.3e} at {check.worst_pair})")
        else:
            for _, p in rec.stations:
                space.index(p)
        for a, b, c in zip(rec.stations, rec.stations[1:], rec.stations[2:]):
            system.rows.append(triple_row(a, b, c))
    return system


@dataclass(frozen=True)
class AffineWitness:
    """Point values of a function affine along every recorded geodesic, in [-1, 1]."""

    values: dict

    def __getitem__(self, p):
        return self.values[p]

    def vector(self, ids: Sequence) -> np.ndarray:
        return np.array([self.values[p] for p in ids])


@dataclass(frozen=True)
class PairSeparation:
    pair: tuple
    optimum: float
    witness: AffineWitness | None

    @property
    def separated(self) -> bool:
        return self.witness is not None


def separate_pair(system: AffineConstraintSystem, x, x_bar,
                  tol: float = DEFAULT_SEPARATION_TOL, mode: str = "values") -> PairSeparation:
    """Maximise ``f(x) - f(x_bar)`` over bounded feasible functions.

    ``mode="values"`` treats the point values as unknowns. ``mode="ambient"``
    restricts to ``f = <a, coords> + c`` and needs coordinates.
    """
    tol = check_tolerance(tol)
    if x == x_bar:
        raise SamePoint(f"cannot separate {x!r} from itself")
    i, j = system.column(x), system.column(x_bar)
    if mode == "values":
        N = system.feasible_basis()
    elif mode == "ambient":
        N = system.ambient_basis()
    else:
        raise ValueError(f"unknown mode {mode!r}")
    c = N[i] - N[j]
    if N.shape[1] == 0:
        return PairSeparation((x, x_bar), 0.0, None)
    n = len(system.ids)
    A_ub = np.vstack([N, -N])
    b_ub = np.ones(2 * n)
    res = linprog(-c, A_ub=A_ub, b_ub=b_ub, bounds=(None, None), method="highs")
    if res.status != 0:
        raise SolverFailure(f"separation LP for {x!r}, {x_bar!r} failed: {res.message}")
    f = np.clip(N @ res.x, -1.0, 1.0)
    optimum = float(f[i] - f[j])
    if optimum > tol:
        return PairSeparation((x, x_bar), optimum, AffineWitness(dict(zip(system.ids, f.tolist()))))
    return PairSeparation((x, x_bar), max(optimum, 0.0), None)


@dataclass
class SeparationReport:
    pairs: list
    separated: list
    unseparated: list
    tol: float

    @property
    def all_separated(self) -> bool:
        return not self.unseparated

    def to_json(self) -> dict:
        return {
            "tol": self.tol,
            "pairs_tested": len(self.pairs),
            "separated": [{"pair": list(r.pair), "optimum": r.optimum} for r in self.separated],
            "unseparated": [{"pair": list(r.pair), "optimum": r.optimum} for r in self.unseparated],
        }


def all_pairs(ids: Sequence) -> list[tuple]:
    return list(itertools.combinations(ids, 2))


def separate_all(system: AffineConstraintSystem, pairs=None,
                 tol: float = DEFAULT_SEPARATION_TOL, mode: str = "values") -> SeparationReport:
    pairs = all_pairs(system.ids) if pairs is None else [tuple(p) for p in pairs]
    results = [separate_pair(system, a, b, tol, mode) for a, b in pairs]
    return SeparationReport(
        pairs,
        [r for r in results if r.separated],
        [r for r in results if not r.separated],
        tol,
    )


@dataclass(frozen=True)
class UniquenessConflict:
    records: tuple
    midpoints: tuple
    optimum: float


def uniqueness_audit(space: MetricSample, system: AffineConstraintSystem,
                     geodesics: Sequence[GeodesicRecord], tol: float = 1e-7,
                     sep_tol: float = DEFAULT_SEPARATION_TOL) -> list[UniquenessConflict]:
    """Flag records with common endpoints whose distinct midpoints are still separated.

    Every feasible function takes the average of the endpoint values at each
    midpoint, so distinct midpoints can never be separated; a conflict
    therefore signals a broken system.
    """
    by_ends: dict = {}
    for rec in geodesics:
        key = frozenset((rec.start, rec.end))
        by_ends.setdefault(key, []).append(rec)
    conflicts = []
    for recs in by_ends.values():
        mids = []
        for rec in recs:
            r = rec if rec.start == min(rec.start, rec.end, key=repr) else rec.reversed()
            half = r.stations[0][0] + r.length / 2
            m = [p for t, p in r.stations if abs(t - half) <= tol]
            if m:
                mids.append((rec, m[0]))
        for (r1, m1), (r2, m2) in itertools.combinations(mids, 2):
            if m1 != m2 and space.distance(m1, m2) > tol:
                res = separate_pair(system, m1, m2, sep_tol)
                if res.separated:
                    conflicts.append(UniquenessConflict((r1, r2), (m1, m2), res.optimum))
    return conflicts


def _independent_columns(W: np.ndarray, pivot_tol: float) -> list[int]:
    """Indices of a maximal independent set of columns by pivoted QR."""
    if W.size == 0:
        return []
    _, R, piv = qr(W, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    if d.size == 0 or d[0] == 0:
        return []
    k = int(np.sum(d > pivot_tol * d[0]))
    return sorted(piv[:k].tolist())


@dataclass
class Embedding:
    ids: list
    coordinates: np.ndarray  # (n_points, k)
    witnesses: list  # PairSeparation per kept function

    @property
    def k(self) -> int:
        return self.coordinates.shape[1]

    def __post_init__(self):
        self._row = {p: i for i, p in enumerate(self.ids)}

    def __getitem__(self, p) -> np.ndarray:
        return self.coordinates[self._row[p]]

    def as_dict(self) -> dict:
        return {p: self.coordinates[i] for i, p in enumerate(self.ids)}


def evaluation_embedding(system: AffineConstraintSystem, pairs=None,
                         tol: float = DEFAULT_SEPARATION_TOL,
                         pivot_tol: float = DEFAULT_PIVOT_TOL) -> Embedding:
    """Map each point to the values of a basis of collected witness functions.

    One witness is collected per pair. Constant parts are removed (they do
    not help injectivity), then pivoted QR keeps an independent subset.
    """
    pairs = all_pairs(system.ids) if pairs is None else [tuple(p) for p in pairs]
    results = [separate_pair(system, a, b, tol) for a, b in pairs]
    missing = [r.pair for r in results if not r.separated]
    if missing:
        raise NotSeparated(f"{len(missing)} pair(s) admit no separating function", missing)
    if not results:
        return Embedding(list(system.ids), np.zeros((len(system.ids), 0)), [])
    W = np.column_stack([r.witness.vector(system.ids) for r in results])
    W = W - W.mean(axis=0, keepdims=True)
    keep = _independent_columns(W, pivot_tol)
    kept = [results[c] for c in keep]
    E = np.column_stack([r.witness.vector(system.ids) for r in kept])
    return Embedding(list(system.ids), E, kept)


def embedding_affinity_defect(embedding: Embedding, geodesics: Iterable[GeodesicRecord]) -> float:
    """Largest ``|E(p) - ((1-s) E(x) + s E(y))|`` over recorded stations."""
    worst = 0.0
    for rec in geodesics:
        t0, L = rec.stations[0][0], rec.length
        ex, ey = embedding[rec.start], embedding[rec.end]
        for t, p in rec.stations:
            s = (t - t0) / L
            worst = max(worst, float(np.max(np.abs(embedding[p] - ((1 - s) * ex + s * ey)))))
    return worst
