"""scikit-learn style front ends for norm reconstruction and affine embedding."""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .affinesep import (
    DEFAULT_PIVOT_TOL,
    DEFAULT_SEPARATION_TOL,
    build_constraints,
    evaluation_embedding,
)
from .corpus import lattice_directions
from .exceptions import DegenerateBody
from .finslerrec import DEFAULT_WELLDEF_TOL, reconstruct_norm
from .geodesy import MetricSample
from .normcore import NormSpec


def sample_directions(X: np.ndarray, max_count: int | None = None, min_count: int = 2,
                      decimals: int = 9) -> np.ndarray:
    """Difference directions realised by at least ``min_count`` point pairs.

    Each direction is returned as its shortest realising difference, with the
    first nonzero coordinate positive. Most frequent directions come first.
    """
    i, j = np.triu_indices(len(X), k=1)
    W = X[i] - X[j]
    groups: dict = {}
    for w in W:
        n = np.linalg.norm(w)
        if n == 0:
            continue
        u = w / n
        if u[np.flatnonzero(np.abs(u) > 1e-12)[0]] < 0:
            u, w = -u, -w
        key = tuple(np.round(u, decimals) + 0.0)
        count, best = groups.get(key, (0, None))
        if best is None or np.linalg.norm(w) < np.linalg.norm(best):
            best = w
        groups[key] = (count + 1, best)
    ranked = sorted(((c, k, b) for k, (c, b) in groups.items() if c >= min_count),
                    key=lambda e: (-e[0], e[1]))
    if max_count is not None:
        ranked = ranked[:max_count]
    return np.array([b for _, _, b in ranked]) + 0.0


class NormReconstructor(BaseEstimator):
    """Recover the norm whose induced metric generated a set of distances.

    Parameters
    ----------
    directions : int, "auto" or array-like of shape (m, dim)
        Directions at which the norm is tabulated. An int ``m`` asks for the
        first ``m`` primitive lattice directions (planar lattices only);
        ``"auto"`` uses every direction realised by two or more point pairs.
    metric : "precomputed", callable or NormSpec
        How distances are obtained. With ``"precomputed"`` pass the distance
        matrix as ``distances`` to :meth:`fit`.
    tol : float
        Largest allowed relative spread between representations.
    strict : bool
        Raise :class:`~affinemetric.exceptions.WellDefinednessViolation`
        instead of recording an inconsistent fit.
    """

    def __init__(self, directions=64, metric="precomputed", tol=DEFAULT_WELLDEF_TOL,
                 min_representations=2, strict=True):
        self.directions = directions
        self.metric = metric
        self.tol = tol
        self.min_representations = min_representations
        self.strict = strict

    def _space(self, X, distances):
        n = X.shape[0]
        if isinstance(self.metric, str):
            if self.metric != "precomputed":
                raise ValueError(f"unknown metric {self.metric!r}")
            if distances is None:
                raise ValueError("metric='precomputed' needs a distance matrix")
            D = check_array(distances)
            if D.shape != (n, n):
                raise ValueError(f"distances must be {n}x{n}, got {D.shape}")
            return MetricSample(range(n), coords=X, table=D)
        if isinstance(self.metric, NormSpec):
            norm = self.metric
            return MetricSample(range(n), coords=X, oracle=lambda a, b: norm(X[a] - X[b]))
        if callable(self.metric):
            return MetricSample(range(n), coords=X, oracle=lambda a, b: self.metric(X[a], X[b]))
        raise ValueError("metric must be 'precomputed', a callable or a NormSpec")

    def _resolve_directions(self, X):
        d = self.directions
        if isinstance(d, str):
            if d != "auto":
                raise ValueError(f"unknown directions {d!r}")
            return sample_directions(X, min_count=self.min_representations)
        if isinstance(d, numbers.Integral):
            if X.shape[1] != 2:
                raise ValueError("integer directions are only defined for planar samples")
            return lattice_directions(int(d))
        return check_array(d)

    def fit(self, X, y=None, distances=None):
        X = check_array(X)
        self.n_features_in_ = X.shape[1]
        space = self._space(X, distances)
        dirs = self._resolve_directions(X)
        self.report_ = reconstruct_norm(space, dirs, tol=self.tol,
                                        min_representations=self.min_representations,
                                        strict=self.strict)
        self.directions_ = self.report_.directions
        self.norm_values_ = self.report_.values
        self.welldef_residual_ = self.report_.welldef_residual
        self.consistent_ = self.report_.verdict == "consistent"
        try:
            self.norm_ = self.report_.as_norm()
        except DegenerateBody:
            # directions do not span: the table cannot be extended to a norm
            self.norm_ = None
        return self

    def predict(self, V):
        """Reconstructed norm of each row of ``V`` (hull interpolation between table points)."""
        check_is_fitted(self, "norm_values_")
        if self.norm_ is None:
            raise ValueError("the fitted directions do not span; predict needs a full table")
        V = check_array(V)
        if V.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {V.shape[1]}")
        return np.array([self.norm_(v) for v in V])


class AffineEmbedding(TransformerMixin, BaseEstimator):
    """Embed a sampled geodesic space by values of separating affine functions.

    ``fit`` takes a :class:`~affinemetric.geodesy.MetricSample` and its
    geodesic records; ``transform`` maps point ids to R^k.
    """

    def __init__(self, pairs=None, tol=DEFAULT_SEPARATION_TOL, pivot_tol=DEFAULT_PIVOT_TOL,
                 validate=True):
        self.pairs = pairs
        self.tol = tol
        self.pivot_tol = pivot_tol
        self.validate = validate

    def fit(self, X, y=None, geodesics=None):
        if not isinstance(X, MetricSample):
            raise TypeError("AffineEmbedding.fit expects a MetricSample")
        if geodesics is None:
            geodesics = y
        if geodesics is None:
            raise ValueError("geodesic records are required")
        self.system_ = build_constraints(X, geodesics, validate=self.validate)
        self.embedding_ = evaluation_embedding(self.system_, self.pairs, self.tol, self.pivot_tol)
        self.n_components_ = self.embedding_.k
        return self

    def transform(self, X):
        check_is_fitted(self, "embedding_")
        ids = X.ids if isinstance(X, MetricSample) else list(X)
        return np.array([self.embedding_[p] for p in ids])

    def fit_transform(self, X, y=None, geodesics=None):
        return self.fit(X, y, geodesics=geodesics).transform(X)
