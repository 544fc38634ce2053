"""Input validation helpers."""
from __future__ import annotations

import numbers

import numpy as np

from .exceptions import DimensionMismatch


def check_vector(v, dim: int | None = None, name: str = "v") -> np.ndarray:
    """Return ``v`` as a finite 1-D float array, optionally of length ``dim``."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite coordinates")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatch(f"{name} has dimension {arr.shape[0]}, expected {dim}")
    return arr


def check_points(X, dim: int | None = None, name: str = "X") -> np.ndarray:
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    if dim is not None and arr.shape[1] != dim:
        raise DimensionMismatch(f"{name} has dimension {arr.shape[1]}, expected {dim}")
    return arr


def check_tolerance(tol, name: str = "tol") -> float:
    if not isinstance(tol, numbers.Real) or not np.isfinite(tol) or tol < 0:
        raise ValueError(f"{name} must be a finite non-negative real, got {tol!r}")
    return float(tol)


def is_zero(v: np.ndarray) -> bool:
    return not np.any(v)
