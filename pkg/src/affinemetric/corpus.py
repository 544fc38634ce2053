"""Reference instances used by the tests, the acceptance suite and the CLI."""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .geodesy import (
    BicombingTable,
    GeodesicRecord,
    MetricSample,
    linear_geodesic_sample,
    metric_from_norm,
)
from .normcore import NormSpec, PNorm, PolytopeGauge

HEXAGON_VERTICES = np.array([[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [-1, -1]], dtype=float)
CROSS_VERTICES = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=float)
SQUARE_VERTICES = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=float)


def hexagon() -> PolytopeGauge:
    """Gauge with unit ball conv{(+-1,0), (0,+-1), +-(1,1)}; equals max(|x|, |y|, |x-y|)."""
    return PolytopeGauge(HEXAGON_VERTICES)


def named_norm(name: str, dim: int = 2) -> NormSpec:
    if name == "hexagon":
        return hexagon()
    if name.startswith("l"):
        p = name[1:]
        return PNorm("inf" if p in ("inf", "∞") else float(p), dim)
    raise KeyError(name)


def lattice(n: int = 9, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    """``n x n`` lattice on ``[lo, hi]^2``, row-major in the first coordinate."""
    g = np.linspace(lo, hi, n)
    return np.array([[a, b] for a in g for b in g])


def lattice_directions(count: int) -> np.ndarray:
    """The first ``count`` primitive integer directions in the plane, one per line.

    Ordered by height ``max(|a|, |b|)`` and then by angle in ``[0, pi)``.
    """
    out = []
    height = 1
    while len(out) < count:
        ring = []
        for a in range(-height, height + 1):
            for b in range(0, height + 1):
                if max(abs(a), abs(b)) != height or math.gcd(a, b) != 1:
                    continue
                if b == 0 and a < 0:
                    continue
                ring.append((math.atan2(b, a), (a, b)))
        out.extend(v for _, v in sorted(ring))
        height += 1
    return np.array(out[:count], dtype=float)


def l2_grid_instance(n: int = 5):
    """l^2 metric on an ``n x n`` grid of [0,1]^2 with a 3-station linear record per pair.

    Returns ``(space, records, grid_ids)``; midpoints are added as extra points.
    """
    space, records = linear_geodesic_sample(PNorm(2, 2), lattice(n), n_stations=3)
    return space, records, list(range(n * n))


def parabola_record(norm: NormSpec, swap: bool = False, ts=None):
    """Stations of ``t -> (t, t^2)`` (or the swap) at ``t = 0, 0.1, ..., 0.5``."""
    ts = np.arange(6) / 10 if ts is None else np.asarray(ts, dtype=float)
    pts = np.column_stack([ts, ts ** 2])
    if swap:
        pts = pts[:, ::-1]
    space = metric_from_norm(norm, pts)
    return space, GeodesicRecord(tuple((float(t), i) for i, t in enumerate(ts)))


def cell_id(cell) -> str:
    return f"{cell[0]},{cell[1]}"


def linf_parabola_instance(steps: int = 8):
    """l^inf on the grid ``(k/2*steps)`` of [0, 1/2]^2 with linear and parabolic records.

    Linear records run along every row, column and diagonal of the grid.
    Parabolic records follow ``(t, t^2)`` and ``(t^2, t)`` at ``t = 0, 1/4, 1/2``.
    All stations are grid points, labelled ``"i,j"``. Returns ``(space, records)``.
    """
    norm = PNorm("inf", 2)
    h = Fraction(1, 2 * steps)
    n = steps + 1
    cells = [(i, j) for i in range(n) for j in range(n)]
    ids = [cell_id(c) for c in cells]
    coords = np.array([[float(i * h), float(j * h)] for i, j in cells])
    space = metric_from_norm(norm, coords, ids=ids)
    records = []

    def line(cells):
        cells = [c for c in cells if 0 <= c[0] < n and 0 <= c[1] < n]
        if len(cells) >= 3:
            records.append(GeodesicRecord(
                tuple((float(k * h), cell_id(c)) for k, c in enumerate(cells))))

    for j in range(n):
        line([(i, j) for i in range(n)])
    for i in range(n):
        line([(i, j) for j in range(n)])
    for d in range(-(n - 1), n):
        line([(i, i + d) for i in range(n)])
    quarter = steps // 2
    if steps % 2 or ((quarter * h) ** 2 / h).denominator != 1:
        raise ValueError(f"steps={steps} puts the parabola off the grid")
    for swap in (False, True):
        stations = []
        for k in (0, quarter, 2 * quarter):
            t = k * h
            cell = (int(t / h), int(t * t / h))
            stations.append((float(t), cell_id(cell[::-1] if swap else cell)))
        records.append(GeodesicRecord(tuple(stations)))
    return space, records


def doctored_distance(x, y) -> float:
    """``(1 + (x_1 + y_1)/2) * |x - y|_2``: parallel segments of equal length disagree."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    return (1.0 + (x[0] + y[0]) / 2.0) * float(np.linalg.norm(x - y))


def doctored_sample(points) -> MetricSample:
    X = np.asarray(points, dtype=float)
    return MetricSample(list(range(len(X))), coords=X,
                        oracle=lambda a, b: doctored_distance(X[a], X[b]))


def doctored_bicombing():
    """l^inf points on [(0,0), (2,0)] with a bicombing table broken in two ways.

    The pair (x, y) is stored along the segment one way and over the bump
    (1,1) the other way (an orientation violation, each record a genuine
    geodesic). The stored (m, y) record detours through (1.5, 0.5) instead of
    following the tail of x -> y (a sub-geodesic violation).
    Returns ``(space, table)``.
    """
    ids = ["x", "m", "q", "y", "bump", "side"]
    coords = [[0, 0], [1, 0], [1.5, 0], [2, 0], [1, 1], [1.5, 0.5]]
    space = metric_from_norm(PNorm("inf", 2), coords, ids=ids)
    table = BicombingTable([
        GeodesicRecord(((0.0, "x"), (1.0, "m"), (1.5, "q"), (2.0, "y"))),
        GeodesicRecord(((0.0, "y"), (1.0, "bump"), (2.0, "x"))),
        GeodesicRecord(((0.0, "m"), (0.5, "side"), (1.0, "y"))),
    ])
    return space, table


def l1_cross() -> PolytopeGauge:
    return PolytopeGauge(CROSS_VERTICES)


def linf_square() -> PolytopeGauge:
    return PolytopeGauge(SQUARE_VERTICES)


def sampled_ray_instance():
    """Euclidean points on the first axis out to 1e7, plus three probe points."""
    ts = [0.0] + [10.0 ** k for k in range(8)]
    probes = {"p": (0.0, 1.0), "q": (-2.0, 0.0), "r": (3.0, 4.0)}
    ids = [f"g{k}" for k in range(len(ts))] + list(probes)
    coords = np.array([[t, 0.0] for t in ts] + [list(c) for c in probes.values()])
    space = metric_from_norm(PNorm(2, 2), coords, ids=ids)
    ray = {"base": "g0", "stations": [[t, f"g{k}"] for k, t in enumerate(ts)]}
    return space, ray


def corpus_documents() -> dict[str, dict]:
    """File name -> JSON document for every shipped corpus file."""
    docs = {}
    for name, norm in (("l3-box.json", PNorm(3, 2)), ("l2-box.json", PNorm(2, 2)),
                       ("hexagon-box.json", hexagon())):
        docs[name] = {"space": metric_from_norm(norm, lattice()).to_json(),
                      "generator": norm.to_json()}
    docs["doctored-box.json"] = {"space": doctored_sample(lattice()).to_json()}
    space, records, grid = l2_grid_instance()
    docs["l2-grid.json"] = {"space": space.to_json(), "geodesics": [r.to_json() for r in records],
                            "grid_ids": grid}
    space, records = linf_parabola_instance()
    docs["linf-sample.json"] = {"space": space.to_json(),
                                "geodesics": [r.to_json() for r in records]}
    space, ray = sampled_ray_instance()
    docs["l2-ray.json"] = {"space": space.to_json(), "ray": ray}
    docs["l3-oracle.json"] = {"generator": "pnorm", "p": 3, "dim": 2}
    docs["hexagon-oracle.json"] = {"generator": "polytope", "vertices": HEXAGON_VERTICES.tolist()}
    docs["doctored-oracle.json"] = {"generator": "builtin", "name": "affine_scaled_euclidean"}
    return docs


def write_corpus(directory) -> list:
    """Regenerate the corpus files into ``directory``; returns the written paths."""
    from pathlib import Path

    from .io import dumps, write_atomic

    out = []
    for name, doc in sorted(corpus_documents().items()):
        path = Path(directory) / name
        write_atomic(path, dumps(doc))
        out.append(path)
    return out
