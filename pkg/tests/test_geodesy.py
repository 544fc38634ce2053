import threading

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from affinemetric.corpus import lattice, parabola_record
from affinemetric.exceptions import (
    CoincidentEndpoints,
    DimensionMismatch,
    InvalidGeodesic,
    ParameterOutOfRange,
    ParseError,
    UnknownPointId,
)
from affinemetric.geodesy import (
    BicombingTable,
    GeodesicRecord,
    MetricSample,
    audit_metric,
    linear_bicombing_point,
    linear_geodesic_sample,
    metric_from_norm,
    validate_bicombing,
    validate_geodesic,
)
from affinemetric.normcore import PNorm

from conftest import NORMS, norm_names, vec2

LINF = PNorm("inf", 2)


class TestMetricSample:
    def test_table_and_oracle_are_exclusive(self):
        with pytest.raises(ValueError):
            MetricSample([0, 1])
        with pytest.raises(ValueError):
            MetricSample([0, 1], table=np.zeros((2, 2)), oracle=lambda a, b: 0.0)

    def test_duplicate_ids(self):
        with pytest.raises(ValueError):
            MetricSample([0, 0], table=np.zeros((2, 2)))

    def test_conflicting_table_entries(self):
        with pytest.raises(ValueError):
            MetricSample(["a", "b"], table={("a", "b"): 1.0, ("b", "a"): 2.0})

    def test_unknown_id(self):
        space = MetricSample(["a", "b"], table={("a", "b"): 1.0})
        with pytest.raises(UnknownPointId):
            space.distance("a", "z")

    def test_symmetric_and_zero_diagonal(self):
        space = metric_from_norm(PNorm(3, 2), lattice(3))
        assert space.distance(0, 0) == 0.0
        assert space.distance(2, 7) == space.distance(7, 2)

    def test_json_round_trip(self):
        space = metric_from_norm(PNorm(3, 2), lattice(3), ids=list("abcdefghi"))
        again = MetricSample.from_json(space.to_json())
        assert again.ids == space.ids
        assert np.array_equal(again.distance_matrix(), space.distance_matrix())
        assert np.array_equal(again.coords, space.coords)

    def test_malformed_json(self):
        with pytest.raises(ParseError):
            MetricSample.from_json({"points": [{"id": 0}]})

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            metric_from_norm(PNorm(2, 3), lattice(2))

    def test_concurrent_lookups_agree(self):
        space = metric_from_norm(PNorm(3, 2), lattice(5))
        expected = metric_from_norm(PNorm(3, 2), lattice(5)).distance_matrix()
        out = {}

        def work(k):
            out[k] = space.distance_matrix()

        threads = [threading.Thread(target=work, args=(k,)) for k in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert all(np.array_equal(m, expected) for m in out.values())


class TestAudit:
    def test_normed_lattice_passes(self, any_norm):
        assert audit_metric(metric_from_norm(any_norm, lattice(4))).ok

    def test_triangle_violation_found(self):
        D = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], float)
        audit = audit_metric(MetricSample(["x", "y", "z"], table=D))
        assert not audit.ok
        assert audit.worst_triangle_excess == pytest.approx(3 / 5)
        assert set(audit.worst_triple) == {"x", "y", "z"}


class TestRecords:
    def test_needs_two_stations(self):
        with pytest.raises(InvalidGeodesic):
            GeodesicRecord(((0.0, "a"),))

    def test_parameters_increase(self):
        with pytest.raises(InvalidGeodesic):
            GeodesicRecord(((0.0, "a"), (0.0, "b")))

    def test_reverse_and_json(self):
        rec = GeodesicRecord(((0.0, "a"), (0.25, "m"), (1.0, "b")))
        back = rec.reversed()
        assert back.ids == ["b", "m", "a"]
        assert back.stations[1][0] == pytest.approx(0.75)
        assert GeodesicRecord.from_json(rec.to_json()) == rec

    def test_linear_record_validates(self):
        space = metric_from_norm(PNorm(2, 2), [[0, 0], [0.3, 0.4], [0.6, 0.8]])
        assert validate_geodesic(space, GeodesicRecord(((0, 0), (0.5, 1), (1.0, 2))))

    def test_wrong_parameters_fail(self):
        space = metric_from_norm(PNorm(2, 2), [[0, 0], [0.3, 0.4], [0.6, 0.8]])
        check = validate_geodesic(space, GeodesicRecord(((0, 0), (0.4, 1), (1.0, 2))))
        assert not check and check.worst_violation == pytest.approx(0.1)

    @pytest.mark.parametrize("swap", [False, True])
    def test_parabola_is_linf_geodesic_only(self, swap):
        space, rec = parabola_record(LINF, swap)
        assert validate_geodesic(space, rec)
        space, rec = parabola_record(PNorm(2, 2), swap)
        check = validate_geodesic(space, rec)
        assert not check and check.worst_violation >= 1e-2


class TestLinearBicombing:
    @given(norm_names, vec2, vec2, st.floats(0, 1))
    def test_point_splits_distance(self, name, x, y, s):
        n = NORMS[name]
        L = n(y - x)
        if L < 1e-6:
            return
        p = linear_bicombing_point(n, x, y, s * L)
        assert n(p - x) == pytest.approx(s * L, abs=1e-9 * (1 + L))
        assert n(y - p) == pytest.approx((1 - s) * L, abs=1e-9 * (1 + L))

    def test_endpoints_exact(self):
        x, y = np.array([0.1, 0.2]), np.array([1.0, -3.0])
        L = LINF(y - x)
        assert np.array_equal(linear_bicombing_point(LINF, x, y, 0.0), x)
        assert np.array_equal(linear_bicombing_point(LINF, x, y, L), y)

    def test_errors(self):
        with pytest.raises(CoincidentEndpoints):
            linear_bicombing_point(LINF, [1, 1], [1, 1], 0.0)
        with pytest.raises(ParameterOutOfRange):
            linear_bicombing_point(LINF, [0, 0], [1, 0], 1.5)

    def test_sample_reuses_existing_points(self):
        space, records = linear_geodesic_sample(PNorm(2, 2), lattice(3), n_stations=3)
        assert len(records) == 36
        # the midpoint of (0,0)-(0,1) is the lattice point (0,0.5)
        assert records[1].ids == [0, 1, 2]
        assert all(validate_geodesic(space, r) for r in records)


def _ladder():
    """l^inf points on the segment [(0,0), (2,0)] plus the bump (1,1) and (1.5,0.5)."""
    ids = ["x", "m", "q", "y", "bump", "side"]
    coords = [[0, 0], [1, 0], [1.5, 0], [2, 0], [1, 1], [1.5, 0.5]]
    return metric_from_norm(LINF, coords, ids=ids)


class TestBicombing:
    def test_consistent_linear_table(self):
        space = _ladder()
        table = BicombingTable([
            GeodesicRecord(((0, "x"), (1, "m"), (1.5, "q"), (2, "y"))),
            GeodesicRecord(((0, "m"), (0.5, "q"), (1, "y"))),
            GeodesicRecord(((0, "x"), (1, "m"))),
        ])
        assert validate_bicombing(space, table).ok

    def test_orientation_violation(self):
        space = _ladder()
        table = BicombingTable([
            GeodesicRecord(((0, "x"), (1, "m"), (2, "y"))),
            GeodesicRecord(((0, "y"), (1, "bump"), (2, "x"))),
        ])
        report = validate_bicombing(space, table)
        assert [v.kind for v in report.violations] == ["orientation"]
        assert report.violations[0].magnitude == pytest.approx(1.0)

    def test_subgeodesic_violation(self):
        space = _ladder()
        table = BicombingTable([
            GeodesicRecord(((0, "x"), (1, "m"), (1.5, "q"), (2, "y"))),
            GeodesicRecord(((0, "m"), (0.5, "side"), (1, "y"))),
        ])
        report = validate_bicombing(space, table)
        assert report.of_kind("subgeodesic") and not report.of_kind("orientation")
        assert report.of_kind("subgeodesic")[0].triple == ("x", "m", "y")

    def test_non_geodesic_entry(self):
        space = _ladder()
        table = BicombingTable([GeodesicRecord(((0, "x"), (0.5, "bump"), (2, "y")))])
        assert validate_bicombing(space, table).of_kind("geodesic")

    def test_reverse_lookup(self):
        table = BicombingTable([GeodesicRecord(((0, "x"), (1, "m"), (2, "y")))])
        assert table.get("y", "x").ids == ["y", "m", "x"]
        assert table.get("x", "q") is None
