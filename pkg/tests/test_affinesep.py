import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from affinemetric.affinesep import (
    AffineConstraintSystem,
    build_constraints,
    embedding_affinity_defect,
    evaluation_embedding,
    separate_all,
    separate_pair,
    triple_row,
    uniqueness_audit,
)
from affinemetric.corpus import l2_grid_instance, linf_parabola_instance, parabola_record
from affinemetric.exceptions import (
    InvalidGeodesic,
    NotSeparated,
    SamePoint,
    UnknownPointId,
)
from affinemetric.geodesy import GeodesicRecord, linear_geodesic_sample, metric_from_norm
from affinemetric.normcore import PNorm


@pytest.fixture(scope="module")
def l2_grid():
    return l2_grid_instance()


def collinear_space():
    space = metric_from_norm(PNorm(2, 2), [[0, 0], [1, 0], [3, 0], [0, 1]], ids=list("abcd"))
    recs = [GeodesicRecord(((0, "a"), (1, "b"), (3, "c")))]
    return space, recs


class TestConstraints:
    def test_triple_row_weights(self):
        row = triple_row((0.0, "a"), (1.0, "b"), (3.0, "c"))
        assert row == {"a": 2.0, "b": -3.0, "c": 1.0}
        # an affine function of the parameter satisfies it
        f = {"a": 5.0, "b": 5.0 + 2.0, "c": 5.0 + 6.0}
        assert sum(c * f[p] for p, c in row.items()) == 0.0

    def test_repeated_station_collapses(self):
        assert triple_row((0.0, "a"), (1.0, "b"), (2.0, "a")) == {"a": 2.0, "b": -2.0}

    def test_build_validates_records(self):
        space, _ = collinear_space()
        with pytest.raises(InvalidGeodesic):
            build_constraints(space, [GeodesicRecord(((0, "a"), (1.5, "b"), (3, "c")))])

    def test_unknown_station(self):
        space, _ = collinear_space()
        with pytest.raises(UnknownPointId):
            build_constraints(space, [GeodesicRecord(((0, "a"), (1, "zz")))], validate=False)

    def test_residual(self):
        space, recs = collinear_space()
        system = build_constraints(space, recs)
        assert system.residual({"a": 0, "b": 1, "c": 3, "d": 7}) == 0.0
        assert system.residual({"a": 0, "b": 2, "c": 3, "d": 7}) == pytest.approx(3.0)

    def test_feasible_basis_is_orthonormal_null_space(self, l2_grid):
        space, recs, _ = l2_grid
        system = build_constraints(space, recs)
        N = system.feasible_basis()
        assert N.shape[1] == 3
        assert np.allclose(N.T @ N, np.eye(3))
        assert np.max(np.abs(system.matrix() @ N)) < 1e-12


class TestSeparation:
    def test_separated_witness_is_affine_and_bounded(self):
        space, recs = collinear_space()
        system = build_constraints(space, recs)
        res = separate_pair(system, "a", "c")
        assert res.separated and res.optimum == pytest.approx(2.0)
        f = res.witness.values
        assert all(-1 <= x <= 1 for x in f.values())
        assert system.residual(f) < 1e-12

    def test_same_point(self):
        system = AffineConstraintSystem(["a", "b"])
        with pytest.raises(SamePoint):
            separate_pair(system, "a", "a")

    def test_unknown_point(self):
        system = AffineConstraintSystem(["a", "b"])
        with pytest.raises(UnknownPointId):
            separate_pair(system, "a", "q")

    def test_unconstrained_points_separate(self):
        system = AffineConstraintSystem(["a", "b", "c"])
        assert separate_all(system).all_separated

    def test_midpoints_of_two_records_collapse(self):
        # two geodesics with common endpoints force equal values at their midpoints
        space = metric_from_norm(PNorm("inf", 2), [[0, 0], [2, 0], [1, 0], [1, 1]],
                                 ids=["x", "y", "m1", "m2"])
        recs = [GeodesicRecord(((0, "x"), (1, "m1"), (2, "y"))),
                GeodesicRecord(((0, "x"), (1, "m2"), (2, "y")))]
        system = build_constraints(space, recs)
        res = separate_pair(system, "m1", "m2")
        assert not res.separated and res.optimum <= 1e-9
        assert uniqueness_audit(space, system, recs) == []

    def test_grid_all_pairs(self, l2_grid):
        space, recs, grid = l2_grid
        system = build_constraints(space, recs)
        pairs = [(a, b) for i, a in enumerate(grid) for b in grid[i + 1:]]
        report = separate_all(system, pairs)
        assert len(report.pairs) == 300 and report.all_separated
        assert min(r.optimum for r in report.separated) > 0.1
        js = report.to_json()
        assert js["pairs_tested"] == 300 and js["unseparated"] == []

    def test_linf_parabolas_force_constants(self):
        space, recs = linf_parabola_instance()
        system = build_constraints(space, recs)
        assert system.feasible_basis().shape[1] == 1
        for mode in ("values", "ambient"):
            for pair in (("0,0", "8,8"), ("3,1", "2,7")):
                assert separate_pair(system, *pair, mode=mode).optimum <= 1e-9

    def test_ambient_mode_matches_values_on_grid(self, l2_grid):
        space, recs, _ = l2_grid
        system = build_constraints(space, recs)
        a = separate_pair(system, 0, 24, mode="values").optimum
        b = separate_pair(system, 0, 24, mode="ambient").optimum
        assert a == pytest.approx(b, abs=1e-9)

    def test_unknown_mode(self, l2_grid):
        space, recs, _ = l2_grid
        with pytest.raises(ValueError):
            separate_pair(build_constraints(space, recs), 0, 1, mode="magic")


class TestEmbedding:
    def test_grid_embeds_in_the_plane(self, l2_grid):
        space, recs, grid = l2_grid
        system = build_constraints(space, recs)
        pairs = [(a, b) for i, a in enumerate(grid) for b in grid[i + 1:]]
        emb = evaluation_embedding(system, pairs)
        assert emb.k == 2
        assert embedding_affinity_defect(emb, recs) < 1e-9
        # the embedding is an affine image of the coordinates
        E1 = np.column_stack([emb.coordinates, np.ones(len(emb.ids))])
        sol, *_ = np.linalg.lstsq(E1, space.coords, rcond=None)
        assert np.max(np.abs(E1 @ sol - space.coords)) < 1e-9

    def test_unseparated_pairs_raise(self):
        space, recs = linf_parabola_instance()
        system = build_constraints(space, recs)
        with pytest.raises(NotSeparated) as info:
            evaluation_embedding(system, [("0,0", "1,0"), ("0,0", "0,1")])
        assert len(info.value.pairs) == 2

    def test_no_pairs(self):
        system = AffineConstraintSystem(["a", "b"])
        assert evaluation_embedding(system, []).k == 0

    @given(st.integers(3, 4), st.sampled_from([1, 2, 3, "inf"]))
    def test_linear_samples_embed_affinely(self, n, p):
        from affinemetric.corpus import lattice

        space, recs = linear_geodesic_sample(PNorm(p, 2), lattice(n), n_stations=3)
        system = build_constraints(space, recs)
        emb = evaluation_embedding(system, [(0, n * n - 1), (0, n - 1), (0, 1)])
        assert 1 <= emb.k <= 2
        assert system.feasible_basis().shape[1] == 3
        assert embedding_affinity_defect(emb, recs) < 1e-9


def test_parabola_records_need_linf():
    space, rec = parabola_record(PNorm(2, 2))
    with pytest.raises(InvalidGeodesic):
        build_constraints(space, [rec])
