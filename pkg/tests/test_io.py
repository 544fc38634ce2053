import json
import math
from importlib import resources

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from affinemetric.corpus import corpus_documents, write_corpus
from affinemetric.exceptions import ParseError
from affinemetric.geodesy import MetricSample
from affinemetric.io import (
    dumps,
    load_geodesics,
    load_json,
    load_space,
    polylines_csv,
    table_csv,
    write_atomic,
)

json_scalars = st.one_of(st.none(), st.booleans(), st.integers(-10**6, 10**6),
                         st.floats(allow_nan=False, allow_infinity=False), st.text(max_size=8))
json_values = st.recursive(json_scalars, lambda kids: st.one_of(
    st.lists(kids, max_size=4), st.dictionaries(st.text(max_size=5), kids, max_size=4)),
    max_leaves=20)


class TestDumps:
    @given(json_values)
    def test_round_trip_is_exact(self, obj):
        assert json.loads(dumps(obj)) == obj

    @given(st.dictionaries(st.text(max_size=5), st.integers(), max_size=6))
    def test_key_order_irrelevant(self, d):
        rev = dict(reversed(list(d.items())))
        assert dumps(d) == dumps(rev)

    def test_floats_and_numpy(self):
        text = dumps({"b": np.float64(0.1), "a": np.arange(3), "c": np.bool_(True)})
        assert text.index('"a"') < text.index('"b"')
        assert "0.10000000000000001" in text
        assert json.loads(text) == {"a": [0, 1, 2], "b": 0.1, "c": True}

    def test_non_finite(self):
        assert json.loads(dumps([math.inf, -math.inf])) == ["inf", "-inf"]

    def test_unserialisable(self):
        with pytest.raises(TypeError):
            dumps({"x": object()})


def test_write_atomic(tmp_path):
    target = tmp_path / "sub" / "out.json"
    write_atomic(target, "first\n")
    write_atomic(target, "second\n")
    assert target.read_text() == "second\n"
    assert [p.name for p in target.parent.iterdir()] == ["out.json"]


def test_csv_writers():
    text = polylines_csv([("a", [[0.0, 1.0, 2.0]]), ("b", [[1.0, 0.5, 0.25]])])
    assert text.splitlines() == ["object,t,x1,x2", "a,0,1,2", "b,1,0.5,0.25"]
    assert table_csv(["k", "v"], [[1, 0.1]]).splitlines()[1] == "1,0.10000000000000001"


class TestLoaders:
    def test_bad_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{")
        with pytest.raises(ParseError):
            load_json(p)
        with pytest.raises(ParseError):
            load_json(tmp_path / "missing.json")

    @pytest.mark.parametrize("obj", [{"points": [{"x": 1}], "distances": []},
                                     {"points": [{"id": 0}]},
                                     {"points": [], "distances": [[0, 1]]}])
    def test_bad_space(self, obj):
        with pytest.raises(ParseError):
            load_space(obj)

    def test_bad_geodesic(self):
        with pytest.raises(ParseError):
            load_geodesics({"geodesics": [{"stations": [[0.0]]}]})

    def test_space_round_trip(self):
        space = MetricSample(["a", "b"], coords=[[0, 0], [3, 4]],
                             oracle=lambda a, b: 5.0)
        back = load_space({"space": space.to_json()})
        assert back.distance("a", "b") == 5.0
        assert np.array_equal(back.coords, space.coords)

    def test_single_record(self):
        recs = load_geodesics({"stations": [[0, "a"], [1, "b"]]})
        assert len(recs) == 1 and recs[0].end == "b"


def test_shipped_corpus_matches_generator(tmp_path):
    data = resources.files("affinemetric") / "data"
    docs = corpus_documents()
    assert sorted(docs) == sorted(p.name for p in data.iterdir() if p.name.endswith(".json"))
    for name, doc in docs.items():
        assert (data / name).read_text(encoding="utf-8") == dumps(doc), name
    written = write_corpus(tmp_path)
    for path in written:
        assert path.read_text() == (data / path.name).read_text(encoding="utf-8")
