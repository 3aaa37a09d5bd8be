import io
import json

import pytest

from chimera_dyn.analysis.geary import geary_c
from chimera_dyn.errors import InputFormatError, TopologyError
from chimera_dyn.ingest import (
    AttributeSet,
    attributes_to_bytes,
    load_attributes,
    save_attributes,
    summarize,
    synthesize_attributes,
)
from chimera_dyn.topology import QubitGraph, generate_chimera


def dataset(records):
    return json.dumps({"qubits": records}).encode("utf-8")


def test_load_from_bytes_path_and_stream(tmp_path, chimera):
    payload = dataset({"0": {"beta": 1.5, "b": -0.1}, "3": {"beta": 2.0, "b": 0.2}})
    path = tmp_path / "data.json"
    path.write_bytes(payload)
    for source in (payload, path, str(path), io.BytesIO(payload)):
        attrs = load_attributes(source, chimera)
        assert attrs.names == ["beta", "b"]
        assert dict(attrs.values("beta")) == {0: 1.5, 3: 2.0}


def test_empty_payload_gives_empty_set(chimera):
    attrs = load_attributes(b"  \n", chimera)
    assert not attrs
    assert attrs.names == []


def test_missing_qubits_are_dead(chimera, caplog):
    attrs = load_attributes(dataset({"1": {"eta": 0.1}, "2": {"eta": 0.3}}), chimera)
    assert attrs.qubits == [1, 2]
    assert "30 of 32 qubits" in caplog.text
    report = summarize(attrs, chimera)
    assert report["live"] == 2 and len(report["dead"]) == 30


def test_unknown_attributes_carried_through(chimera):
    attrs = load_attributes(dataset({"5": {"gamma": 4.0, "beta": 1.0}}), chimera)
    assert "gamma" in attrs.names
    assert attrs.values("gamma")[5] == 4.0


def test_malformed_json_names_line(chimera):
    with pytest.raises(InputFormatError, match="line 3"):
        load_attributes(b'{\n"qubits": {\n"0": {"beta": }}}', chimera)


@pytest.mark.parametrize(
    "records,match",
    [
        ({"0": {"beta": "high"}}, r"record 0 \(qubit '0'\)\.beta"),
        ({"0": {"beta": 1.0}, "x": {"beta": 1.0}}, r"record 1 \(qubit 'x'\)"),
        ({"0": {"beta": True}}, "expected a number"),
        ({"0": [1.0]}, "must be an object"),
        ({"999": {"beta": 1.0}}, "not in the graph"),
    ],
)
def test_bad_records_name_the_record(chimera, records, match):
    with pytest.raises(InputFormatError, match=match):
        load_attributes(dataset(records), chimera)


def test_non_finite_values_rejected(chimera):
    with pytest.raises(InputFormatError, match="non-finite"):
        load_attributes(b'{"qubits": {"0": {"beta": NaN}}}', chimera)


def test_top_level_shape_checked(chimera):
    with pytest.raises(InputFormatError):
        load_attributes(b"[1, 2, 3]", chimera)


def test_save_then_load_is_bit_exact(chimera):
    attrs = synthesize_attributes(chimera, "iid", seed=7)
    again = load_attributes(attributes_to_bytes(attrs), chimera)
    for name in attrs.names:
        assert dict(again.values(name)) == dict(attrs.values(name))


def test_save_attributes_to_path(tmp_path, chimera):
    attrs = AttributeSet({"beta": {0: 1.0, 1: 2.0}})
    path = tmp_path / "out.json"
    save_attributes(attrs, path)
    assert json.loads(path.read_text())["qubits"]["1"] == {"beta": 2.0}


def test_synthesize_is_reproducible(chimera):
    first = synthesize_attributes(chimera, "smooth", seed=11)
    second = synthesize_attributes(chimera, "smooth", seed=11)
    other = synthesize_attributes(chimera, "smooth", seed=12)
    assert attributes_to_bytes(first) == attributes_to_bytes(second)
    assert attributes_to_bytes(first) != attributes_to_bytes(other)
    assert first.values("beta") != first.values("b")


def test_synthesize_anti_alternates(cycle):
    attrs = synthesize_attributes(cycle, "anti", seed=3, names=("beta",))
    values = attrs.values("beta")
    assert set(values.values()) == {-1.0, 1.0}
    for a, b in cycle.edges:
        assert values[a] == -values[b]
    assert geary_c(values, cycle.edges) == pytest.approx(1.75)


def test_synthesize_smooth_is_positively_correlated():
    g = generate_chimera(8, 8, 4)
    for seed in range(5):
        values = synthesize_attributes(g, "smooth", seed=seed, names=("beta",)).values("beta")
        assert geary_c(values, g.edges) < 0.9


def test_synthesize_rejects_unknown_model_and_empty_graph(chimera):
    with pytest.raises(ValueError):
        synthesize_attributes(chimera, "clustered", seed=0)
    with pytest.raises(TopologyError):
        synthesize_attributes(QubitGraph((), (), {}, {}), "iid", seed=0)
