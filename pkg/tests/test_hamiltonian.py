import struct

import numpy as np
import pytest

from chimera_dyn.errors import InputFormatError, TopologyError
from chimera_dyn.hamiltonian import (
    MAGIC,
    Scaling,
    build_hamiltonian,
    load_hamiltonian,
    save_hamiltonian,
)
from chimera_dyn.topology import QubitGraph, edge_lengths, extract_subgraph

from conftest import line_graph, random_graph


def test_constant_weights(constant_h, cycle):
    assert constant_h.size == 8
    assert set(constant_h.couplings().values()) == {1.0}
    assert len(constant_h.couplings()) == len(cycle.edges)


def test_dipole_ratio_matches_calibration(dipole_h):
    couplings = dipole_h.couplings()
    assert couplings[(3, 7)] == pytest.approx(1.0)
    assert couplings[(3, 19)] / couplings[(3, 7)] == pytest.approx(0.11, abs=1e-6)
    assert dipole_h.j_min() == pytest.approx(0.11)


def test_matrix_exactly_symmetric_with_zero_diagonal(dipole_h):
    m = dipole_h.matrix
    assert np.array_equal(m, m.T)
    assert not np.any(np.diag(m))
    assert not m.flags.writeable


def test_dipole_bounds_and_monotonicity():
    g = random_graph(np.random.default_rng(5), 12)
    h = build_hamiltonian(g, Scaling.dipole(), j0=0.5)
    lengths = edge_lengths(g)
    weights = h.couplings()
    assert all(0 < w <= 0.5 for w in weights.values())
    shortest = min(lengths.values())
    for e, w in weights.items():
        assert (w == pytest.approx(0.5)) == (lengths[e] == shortest)
    ordered = sorted(weights, key=lambda e: lengths[e])
    for shorter, longer in zip(ordered, ordered[1:]):
        if lengths[longer] > lengths[shorter]:
            assert weights[longer] < weights[shorter]


def test_constant_equals_dipole_for_equal_lengths():
    g = line_graph([0.0, 1.0, 2.0, 3.0])
    a = build_hamiltonian(g, Scaling.constant())
    b = build_hamiltonian(g, Scaling.dipole())
    assert np.array_equal(a.matrix, b.matrix)


def test_single_edge_normalises_to_j0():
    g = line_graph([0.0, 2.0])
    h = build_hamiltonian(g, Scaling.dipole(), j0=0.7)
    assert h.couplings() == {(0, 1): pytest.approx(0.7)}


def test_inverse_power_family():
    g = line_graph([0.0, 1.0, 3.0])
    for name, expected in (("coulomb", 0.5), ("inverse-square", 0.25), ("power:4", 0.0625)):
        h = build_hamiltonian(g, Scaling.parse(name))
        assert h.couplings()[(1, 2)] == pytest.approx(expected)
        assert h.scaling.label == name


def test_scaling_parse_rejects_unknown():
    with pytest.raises(ValueError):
        Scaling.parse("yukawa")
    with pytest.raises(ValueError):
        Scaling.parse("power:-1")


def test_empty_graph_and_bad_j0():
    with pytest.raises(TopologyError):
        build_hamiltonian(QubitGraph((), (), {}, {}))
    with pytest.raises(ValueError):
        build_hamiltonian(line_graph([0.0, 1.0]), j0=0.0)


def test_edgeless_hamiltonian_has_no_window(chimera):
    h = build_hamiltonian(extract_subgraph(chimera, [3]))
    assert h.size == 1
    with pytest.raises(TopologyError):
        h.j_min()


def test_remap_is_sorted_bijection(chimera):
    h = build_hamiltonian(extract_subgraph(chimera, [19, 3, 7]))
    assert [h.remap_index(n) for n in (3, 7, 19)] == [0, 1, 2]
    assert all(h.native_index(h.remap_index(n)) == n for n in (3, 7, 19))
    with pytest.raises(TopologyError):
        h.remap_index(4)
    with pytest.raises(TopologyError):
        h.native_index(3)


def test_binary_round_trip(tmp_path, dipole_h):
    path = tmp_path / "H.bin"
    save_hamiltonian(dipole_h, path)
    payload = path.read_bytes()
    assert payload.startswith(MAGIC)
    assert struct.unpack_from("<I", payload, len(MAGIC))[0] == 8
    loaded = load_hamiltonian(path)
    assert np.array_equal(loaded.matrix, dipole_h.matrix)
    assert loaded.nodes == dipole_h.nodes


def test_binary_without_index_table_uses_identity(tmp_path):
    matrix = np.array([[0.0, 1.0], [1.0, 0.0]])
    path = tmp_path / "H.bin"
    path.write_bytes(MAGIC + struct.pack("<I", 2) + matrix.astype("<f8").tobytes())
    h = load_hamiltonian(path)
    assert h.nodes == (0, 1)


@pytest.mark.parametrize(
    "payload,match",
    [
        (b"NOPE!" + b"\0" * 8, "bad magic"),
        (MAGIC + struct.pack("<I", 2) + b"\0" * 8, "does not match"),
        (MAGIC + struct.pack("<I", 2) + np.array([0.0, 1.0, 2.0, 0.0]).astype("<f8").tobytes(), "symmetric"),
    ],
)
def test_binary_rejects_corrupt_files(tmp_path, payload, match):
    path = tmp_path / "H.bin"
    path.write_bytes(payload)
    with pytest.raises(InputFormatError, match=match):
        load_hamiltonian(path)
