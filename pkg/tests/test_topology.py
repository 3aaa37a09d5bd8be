import json

import pytest

from chimera_dyn.errors import InputFormatError, TopologyError
from chimera_dyn.topology import (
    ChimeraLayout,
    EdgeClass,
    QubitGraph,
    chimera_coordinates,
    chimera_index,
    classify_edge,
    edge_lengths,
    extract_subgraph,
    generate_chimera,
    load_graph,
    save_graph,
    split_edges,
)

from conftest import CYCLE


def expected_edges(r, c, s):
    return r * c * s * s + (r - 1) * c * s + r * (c - 1) * s


@pytest.mark.parametrize("rows,cols,shore", [(1, 1, 4), (2, 2, 4), (3, 2, 2), (1, 4, 1)])
def test_generate_chimera_counts(rows, cols, shore):
    g = generate_chimera(rows, cols, shore)
    assert len(g.nodes) == rows * cols * 2 * shore
    assert len(g.edges) == expected_edges(rows, cols, shore)


def test_two_by_two_matches_hardware_example(chimera):
    assert len(chimera.nodes) == 32
    assert len(chimera.edges) == 80
    groups = split_edges(chimera)
    assert len(groups[EdgeClass.INTERNAL]) == 64
    assert len(groups[EdgeClass.EXTERNAL]) == 16
    assert classify_edge(chimera, (3, 19)) is EdgeClass.EXTERNAL
    for k in range(4, 8):
        assert classify_edge(chimera, (3, k)) is EdgeClass.INTERNAL


def test_single_cell_is_all_internal():
    g = generate_chimera(1, 1, 4)
    assert len(g.edges) == 16
    assert all(classify_edge(g, e) is EdgeClass.INTERNAL for e in g.edges)
    assert classify_edge(g, (0, 4)) is EdgeClass.INTERNAL


def test_classify_accepts_either_orientation(chimera):
    assert classify_edge(chimera, (19, 3)) is EdgeClass.EXTERNAL
    with pytest.raises(TopologyError):
        classify_edge(chimera, (0, 1))


def test_generate_rejects_non_positive_sizes():
    with pytest.raises(TopologyError):
        generate_chimera(0, 2, 4)


def test_index_round_trip():
    for q in range(2 * 3 * 8):
        i, j, k = chimera_coordinates(q, cols=3, shore=4)
        assert chimera_index(i, j, k, cols=3, shore=4) == q


def test_matches_dwave_networkx_edges():
    dnx = pytest.importorskip("dwave_networkx")
    reference = dnx.chimera_graph(3, 2, 4)
    ours = generate_chimera(3, 2, 4)
    assert {tuple(sorted(e)) for e in reference.edges} == set(ours.edges)


def test_experiment_cycle_alternates_edge_classes(chimera):
    g = extract_subgraph(chimera, CYCLE)
    assert len(g.nodes) == 8 and len(g.edges) == 8
    for n in g.nodes:
        kinds = sorted(classify_edge(g, (n, m)).value for m in g.neighbors(n))
        assert kinds == ["external", "internal"]
    assert sorted(g.neighbors(3)) == [7, 19]


def test_extract_subgraph_identity_and_idempotence(chimera):
    same = extract_subgraph(chimera, chimera.nodes)
    assert same.edges == chimera.edges
    assert dict(same.coords) == dict(chimera.coords)
    once = extract_subgraph(chimera, CYCLE)
    twice = extract_subgraph(once, CYCLE)
    assert once.edges == twice.edges and once.nodes == twice.nodes


def test_extract_single_and_unknown(chimera):
    lone = extract_subgraph(chimera, [3])
    assert lone.nodes == (3,) and lone.edges == ()
    with pytest.raises(TopologyError):
        extract_subgraph(chimera, [3, 999])


def test_edge_length_from_coordinates():
    g = QubitGraph((0, 1), ((0, 1),), {0: (0.0, 0.0), 1: (3.0, 4.0)}, {0: 0, 1: 0})
    assert edge_lengths(g) == {(0, 1): pytest.approx(5.0)}


def test_coincident_endpoints_rejected():
    g = QubitGraph((0, 1), ((0, 1),), {0: (1.0, 1.0), 1: (1.0, 1.0)}, {0: 0, 1: 1})
    with pytest.raises(TopologyError):
        edge_lengths(g)


def test_default_layout_lengths(chimera):
    lengths = edge_lengths(chimera)
    layout = ChimeraLayout()
    internal = {lengths[e] for e in split_edges(chimera)[EdgeClass.INTERNAL]}
    assert internal == {layout.internal_length}
    assert lengths[(3, 19)] == pytest.approx(layout.vertical_length)
    assert lengths[(7, 15)] == pytest.approx(layout.horizontal_length)
    assert layout.vertical_length != layout.horizontal_length


def test_internal_lengths_identical_across_cells():
    g = generate_chimera(3, 3, 4)
    lengths = edge_lengths(g)
    per_cell = {}
    for e in split_edges(g)[EdgeClass.INTERNAL]:
        per_cell.setdefault(g.cells[e[0]], []).append(lengths[e])
    multisets = {tuple(sorted(v)) for v in per_cell.values()}
    assert len(multisets) == 1


def test_graph_validation_errors():
    with pytest.raises(TopologyError):
        QubitGraph((0, 0), (), {0: (0, 0)}, {0: 0})
    with pytest.raises(TopologyError):
        QubitGraph((0,), ((0, 0),), {0: (0, 0)}, {0: 0})
    with pytest.raises(TopologyError):
        QubitGraph((0, 1), ((0, 2),), {0: (0, 0), 1: (1, 0)}, {0: 0, 1: 0})


def test_to_networkx_carries_edge_kind(chimera):
    graph = chimera.to_networkx()
    assert graph.number_of_nodes() == 32
    assert graph.edges[3, 19]["kind"] == "external"
    assert graph.nodes[3]["cell"] == 0


def test_graph_file_round_trip(tmp_path, cycle):
    path = tmp_path / "graph.json"
    save_graph(cycle, path)
    loaded = load_graph(path)
    assert loaded.nodes == cycle.nodes
    assert loaded.edges == cycle.edges
    assert dict(loaded.length_overrides) == pytest.approx(dict(cycle.length_overrides))


def test_load_graph_reports_position(tmp_path):
    path = tmp_path / "graph.json"
    path.write_text('{"nodes": [0, 1],\n "edges": [[0, 1]], "coords": ')
    with pytest.raises(InputFormatError, match="line 2"):
        load_graph(path)

    path.write_text(json.dumps({"nodes": [0], "edges": [[0]], "coords": {}, "cells": {}}))
    with pytest.raises(InputFormatError, match=r"edges\[0\]"):
        load_graph(path)
