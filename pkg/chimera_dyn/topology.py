"""Chimera qubit graphs: generation, edge classes and subnetworks.

A Chimera graph is a ``rows x cols`` grid of unit cells.  Each cell holds
``2 * shore`` qubits split into a left shore (``k < shore``) and a right shore
(``k >= shore``) joined as a complete bipartite graph.  Left-shore qubits are
coupled to the same qubit of the cell below, right-shore qubits to the same
qubit of the cell to the right.

Native qubit indices are row-major::

    index = (i * cols + j) * 2 * shore + k

The drawing used for coordinates is a schematic, so connection lengths are
stored explicitly in ``length_overrides`` and take precedence over the
Euclidean distance between coordinates.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple, Union

import networkx as nx

from .config import SETTINGS, Settings
from .errors import InputFormatError, TopologyError

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]
Coord = Tuple[float, float]


class EdgeClass(str, Enum):
    """Position of a coupler relative to the unit cells."""

    INTERNAL = "internal"
    EXTERNAL = "external"


def edge_key(a: int, b: int) -> Edge:
    """Return the canonical ``(min, max)`` form of an undirected edge."""
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class QubitGraph:
    """Immutable qubit connectivity graph with schematic geometry.

    Attributes:
        nodes: Native qubit indices in insertion order.
        edges: Undirected edges stored as ``(min, max)`` pairs.
        coords: Native index -> ``(x, y)`` position in schematic units.
        cells: Native index -> unit-cell index.
        length_overrides: Edge -> connection length, used instead of the
            coordinate distance when present.
    """

    nodes: Tuple[int, ...]
    edges: Tuple[Edge, ...]
    coords: Mapping[int, Coord]
    cells: Mapping[int, int]
    length_overrides: Mapping[Edge, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        nodes = tuple(int(n) for n in self.nodes)
        if len(set(nodes)) != len(nodes):
            raise TopologyError("duplicate nodes in graph")
        if any(n < 0 for n in nodes):
            raise TopologyError("native indices must be non-negative")
        node_set = set(nodes)

        edges: List[Edge] = []
        seen = set()
        for a, b in self.edges:
            e = edge_key(int(a), int(b))
            if e[0] == e[1]:
                raise TopologyError(f"self-loop on node {e[0]}")
            if e in seen:
                raise TopologyError(f"duplicate edge {e}")
            if e[0] not in node_set or e[1] not in node_set:
                raise TopologyError(f"edge {e} references an unknown node")
            seen.add(e)
            edges.append(e)

        coords = {int(n): (float(x), float(y)) for n, (x, y) in self.coords.items()}
        cells = {int(n): int(c) for n, c in self.cells.items()}
        missing = [n for n in nodes if n not in coords or n not in cells]
        if missing:
            raise TopologyError(f"nodes without coordinates or cell: {missing[:5]}")

        overrides: Dict[Edge, float] = {}
        for (a, b), length in self.length_overrides.items():
            e = edge_key(int(a), int(b))
            if e in seen:
                overrides[e] = float(length)

        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(
            self, "coords", MappingProxyType({n: coords[n] for n in nodes})
        )
        object.__setattr__(self, "cells", MappingProxyType({n: cells[n] for n in nodes}))
        object.__setattr__(self, "length_overrides", MappingProxyType(overrides))

    def __len__(self) -> int:
        return len(self.nodes)

    def has_edge(self, a: int, b: int) -> bool:
        return edge_key(a, b) in self._edge_set

    @property
    def _edge_set(self) -> frozenset:
        cached = self.__dict__.get("_edge_cache")
        if cached is None:
            cached = frozenset(self.edges)
            object.__setattr__(self, "_edge_cache", cached)
        return cached

    def neighbors(self, node: int) -> List[int]:
        """Return neighbours of ``node`` in edge order."""
        adjacency = self.__dict__.get("_adjacency")
        if adjacency is None:
            adjacency = {n: [] for n in self.nodes}
            for a, b in self.edges:
                adjacency[a].append(b)
                adjacency[b].append(a)
            object.__setattr__(self, "_adjacency", adjacency)
        if node not in adjacency:
            raise TopologyError(f"unknown node {node}")
        return list(adjacency[node])

    def to_networkx(self) -> nx.Graph:
        """Return a :mod:`networkx` view with ``pos``, ``cell`` and ``kind`` data."""
        graph = nx.Graph()
        for n in self.nodes:
            graph.add_node(n, pos=self.coords[n], cell=self.cells[n])
        for a, b in self.edges:
            graph.add_edge(a, b, kind=classify_edge(self, (a, b)).value)
        return graph


@dataclass(frozen=True)
class ChimeraLayout:
    """Geometry of the schematic Chimera drawing."""

    internal_length: float = 1.0
    vertical_length: float = (1.0 / 0.11) ** (1.0 / 3.0)
    horizontal_length: float = 1.8
    vertical_spacing: float = 1.0
    shore_spacing: float = 1.0
    cell_gap: float = 1.0

    @classmethod
    def from_settings(cls, settings: Settings = SETTINGS) -> "ChimeraLayout":
        return cls(
            internal_length=settings.internal_length,
            vertical_length=settings.vertical_length,
            horizontal_length=settings.horizontal_length,
            vertical_spacing=settings.vertical_spacing,
            shore_spacing=settings.shore_spacing,
            cell_gap=settings.cell_gap,
        )


def chimera_index(i: int, j: int, k: int, cols: int, shore: int) -> int:
    """Linear native index of qubit ``k`` in cell ``(i, j)``."""
    return (i * cols + j) * 2 * shore + k


def chimera_coordinates(index: int, cols: int, shore: int) -> Tuple[int, int, int]:
    """Inverse of :func:`chimera_index`: ``(row, col, k)`` of a native index."""
    cell, k = divmod(index, 2 * shore)
    i, j = divmod(cell, cols)
    return i, j, k


def generate_chimera(
    rows: int,
    cols: int,
    shore: int,
    layout: Optional[ChimeraLayout] = None,
) -> QubitGraph:
    """Build the ``rows x cols`` Chimera graph with ``2 * shore`` qubits per cell.

    Args:
        rows: Number of unit-cell rows.
        cols: Number of unit-cell columns.
        shore: Qubits per shore; 4 gives the 8-qubit cell of the 2000Q chip.
        layout: Coordinate and length calibration, defaults to the settings.

    Returns:
        A :class:`QubitGraph` with every edge carrying a length override.
    """
    if rows < 1 or cols < 1 or shore < 1:
        raise TopologyError(
            f"rows, cols and shore must be positive, got {rows}, {cols}, {shore}"
        )
    layout = layout or ChimeraLayout.from_settings()
    cell_width = layout.shore_spacing + layout.cell_gap
    cell_height = (shore - 1) * layout.vertical_spacing + layout.cell_gap

    nodes: List[int] = []
    coords: Dict[int, Coord] = {}
    cells: Dict[int, int] = {}
    edges: List[Edge] = []
    lengths: Dict[Edge, float] = {}

    for i in range(rows):
        for j in range(cols):
            cell = i * cols + j
            ox, oy = j * cell_width, -i * cell_height
            for k in range(2 * shore):
                q = chimera_index(i, j, k, cols, shore)
                x = ox if k < shore else ox + layout.shore_spacing
                y = oy - (k % shore) * layout.vertical_spacing
                nodes.append(q)
                coords[q] = (x, y)
                cells[q] = cell
            for k in range(shore):
                for m in range(shore, 2 * shore):
                    e = (chimera_index(i, j, k, cols, shore), chimera_index(i, j, m, cols, shore))
                    edges.append(e)
                    lengths[e] = layout.internal_length

    for i in range(rows):
        for j in range(cols):
            if i + 1 < rows:
                for k in range(shore):
                    e = (chimera_index(i, j, k, cols, shore), chimera_index(i + 1, j, k, cols, shore))
                    edges.append(e)
                    lengths[e] = layout.vertical_length
            if j + 1 < cols:
                for k in range(shore, 2 * shore):
                    e = (chimera_index(i, j, k, cols, shore), chimera_index(i, j + 1, k, cols, shore))
                    edges.append(e)
                    lengths[e] = layout.horizontal_length

    graph = QubitGraph(tuple(nodes), tuple(edges), coords, cells, lengths)
    logger.info(
        "Generated Chimera(%d, %d, %d): %d nodes, %d edges",
        rows, cols, shore, len(graph.nodes), len(graph.edges),
    )
    return graph


def classify_edge(g: QubitGraph, edge: Iterable[int]) -> EdgeClass:
    """Return whether ``edge`` lies inside one unit cell or joins two cells."""
    a, b = tuple(edge)
    e = edge_key(a, b)
    if not g.has_edge(*e):
        raise TopologyError(f"edge {e} is not in the graph")
    return EdgeClass.INTERNAL if g.cells[e[0]] == g.cells[e[1]] else EdgeClass.EXTERNAL


def split_edges(g: QubitGraph) -> Dict[EdgeClass, List[Edge]]:
    """Group the edges of ``g`` by :class:`EdgeClass`, preserving edge order."""
    groups: Dict[EdgeClass, List[Edge]] = {EdgeClass.INTERNAL: [], EdgeClass.EXTERNAL: []}
    for e in g.edges:
        groups[classify_edge(g, e)].append(e)
    return groups


def extract_subgraph(g: QubitGraph, keep: Iterable[int]) -> QubitGraph:
    """Return the subgraph induced by ``keep``, preserving geometry and cells."""
    keep_set = set(int(n) for n in keep)
    unknown = keep_set.difference(g.nodes)
    if unknown:
        raise TopologyError(f"unknown nodes: {sorted(unknown)}")
    nodes = tuple(n for n in g.nodes if n in keep_set)
    edges = tuple(e for e in g.edges if e[0] in keep_set and e[1] in keep_set)
    return QubitGraph(
        nodes,
        edges,
        {n: g.coords[n] for n in nodes},
        {n: g.cells[n] for n in nodes},
        {e: g.length_overrides[e] for e in edges if e in g.length_overrides},
    )


def edge_lengths(g: QubitGraph) -> Dict[Edge, float]:
    """Length of every edge: the stored override, else the coordinate distance."""
    lengths: Dict[Edge, float] = {}
    for e in g.edges:
        if e in g.length_overrides:
            length = g.length_overrides[e]
        else:
            (x0, y0), (x1, y1) = g.coords[e[0]], g.coords[e[1]]
            length = math.hypot(x1 - x0, y1 - y0)
        if not length > 0:
            raise TopologyError(f"edge {e} has non-positive length {length}")
        lengths[e] = length
    return lengths


def experiment_graph(settings: Settings = SETTINGS) -> QubitGraph:
    """The 8-node cycle used for the coupling-scaling experiment."""
    full = generate_chimera(
        settings.experiment_rows,
        settings.experiment_cols,
        settings.experiment_shore,
        ChimeraLayout.from_settings(settings),
    )
    return extract_subgraph(full, settings.experiment_nodes)


# ---------------------------------------------------------------------------
# Serialization

def graph_to_dict(g: QubitGraph) -> Dict[str, Any]:
    return {
        "nodes": list(g.nodes),
        "edges": [list(e) for e in g.edges],
        "coords": {str(n): list(g.coords[n]) for n in g.nodes},
        "cells": {str(n): g.cells[n] for n in g.nodes},
        "length_overrides": {f"{a}-{b}": v for (a, b), v in g.length_overrides.items()},
    }


def graph_from_dict(data: Mapping[str, Any]) -> QubitGraph:
    """Build a graph from its JSON object form, reporting the failing field."""
    for key in ("nodes", "edges", "coords", "cells"):
        if key not in data:
            raise InputFormatError(f"missing field {key!r}", position="graph")
    try:
        nodes = [int(n) for n in data["nodes"]]
    except (TypeError, ValueError) as exc:
        raise InputFormatError(f"invalid node list: {exc}", position="nodes") from exc

    edges: List[Edge] = []
    for idx, item in enumerate(data["edges"]):
        try:
            a, b = item
            edges.append((int(a), int(b)))
        except (TypeError, ValueError) as exc:
            raise InputFormatError(f"invalid edge {item!r}", position=f"edges[{idx}]") from exc

    coords: Dict[int, Coord] = {}
    for key, value in data["coords"].items():
        try:
            x, y = value
            coords[int(key)] = (float(x), float(y))
        except (TypeError, ValueError) as exc:
            raise InputFormatError(f"invalid coordinate {value!r}", position=f"coords[{key}]") from exc

    cells: Dict[int, int] = {}
    for key, value in data["cells"].items():
        try:
            cells[int(key)] = int(value)
        except (TypeError, ValueError) as exc:
            raise InputFormatError(f"invalid cell {value!r}", position=f"cells[{key}]") from exc

    overrides: Dict[Edge, float] = {}
    for key, value in data.get("length_overrides", {}).items():
        try:
            a, b = str(key).split("-")
            overrides[edge_key(int(a), int(b))] = float(value)
        except (TypeError, ValueError) as exc:
            raise InputFormatError(
                f"invalid length override {key!r}: {value!r}", position="length_overrides"
            ) from exc

    try:
        return QubitGraph(tuple(nodes), tuple(edges), coords, cells, overrides)
    except TopologyError as exc:
        raise InputFormatError(str(exc), position="graph") from exc


def save_graph(g: QubitGraph, path: Union[str, Path]) -> None:
    """Write ``g`` as JSON."""
    with open(path, "w", encoding="utf-8") as f:
        json.dump(graph_to_dict(g), f, indent=2)
    logger.info("Saved graph with %d nodes to %s", len(g.nodes), path)


def load_graph(path: Union[str, Path]) -> QubitGraph:
    """Read a graph written by :func:`save_graph`."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as exc:
        raise InputFormatError(exc.msg, position=f"line {exc.lineno}") from exc
    if not isinstance(data, dict):
        raise InputFormatError("graph file must hold a JSON object", position="line 1")
    return graph_from_dict(data)
