"""Per-qubit attribute datasets.

Datasets are JSON objects keyed by native qubit index::

    {"qubits": {"0": {"beta": 1.2, "b": -0.01, "lambda": 0.9, "eta": 0.02}, ...}}

Qubits missing from ``qubits`` are dead: they are excluded from every
statistic together with the couplers touching them.  Attribute names other
than the four QASA parameters are carried through unchanged.
"""

import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import IO, Any, Dict, List, Mapping, Sequence, Union

import networkx as nx
import numpy as np

from .errors import InputFormatError, TopologyError
from .topology import QubitGraph

logger = logging.getLogger(__name__)

KNOWN_ATTRIBUTES = ("beta", "b", "lambda", "eta")
SYNTHETIC_MODELS = ("iid", "smooth", "anti")

# Rounds of lazy neighbour averaging applied by the "smooth" model
SMOOTHING_ROUNDS = 4
SMOOTH_JITTER = 0.01

Source = Union[str, Path, IO[bytes], bytes]


@dataclass(frozen=True)
class AttributeSet:
    """Named per-qubit scalar attributes keyed by native index."""

    attributes: Mapping[str, Mapping[int, float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        frozen = {
            name: MappingProxyType({int(q): float(v) for q, v in sorted(values.items())})
            for name, values in self.attributes.items()
        }
        object.__setattr__(self, "attributes", MappingProxyType(frozen))

    @property
    def names(self) -> List[str]:
        return list(self.attributes)

    @property
    def qubits(self) -> List[int]:
        """Every qubit carrying at least one attribute, ascending."""
        seen = set()
        for values in self.attributes.values():
            seen.update(values)
        return sorted(seen)

    def values(self, name: str) -> Mapping[int, float]:
        if name not in self.attributes:
            raise KeyError(f"unknown attribute {name!r}")
        return self.attributes[name]

    def __bool__(self) -> bool:
        return any(len(v) for v in self.attributes.values())


def _read_bytes(source: Source) -> bytes:
    if isinstance(source, bytes):
        return source
    if isinstance(source, (str, Path)):
        return Path(source).read_bytes()
    return source.read()


def _parse_value(raw: Any, position: str) -> float:
    # bool is an int subclass but never a valid measurement
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise InputFormatError(f"expected a number, got {raw!r}", position=position)
    value = float(raw)
    if not math.isfinite(value):
        raise InputFormatError(f"non-finite value {raw!r}", position=position)
    return value


def load_attributes(source: Source, g: QubitGraph) -> AttributeSet:
    """Parse a dataset and check it against the hardware graph.

    Args:
        source: Path, raw bytes or a binary stream with the JSON document.
        g: Graph whose node set the qubit indices must belong to.

    Returns:
        The parsed :class:`AttributeSet`; an empty document yields an empty set.

    Raises:
        InputFormatError: On malformed JSON or records, naming the line or
            record, and on qubits that are not in ``g``.
    """
    payload = _read_bytes(source)
    if not payload.strip():
        return AttributeSet({})
    try:
        data = json.loads(payload.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise InputFormatError("dataset is not valid UTF-8", position=f"byte {exc.start}") from exc
    except json.JSONDecodeError as exc:
        raise InputFormatError(exc.msg, position=f"line {exc.lineno}") from exc

    if not isinstance(data, dict) or not isinstance(data.get("qubits"), dict):
        raise InputFormatError("expected an object with a 'qubits' mapping", position="line 1")

    node_set = set(g.nodes)
    attributes: Dict[str, Dict[int, float]] = {}
    for idx, (key, record) in enumerate(data["qubits"].items()):
        position = f"record {idx} (qubit {key!r})"
        try:
            qubit = int(key)
        except ValueError as exc:
            raise InputFormatError("qubit key is not an integer", position=position) from exc
        if not isinstance(record, dict):
            raise InputFormatError("record must be an object", position=position)
        if qubit not in node_set:
            raise InputFormatError(f"qubit {qubit} is not in the graph", position=position)
        for name, raw in record.items():
            attributes.setdefault(str(name), {})[qubit] = _parse_value(
                raw, f"{position}.{name}"
            )

    attrs = AttributeSet(attributes)
    dead = len(node_set) - len(attrs.qubits)
    if dead:
        logger.warning("%d of %d qubits have no data and are treated as dead", dead, len(node_set))
    return attrs


def save_attributes(attrs: AttributeSet, sink: Union[str, Path, IO[bytes]]) -> None:
    """Write ``attrs`` in the format read by :func:`load_attributes`."""
    qubits: Dict[str, Dict[str, float]] = {}
    for q in attrs.qubits:
        qubits[str(q)] = {
            name: values[q] for name, values in attrs.attributes.items() if q in values
        }
    payload = json.dumps({"qubits": qubits}, indent=2).encode("utf-8")
    if isinstance(sink, (str, Path)):
        Path(sink).write_bytes(payload)
    else:
        sink.write(payload)


def summarize(attrs: AttributeSet, g: QubitGraph) -> Dict[str, Any]:
    """Validation summary reported by ``chimera-dyn ingest``."""
    live = attrs.qubits
    live_set = set(live)
    return {
        "nodes": len(g.nodes),
        "live": len(live),
        "dead": [n for n in g.nodes if n not in live_set],
        "attributes": {name: len(values) for name, values in attrs.attributes.items()},
    }


# ---------------------------------------------------------------------------
# Synthetic datasets

def _lazy_smooth(g: QubitGraph, x: np.ndarray, rounds: int) -> np.ndarray:
    index = {n: i for i, n in enumerate(g.nodes)}
    neighbours = [np.array([index[m] for m in g.neighbors(n)], dtype=int) for n in g.nodes]
    for _ in range(rounds):
        nxt = x.copy()
        for i, nb in enumerate(neighbours):
            if nb.size:
                nxt[i] = 0.5 * (x[i] + x[nb].mean())
        x = nxt
    return x


def _alternating_signs(g: QubitGraph) -> np.ndarray:
    """+1/-1 by BFS depth parity, a proper 2-colouring on bipartite graphs."""
    graph = g.to_networkx()
    parity: Dict[int, int] = {}
    for component in nx.connected_components(graph):
        root = min(component)
        for node, depth in nx.single_source_shortest_path_length(graph, root).items():
            parity[node] = depth % 2
    return np.array([1.0 if parity[n] == 0 else -1.0 for n in g.nodes])


def synthesize_values(g: QubitGraph, model: str, rng: np.random.Generator) -> np.ndarray:
    """One synthetic field over ``g.nodes`` drawn from ``model``."""
    n = len(g.nodes)
    if model == "iid":
        return rng.standard_normal(n)
    if model == "smooth":
        x = _lazy_smooth(g, rng.standard_normal(n), SMOOTHING_ROUNDS)
        scale = float(np.std(x)) or 1.0
        return x + SMOOTH_JITTER * scale * rng.standard_normal(n)
    if model == "anti":
        sign = 1.0 if rng.random() < 0.5 else -1.0
        return sign * _alternating_signs(g)
    raise ValueError(f"unknown model {model!r}; expected one of {SYNTHETIC_MODELS}")


def synthesize_attributes(
    g: QubitGraph,
    model: str,
    seed: int,
    names: Sequence[str] = KNOWN_ATTRIBUTES,
) -> AttributeSet:
    """Generate a reproducible dataset with known spatial structure.

    Args:
        g: Non-empty graph the dataset covers.
        model: ``"iid"`` (uncorrelated), ``"smooth"`` (positively
            autocorrelated) or ``"anti"`` (alternating +1/-1).
        seed: Seed; each attribute gets an independent child stream.
        names: Attribute names to generate.
    """
    if not g.nodes:
        raise TopologyError("cannot synthesize attributes on an empty graph")
    streams = np.random.SeedSequence(seed).spawn(len(names))
    attributes: Dict[str, Dict[int, float]] = {}
    for name, stream in zip(names, streams):
        values = synthesize_values(g, model, np.random.default_rng(stream))
        attributes[name] = {n: float(v) for n, v in zip(g.nodes, values)}
    return AttributeSet(attributes)


def attributes_to_bytes(attrs: AttributeSet) -> bytes:
    buffer = io.BytesIO()
    save_attributes(attrs, buffer)
    return buffer.getvalue()
