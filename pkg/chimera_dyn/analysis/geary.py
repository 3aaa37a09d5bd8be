"""Geary's C spatial autocorrelation on qubit graphs.

    C = (n - 1) * sum_ij w_ij (x_i - x_j)^2 / (2 * sum_i (x_i - xbar)^2 * sum_ij w_ij)

with ``w_ij = w_ji = 1`` for connected qubits.  ``C = 1`` means no
correlation, ``C -> 0`` positive and ``C > 1`` negative correlation between
neighbours.

Edge subsets (internal / external couplers) restrict only the weights;
``n``, the mean and the variance always come from the full set of live
qubits, so the "all" value is the edge-count weighted average of the
subset values.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..config import SETTINGS
from ..errors import StatisticError
from ..export import dump_json
from ..ingest import AttributeSet
from ..topology import Edge, EdgeClass, QubitGraph, classify_edge

logger = logging.getLogger(__name__)

SUBSETS = ("all", "internal", "external")

ATTRIBUTE_LABELS = {
    "beta": "inverse temperature, beta",
    "b": "bias, b",
    "lambda": "transverse field gain, lambda",
    "eta": "noise, eta",
}


def _prepare(
    values: Mapping[int, float], edges: Iterable[Tuple[int, int]]
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    nodes = list(values)
    if len(nodes) < 2:
        raise StatisticError(f"Geary's C needs at least 2 qubits, got {len(nodes)}")
    index = {n: i for i, n in enumerate(nodes)}
    ia: List[int] = []
    ib: List[int] = []
    for a, b in edges:
        if a not in index or b not in index:
            raise StatisticError(f"edge ({a}, {b}) touches a qubit without a value")
        ia.append(index[a])
        ib.append(index[b])
    if not ia:
        raise StatisticError("Geary's C needs at least one edge")
    x = np.array([values[n] for n in nodes], dtype=float)
    if np.ptp(x) == 0:
        raise StatisticError("constant field: Geary's C is undefined for zero variance")
    return x, np.array(ia), np.array(ib)


def _statistic(x: np.ndarray, ia: np.ndarray, ib: np.ndarray) -> float:
    n = x.size
    mean = math.fsum(x) / n
    variance_sum = math.fsum((x - mean) ** 2)
    if variance_sum == 0:
        raise StatisticError("constant field: Geary's C is undefined for zero variance")
    # Each undirected edge appears twice in the double sums; the factors cancel.
    squared = math.fsum((x[ia] - x[ib]) ** 2)
    return (n - 1) * squared / (2.0 * variance_sum * ia.size)


def geary_c(values: Mapping[int, float], edges: Iterable[Tuple[int, int]]) -> float:
    """Geary's C of ``values`` over the unit-weight ``edges``.

    Raises:
        StatisticError: For fewer than two qubits, no edges or zero variance.
    """
    x, ia, ib = _prepare(values, edges)
    return _statistic(x, ia, ib)


@dataclass(frozen=True)
class PermutationResult:
    c: float
    p_value: float
    null_mean: float
    permutations: int


def geary_permutation_test(
    values: Mapping[int, float],
    edges: Iterable[Tuple[int, int]],
    permutations: int = SETTINGS.permutations,
    seed: int = 0,
) -> PermutationResult:
    """Two-sided randomization test of Geary's C.

    Values are relabelled ``permutations`` times; the p-value counts
    relabellings at least as far from the null mean as the observed C.
    """
    x, ia, ib = _prepare(values, edges)
    observed = _statistic(x, ia, ib)
    rng = np.random.default_rng(seed)
    shuffled = np.array([rng.permutation(x) for _ in range(permutations)])
    n = x.size
    centred = shuffled - shuffled.mean(axis=1, keepdims=True)
    variance_sum = np.sum(centred ** 2, axis=1)
    squared = np.sum((shuffled[:, ia] - shuffled[:, ib]) ** 2, axis=1)
    null = (n - 1) * squared / (2.0 * variance_sum * ia.size)
    null_mean = float(null.mean())
    extreme = int(np.sum(np.abs(null - null_mean) >= abs(observed - null_mean)))
    return PermutationResult(
        observed, (extreme + 1) / (permutations + 1), null_mean, permutations
    )


@dataclass(frozen=True)
class AttributeGeary:
    """Geary's C of one attribute for every edge subset."""

    all: float
    internal: float
    external: float
    n: int
    edges: Dict[str, int]
    dead: int = 0
    strong: Dict[str, bool] = field(default_factory=dict)
    p_values: Dict[str, float] = field(default_factory=dict)

    def value(self, subset: str) -> float:
        return getattr(self, subset)


@dataclass(frozen=True)
class GearyReport:
    attributes: Dict[str, AttributeGeary]

    def to_dict(self) -> Dict[str, Dict]:
        out = {}
        for name, entry in self.attributes.items():
            data = asdict(entry)
            if not data["p_values"]:
                del data["p_values"]
            out[name] = data
        return out

    def to_frame(self) -> pd.DataFrame:
        rows = {
            ATTRIBUTE_LABELS.get(name, name): [entry.all, entry.internal, entry.external]
            for name, entry in self.attributes.items()
        }
        return pd.DataFrame.from_dict(rows, orient="index", columns=list(SUBSETS))


def live_edges(g: QubitGraph, live: Iterable[int]) -> Dict[EdgeClass, List[Edge]]:
    """Edges between live qubits grouped by class; dead-incident edges are dropped."""
    live_set = set(live)
    groups: Dict[EdgeClass, List[Edge]] = {EdgeClass.INTERNAL: [], EdgeClass.EXTERNAL: []}
    for e in g.edges:
        if e[0] in live_set and e[1] in live_set:
            groups[classify_edge(g, e)].append(e)
    return groups


def geary_attribute(
    values: Mapping[int, float],
    g: QubitGraph,
    strong_threshold: float = SETTINGS.strong_threshold,
    permutations: int = 0,
    seed: int = 0,
) -> AttributeGeary:
    """All/internal/external Geary's C of one attribute over its live qubits."""
    live = {n: v for n, v in values.items()}
    groups = live_edges(g, live)
    subsets: Dict[str, Sequence[Edge]] = {
        "all": groups[EdgeClass.INTERNAL] + groups[EdgeClass.EXTERNAL],
        "internal": groups[EdgeClass.INTERNAL],
        "external": groups[EdgeClass.EXTERNAL],
    }
    c = {name: geary_c(live, edges) for name, edges in subsets.items()}
    strong = {
        name: abs(c[name] - c["all"]) > strong_threshold * c["all"]
        for name in ("internal", "external")
    }
    p_values: Dict[str, float] = {}
    if permutations:
        for offset, (name, edges) in enumerate(subsets.items()):
            p_values[name] = geary_permutation_test(
                live, edges, permutations, seed + offset
            ).p_value
    return AttributeGeary(
        c["all"],
        c["internal"],
        c["external"],
        n=len(live),
        edges={name: len(edges) for name, edges in subsets.items()},
        dead=len(g.nodes) - len(live),
        strong=strong,
        p_values=p_values,
    )


def geary_report(
    attrs: AttributeSet,
    g: QubitGraph,
    workers: Optional[int] = None,
    permutations: int = 0,
    seed: int = 0,
) -> GearyReport:
    """Geary's C of every attribute for all, internal and external couplers.

    Qubits absent from an attribute are dead for it: they and every edge
    touching them are removed before any computation.
    """
    if not attrs:
        raise StatisticError("attribute set is empty")
    names = attrs.names
    workers = SETTINGS.workers if workers is None else workers

    def _one(name: str) -> AttributeGeary:
        return geary_attribute(attrs.values(name), g, permutations=permutations, seed=seed)

    if workers and len(names) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(_one, names))
    else:
        results = [_one(name) for name in names]
    for name, entry in zip(names, results):
        logger.info(
            "Geary's C %s: all %.4f, internal %.4f, external %.4f (n=%d, dead=%d)",
            name, entry.all, entry.internal, entry.external, entry.n, entry.dead,
        )
    return GearyReport(dict(zip(names, results)))


def format_report(report: GearyReport) -> str:
    """Text table with one row per attribute and all/internal/external columns."""
    frame = report.to_frame()
    marks = []
    for entry in report.attributes.values():
        flagged = [name for name, is_strong in entry.strong.items() if is_strong]
        marks.append(", ".join(flagged))
    frame["strong"] = marks
    return frame.to_string(float_format=lambda v: f"{v:.2f}")


def save_report(report: GearyReport, path: Union[str, Path]) -> None:
    dump_json(report.to_dict(), path)
    logger.info("Saved Geary report for %d attributes to %s", len(report.attributes), path)
