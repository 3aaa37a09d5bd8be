"""Fidelity similarity across the edges of a network."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Union

import pandas as pd

from ..config import SETTINGS
from ..errors import TopologyError
from ..dynamics.evolution import FidelityTrace
from ..topology import QubitGraph, edge_lengths

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EdgeSimilarity:
    i: int
    j: int
    rel_length: float
    sim: float


@dataclass(frozen=True)
class SimilarityMatrix:
    """``1 - |f_i - f_j|`` for every edge at one snapshot time."""

    time: float
    entries: List[EdgeSimilarity]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(e.i, e.j, e.rel_length, e.sim) for e in self.entries],
            columns=["i", "j", "rel_length", "sim"],
        )

    def sim(self, i: int, j: int) -> float:
        for e in self.entries:
            if {e.i, e.j} == {i, j}:
                return e.sim
        raise TopologyError(f"edge ({i}, {j}) has no similarity entry")


def similarity_at(trace: FidelityTrace, g: QubitGraph, t: float) -> SimilarityMatrix:
    """Compare the fidelities of connected nodes at the sample nearest to ``t``."""
    s = trace.nearest_sample(t)
    lengths = edge_lengths(g)
    shortest = min(lengths.values()) if lengths else 1.0
    row = trace.fidelity[s]
    entries = []
    for (a, b), length in lengths.items():
        f_a, f_b = row[trace.column(a)], row[trace.column(b)]
        sim = min(1.0, max(0.0, 1.0 - abs(float(f_a) - float(f_b))))
        entries.append(EdgeSimilarity(a, b, length / shortest, sim))
    return SimilarityMatrix(float(trace.times[s]), entries)


def save_similarity(
    matrix: SimilarityMatrix,
    path: Union[str, Path],
    float_format: str = SETTINGS.float_format,
) -> None:
    matrix.to_frame().to_csv(path, index=False, float_format=float_format)
    logger.info("Saved %d edge similarities at t=%.6g to %s", len(matrix.entries), matrix.time, path)
