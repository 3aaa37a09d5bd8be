"""Peaks of the excitation fidelity inside the time window."""

import logging
from dataclasses import asdict, dataclass
from typing import Dict, Optional

import numpy as np

from ..config import SETTINGS
from ..errors import StatisticError
from ..dynamics.evolution import FidelityTrace

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Peak:
    time: float
    node: int
    fidelity: float
    sample: int


@dataclass(frozen=True)
class PeakReport:
    """Earliest local maximum and global maximum among non-source nodes."""

    first_peak: Peak
    max_peak: Peak

    def to_dict(self) -> Dict[str, Dict[str, float]]:
        return {"first_peak": asdict(self.first_peak), "max_peak": asdict(self.max_peak)}


def local_maxima(fidelity: np.ndarray, threshold: float) -> np.ndarray:
    """Boolean mask of local maxima, shape ``(S, K)``.

    Interior sample ``s`` qualifies when ``f[s-1] < f[s] >= f[s+1]``; the last
    sample qualifies when it is still rising.  ``t = 0`` never qualifies.
    """
    mask = np.zeros(fidelity.shape, dtype=bool)
    rising = fidelity[1:] > fidelity[:-1]
    mask[1:-1] = rising[:-1] & (fidelity[1:-1] >= fidelity[2:])
    mask[-1] = rising[-1]
    return mask & (fidelity >= threshold)


def find_peaks(
    trace: FidelityTrace,
    source: Optional[int] = None,
    threshold: float = SETTINGS.peak_threshold,
) -> PeakReport:
    """Locate the first and the maximum fidelity peak away from ``source``.

    Args:
        trace: Trace with at least three samples.
        source: Excluded node; defaults to ``trace.source``.
        threshold: Minimum fidelity for a local maximum to count.

    Returns:
        The :class:`PeakReport`.  First-peak ties at the same sample go to
        the larger fidelity, then the smaller dense index.

    Raises:
        StatisticError: If no local maximum reaches ``threshold``.
    """
    if len(trace.times) < 3:
        raise ValueError("find_peaks needs at least three samples")
    source = trace.source if source is None else source
    source_column = trace.column(source)
    columns = [k for k in range(len(trace.nodes)) if k != source_column]
    if not columns:
        raise StatisticError("trace has no node besides the source")
    f = trace.fidelity[:, columns]

    mask = local_maxima(f, threshold)
    if not mask.any():
        raise StatisticError(
            f"no fidelity peak above {threshold:g} in [0, {trace.t_max:.6g}]; window too short"
        )
    samples, cols = np.nonzero(mask)
    first_sample = samples.min()
    at_first = cols[samples == first_sample]
    # Stable sort by descending fidelity keeps the smaller dense index first on ties
    best = at_first[np.argsort(-f[first_sample, at_first], kind="stable")[0]]
    first = Peak(
        float(trace.times[first_sample]),
        trace.nodes[columns[best]],
        float(f[first_sample, best]),
        int(first_sample),
    )

    window = f[1:]
    flat = int(np.argmax(window))
    max_sample, max_col = np.unravel_index(flat, window.shape)
    max_sample += 1
    maximum = Peak(
        float(trace.times[max_sample]),
        trace.nodes[columns[max_col]],
        float(f[max_sample, max_col]),
        int(max_sample),
    )
    logger.info(
        "First peak: node %d at t=%.6g (f=%.4f); max peak: node %d at t=%.6g (f=%.4f)",
        first.node, first.time, first.fidelity, maximum.node, maximum.time, maximum.fidelity,
    )
    return PeakReport(first, maximum)


def snapshot(trace: FidelityTrace, t: float) -> Dict[int, float]:
    """Fidelity of every node at the sample nearest to ``t``."""
    s = trace.nearest_sample(t)
    return {n: float(trace.fidelity[s, k]) for k, n in enumerate(trace.nodes)}
