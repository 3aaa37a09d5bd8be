"""Single-excitation evolution by eigenbasis expansion.

With one excitation on an ``N``-node network the coupling matrix acts
directly as the Hamiltonian on the ``N``-dimensional single-excitation
space.  Amplitudes at node ``k`` are

    a_k(t) = sum_n v_n[k] * exp(-i * lambda_n * t) * v_n[source]

with hbar = 1, so every sample is computed from ``t = 0`` and no error
accumulates across samples.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..config import SETTINGS
from ..errors import InputFormatError, NumericalError, TopologyError
from ..hamiltonian import Hamiltonian
from .eigensolver import SOLVERS

logger = logging.getLogger(__name__)

UNITARITY_TOLERANCE = 1e-9

# Upper bound on complex entries materialised per chunk of samples
CHUNK_ENTRIES = 1 << 21


@dataclass(frozen=True)
class EvolutionSpec:
    """Initial excitation and sampling of the time window.

    ``t_max=None`` selects ``1 / J_min`` of the Hamiltonian being evolved.
    """

    source: int
    num_steps: int = SETTINGS.num_steps
    t_max: Optional[float] = None

    def __post_init__(self) -> None:
        if self.num_steps < 2:
            raise ValueError("num_steps must be at least 2")
        if self.t_max is not None and not self.t_max > 0:
            raise ValueError("t_max must be positive")

    def window(self, h: Hamiltonian) -> float:
        """Resolved end time of the window for ``h``."""
        if self.t_max is not None:
            return float(self.t_max)
        return 1.0 / h.j_min()

    def times(self, h: Hamiltonian) -> np.ndarray:
        return np.linspace(0.0, self.window(h), self.num_steps)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues (ascending) and column eigenvectors of a Hamiltonian."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    nodes: Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class FidelityTrace:
    """Per-node excitation probabilities over the sampled window.

    Attributes:
        times: Sample times, ascending, shape ``(S,)``.
        fidelity: ``fidelity[s, k]`` for sample ``s`` and dense node ``k``.
        nodes: Native index of each dense column.
        source: Native index of the initially excited node.
    """

    times: np.ndarray
    fidelity: np.ndarray
    nodes: Tuple[int, ...]
    source: int

    @property
    def totals(self) -> np.ndarray:
        return self.fidelity.sum(axis=1)

    @property
    def t_max(self) -> float:
        return float(self.times[-1])

    @property
    def interval(self) -> float:
        return float(self.times[1] - self.times[0])

    def column(self, native: int) -> int:
        try:
            return self.nodes.index(native)
        except ValueError:
            raise TopologyError(f"qubit {native} is not in the trace") from None

    def of(self, native: int) -> np.ndarray:
        """Fidelity time series of one native node."""
        return self.fidelity[:, self.column(native)]

    def nearest_sample(self, t: float) -> int:
        if not self.times[0] <= t <= self.times[-1]:
            raise ValueError(f"time {t} outside the window [{self.times[0]}, {self.times[-1]}]")
        return int(np.argmin(np.abs(self.times - t)))

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.fidelity, columns=[f"f_{n}" for n in self.nodes])
        frame.insert(0, "t", self.times)
        frame["total"] = self.totals
        return frame


def eigendecompose(h: Hamiltonian, solver: Optional[str] = None) -> Spectrum:
    """Eigen-decompose ``h`` with the configured symmetric solver."""
    name = solver or SETTINGS.eigensolver
    if name not in SOLVERS:
        raise ValueError(f"unknown eigensolver {name!r}")
    eigenvalues, eigenvectors = SOLVERS[name](h.matrix)
    logger.info(
        "Spectrum of N=%d via %s: [%.6g, %.6g]",
        h.size, name, eigenvalues[0], eigenvalues[-1],
    )
    return Spectrum(eigenvalues, eigenvectors, h.nodes)


def amplitudes_at(spectrum: Spectrum, source_index: int, times: Sequence[float]) -> np.ndarray:
    """Complex amplitudes ``a[s, k]`` at arbitrary (also negative) times.

    Each row is reduced independently, so results do not depend on how the
    samples are chunked.
    """
    times = np.asarray(times, dtype=float)
    v = spectrum.eigenvectors
    coeff = np.exp(-1j * np.outer(times, spectrum.eigenvalues)) * v[source_index, :]
    terms = v[None, :, :] * coeff[:, None, :]
    return terms.sum(axis=2)


def _chunks(count: int, size: int) -> List[slice]:
    return [slice(start, min(start + size, count)) for start in range(0, count, size)]


def evolve_spectrum(
    spectrum: Spectrum,
    source: int,
    times: np.ndarray,
    workers: int = 0,
) -> np.ndarray:
    """Fidelities ``|a_k(t)|^2`` for all ``times``, optionally on a thread pool."""
    try:
        source_index = spectrum.nodes.index(source)
    except ValueError:
        raise TopologyError(f"source qubit {source} is not in the Hamiltonian") from None
    n = len(spectrum.nodes)
    size = max(1, CHUNK_ENTRIES // max(n * n, 1))
    chunks = _chunks(len(times), size)

    def _run(chunk: slice) -> np.ndarray:
        return np.abs(amplitudes_at(spectrum, source_index, times[chunk])) ** 2

    if workers and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            parts = list(executor.map(_run, chunks))
    else:
        parts = [_run(chunk) for chunk in chunks]
    return np.concatenate(parts, axis=0)


def check_unitarity(trace: FidelityTrace, tolerance: float = UNITARITY_TOLERANCE) -> float:
    """Return the worst ``|sum_k f_k - 1|``; raise if above ``tolerance``."""
    drift = float(np.max(np.abs(trace.totals - 1.0)))
    if drift > tolerance:
        raise NumericalError(f"fidelities do not sum to 1 (drift {drift:.3e})", residual=drift)
    return drift


def evolve(
    h: Hamiltonian,
    spec: EvolutionSpec,
    solver: Optional[str] = None,
    workers: Optional[int] = None,
) -> FidelityTrace:
    """Evolve a single excitation starting on ``spec.source``.

    Args:
        h: Coupling matrix used as the single-excitation Hamiltonian.
        spec: Source node, sample count and window.
        solver: ``"jacobi"`` or ``"lapack"``; defaults to the settings.
        workers: Threads evaluating sample chunks; 0 runs sequentially.

    Returns:
        The :class:`FidelityTrace`; its totals equal 1 within 1e-9.
    """
    h.remap_index(spec.source)
    times = spec.times(h)
    spectrum = eigendecompose(h, solver)
    fidelity = evolve_spectrum(
        spectrum, spec.source, times, SETTINGS.workers if workers is None else workers
    )
    trace = FidelityTrace(times, fidelity, h.nodes, spec.source)
    check_unitarity(trace)
    logger.info(
        "Evolved excitation from qubit %d over [0, %.6g] in %d samples",
        spec.source, trace.t_max, len(times),
    )
    return trace


def expectation_energy(h: Hamiltonian, amplitudes: np.ndarray) -> np.ndarray:
    """``<psi(t)|H|psi(t)>`` for each row of ``amplitudes``."""
    return np.real(np.einsum("sk,kl,sl->s", amplitudes.conj(), h.matrix, amplitudes))


# ---------------------------------------------------------------------------
# CSV: t, f_<native>..., total

def save_trace(
    trace: FidelityTrace,
    path: Union[str, Path],
    float_format: str = SETTINGS.float_format,
) -> None:
    trace.to_frame().to_csv(path, index=False, float_format=float_format)
    logger.info("Saved trace with %d samples to %s", len(trace.times), path)


def load_trace(path: Union[str, Path], source: int) -> FidelityTrace:
    """Read a trace CSV written by :func:`save_trace`."""
    try:
        frame = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise InputFormatError(f"unreadable trace: {exc}", position=str(path)) from exc
    columns = list(frame.columns)
    if len(columns) < 3 or columns[0] != "t" or columns[-1] != "total":
        raise InputFormatError("expected header t,f_<node>...,total", position="line 1")
    nodes = []
    for name in columns[1:-1]:
        if not name.startswith("f_"):
            raise InputFormatError(f"unexpected column {name!r}", position="line 1")
        try:
            nodes.append(int(name[2:]))
        except ValueError as exc:
            raise InputFormatError(f"bad node column {name!r}", position="line 1") from exc
    values = frame[columns[1:-1]].to_numpy(dtype=float)
    if not np.all(np.isfinite(values)):
        bad = int(np.argwhere(~np.isfinite(values))[0][0]) + 2
        raise InputFormatError("non-finite fidelity", position=f"line {bad}")
    trace = FidelityTrace(frame["t"].to_numpy(dtype=float), values, tuple(nodes), source)
    trace.column(source)
    return trace
