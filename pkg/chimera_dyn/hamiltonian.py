"""Coupling matrices built from qubit graphs.

The matrix holds the qubit biases ``h_i`` on the diagonal (all zero here)
and the coupling weights ``J_ij`` off the diagonal.  With length scaling
the shortest edge carries the base weight ``j0`` and every other edge is
weakened as ``j0 * (min_length / length) ** p``; ``p = 3`` models a
repulsive dipole-dipole interaction.
"""

import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np

from .errors import InputFormatError, TopologyError
from .topology import QubitGraph, edge_key, edge_lengths

logger = logging.getLogger(__name__)

MAGIC = b"CHDM1"


@dataclass(frozen=True)
class Scaling:
    """Coupling-strength rule: constant, or inverse power ``p`` of the length."""

    kind: str
    exponent: Optional[float] = None

    @classmethod
    def constant(cls) -> "Scaling":
        return cls("constant")

    @classmethod
    def inverse_power(cls, exponent: float) -> "Scaling":
        if exponent <= 0:
            raise ValueError("exponent must be positive")
        return cls("inverse_power", float(exponent))

    @classmethod
    def dipole(cls) -> "Scaling":
        return cls.inverse_power(3.0)

    @classmethod
    def parse(cls, text: str) -> "Scaling":
        """Parse ``constant``, ``dipole``, ``coulomb``, ``inverse-square`` or ``power:<p>``."""
        key = text.strip().lower()
        if key == "constant":
            return cls.constant()
        if key == "dipole":
            return cls.dipole()
        if key == "coulomb":
            return cls.inverse_power(1.0)
        if key == "inverse-square":
            return cls.inverse_power(2.0)
        if key.startswith("power:"):
            return cls.inverse_power(float(key.split(":", 1)[1]))
        raise ValueError(f"unknown scaling {text!r}")

    @property
    def label(self) -> str:
        if self.kind == "constant":
            return "constant"
        return {1.0: "coulomb", 2.0: "inverse-square", 3.0: "dipole"}.get(
            self.exponent, f"power:{self.exponent:g}"
        )


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """Dense symmetric coupling matrix over remapped qubit indices.

    Attributes:
        matrix: ``N x N`` real symmetric array, zero diagonal.
        nodes: Native indices in dense order (ascending).
        scaling: Rule used to derive the weights.
        j0: Base coupling weight.
    """

    matrix: np.ndarray
    nodes: Tuple[int, ...]
    scaling: Scaling = Scaling.constant()
    j0: float = 1.0

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=float)
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "_dense", {n: i for i, n in enumerate(self.nodes)})

    @property
    def size(self) -> int:
        return len(self.nodes)

    def remap_index(self, native: int) -> int:
        """Dense index of a native qubit."""
        try:
            return self._dense[native]  # type: ignore[attr-defined]
        except KeyError:
            raise TopologyError(f"qubit {native} is not part of the Hamiltonian") from None

    def native_index(self, dense: int) -> int:
        """Inverse of :meth:`remap_index`."""
        if not 0 <= dense < len(self.nodes):
            raise TopologyError(f"dense index {dense} out of range 0..{len(self.nodes) - 1}")
        return self.nodes[dense]

    def couplings(self) -> Dict[Tuple[int, int], float]:
        """Non-zero couplings keyed by native edge."""
        rows, cols = np.nonzero(np.triu(self.matrix, k=1))
        return {
            edge_key(self.nodes[i], self.nodes[j]): float(self.matrix[i, j])
            for i, j in zip(rows, cols)
        }

    def j_min(self) -> float:
        """Smallest non-zero coupling, the default time-window scale."""
        weights = [w for w in self.couplings().values() if w > 0]
        if not weights:
            raise TopologyError("Hamiltonian has no couplings")
        return min(weights)


def build_hamiltonian(
    g: QubitGraph,
    scaling: Scaling = Scaling.constant(),
    j0: float = 1.0,
) -> Hamiltonian:
    """Create the coupling matrix of ``g``.

    Args:
        g: Graph with at least one node.
        scaling: :meth:`Scaling.constant` gives every edge ``j0``; an inverse
            power scales by ``(min_length / length) ** p``.
        j0: Positive base weight.

    Returns:
        A :class:`Hamiltonian` whose native indices are remapped to
        ``0..N-1`` in ascending order.
    """
    if not g.nodes:
        raise TopologyError("cannot build a Hamiltonian for an empty graph")
    if j0 <= 0:
        raise ValueError("j0 must be positive")

    nodes = tuple(sorted(g.nodes))
    dense = {n: i for i, n in enumerate(nodes)}
    matrix = np.zeros((len(nodes), len(nodes)), dtype=float)

    lengths = edge_lengths(g) if scaling.kind != "constant" and g.edges else {}
    min_length = min(lengths.values()) if lengths else 0.0

    for a, b in g.edges:
        if scaling.kind == "constant":
            weight = j0
        else:
            weight = j0 * (min_length / lengths[(a, b)]) ** scaling.exponent
        i, j = dense[a], dense[b]
        matrix[i, j] = weight
        matrix[j, i] = weight

    logger.info(
        "Built %s Hamiltonian: %d nodes, %d couplings", scaling.label, len(nodes), len(g.edges)
    )
    return Hamiltonian(matrix, nodes, scaling, j0)


# ---------------------------------------------------------------------------
# Binary format: magic, u32 N, N*N little-endian f64, then N u32 native indices

def save_hamiltonian(h: Hamiltonian, path: Union[str, Path]) -> None:
    n = h.size
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", n))
        f.write(np.ascontiguousarray(h.matrix, dtype="<f8").tobytes())
        f.write(np.asarray(h.nodes, dtype="<u4").tobytes())
    logger.info("Saved %dx%d Hamiltonian to %s", n, n, path)


def load_hamiltonian(path: Union[str, Path]) -> Hamiltonian:
    """Read a matrix written by :func:`save_hamiltonian`.

    Files without the trailing index table get the identity remap.
    """
    payload = Path(path).read_bytes()
    if not payload.startswith(MAGIC):
        raise InputFormatError("bad magic, expected CHDM1", position="byte 0")
    header = len(MAGIC) + 4
    if len(payload) < header:
        raise InputFormatError("truncated header", position=f"byte {len(MAGIC)}")
    (n,) = struct.unpack_from("<I", payload, len(MAGIC))
    body = 8 * n * n
    if len(payload) not in (header + body, header + body + 4 * n):
        raise InputFormatError(
            f"size {len(payload)} does not match N={n}", position=f"byte {header}"
        )
    matrix = np.frombuffer(payload, dtype="<f8", count=n * n, offset=header).reshape(n, n)
    if len(payload) == header + body:
        nodes = tuple(range(n))
    else:
        nodes = tuple(
            int(v) for v in np.frombuffer(payload, dtype="<u4", count=n, offset=header + body)
        )
    if not np.array_equal(matrix, matrix.T):
        raise InputFormatError("matrix is not symmetric", position=f"byte {header}")
    if list(nodes) != sorted(set(nodes)):
        raise InputFormatError("native index table is not strictly ascending", position=f"byte {header + body}")
    return Hamiltonian(matrix.astype(float), nodes)
