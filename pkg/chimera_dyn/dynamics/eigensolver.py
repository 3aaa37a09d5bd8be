"""Cyclic Jacobi eigensolver for real symmetric matrices."""

import logging
import math
from typing import Tuple

import numpy as np

from ..config import SETTINGS
from ..errors import NumericalError

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-10
HUGE_THETA = 1e150


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """Annihilate ``a[p, q]`` with one Jacobi rotation, updating ``a`` and ``v`` in place."""
    apq = a[p, q]
    theta = float((a[q, q] - a[p, p]) / (2.0 * apq))
    if abs(theta) > HUGE_THETA:
        # theta**2 would overflow
        t = 1.0 / (2.0 * theta)
    else:
        t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c

    row_p = a[p, :].copy()
    row_q = a[q, :].copy()
    a[p, :] = c * row_p - s * row_q
    a[q, :] = s * row_p + c * row_q
    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    a[:, p] = c * col_p - s * col_q
    a[:, q] = s * col_p + c * col_q
    a[p, q] = a[q, p] = 0.0

    vp = v[:, p].copy()
    vq = v[:, q].copy()
    v[:, p] = c * vp - s * vq
    v[:, q] = s * vp + c * vq


def jacobi_eigh(
    matrix: np.ndarray,
    max_sweeps: int = SETTINGS.jacobi_max_sweeps,
    tolerance: float = SETTINGS.jacobi_tolerance,
) -> Tuple[np.ndarray, np.ndarray]:
    """Diagonalise a real symmetric matrix by cyclic Jacobi sweeps.

    Args:
        matrix: Real symmetric ``N x N`` array.
        max_sweeps: Iteration cap.
        tolerance: Stop once the off-diagonal Frobenius norm is below
            ``tolerance * ||matrix||_F``.

    Returns:
        ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
        eigenvectors as columns.

    Raises:
        NumericalError: If the sweeps do not converge, or the result misses
            the residual/orthonormality bound of ``1e-10 * ||matrix||``.
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.array_equal(a, a.T):
        raise ValueError("matrix is not symmetric")
    n = a.shape[0]
    v = np.eye(n)
    norm = float(np.linalg.norm(a))
    threshold = tolerance * norm

    def off_norm() -> float:
        return float(np.linalg.norm(a - np.diag(np.diag(a))))

    sweeps = 0
    off = off_norm()
    while off > threshold:
        if sweeps >= max_sweeps:
            raise NumericalError(
                f"Jacobi did not converge in {max_sweeps} sweeps "
                f"(off-diagonal norm {off:.3e})",
                residual=off,
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] != 0.0:
                    _rotate(a, v, p, q)
        sweeps += 1
        off = off_norm()
        logger.debug("Jacobi sweep %d: off-diagonal norm %.3e", sweeps, off)

    order = np.argsort(np.diag(a), kind="stable")
    eigenvalues = np.diag(a)[order].copy()
    eigenvectors = v[:, order].copy()
    check_decomposition(np.asarray(matrix, dtype=float), eigenvalues, eigenvectors)
    logger.debug("Jacobi converged after %d sweeps for N=%d", sweeps, n)
    return eigenvalues, eigenvectors


def lapack_eigh(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Same contract as :func:`jacobi_eigh`, using ``numpy.linalg.eigh``."""
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(np.asarray(matrix, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigh failed: {exc}") from exc
    check_decomposition(np.asarray(matrix, dtype=float), eigenvalues, eigenvectors)
    return eigenvalues, eigenvectors


def check_decomposition(
    matrix: np.ndarray, eigenvalues: np.ndarray, eigenvectors: np.ndarray
) -> float:
    """Return the worst residual, raising when it breaks the accuracy contract."""
    scale = max(float(np.linalg.norm(matrix, 2)), 1.0)
    residual = np.linalg.norm(matrix @ eigenvectors - eigenvectors * eigenvalues, axis=0)
    worst = float(residual.max()) if residual.size else 0.0
    gram = eigenvectors.T @ eigenvectors - np.eye(eigenvectors.shape[1])
    drift = float(np.abs(gram).max()) if gram.size else 0.0
    if worst > RESIDUAL_TOLERANCE * scale or drift > RESIDUAL_TOLERANCE:
        raise NumericalError(
            f"eigendecomposition outside tolerance: residual {worst:.3e}, "
            f"orthonormality drift {drift:.3e}",
            residual=max(worst, drift),
        )
    return worst


SOLVERS = {"jacobi": jacobi_eigh, "lapack": lapack_eigh}
