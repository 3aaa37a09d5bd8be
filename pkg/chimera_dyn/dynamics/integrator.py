"""Fixed-step Runge-Kutta reference for the eigenbasis evolution.

The integrator advances ``d psi/dt = -i H psi`` step by step, so unlike
:func:`chimera_dyn.dynamics.evolution.evolve` its error grows with the
number of steps.  It exists to cross-check the eigenbasis results.
"""

import logging
import math

import numpy as np

from ..config import SETTINGS
from ..errors import NumericalError
from ..hamiltonian import Hamiltonian
from .evolution import EvolutionSpec, FidelityTrace

logger = logging.getLogger(__name__)

MAX_STEPS = 50_000_000


def rk4_step_operator(matrix: np.ndarray, dt: float) -> np.ndarray:
    """Matrix applying one classical RK4 step of ``-i H`` with step ``dt``.

    The stages are evaluated on the identity, so multiplying a state by the
    result is exactly one RK4 update of that state.
    """
    m = -1j * np.asarray(matrix, dtype=complex)
    y = np.eye(m.shape[0], dtype=complex)
    k1 = dt * (m @ y)
    k2 = dt * (m @ (y + k1 / 2))
    k3 = dt * (m @ (y + k2 / 2))
    k4 = dt * (m @ (y + k3))
    return y + (k1 / 6 + k2 / 3 + k3 / 3 + k4 / 6)


def evolve_oracle(
    h: Hamiltonian,
    spec: EvolutionSpec,
    steps_per_norm: int = SETTINGS.oracle_steps_per_norm,
) -> FidelityTrace:
    """Integrate the evolution with RK4 at step ``<= t_max / (steps_per_norm * ||H||)``.

    Returns:
        A :class:`FidelityTrace` sampled like :func:`evolve`.

    Raises:
        NumericalError: If the required step underflows or the step count
            exceeds ``MAX_STEPS``.
    """
    source_index = h.remap_index(spec.source)
    times = spec.times(h)
    t_max = float(times[-1])
    interval = t_max / (spec.num_steps - 1)

    norm = float(np.linalg.norm(h.matrix, 2))
    max_step = t_max / (steps_per_norm * norm) if norm > 0 else interval
    substeps = max(1, math.ceil(interval / max_step))
    step = interval / substeps
    if step <= np.finfo(float).eps * t_max or substeps * (spec.num_steps - 1) > MAX_STEPS:
        raise NumericalError(
            f"integrator step underflow: step {step:.3e} over window {t_max:.3e}"
        )

    propagator = np.linalg.matrix_power(rk4_step_operator(h.matrix, step), substeps)
    psi = np.zeros(h.size, dtype=complex)
    psi[source_index] = 1.0
    fidelity = np.empty((spec.num_steps, h.size))
    fidelity[0] = np.abs(psi) ** 2
    for s in range(1, spec.num_steps):
        psi = propagator @ psi
        fidelity[s] = np.abs(psi) ** 2

    logger.info(
        "RK4 reference: %d steps of %.3e over [0, %.6g]",
        substeps * (spec.num_steps - 1), step, t_max,
    )
    return FidelityTrace(times, fidelity, h.nodes, spec.source)
