"""Single-excitation time evolution: eigensolver, eigenbasis expansion, RK4 reference."""

from .eigensolver import jacobi_eigh, lapack_eigh
from .evolution import (
    EvolutionSpec,
    FidelityTrace,
    Spectrum,
    amplitudes_at,
    eigendecompose,
    evolve,
    load_trace,
    save_trace,
)
from .integrator import evolve_oracle

__all__ = [
    "EvolutionSpec",
    "FidelityTrace",
    "Spectrum",
    "amplitudes_at",
    "eigendecompose",
    "evolve",
    "evolve_oracle",
    "jacobi_eigh",
    "lapack_eigh",
    "load_trace",
    "save_trace",
]
