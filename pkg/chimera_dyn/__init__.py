"""Single-excitation dynamics and spatial statistics on Chimera qubit networks."""

__version__ = "0.1.0"
