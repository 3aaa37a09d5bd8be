"""Exception hierarchy shared by the library and the CLI."""

from typing import Optional


class ChimeraDynError(Exception):
    """Base class for all errors raised by :mod:`chimera_dyn`."""


class TopologyError(ChimeraDynError, ValueError):
    """Invalid graph construction, unknown node/edge or degenerate geometry."""


class InputFormatError(ChimeraDynError, ValueError):
    """A serialized input could not be parsed.

    ``position`` names the offending line or record when known.
    """

    def __init__(self, message: str, position: Optional[str] = None) -> None:
        self.position = position
        if position:
            message = f"{position}: {message}"
        super().__init__(message)


class NumericalError(ChimeraDynError, ArithmeticError):
    """A numerical routine failed to meet its accuracy contract."""

    def __init__(self, message: str, residual: Optional[float] = None) -> None:
        self.residual = residual
        super().__init__(message)


class StatisticError(ChimeraDynError, ValueError):
    """A statistic is undefined for the given input."""
