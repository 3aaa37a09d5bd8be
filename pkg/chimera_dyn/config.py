"""Simulation and analysis settings.

This module defines :class:`Settings` – a Pydantic model that stores the
schematic layout calibration of the Chimera drawing, the numerical defaults of
the eigensolver and the integrator, and the parameters of the 8-node
experiment.  Settings are loaded from ``config.json`` or a ``.env`` file,
whichever is found first, and can be persisted back to ``config.json`` via
:func:`save_settings`.
"""

import json
import os
from pathlib import Path
from typing import Any, List, Optional

from pydantic import BaseModel, Field, validator

from .errors import InputFormatError

BASE_PATH = Path(__file__).resolve().parent

CONFIG_FILE = BASE_PATH / "config.json"
ENV_FILE = BASE_PATH / ".env"

SEED_ENV_VAR = "CHIMERA_DYN_SEED"

# Dipole weight of a vertical external coupler relative to an internal one.
EXTERNAL_VERTICAL_RATIO = 0.11


class Settings(BaseModel):
    """Configuration loaded from ``config.json`` or ``.env``."""

    # Connection lengths of the schematic layout (dimensionless)
    internal_length: float = 1.0
    vertical_length: float = (1.0 / EXTERNAL_VERTICAL_RATIO) ** (1.0 / 3.0)
    horizontal_length: float = 1.8

    # Coordinates of the drawing
    vertical_spacing: float = 1.0
    shore_spacing: float = 1.0
    cell_gap: float = 1.0

    # Hamiltonian
    j0: float = 1.0

    # Evolution and eigensolver
    num_steps: int = 2001
    jacobi_max_sweeps: int = 100
    jacobi_tolerance: float = 1e-12
    oracle_steps_per_norm: int = 10_000

    # Analysis
    peak_threshold: float = 1e-3
    permutations: int = 999
    strong_threshold: float = 0.10

    # Default experiment: 8-cycle over the four cells of a 2x2 Chimera
    experiment_rows: int = 2
    experiment_cols: int = 2
    experiment_shore: int = 4
    experiment_nodes: List[int] = Field(
        default_factory=lambda: [3, 7, 15, 11, 27, 31, 23, 19]
    )
    experiment_source: int = 3

    # "jacobi" or "lapack"
    eigensolver: str = "jacobi"
    # Above this many qubits the CLI uses lapack unless --solver is given
    jacobi_max_size: int = 256

    # Number of worker threads; 0 evaluates sequentially
    workers: int = 0

    float_format: str = "%.12g"

    @validator(
        "internal_length",
        "vertical_length",
        "horizontal_length",
        "vertical_spacing",
        "shore_spacing",
        "cell_gap",
        "j0",
        allow_reuse=True,
    )
    def _positive(cls, value):
        if value <= 0:
            raise ValueError("must be positive")
        return value

    @validator("horizontal_length", allow_reuse=True)
    def _distinct_external_lengths(cls, value, values):
        """Vertical and horizontal external couplers have different lengths."""
        if values.get("vertical_length") == value:
            raise ValueError("horizontal_length must differ from vertical_length")
        return value

    @validator("num_steps", allow_reuse=True)
    def _enough_samples(cls, value):
        if value < 2:
            raise ValueError("num_steps must be at least 2")
        return value

    @validator("eigensolver", allow_reuse=True)
    def _known_solver(cls, value):
        if value not in ("jacobi", "lapack"):
            raise ValueError("eigensolver must be 'jacobi' or 'lapack'")
        return value

    @validator("workers", "permutations", "jacobi_max_size", allow_reuse=True)
    def _non_negative(cls, value):
        if value < 0:
            raise ValueError("must not be negative")
        return value


# ---------------------------------------------------------------------------
# Configuration persistence helpers

def _load_env_file() -> dict[str, Any]:
    data: dict[str, Any] = {}
    if ENV_FILE.exists():
        for line in ENV_FILE.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#") or "=" not in line:
                continue
            key, value = line.split("=", 1)
            data[key.strip().lower()] = value.strip()
    if "experiment_nodes" in data:
        data["experiment_nodes"] = [
            int(v) for v in str(data["experiment_nodes"]).split(",") if v.strip()
        ]
    return data


def load_settings(path: Optional[Path] = None) -> Settings:
    """Load settings from ``config.json`` (or ``path``) or fall back to ``.env``."""
    config_file = path or CONFIG_FILE
    data: dict[str, Any] = {}
    if config_file.exists():
        with config_file.open("r", encoding="utf-8") as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as exc:
                raise InputFormatError(
                    exc.msg, position=f"{config_file} line {exc.lineno}"
                ) from exc
    else:
        data = _load_env_file()
    return Settings(**data)


def save_settings(settings: Settings, path: Optional[Path] = None) -> None:
    """Persist settings to ``config.json`` and update global state."""
    with (path or CONFIG_FILE).open("w", encoding="utf-8") as f:
        json.dump(settings.dict(), f, indent=2)
    global SETTINGS
    SETTINGS = settings


def seed_from_env(seed: Optional[int] = None) -> int:
    """Return ``seed`` or the value of ``CHIMERA_DYN_SEED`` (default 0)."""
    if seed is not None:
        return seed
    raw = os.environ.get(SEED_ENV_VAR, "").strip()
    if not raw:
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from exc


# Load settings eagerly so modules can import ``SETTINGS``
SETTINGS: Settings = load_settings()
