import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from pydantic import BaseModel, validator

from chimera_dyn import __version__
from chimera_dyn.analysis.geary import format_report, geary_report, save_report
from chimera_dyn.analysis.peaks import find_peaks
from chimera_dyn.analysis.similarity import save_similarity, similarity_at
from chimera_dyn.config import SETTINGS, Settings, load_settings, seed_from_env
from chimera_dyn.dynamics.evolution import EvolutionSpec, evolve, load_trace, save_trace
from chimera_dyn.dynamics.integrator import evolve_oracle
from chimera_dyn.errors import (
    InputFormatError,
    NumericalError,
    StatisticError,
    TopologyError,
)
from chimera_dyn.experiment import run_paper_experiment
from chimera_dyn.hamiltonian import Scaling, build_hamiltonian, load_hamiltonian, save_hamiltonian
from chimera_dyn.ingest import (
    SYNTHETIC_MODELS,
    load_attributes,
    save_attributes,
    summarize,
    synthesize_attributes,
)
from chimera_dyn.logging_config import setup_logging
from chimera_dyn.topology import extract_subgraph, generate_chimera, load_graph, save_graph, ChimeraLayout

logger = logging.getLogger("chimera_dyn.cli")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_NUMERICAL = 4

# Arguments naming files that must exist before any computation starts
INPUT_FIELDS = ("graph", "data", "hamiltonian_file", "trace", "config")


class RunConfig(BaseModel):
    """Validated parameters of one CLI invocation."""

    command: str
    output: Optional[Path] = None
    outdir: Optional[Path] = None
    config: Optional[Path] = None
    graph: Optional[Path] = None
    data: Optional[Path] = None
    hamiltonian_file: Optional[Path] = None
    trace: Optional[Path] = None
    rows: int = 1
    cols: int = 1
    shore: int = 4
    subset: Optional[List[int]] = None
    scaling: str = "constant"
    j0: Optional[float] = None
    source: Optional[int] = None
    steps: Optional[int] = None
    tmax: Optional[float] = None
    oracle: bool = False
    solver: Optional[str] = None
    at: str = "first-peak"
    model: str = "iid"
    seed: Optional[int] = None
    permutations: int = 0
    validate_only: bool = False
    variants: bool = False
    xlsx: bool = False
    jobs: Optional[int] = None
    verbose: bool = False

    @validator("scaling", allow_reuse=True)
    def _known_scaling(cls, value):
        Scaling.parse(value)
        return value

    @validator("at", allow_reuse=True)
    def _snapshot_selector(cls, value):
        if value not in ("first-peak", "max-peak"):
            float(value)
        return value


def _subset(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated qubit indices, got {text!r}")


def _tmax(text: str) -> Optional[float]:
    if text == "auto":
        return None
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a positive number, got {text!r}")
    if value <= 0:
        raise argparse.ArgumentTypeError("tmax must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chimera-dyn",
        description="Quantum dynamics and spatial statistics on Chimera qubit networks",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    parser.add_argument("--config", type=Path, help="Settings JSON overriding config.json")
    parser.add_argument(
        "--jobs", type=int, default=None, help="Worker threads for data-parallel stages"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Repeated on every subcommand; SUPPRESS keeps a value given before the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS)

    p = subparsers.add_parser("generate", parents=[common], help="Generate a Chimera graph")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--shore", type=int, default=4)
    p.add_argument("--subset", type=_subset, help="Keep only these qubits, e.g. 3,7,19")
    p.add_argument("-o", "--output", type=Path, required=True)

    p = subparsers.add_parser("ingest", parents=[common], help="Parse and check a per-qubit dataset")
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--validate", dest="validate_only", action="store_true",
                   help="Only report live/dead qubits")
    p.add_argument("-o", "--output", type=Path, help="Write the normalised dataset")

    p = subparsers.add_parser("synthesize", parents=[common], help="Write a synthetic dataset")
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--model", choices=SYNTHETIC_MODELS, default="iid")
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output", type=Path, required=True)

    p = subparsers.add_parser("hamiltonian", parents=[common], help="Build the coupling matrix of a graph")
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--scaling", default="constant",
                   help="constant, dipole, coulomb, inverse-square or power:<p>")
    p.add_argument("--j0", type=float)
    p.add_argument("-o", "--output", type=Path, required=True)

    p = subparsers.add_parser("simulate", parents=[common], help="Evolve a single excitation")
    p.add_argument("--hamiltonian", dest="hamiltonian_file", type=Path, required=True)
    p.add_argument("--source", type=int, required=True)
    p.add_argument("--steps", type=int)
    p.add_argument("--tmax", type=_tmax, default=None, help="End time or 'auto' (1/J_min)")
    p.add_argument("--oracle", action="store_true", help="Use the RK4 reference integrator")
    p.add_argument(
        "--solver",
        choices=("jacobi", "lapack"),
        help="Eigensolver; Jacobi is slow beyond a few hundred qubits, so without this flag "
        "larger Hamiltonians use lapack",
    )
    p.add_argument("-o", "--output", type=Path, default=Path("trace.csv"))

    p = subparsers.add_parser("analyze", parents=[common], help="Edge similarity at a fidelity peak")
    p.add_argument("--trace", type=Path, required=True)
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--source", type=int, required=True)
    p.add_argument("--at", default="first-peak", help="first-peak, max-peak or a time")
    p.add_argument("-o", "--output", type=Path, required=True)

    p = subparsers.add_parser("geary", parents=[common], help="Geary's C of every attribute")
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--permutations", type=int, default=0,
                   help="Relabellings for a permutation p-value (0 disables)")
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output", type=Path)

    p = subparsers.add_parser("experiment", parents=[common], help="Run the 8-node coupling experiment")
    p.add_argument("--outdir", type=Path, required=True)
    p.add_argument("--variants", action="store_true",
                   help="Also run Coulomb and inverse-square scalings")
    p.add_argument("--xlsx", action="store_true", help="Also write experiment.xlsx")
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """Parse ``argv`` into a :class:`RunConfig`.

    Exits with status 2 on unknown flags, missing arguments or input files
    that do not exist.
    """
    parser = build_parser()
    namespace = parser.parse_args(argv)
    values = {k: v for k, v in vars(namespace).items() if v is not None}
    try:
        config = RunConfig(**values)
    except ValueError as exc:
        parser.error(str(exc))
    for name in INPUT_FIELDS:
        path = getattr(config, name)
        if path is not None and not path.is_file():
            parser.error(f"cannot read {name.replace('_file', '')} file: {path}")
    return config


def _settings(config: RunConfig) -> Settings:
    return load_settings(config.config) if config.config else SETTINGS


def run_generate(config: RunConfig, settings: Settings) -> None:
    g = generate_chimera(config.rows, config.cols, config.shore, ChimeraLayout.from_settings(settings))
    if config.subset:
        g = extract_subgraph(g, config.subset)
    save_graph(g, config.output)


def run_ingest(config: RunConfig, settings: Settings) -> None:
    g = load_graph(config.graph)
    attrs = load_attributes(config.data, g)
    report = summarize(attrs, g)
    print(json.dumps({**report, "dead": len(report["dead"])}, indent=2))
    if config.output and not config.validate_only:
        save_attributes(attrs, config.output)


def run_synthesize(config: RunConfig, settings: Settings) -> None:
    g = load_graph(config.graph)
    attrs = synthesize_attributes(g, config.model, seed_from_env(config.seed))
    save_attributes(attrs, config.output)


def run_hamiltonian(config: RunConfig, settings: Settings) -> None:
    g = load_graph(config.graph)
    j0 = config.j0 if config.j0 is not None else settings.j0
    h = build_hamiltonian(g, Scaling.parse(config.scaling), j0)
    save_hamiltonian(h, config.output)


def _solver(config: RunConfig, settings: Settings, size: int) -> str:
    if config.solver:
        return config.solver
    if settings.eigensolver == "jacobi" and size > settings.jacobi_max_size:
        logger.info(
            "N=%d exceeds jacobi_max_size=%d, using lapack", size, settings.jacobi_max_size
        )
        return "lapack"
    return settings.eigensolver


def run_simulate(config: RunConfig, settings: Settings) -> None:
    h = load_hamiltonian(config.hamiltonian_file)
    spec = EvolutionSpec(
        config.source,
        config.steps if config.steps is not None else settings.num_steps,
        config.tmax,
    )
    if config.oracle:
        trace = evolve_oracle(h, spec, settings.oracle_steps_per_norm)
    else:
        trace = evolve(h, spec, _solver(config, settings, h.size), config.jobs)
    save_trace(trace, config.output, settings.float_format)


def run_analyze(config: RunConfig, settings: Settings) -> None:
    g = load_graph(config.graph)
    trace = load_trace(config.trace, config.source)
    if config.at in ("first-peak", "max-peak"):
        peaks = find_peaks(trace, config.source, settings.peak_threshold)
        peak = peaks.first_peak if config.at == "first-peak" else peaks.max_peak
        t = peak.time
    else:
        t = float(config.at)
    save_similarity(similarity_at(trace, g, t), config.output, settings.float_format)


def run_geary(config: RunConfig, settings: Settings) -> None:
    g = load_graph(config.graph)
    attrs = load_attributes(config.data, g)
    report = geary_report(
        attrs, g, config.jobs, config.permutations, seed_from_env(config.seed)
    )
    print(format_report(report))
    if config.output:
        save_report(report, config.output)


def run_experiment(config: RunConfig, settings: Settings) -> None:
    summary = run_paper_experiment(
        config.outdir, settings, config.variants, config.xlsx, config.jobs
    )
    print(json.dumps(summary["checks"], indent=2))


COMMANDS = {
    "generate": run_generate,
    "ingest": run_ingest,
    "synthesize": run_synthesize,
    "hamiltonian": run_hamiltonian,
    "simulate": run_simulate,
    "analyze": run_analyze,
    "geary": run_geary,
    "experiment": run_experiment,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    setup_logging(logging.DEBUG if config.verbose else logging.INFO)
    try:
        settings = _settings(config)
        COMMANDS[config.command](config, settings)
    except (InputFormatError, TopologyError) as exc:
        logger.error("Invalid input: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, StatisticError) as exc:
        logger.error("Numerical failure: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        logger.error("File access failed: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        logger.error("Invalid parameters: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
