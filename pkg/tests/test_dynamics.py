import math

import numpy as np
import pytest

from chimera_dyn.dynamics import (
    EvolutionSpec,
    amplitudes_at,
    eigendecompose,
    evolve,
    evolve_oracle,
    load_trace,
    save_trace,
)
from chimera_dyn.dynamics.evolution import (
    FidelityTrace,
    check_unitarity,
    evolve_spectrum,
    expectation_energy,
)
from chimera_dyn.dynamics.integrator import rk4_step_operator
from chimera_dyn.errors import InputFormatError, NumericalError, TopologyError
from chimera_dyn.hamiltonian import Scaling, build_hamiltonian

from conftest import line_graph, random_graph


@pytest.fixture
def pair():
    return build_hamiltonian(line_graph([0.0, 1.0]))


def test_two_node_rabi_oscillation(pair):
    trace = evolve(pair, EvolutionSpec(0, num_steps=201, t_max=math.pi))
    assert trace.of(1) == pytest.approx(np.sin(trace.times) ** 2, abs=1e-12)
    assert trace.of(0) == pytest.approx(np.cos(trace.times) ** 2, abs=1e-12)
    half = trace.nearest_sample(math.pi / 2)
    assert trace.of(1)[half] == pytest.approx(1.0, abs=1e-12)


def test_initial_condition(dipole_h):
    trace = evolve(dipole_h, EvolutionSpec(3, num_steps=11))
    assert trace.of(3)[0] == pytest.approx(1.0)
    others = [n for n in trace.nodes if n != 3]
    assert all(trace.of(n)[0] == pytest.approx(0.0, abs=1e-15) for n in others)


def test_default_window_is_inverse_min_coupling(constant_h, dipole_h):
    assert evolve(constant_h, EvolutionSpec(3, num_steps=5)).t_max == pytest.approx(1.0)
    assert evolve(dipole_h, EvolutionSpec(3, num_steps=5)).t_max == pytest.approx(1 / 0.11)


def test_twin_nodes_overlay_under_constant_coupling(constant_h):
    trace = evolve(constant_h, EvolutionSpec(3))
    assert np.max(np.abs(trace.of(7) - trace.of(19))) < 1e-10


@pytest.mark.parametrize("seed", range(20))
def test_unitarity_on_random_graphs(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 65))
    scaling = Scaling.dipole() if seed % 2 else Scaling.constant()
    h = build_hamiltonian(random_graph(rng, n, p=4.0 / n), scaling)
    trace = evolve(h, EvolutionSpec(0, num_steps=101), solver="lapack")
    assert np.max(np.abs(trace.totals - 1.0)) < 1e-9


def test_time_symmetry(dipole_h):
    spectrum = eigendecompose(dipole_h)
    source = dipole_h.remap_index(3)
    times = np.linspace(0.0, 9.0, 50)
    forward = np.abs(amplitudes_at(spectrum, source, times)) ** 2
    backward = np.abs(amplitudes_at(spectrum, source, -times)) ** 2
    assert np.max(np.abs(forward - backward)) < 1e-12


def test_energy_is_conserved(dipole_h):
    spectrum = eigendecompose(dipole_h)
    amplitudes = amplitudes_at(spectrum, dipole_h.remap_index(3), np.linspace(0, 9, 40))
    energy = expectation_energy(dipole_h, amplitudes)
    assert np.max(np.abs(energy - energy[0])) < 1e-9


def test_chunked_parallel_evaluation_is_bit_identical(dipole_h, monkeypatch):
    from chimera_dyn.dynamics import evolution

    spectrum = eigendecompose(dipole_h)
    times = np.linspace(0.0, 9.0, 257)
    sequential = evolve_spectrum(spectrum, 3, times, workers=0)
    monkeypatch.setattr(evolution, "CHUNK_ENTRIES", 64 * 10)
    parallel = evolve_spectrum(spectrum, 3, times, workers=4)
    assert np.array_equal(sequential, parallel)


def test_unknown_source_raises(dipole_h):
    with pytest.raises(TopologyError):
        evolve(dipole_h, EvolutionSpec(4))


def test_evolution_spec_validation():
    with pytest.raises(ValueError):
        EvolutionSpec(0, num_steps=1)
    with pytest.raises(ValueError):
        EvolutionSpec(0, t_max=0.0)


def test_unitarity_check_reports_drift():
    trace = FidelityTrace(np.array([0.0, 1.0]), np.array([[1.0, 0.0], [0.6, 0.6]]), (0, 1), 0)
    with pytest.raises(NumericalError):
        check_unitarity(trace)


def test_rk4_operator_matches_series():
    m = np.array([[0.0, 1.0], [1.0, 0.0]])
    dt = 0.01
    a = -1j * m * dt
    expected = np.eye(2) + a + a @ a / 2 + a @ a @ a / 6 + a @ a @ a @ a / 24
    assert np.allclose(rk4_step_operator(m, dt), expected, atol=1e-15)


def test_oracle_two_node_analytic(pair):
    trace = evolve_oracle(pair, EvolutionSpec(0, num_steps=101, t_max=2.0))
    assert trace.of(1) == pytest.approx(np.sin(trace.times) ** 2, abs=1e-8)
    assert np.max(np.abs(trace.totals - 1.0)) < 1e-8


def test_oracle_agrees_on_dipole_cycle(dipole_h):
    spec = EvolutionSpec(3, num_steps=401)
    exact = evolve(dipole_h, spec)
    oracle = evolve_oracle(dipole_h, spec)
    assert np.max(np.abs(exact.fidelity - oracle.fidelity)) < 1e-6


@pytest.mark.parametrize("seed", range(10))
def test_oracle_agrees_on_random_graphs(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(2, 33))
    h = build_hamiltonian(random_graph(rng, n, p=3.0 / n), Scaling.dipole())
    spec = EvolutionSpec(0, num_steps=51, t_max=5.0)
    exact = evolve(h, spec)
    oracle = evolve_oracle(h, spec, steps_per_norm=2_000)
    assert np.max(np.abs(exact.fidelity - oracle.fidelity)) < 1e-6


def test_oracle_step_underflow(pair):
    with pytest.raises(NumericalError):
        evolve_oracle(pair, EvolutionSpec(0, num_steps=3, t_max=1.0), steps_per_norm=10**17)


def test_trace_csv_round_trip(tmp_path, dipole_h):
    trace = evolve(dipole_h, EvolutionSpec(3, num_steps=21))
    path = tmp_path / "trace.csv"
    save_trace(trace, path)
    header = path.read_text().splitlines()[0]
    assert header == "t," + ",".join(f"f_{n}" for n in trace.nodes) + ",total"
    loaded = load_trace(path, 3)
    assert loaded.nodes == trace.nodes
    assert loaded.fidelity == pytest.approx(trace.fidelity, abs=1e-11)


def test_load_trace_rejects_bad_files(tmp_path):
    path = tmp_path / "trace.csv"
    path.write_text("time,f_0,total\n0,1,1\n")
    with pytest.raises(InputFormatError, match="line 1"):
        load_trace(path, 0)
    path.write_text("t,f_0,f_1,total\n0,1,0,1\n1,nan,0,1\n")
    with pytest.raises(InputFormatError, match="line 3"):
        load_trace(path, 0)
    path.write_text("t,f_0,f_1,total\n0,1,0,1\n")
    with pytest.raises(TopologyError):
        load_trace(path, 5)
