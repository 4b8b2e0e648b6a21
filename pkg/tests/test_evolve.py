import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dfs_gates import opalg
from dfs_gates.control import ControlSchedule
from dfs_gates.conventions import HERMITICITY_TOL, POSITIVITY_TOL, TRACE_TOL
from dfs_gates.errors import ArgumentError, InstabilityError
from dfs_gates.evolve import (
    EvolutionState,
    effective_dt,
    evolve,
    evolve_map,
    hermitian_basis,
    iter_map,
    largest_norm,
    rhs,
    step_grid,
)
from dfs_gates.metrics import deterministic_average_fidelity, mc_average_fidelity
from dfs_gates.model import (
    NoiseMix,
    build_physical_qubit_model,
    build_single_logical_model,
    build_two_logical_model,
)
from dfs_gates.oracle import closed_system_reference

TAU = 0.01 * math.pi


def _logical_rho(amps, n_pairs=1):
    psi = opalg.encode_logical(amps, n_pairs)
    return np.outer(psi, psi.conj())


def _tx(mix=None, Gamma=0.005, gamma=1.0, T=50.0):
    return build_single_logical_model("Tx", 1.0, mix or NoiseMix(z=True), Gamma, gamma, T)


def test_rhs_at_start_is_source_terms():
    m = _tx(NoiseMix(alpha_z=math.pi / 4, z=True))
    rho = _logical_rho([1, 0])
    d = rhs(m, ControlSchedule.none(), EvolutionState.initial(m, rho))
    for j, ch in enumerate(m.channels):
        assert_allclose(d.O_z[j], ch.source_z * ch.L)
        assert_allclose(d.O_w[j], ch.source_w * opalg.dagger(ch.L))
    H = m.H_gate
    assert_allclose(d.rho, -1j * (H @ rho - rho @ H), atol=1e-15)


def test_rhs_rejects_wrong_shapes():
    m = _tx()
    state = EvolutionState.initial(m, _logical_rho([1, 0]))
    state.O_z = state.O_z[:1]
    with pytest.raises(ArgumentError):
        rhs(m, ControlSchedule.none(), state)


def test_closed_system_matches_unitary_reference():
    m = _tx(Gamma=0.0)
    rho0 = _logical_rho([0.6, 0.8])
    traj = evolve(m, ControlSchedule.constant(5.0), rho0, math.pi / 2)
    ref = closed_system_reference(m.H_gate, math.pi / 2, rho0)
    assert_allclose(traj.rhos[-1], ref, atol=1e-8)
    # exp(i (pi/2) T_x) is a logical X up to phase
    assert_allclose(traj.rhos[-1], _logical_rho([0.8, 0.6]), atol=1e-8)


def test_trajectory_diagnostics_and_t0_snapshot():
    m = _tx(NoiseMix(x=True, y=True))
    traj = evolve(m, ControlSchedule.none(), _logical_rho([1, 0]), 1.0,
                  sample_times=[0.25, 0.5, 0.75])
    assert_allclose(traj.times, [0.0, 0.25, 0.5, 0.75, 1.0])
    assert traj.trace_error.max() <= 1e-8
    assert traj.hermiticity_error.max() <= 1e-8
    assert traj.min_eigenvalue.min() >= -1e-6
    assert traj.leakage[0] == pytest.approx(0.0)
    assert traj.leakage[-1] > 0.0


def test_evolve_validates_rho0():
    m = _tx()
    with pytest.raises(ArgumentError):
        evolve(m, ControlSchedule.none(), np.eye(4), 1.0)
    with pytest.raises(ArgumentError):
        evolve(m, ControlSchedule.none(), np.diag([1.5, -0.5, 0, 0]).astype(complex), 1.0)
    with pytest.raises(ArgumentError):
        evolve(m, ControlSchedule.none(), _logical_rho([1, 0]), 0.0)


def test_norm_bound_raises_instability():
    m = _tx()
    with pytest.raises(InstabilityError) as exc:
        evolve(m, ControlSchedule.none(), _logical_rho([1, 0]), 0.1, norm_bound=0.5)
    assert exc.value.t is not None and exc.value.t > 0


def test_norm_bound_uses_spectral_norm():
    # |+_L> has entries of 0.5 but spectral norm 1
    m = _tx()
    plus = _logical_rho(np.array([1, 1]) / math.sqrt(2))
    assert np.abs(plus).max() == pytest.approx(0.5)
    with pytest.raises(InstabilityError):
        evolve(m, ControlSchedule.none(), plus, 0.1, norm_bound=0.9)


def test_largest_norm():
    assert largest_norm([np.ones((1, 4, 4))], 3.0) == pytest.approx(4.0)
    eye = np.eye(4)[None]
    assert largest_norm([eye], 1.5) == pytest.approx(1.0)
    assert largest_norm([eye], 5.0) == pytest.approx(2.0)    # Frobenius bound below the limit
    assert largest_norm([np.empty((0, 4, 4)), eye], 1.5) == pytest.approx(1.0)


def test_step_grid_snaps_to_pulse_edges():
    s = ControlSchedule.pulse_train(50.0, TAU)
    segs = step_grid([2.5 * TAU], 1e-3, s)
    bounds = [b for _, b, _, _ in segs]
    assert_allclose(bounds, [TAU, 2 * TAU, 2.5 * TAU])
    assert segs[-1][3] and not segs[0][3]
    for a, b, n, _ in segs:
        assert (b - a) / n <= TAU / 20 + 1e-15
    assert effective_dt(1.0, s) == pytest.approx(TAU / 20)


def test_step_grid_rejects_bad_samples():
    with pytest.raises(ArgumentError):
        step_grid([0.5, 0.25], 1e-3, ControlSchedule.none())
    with pytest.raises(ArgumentError):
        step_grid([0.5], 0.0, ControlSchedule.none())


def test_map_reproduces_direct_evolution():
    """The batched basis images reproduce a direct run on any logical input."""
    m = _tx(NoiseMix(alpha_z=math.pi / 3, x=True, y=True, z=True))
    s = ControlSchedule.constant(3.0)
    amps = np.array([0.6, 0.8j])
    direct = evolve(m, s, _logical_rho(amps), 1.0, dt=2e-3).rhos[-1]
    pmap = evolve_map(m, s, [1.0], dt=2e-3)[-1]
    assert_allclose(pmap.apply(np.outer(amps, amps.conj())), direct, atol=1e-9)


def test_iter_map_yields_identity_at_zero():
    m = _tx()
    maps = list(iter_map(m, ControlSchedule.none(), [0.0, 0.5]))
    assert maps[0].t == 0.0
    U = np.eye(4, dtype=complex)
    assert deterministic_average_fidelity(maps[0], U) == pytest.approx(1.0)
    assert maps[1].t == pytest.approx(0.5)


def test_hermitian_basis_spans_matrix_units():
    mats, labels = hermitian_basis(3)
    assert len(mats) == 9
    for M in mats:
        assert opalg.is_hermitian(M)


ZOO = [
    ("Tx individual z", lambda: _tx(), ControlSchedule.none()),
    ("Tx mixed z", lambda: _tx(NoiseMix(alpha_z=math.pi / 4, z=True)), ControlSchedule.none()),
    ("Tx individual xy, h=20", lambda: _tx(NoiseMix(x=True, y=True)), ControlSchedule.constant(20.0)),
    ("Tx collective xy, pulses", lambda: _tx(NoiseMix(alpha_x=0.0, alpha_y=0.0, x=True, y=True)),
     ControlSchedule.pulse_train(50.0, TAU)),
    ("Ty xyz", lambda: build_single_logical_model("Ty", 1.0, NoiseMix(x=True, y=True, z=True),
                                                  0.005, 2.0, 10.0), ControlSchedule.none()),
    ("Tz mixed xyz, h=5", lambda: build_single_logical_model(
        "Tz", 1.0, NoiseMix(alpha_x=math.pi / 4, alpha_y=math.pi / 4, alpha_z=math.pi / 4,
                            x=True, y=True, z=True), 0.005, 1.0, 50.0), ControlSchedule.constant(5.0)),
    ("physical x", lambda: build_physical_qubit_model("x", 1.0, 0.01, 10.0, 50.0), ControlSchedule.none()),
    ("two-logical", lambda: build_two_logical_model(1.0, NoiseMix(alpha_z=math.pi / 4, z=True),
                                                    0.005, 2.0, 10.0), ControlSchedule.none()),
]


@pytest.mark.parametrize("name,make,schedule", ZOO, ids=[z[0] for z in ZOO])
def test_structural_invariants(name, make, schedule):
    m = make()
    maps = evolve_map(m, schedule, [0.25 * math.pi, 0.5 * math.pi], dt=2e-3)
    for pmap in maps:
        assert pmap.trace_error <= TRACE_TOL
        assert pmap.hermiticity_error <= HERMITICITY_TOL
        assert pmap.min_eigenvalue >= POSITIVITY_TOL
        assert -1e-9 <= pmap.leakage(m.projector) <= 1.0


@pytest.mark.parametrize("name,make,schedule", ZOO, ids=[z[0] for z in ZOO])
def test_mc_fidelity_agrees_with_exact_average(name, make, schedule):
    m = make()
    pmap = evolve_map(m, schedule, [0.5 * math.pi], dt=2e-3)[-1]
    U = opalg.SpectralPropagator(m.H_gate).at(pmap.t)
    exact = deterministic_average_fidelity(pmap, U)
    est = mc_average_fidelity(pmap, U, 100_000, seed=2024)
    assert abs(est.mean - exact) <= 5 * est.stderr + 1e-12


@pytest.mark.parametrize("name,make,schedule", ZOO, ids=[z[0] for z in ZOO])
def test_step_halving_drift(name, make, schedule):
    m = make()
    U = opalg.SpectralPropagator(m.H_gate).at(1.0)
    F1 = deterministic_average_fidelity(evolve_map(m, schedule, [1.0], dt=2e-3)[-1], U)
    F2 = deterministic_average_fidelity(evolve_map(m, schedule, [1.0], dt=1e-3)[-1], U)
    assert abs(F1 - F2) <= 1e-5


@pytest.mark.parametrize("name,make,schedule", ZOO, ids=[z[0] for z in ZOO])
def test_map_is_linear(name, make, schedule):
    m = make()
    pmap = evolve_map(m, schedule, [0.8], dt=2e-3)[-1]
    rng = np.random.default_rng(7)
    d = m.d_logical
    X = rng.standard_normal((2, d, d)) + 1j * rng.standard_normal((2, d, d))
    A, B = (X + np.swapaxes(X, 1, 2).conj()) / 2
    assert_allclose(pmap.apply(0.3 * A + 0.7 * B), 0.3 * pmap.apply(A) + 0.7 * pmap.apply(B),
                    atol=1e-12)
