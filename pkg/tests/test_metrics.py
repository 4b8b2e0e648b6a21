import dataclasses
import logging
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dfs_gates import opalg
from dfs_gates.control import ControlSchedule
from dfs_gates.errors import ArgumentError
from dfs_gates.evolve import ProcessMap, evolve_map
from dfs_gates.metrics import (
    CURVE_COLUMNS,
    FidelityCurve,
    compute_curve,
    deterministic_average_fidelity,
    gate_count,
    haar_states,
    leakage,
    mc_average_fidelity,
    refine_threshold,
    theta_grid,
    threshold_angle,
)
from dfs_gates.model import NoiseMix, build_physical_qubit_model, build_single_logical_model
from dfs_gates.oracle import commuting_gate_threshold


def _dephasing_map(c: float) -> ProcessMap:
    """Qubit map that multiplies the coherences by c."""
    images = np.zeros((2, 2, 2, 2), dtype=complex)
    for k in range(2):
        for l in range(2):
            images[k, l, k, l] = 1.0 if k == l else c
    return ProcessMap(t=1.0, encoder=np.eye(2, dtype=complex), images=images)


def _curve(theta, F) -> FidelityCurve:
    z = np.zeros(len(theta))
    return FidelityCurve(theta=np.asarray(theta, dtype=float), fidelity=np.asarray(F, dtype=float),
                         fidelity_stderr=z, leakage=z, trace_error=z, hermiticity_error=z,
                         min_eigenvalue=z)


def _noisy_tx(Gamma=0.005):
    return build_single_logical_model("Tx", 1.0, NoiseMix(alpha_z=math.pi / 4, x=True, z=True),
                                      Gamma, 1.0, 50.0)


@pytest.mark.parametrize("c", [1.0, 0.5, 0.0, -0.3])
def test_dephasing_map_fidelity(c):
    F = deterministic_average_fidelity(_dephasing_map(c), np.eye(2))
    assert F == pytest.approx(1 - (1 - c) / 3, abs=1e-14)


def test_nonunitary_ideal_gate_rejected():
    with pytest.raises(ArgumentError):
        deterministic_average_fidelity(_dephasing_map(0.5), 2 * np.eye(2))
    with pytest.raises(ArgumentError):
        deterministic_average_fidelity(_dephasing_map(0.5), np.eye(3))


def test_mc_agrees_with_exact_average():
    pmap = _dephasing_map(0.2)
    exact = deterministic_average_fidelity(pmap, np.eye(2))
    est = mc_average_fidelity(pmap, np.eye(2), 100_000, seed=11)
    assert est.n_samples == 100_000
    assert est.stderr > 0
    assert abs(est.mean - exact) <= 5 * est.stderr


def test_mc_model_path_matches_map_path():
    m = _noisy_tx()
    s = ControlSchedule.constant(5.0)
    U = opalg.SpectralPropagator(m.H_gate).at(1.0)
    pmap = evolve_map(m, s, [1.0], dt=2e-3)[-1]
    via_map = mc_average_fidelity(pmap, U, 5, seed=3)
    direct = mc_average_fidelity(m, U, 5, seed=3, schedule=s, t=1.0, dt=2e-3)
    assert direct.mean == pytest.approx(via_map.mean, abs=1e-9)


def test_mc_model_path_needs_schedule_and_time():
    m = _noisy_tx()
    with pytest.raises(ArgumentError):
        mc_average_fidelity(m, np.eye(4), 3, seed=0)
    with pytest.raises(ArgumentError):
        mc_average_fidelity(_dephasing_map(1.0), np.eye(2), 0, seed=0)


def test_haar_states_are_normalized_and_seeded():
    a = haar_states(4, 50, seed=5)
    assert a.shape == (50, 4)
    assert_allclose(np.linalg.norm(a, axis=1), 1.0)
    assert_allclose(haar_states(4, 50, seed=5), a)
    assert not np.allclose(haar_states(4, 50, seed=6), a)


def test_leakage_of_basis_states():
    P = opalg.dfs_projector(1)
    leaked = np.outer(opalg.basis_ket("00"), opalg.basis_ket("00"))
    kept = np.outer(opalg.basis_ket("01"), opalg.basis_ket("01"))
    assert leakage(leaked, P) == pytest.approx(1.0)
    assert leakage(kept, P) == pytest.approx(0.0)


def test_threshold_interpolates_first_crossing():
    c = _curve([0, 1, 2, 3], [1.0, 0.97, 0.93, 0.96])
    assert threshold_angle(c, 0.95) == pytest.approx(1.5)


def test_threshold_none_when_always_above():
    assert threshold_angle(_curve([0, 1, 2], [1.0, 0.99, 0.98]), 0.95) is None


def test_threshold_at_first_sample():
    assert threshold_angle(_curve([0.5, 1.0], [0.9, 0.8]), 0.95) == pytest.approx(0.5)


@pytest.mark.parametrize("theta,F,F_star", [
    ([], [], 0.95),
    ([0, 1], [1.0, 0.9], 1.0),
    ([1, 0], [1.0, 0.9], 0.95),
])
def test_threshold_rejects_bad_input(theta, F, F_star):
    with pytest.raises(ArgumentError):
        threshold_angle(_curve(theta, F), F_star)


def test_refine_threshold_resolves_early_crossing():
    # fast dephasing: F crosses 0.95 inside the first 0.01 pi interval
    m = build_physical_qubit_model("z", 1.0, 1.0, 10.0, 50.0)
    s = ControlSchedule.none()
    curve = compute_curve(m, s, 0.05, dt=5e-3, sample_every=0.01, stop_below=0.95)
    exact = commuting_gate_threshold(m, 0.95, 0.05 * math.pi)
    coarse = threshold_angle(curve, 0.95)
    fine = refine_threshold(m, s, curve, 0.95, dt=5e-3)
    assert abs(coarse - exact) / math.pi > 5e-4
    assert abs(fine - exact) / math.pi <= 1e-4


def test_refine_threshold_keeps_late_crossings():
    m = build_physical_qubit_model("z", 1.0, 0.01, 10.0, 50.0)
    c = _curve([0, 1, 2, 3, 4, 5, 6], [1.0, 0.99, 0.98, 0.97, 0.96, 0.955, 0.94])
    assert refine_threshold(m, ControlSchedule.none(), c, 0.95) == pytest.approx(5 + 1 / 3)
    assert refine_threshold(m, ControlSchedule.none(), _curve([0, 1], [1.0, 0.99]), 0.95) is None


def test_gate_count_floors():
    assert gate_count(2 * math.pi, math.pi) == 2
    assert gate_count(3.5, math.pi) == 1
    assert gate_count(3.0, math.pi) == 0
    assert gate_count(5 * math.pi) == 5
    with pytest.raises(ArgumentError):
        gate_count(0.0)


def test_theta_grid():
    g = theta_grid(4.0, 0.01)
    assert len(g) == 401
    assert g[0] == 0.0
    assert g[-1] == pytest.approx(4 * math.pi)
    with pytest.raises(ArgumentError):
        theta_grid(0.0)


def test_closed_curve_is_flat_at_one():
    m = build_single_logical_model("Tx", 1.0, NoiseMix(x=True, y=True, z=True), 0.0, 1.0, 50.0)
    curve = compute_curve(m, ControlSchedule.constant(20.0), 0.5, dt=1e-3, sample_every=0.1)
    assert len(curve) == 6
    assert_allclose(curve.fidelity, 1.0, atol=1e-8)
    assert list(curve.to_frame().columns) == CURVE_COLUMNS
    assert curve.to_frame()["theta_over_pi"].iloc[-1] == pytest.approx(0.5)


def test_stop_below_ends_curve_early():
    m = build_single_logical_model("Tx", 1.0, NoiseMix(x=True, y=True), 0.05, 1.0, 50.0)
    full = len(theta_grid(4.0, 0.05))
    curve = compute_curve(m, ControlSchedule.none(), 4.0, dt=2e-3, sample_every=0.05,
                          stop_below=0.99)
    assert len(curve) < full
    assert curve.fidelity[-1] < 0.99
    assert np.all(curve.fidelity[:-1] >= 0.99)


def test_curve_with_mc_reports_stderr(caplog):
    m = _noisy_tx(Gamma=0.05)
    with caplog.at_level(logging.WARNING):
        curve = compute_curve(m, ControlSchedule.none(), 0.5, dt=2e-3, sample_every=0.25,
                              mc_samples=500, seed=1)
    assert curve.fidelity_stderr[-1] > 0.0
    assert curve.meta["seed"] == 1 and curve.meta["mc_samples"] == 500


def test_curve_needs_positive_coupling():
    m = build_single_logical_model("Tx", 1.0, NoiseMix(z=True), 0.005, 1.0, 50.0)
    with pytest.raises(ArgumentError):
        compute_curve(dataclasses.replace(m, J=0.0), ControlSchedule.none(), 1.0)


def test_collective_z_only_keeps_fidelity_at_one():
    m = build_single_logical_model("Tx", 1.0, NoiseMix(alpha_z=0.0, z=True), 0.005, 1.0, 50.0)
    curve = compute_curve(m, ControlSchedule.none(), 4.0, dt=5e-3, sample_every=0.1)
    assert np.max(np.abs(1.0 - curve.fidelity)) <= 1e-6
    assert np.max(np.abs(curve.leakage)) <= 1e-9
