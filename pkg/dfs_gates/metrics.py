# dfs_gates/metrics.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np
import pandas as pd

from .control import ControlSchedule
from .conventions import (
    DEFAULT_NORM_BOUND,
    DEFAULT_SAMPLE_EVERY,
    DEFAULT_THETA_GATE,
    REFINE_MAX_INDEX,
    REFINE_POINTS,
    UNITARITY_TOL,
)
from .errors import ArgumentError
from .evolve import ProcessMap, evolve, iter_map
from .model import SystemModel
from .opalg import SpectralPropagator, dagger

log = logging.getLogger(__name__)

CURVE_COLUMNS = [
    "theta_over_pi",
    "fidelity",
    "fidelity_stderr",
    "leakage",
    "trace_error",
    "hermiticity_error",
    "min_eigenvalue",
]


@dataclass(eq=False)
class FidelityCurve:
    theta: np.ndarray
    fidelity: np.ndarray
    fidelity_stderr: np.ndarray
    leakage: np.ndarray
    trace_error: np.ndarray
    hermiticity_error: np.ndarray
    min_eigenvalue: np.ndarray
    meta: Dict[str, object] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.theta)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "theta_over_pi": self.theta / math.pi,
            "fidelity": self.fidelity,
            "fidelity_stderr": self.fidelity_stderr,
            "leakage": self.leakage,
            "trace_error": self.trace_error,
            "hermiticity_error": self.hermiticity_error,
            "min_eigenvalue": self.min_eigenvalue,
        }, columns=CURVE_COLUMNS)

    @property
    def final_fidelity(self) -> float:
        return float(self.fidelity[-1])


@dataclass(frozen=True)
class FidelityEstimate:
    mean: float
    stderr: float
    n_samples: int


# -------------------------
# Fidelity functionals
# -------------------------
def _check_ideal(U: np.ndarray, V: np.ndarray) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.shape != (V.shape[0], V.shape[0]):
        raise ArgumentError(f"ideal gate has shape {U.shape}, expected {(V.shape[0],) * 2}")
    u = dagger(V) @ U @ V
    err = np.linalg.norm(dagger(u) @ u - np.eye(u.shape[0]))
    if err > UNITARITY_TOL:
        raise ArgumentError(f"ideal gate is not unitary on the logical space (error {err:.3e})")
    return U


def _logical_tensor(pmap: ProcessMap, U: np.ndarray) -> np.ndarray:
    """A[k, l, i, j] = <i| U+ E_t(|k><l|) U |j> in the encoded logical basis."""
    d = pmap.d_logical
    D = pmap.encoder.shape[0]
    if pmap.images.shape != (d, d, D, D):
        raise ArgumentError(f"incomplete basis: images have shape {pmap.images.shape}")
    W = U @ pmap.encoder
    return np.einsum("ai,klab,bj->klij", W.conj(), pmap.images, W)


def deterministic_average_fidelity(pmap: ProcessMap, U: np.ndarray) -> float:
    """Exact Haar average of <psi|U+ E_t(psi psi+) U|psi> from the d^2 basis images.

    Uses E[psi_i* psi_l* psi_j psi_k] = (d_ij d_kl + d_ik d_jl) / (d(d+1)); no trace
    preservation is assumed, so leaked population simply drops out.
    """
    _check_ideal(U, pmap.encoder)
    A = _logical_tensor(pmap, U)
    d = pmap.d_logical
    total = np.einsum("kkii->", A) + np.einsum("klkl->", A)
    return float(total.real) / (d * (d + 1))


def haar_states(d: int, n_samples: int, seed: int) -> np.ndarray:
    """Uniform pure states from normalized complex Gaussians on a counter-based stream."""
    rng = np.random.Generator(np.random.Philox(seed))
    z = rng.standard_normal((n_samples, d)) + 1j * rng.standard_normal((n_samples, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _estimate(values: np.ndarray) -> FidelityEstimate:
    n = values.size
    stderr = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return FidelityEstimate(mean=float(values.mean()), stderr=stderr, n_samples=n)


def mc_sample_fidelities(pmap: ProcessMap, U: np.ndarray, states: np.ndarray) -> np.ndarray:
    A = _logical_tensor(pmap, _check_ideal(U, pmap.encoder))
    vals = np.einsum("si,klij,sj,sk,sl->s", states.conj(), A, states, states, states.conj(),
                     optimize=True)
    return vals.real


def mc_average_fidelity(source: Union[ProcessMap, SystemModel], U: np.ndarray, n_samples: int,
                        seed: int, schedule: Optional[ControlSchedule] = None,
                        t: Optional[float] = None, dt: Optional[float] = None
                        ) -> FidelityEstimate:
    """Monte Carlo Haar average of the gate fidelity.

    `source` is either a precomputed process map or a model; a model is evolved once per
    sampled state (then `schedule` and `t` are required).
    """
    if n_samples < 1:
        raise ArgumentError("mc_average_fidelity needs at least one sample")
    if isinstance(source, ProcessMap):
        states = haar_states(source.d_logical, n_samples, seed)
        return _estimate(mc_sample_fidelities(source, U, states))

    model = source
    if schedule is None or t is None:
        raise ArgumentError("direct evolution needs a schedule and a time")
    V = model.encoder
    U = _check_ideal(U, V)
    states = haar_states(V.shape[1], n_samples, seed)
    vals = np.empty(n_samples)
    for s, psi in enumerate(states):
        phys = V @ psi
        rho0 = np.outer(phys, phys.conj())
        rho_t = evolve(model, schedule, rho0, t, dt=dt).rhos[-1]
        target = U @ phys
        vals[s] = float(np.vdot(target, rho_t @ target).real)
    return _estimate(vals)


def leakage(rho: np.ndarray, P: np.ndarray) -> float:
    """Population outside the range of the projector P."""
    return 1.0 - float(np.trace(P @ rho).real)


# -------------------------
# Thresholds and gate counts
# -------------------------
def _crossing(theta: np.ndarray, F: np.ndarray, F_star: float) -> Optional[Tuple[int, float]]:
    """(index of the first sample below F_star, interpolated crossing angle)."""
    if theta.size == 0:
        raise ArgumentError("empty fidelity curve")
    if not 0 < F_star < 1:
        raise ArgumentError(f"F_star must lie in (0, 1), got {F_star}")
    if np.any(np.diff(theta) <= 0):
        raise ArgumentError("fidelity curve is not sorted by theta")
    below = np.flatnonzero(F < F_star)
    if below.size == 0:
        return None
    i = int(below[0])
    if i == 0:
        return 0, float(theta[0])
    f0, f1 = F[i - 1], F[i]
    frac = (f0 - F_star) / (f0 - f1)
    return i, float(theta[i - 1] + frac * (theta[i] - theta[i - 1]))


def threshold_angle(curve: FidelityCurve, F_star: float) -> Optional[float]:
    """First downward crossing of F_star, linearly interpolated; None if F stays above."""
    hit = _crossing(np.asarray(curve.theta, dtype=float), np.asarray(curve.fidelity, dtype=float),
                    F_star)
    return None if hit is None else hit[1]


def refine_threshold(model: SystemModel, schedule: ControlSchedule, curve: FidelityCurve,
                     F_star: float, dt: Optional[float] = None,
                     norm_bound: float = DEFAULT_NORM_BOUND,
                     points: int = REFINE_POINTS) -> Optional[float]:
    """threshold_angle, re-sampled when the crossing lies in an early sample interval.

    Early crossings span a large share of theta* per interval, so the bracketing interval
    is integrated again with `points` samples; later crossings are returned unchanged.
    """
    hit = _crossing(np.asarray(curve.theta, dtype=float), np.asarray(curve.fidelity, dtype=float),
                    F_star)
    if hit is None:
        return None
    i, theta_star = hit
    if i == 0 or i > REFINE_MAX_INDEX:
        return theta_star

    lo, hi = float(curve.theta[i - 1]), float(curve.theta[i])
    fine = np.linspace(lo, hi, points + 1)
    prop = SpectralPropagator(model.H_gate)
    thetas, F = [], []
    for pmap in iter_map(model, schedule, fine / model.J, dt=dt, norm_bound=norm_bound):
        thetas.append(pmap.t * model.J)
        F.append(deterministic_average_fidelity(pmap, prop.at(pmap.t)))
        if F[-1] < F_star:
            break
    refined = _crossing(np.array(thetas), np.array(F), F_star)
    if refined is None or refined[0] == 0:
        return theta_star
    log.debug("theta* refined from %.6g to %.6g on [%.6g, %.6g]", theta_star, refined[1], lo, hi)
    return refined[1]


def gate_count(theta_star: float, theta_gate: float = DEFAULT_THETA_GATE) -> int:
    if not (theta_star > 0 and theta_gate > 0):
        raise ArgumentError(f"gate_count needs positive angles, got {theta_star}, {theta_gate}")
    return int(math.floor(theta_star / theta_gate * (1 + 1e-12)))


# -------------------------
# Curves
# -------------------------
def theta_grid(theta_max_over_pi: float, sample_every: float = DEFAULT_SAMPLE_EVERY) -> np.ndarray:
    if not (theta_max_over_pi > 0 and sample_every > 0):
        raise ArgumentError("theta_max_over_pi and sample_every must be > 0")
    n = int(round(theta_max_over_pi / sample_every))
    return math.pi * sample_every * np.arange(n + 1)


def compute_curve(model: SystemModel, schedule: ControlSchedule, theta_max_over_pi: float,
                  dt: Optional[float] = None, sample_every: float = DEFAULT_SAMPLE_EVERY,
                  mc_samples: int = 0, seed: int = 0, stop_below: Optional[float] = None,
                  norm_bound: float = DEFAULT_NORM_BOUND) -> FidelityCurve:
    """F(theta) with theta = J t, from the process map at each sample.

    With `stop_below` the integration ends at the first sample where F < stop_below.
    """
    if not model.J > 0:
        raise ArgumentError("fidelity curves need J > 0 (theta = J t)")
    thetas = theta_grid(theta_max_over_pi, sample_every)
    prop = SpectralPropagator(model.H_gate)
    P = model.projector
    states = haar_states(model.d_logical, mc_samples, seed) if mc_samples > 0 else None

    rows = []
    mismatches = 0
    for pmap in iter_map(model, schedule, thetas / model.J, dt=dt, norm_bound=norm_bound):
        U = prop.at(pmap.t)
        F = deterministic_average_fidelity(pmap, U)
        stderr = 0.0
        if states is not None:
            est = _estimate(mc_sample_fidelities(pmap, U, states))
            stderr = est.stderr
            if abs(est.mean - F) > 3 * est.stderr + 1e-12:
                mismatches += 1
        rows.append((pmap.t * model.J, F, stderr, pmap.leakage(P), pmap.trace_error,
                     pmap.hermiticity_error, pmap.min_eigenvalue))
        if stop_below is not None and F < stop_below:
            break

    if mismatches:
        log.warning("MC fidelity outside 3 sigma of the exact average at %d of %d samples",
                    mismatches, len(rows))
    arr = np.array(rows, dtype=float)
    meta = {"model": model.describe(), "schedule": schedule.describe(), "seed": seed,
            "dt": dt, "mc_samples": mc_samples}
    return FidelityCurve(theta=arr[:, 0], fidelity=arr[:, 1], fidelity_stderr=arr[:, 2],
                         leakage=arr[:, 3], trace_error=arr[:, 4], hermiticity_error=arr[:, 5],
                         min_eigenvalue=arr[:, 6], meta=meta)
