# dfs_gates/evolve.py
"""
Fixed-step RK4 integration of the non-Markovian master equation together with the
closed O-operator equations (one (O_z, O_w) pair per bath channel).

    drho/dt  = -i[H_s, rho] + sum_j { [L_j, rho O_z^j+] - [L_j+, O_z^j rho]
                                      + [L_j+, rho O_w^j+] - [L_j, O_w^j rho] }
    dO_z^j/dt = (G_j T_j g_j - i G_j g_j^2) L_j / 2 - g_j O_z^j - [M, O_z^j]
    dO_w^j/dt = G_j T_j g_j L_j+ / 2             - g_j O_w^j - [M, O_w^j]
    M         = i H_s + sum_k (L_k+ O_z^k + L_k O_w^k)

with H_s(t) = H_gate + c(t) * leo_operator in both places.

The O equations do not involve rho, so rho may carry leading batch axes: the whole
Hermitian operator basis of the logical space is propagated in one pass.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .control import ControlSchedule, c_at, edges
from .conventions import DEFAULT_DT, DEFAULT_NORM_BOUND, POSITIVITY_TOL, PULSE_STEPS_PER_TAU
from .errors import ArgumentError, InstabilityError
from .model import SystemModel
from .opalg import dagger, hermitian_eigenvalues

log = logging.getLogger(__name__)


# -------------------------
# State types
# -------------------------
@dataclass(eq=False)
class EvolutionState:
    t: float
    rho: np.ndarray            # (..., d, d)
    O_z: np.ndarray            # (n_channels, d, d)
    O_w: np.ndarray            # (n_channels, d, d)

    @classmethod
    def initial(cls, model: SystemModel, rho0: np.ndarray) -> "EvolutionState":
        d = model.dim
        rho0 = np.asarray(rho0, dtype=complex)
        if rho0.shape[-2:] != (d, d):
            raise ArgumentError(f"rho has shape {rho0.shape}, model dimension is {d}")
        n = len(model.channels)
        zeros = np.zeros((n, d, d), dtype=complex)
        return cls(t=0.0, rho=rho0.copy(), O_z=zeros, O_w=zeros.copy())


@dataclass(eq=False)
class StateDerivative:
    rho: np.ndarray
    O_z: np.ndarray
    O_w: np.ndarray


@dataclass(eq=False)
class Trajectory:
    times: np.ndarray
    rhos: np.ndarray
    trace_error: np.ndarray
    hermiticity_error: np.ndarray
    min_eigenvalue: np.ndarray
    leakage: np.ndarray
    final: EvolutionState


@dataclass(eq=False)
class ProcessMap:
    """Linear map from logical operators to physical operators at time t.

    images[k, l] is the evolved image of the encoded matrix unit V|k><l|V+.
    """

    t: float
    encoder: np.ndarray
    images: np.ndarray
    trace_error: float = 0.0
    hermiticity_error: float = 0.0
    min_eigenvalue: float = 1.0

    @property
    def d_logical(self) -> int:
        return self.encoder.shape[1]

    def apply(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=complex)
        if X.shape != (self.d_logical, self.d_logical):
            raise ArgumentError(f"logical operator has shape {X.shape}, expected "
                                f"{(self.d_logical, self.d_logical)}")
        return np.einsum("kl,klij->ij", X, self.images)

    def leakage(self, P: np.ndarray) -> float:
        """Haar-averaged population outside the range of P."""
        d = self.d_logical
        kept = sum(np.trace(P @ self.images[k, k]).real for k in range(d))
        return 1.0 - kept / d


# -------------------------
# Generator of the dynamics
# -------------------------
class _Generator:
    def __init__(self, model: SystemModel):
        d = model.dim
        chans = model.channels
        self.n = len(chans)
        self.H_gate = np.asarray(model.H_gate, dtype=complex)
        self.leo = np.asarray(model.leo_operator, dtype=complex)
        if self.n:
            self.L = np.array([c.L for c in chans], dtype=complex)
        else:
            self.L = np.zeros((0, d, d), dtype=complex)
        self.Ld = dagger(self.L)
        self.src_z = np.array([c.source_z for c in chans], dtype=complex).reshape(-1, 1, 1)
        self.src_w = np.array([c.source_w for c in chans], dtype=complex).reshape(-1, 1, 1)
        self.gam = np.array([c.gamma for c in chans], dtype=float).reshape(-1, 1, 1)

    def hamiltonian(self, c: float) -> np.ndarray:
        return self.H_gate + c * self.leo if c else self.H_gate

    def __call__(self, c: float, rho: np.ndarray, Oz: np.ndarray, Ow: np.ndarray
                 ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        H = self.hamiltonian(c)
        drho = -1j * (H @ rho - rho @ H)
        if not self.n:
            return drho, np.zeros_like(Oz), np.zeros_like(Ow)

        M = 1j * H + np.sum(self.Ld @ Oz + self.L @ Ow, axis=0)
        dOz = self.src_z * self.L - self.gam * Oz - (M @ Oz - Oz @ M)
        dOw = self.src_w * self.Ld - self.gam * Ow - (M @ Ow - Ow @ M)

        # channel axis sits right before the matrix axes
        r = rho[..., None, :, :]
        L, Ld = self.L, self.Ld
        A = r @ dagger(Oz)
        B = Oz @ r
        C = r @ dagger(Ow)
        D = Ow @ r
        terms = (L @ A - A @ L) - (Ld @ B - B @ Ld) + (Ld @ C - C @ Ld) - (L @ D - D @ L)
        drho = drho + terms.sum(axis=-3)
        return drho, dOz, dOw


def rhs(model: SystemModel, schedule: ControlSchedule, state: EvolutionState) -> StateDerivative:
    """Time derivatives of (rho, O_z^j, O_w^j) at state.t."""
    d = model.dim
    n = len(model.channels)
    if state.rho.shape[-2:] != (d, d):
        raise ArgumentError(f"rho has shape {state.rho.shape}, model dimension is {d}")
    if state.O_z.shape != (n, d, d) or state.O_w.shape != (n, d, d):
        raise ArgumentError(f"O operators must have shape {(n, d, d)}")
    gen = _Generator(model)
    drho, dOz, dOw = gen(c_at(schedule, state.t), state.rho, state.O_z, state.O_w)
    for name, arr in (("rho", drho), ("O_z", dOz), ("O_w", dOw)):
        if not np.all(np.isfinite(arr)):
            raise InstabilityError(f"non-finite d{name}/dt at t={state.t:g}", t=state.t)
    return StateDerivative(rho=drho, O_z=dOz, O_w=dOw)


def _rk4_step(gen: _Generator, c: float, h: float, rho, Oz, Ow):
    k1 = gen(c, rho, Oz, Ow)
    k2 = gen(c, rho + 0.5 * h * k1[0], Oz + 0.5 * h * k1[1], Ow + 0.5 * h * k1[2])
    k3 = gen(c, rho + 0.5 * h * k2[0], Oz + 0.5 * h * k2[1], Ow + 0.5 * h * k2[2])
    k4 = gen(c, rho + h * k3[0], Oz + h * k3[1], Ow + h * k3[2])
    w = h / 6.0
    return (
        rho + w * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        Oz + w * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
        Ow + w * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]),
    )


# -------------------------
# Step grid
# -------------------------
def effective_dt(dt: Optional[float], schedule: ControlSchedule) -> float:
    h = DEFAULT_DT if dt is None else float(dt)
    if not (math.isfinite(h) and h > 0):
        raise ArgumentError(f"dt must be > 0, got {dt}")
    if schedule.kind == "pulse_train":
        h = min(h, schedule.tau / PULSE_STEPS_PER_TAU)
    return h


def _check_sample_times(sample_times: Sequence[float]) -> np.ndarray:
    ts = np.asarray(sample_times, dtype=float).reshape(-1)
    if ts.size == 0:
        raise ArgumentError("no sample times requested")
    if not np.all(np.isfinite(ts)) or ts[0] < 0:
        raise ArgumentError("sample times must be finite and >= 0")
    if np.any(np.diff(ts) <= 0):
        raise ArgumentError("sample times must be strictly increasing")
    if ts[-1] <= 0:
        raise ArgumentError("t_end must be > 0")
    return ts


def step_grid(sample_times: Sequence[float], dt: Optional[float], schedule: ControlSchedule
              ) -> List[Tuple[float, float, int, bool]]:
    """Segments (a, b, n_steps, b_is_sample) covering [0, t_end].

    Every sample time and every control discontinuity is a segment boundary, so c(t)
    is constant inside each RK4 step.
    """
    ts = _check_sample_times(sample_times)
    h_max = effective_dt(dt, schedule)
    t_end = float(ts[-1])
    tol = 1e-12 * max(1.0, t_end)
    samples = [float(t) for t in ts if t > tol]
    pulse_edges = [float(e) for e in edges(schedule, t_end)]

    marks: Dict[float, bool] = {}
    for e in pulse_edges:
        marks[e] = False
    for s in samples:
        for e in [e for e in marks if abs(e - s) <= tol]:
            del marks[e]
        marks[s] = True

    segments = []
    a = 0.0
    for b in sorted(marks):
        if b - a <= tol:
            continue
        n = max(1, int(math.ceil((b - a) / h_max - 1e-9)))
        segments.append((a, b, n, marks[b]))
        a = b
    return segments


# -------------------------
# Core loop
# -------------------------
def largest_norm(stacks: Sequence[np.ndarray], bound: float) -> float:
    """Largest spectral norm over stacks of matrices (..., d, d), exact above `bound`.

    The Frobenius norm bounds the spectral norm from above and is returned as is when it
    stays within `bound`; the SVDs only run past that.
    """
    fro = max(float(np.asarray(np.linalg.norm(a, axis=(-2, -1))).max(initial=0.0))
              for a in stacks)
    if not math.isfinite(fro) or fro <= bound:
        return fro
    return max(float(np.asarray(np.linalg.norm(a, ord=2, axis=(-2, -1))).max(initial=0.0))
               for a in stacks if a.size)


def _integrate(model: SystemModel, schedule: ControlSchedule, rho0: np.ndarray,
               sample_times: Sequence[float], dt: Optional[float], norm_bound: float,
               trace_targets: np.ndarray, density_members: Sequence[int]
               ) -> Iterator[Tuple[EvolutionState, Dict[str, float]]]:
    """Yield (state, window diagnostics) at each positive sample time."""
    gen = _Generator(model)
    state = EvolutionState.initial(model, rho0)
    rho, Oz, Ow = state.rho, state.O_z, state.O_w
    batch = rho.reshape(-1, model.dim, model.dim)
    trace_targets = np.asarray(trace_targets, dtype=float).reshape(-1)
    if trace_targets.size != batch.shape[0]:
        raise ArgumentError("one trace target per batch element is required")
    warned = False

    def fresh_window():
        return {"trace_error": 0.0, "hermiticity_error": 0.0, "min_eigenvalue": math.inf}

    window = fresh_window()
    for a, b, n, is_sample in step_grid(sample_times, dt, schedule):
        h = (b - a) / n
        for k in range(n):
            t0 = a + k * h
            c = c_at(schedule, t0 + 0.5 * h)
            rho, Oz, Ow = _rk4_step(gen, c, h, rho, Oz, Ow)
            t1 = b if k == n - 1 else t0 + h

            peak = largest_norm((rho, Oz, Ow), norm_bound)
            if not math.isfinite(peak):
                raise InstabilityError(f"non-finite state at t={t1:.6g}; reduce dt", t=t1)
            if peak > norm_bound:
                raise InstabilityError(f"state norm {peak:.3e} above bound {norm_bound:.3e} "
                                       f"at t={t1:.6g}; reduce dt", t=t1)

            flat = rho.reshape(-1, model.dim, model.dim)
            tr = np.trace(flat, axis1=-2, axis2=-1)
            window["trace_error"] = max(window["trace_error"],
                                        float(np.max(np.abs(tr - trace_targets))))
            herm = np.linalg.norm(flat - dagger(flat), axis=(-2, -1))
            window["hermiticity_error"] = max(window["hermiticity_error"], float(herm.max()))
            if len(density_members):
                sel = flat[list(density_members)]
                ev = hermitian_eigenvalues(sel)
                window["min_eigenvalue"] = min(window["min_eigenvalue"], float(ev.min()))

        if window["min_eigenvalue"] < POSITIVITY_TOL and not warned:
            log.warning("rho lost positivity: min eigenvalue %.3e at t=%.6g (%s)",
                        window["min_eigenvalue"], b, model.describe())
            warned = True

        if is_sample:
            yield EvolutionState(t=b, rho=rho, O_z=Oz, O_w=Ow), window
            window = fresh_window()


def _leakage(rho: np.ndarray, P: np.ndarray) -> float:
    return 1.0 - float(np.trace(P @ rho).real)


def evolve(model: SystemModel, schedule: ControlSchedule, rho0: np.ndarray, t_end: float,
           dt: Optional[float] = None, sample_times: Optional[Sequence[float]] = None,
           norm_bound: float = DEFAULT_NORM_BOUND) -> Trajectory:
    """Propagate a density matrix; snapshots at t=0 and at every sample time up to t_end."""
    rho0 = np.asarray(rho0, dtype=complex)
    d = model.dim
    if rho0.shape != (d, d):
        raise ArgumentError(f"rho0 has shape {rho0.shape}, model dimension is {d}")
    if np.linalg.norm(rho0 - dagger(rho0)) > 1e-10 or abs(np.trace(rho0) - 1) > 1e-10:
        raise ArgumentError("rho0 must be Hermitian with unit trace")
    if hermitian_eigenvalues(rho0).min() < -1e-10:
        raise ArgumentError("rho0 must be positive semidefinite")
    if not (math.isfinite(t_end) and t_end > 0):
        raise ArgumentError(f"t_end must be > 0, got {t_end}")
    ts = [t_end] if sample_times is None else [t for t in sample_times if 0 < t < t_end] + [t_end]
    P = model.projector

    times, rhos = [0.0], [rho0.copy()]
    tr_err, herm_err, min_ev = [0.0], [0.0], [float(hermitian_eigenvalues(rho0).min())]
    leak = [_leakage(rho0, P)]
    final = EvolutionState.initial(model, rho0)
    for state, win in _integrate(model, schedule, rho0, ts, dt, norm_bound,
                                 trace_targets=np.ones(1), density_members=[0]):
        times.append(state.t)
        rhos.append(state.rho.copy())
        tr_err.append(win["trace_error"])
        herm_err.append(win["hermiticity_error"])
        min_ev.append(win["min_eigenvalue"])
        leak.append(_leakage(state.rho, P))
        final = state
    return Trajectory(times=np.array(times), rhos=np.array(rhos), trace_error=np.array(tr_err),
                      hermiticity_error=np.array(herm_err), min_eigenvalue=np.array(min_ev),
                      leakage=np.array(leak), final=final)


# -------------------------
# Process maps
# -------------------------
def hermitian_basis(d: int) -> Tuple[np.ndarray, List[Tuple[str, int, int]]]:
    """Hermitian basis of d x d matrices: E_kk, E_kl + E_lk, -i(E_kl - E_lk) for k < l."""
    mats, labels = [], []
    for k in range(d):
        E = np.zeros((d, d), dtype=complex)
        E[k, k] = 1.0
        mats.append(E)
        labels.append(("diag", k, k))
    for k in range(d):
        for l in range(k + 1, d):
            X = np.zeros((d, d), dtype=complex)
            X[k, l] = X[l, k] = 1.0
            Y = np.zeros((d, d), dtype=complex)
            Y[k, l], Y[l, k] = -1j, 1j
            mats.append(X)
            labels.append(("x", k, l))
            mats.append(Y)
            labels.append(("y", k, l))
    return np.array(mats), labels


def _matrix_unit_images(evolved: np.ndarray, labels, d: int) -> np.ndarray:
    D = evolved.shape[-1]
    images = np.zeros((d, d, D, D), dtype=complex)
    pos = {lab: i for i, lab in enumerate(labels)}
    for k in range(d):
        images[k, k] = evolved[pos[("diag", k, k)]]
        for l in range(k + 1, d):
            X = evolved[pos[("x", k, l)]]
            Y = evolved[pos[("y", k, l)]]
            images[k, l] = 0.5 * (X + 1j * Y)
            images[l, k] = 0.5 * (X - 1j * Y)
    return images


def iter_map(model: SystemModel, schedule: ControlSchedule, sample_times: Sequence[float],
             dt: Optional[float] = None, norm_bound: float = DEFAULT_NORM_BOUND
             ) -> Iterator[ProcessMap]:
    """Yield the process map at each sample time; the identity map first when t=0 is sampled."""
    V = model.encoder
    d = V.shape[1]
    basis, labels = hermitian_basis(d)
    encoded = V @ basis @ dagger(V)
    targets = np.trace(basis, axis1=-2, axis2=-1).real
    density_members = [i for i, lab in enumerate(labels) if lab[0] == "diag"]

    ts = _check_sample_times(sample_times)
    if ts[0] == 0.0:
        yield ProcessMap(t=0.0, encoder=V, images=_matrix_unit_images(encoded, labels, d),
                         min_eigenvalue=0.0)
    for state, win in _integrate(model, schedule, encoded, ts, dt, norm_bound,
                                 trace_targets=targets, density_members=density_members):
        yield ProcessMap(t=state.t, encoder=V,
                         images=_matrix_unit_images(state.rho, labels, d),
                         trace_error=win["trace_error"],
                         hermiticity_error=win["hermiticity_error"],
                         min_eigenvalue=win["min_eigenvalue"])


def evolve_map(model: SystemModel, schedule: ControlSchedule, t_grid: Sequence[float],
               dt: Optional[float] = None, norm_bound: float = DEFAULT_NORM_BOUND
               ) -> List[ProcessMap]:
    return list(iter_map(model, schedule, t_grid, dt=dt, norm_bound=norm_bound))
