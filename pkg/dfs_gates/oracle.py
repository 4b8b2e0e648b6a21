# dfs_gates/oracle.py
"""
Closed-form reference solutions. Nothing here calls the evolver.

When every operator in a model commutes (diagonal H_gate, diagonal L_j), the commutator
term of the O equations vanishes and O_{z,w}^j(t) = f_{z,w}(t) L_j with

    f' = s - gamma f,  f(0) = 0   =>   f(t) = s (1 - e^{-gamma t}) / gamma
    s_z = (Gamma T gamma - i Gamma gamma^2) / 2,   s_w = Gamma T gamma / 2.

Inserting O = f L into the master equation gives, element-wise in the eigenbasis of L,

    d rho_kl / dt = [F* (l_k l_l - l_l^2) + F (l_k l_l - l_k^2)] rho_kl,   F = f_z + f_w,

so rho_kl picks up exp(G* (l_k l_l - l_l^2) + G (l_k l_l - l_k^2)) with G = int_0^t F.
"""
from __future__ import annotations

import logging
import math
import dataclasses
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np
import scipy.optimize

from .errors import ArgumentError
from .model import NoiseMix, SystemModel, build_single_logical_model
from . import opalg

log = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    residual: float
    tol: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: residual {self.residual:.3e} (tol {self.tol:.1e})"


def _check_gamma(gamma: float):
    if not gamma > 0:
        raise ArgumentError(f"gamma must be > 0, got {gamma}")


def _sources(Gamma: float, gamma: float, T: float) -> Tuple[complex, float]:
    return (Gamma * T * gamma - 1j * Gamma * gamma ** 2) / 2, Gamma * T * gamma / 2


# -------------------------
# Scalar O solution
# -------------------------
def scalar_O_solution(Gamma: float, gamma: float, T: float, t: ArrayLike
                      ) -> Tuple[ArrayLike, ArrayLike]:
    _check_gamma(gamma)
    s_z, s_w = _sources(Gamma, gamma, T)
    g = (1.0 - np.exp(-gamma * np.asarray(t, dtype=float))) / gamma
    return s_z * g, s_w * g


def scalar_O_residual(Gamma: float, gamma: float, T: float, t: ArrayLike) -> float:
    """max |f' - s + gamma f| over t, with f' = s e^{-gamma t}."""
    _check_gamma(gamma)
    s_z, s_w = _sources(Gamma, gamma, T)
    t = np.asarray(t, dtype=float)
    f_z, f_w = scalar_O_solution(Gamma, gamma, T, t)
    decay = np.exp(-gamma * t)
    r_z = np.abs(s_z * decay - s_z + gamma * f_z)
    r_w = np.abs(s_w * decay - s_w + gamma * f_w)
    return float(max(np.max(r_z), np.max(r_w)))


def _integrated_F(Gamma: float, gamma: float, T: float, t: ArrayLike) -> ArrayLike:
    """G(t) = int_0^t (f_z + f_w) ds."""
    s_z, s_w = _sources(Gamma, gamma, T)
    t = np.asarray(t, dtype=float)
    return (s_z + s_w) * (t - (1.0 - np.exp(-gamma * t)) / gamma) / gamma


# -------------------------
# Dephasing of one qubit
# -------------------------
def _bracket_terms(L: np.ndarray, Oz: np.ndarray, Ow: np.ndarray, rho: np.ndarray) -> np.ndarray:
    Ld = opalg.dagger(L)
    c = opalg.commutator
    return (c(L, rho @ opalg.dagger(Oz)) - c(Ld, Oz @ rho)
            + c(Ld, rho @ opalg.dagger(Ow)) - c(L, Ow @ rho))


def _coherence_rate(f_z: complex, f_w: complex) -> complex:
    """d rho_01/dt / rho_01 for L = sigma^z and O = f sigma^z, from the four bracket terms."""
    sz = opalg.pauli("z", 1, 1)
    E01 = np.array([[0, 1], [0, 0]], dtype=complex)
    return complex(_bracket_terms(sz, f_z * sz, f_w * sz, E01)[0, 1])


def dephasing_prefactor() -> float:
    """kappa in d rho_01/dt = -kappa Re(f_z + f_w) rho_01, read off the bracket terms.

    Also asserts the imaginary part of F drops out.
    """
    kappa = -_coherence_rate(1.0, 0.0).real
    for fz, fw in ((0.0, 1.0), (0.3, 0.7)):
        if abs(_coherence_rate(fz, fw) + kappa * (fz + fw)) > 1e-12:
            raise AssertionError("coherence rate is not linear in Re(f_z + f_w)")
    if abs(_coherence_rate(1j, 0.0)) > 1e-12 or abs(_coherence_rate(0.0, 1j)) > 1e-12:
        raise AssertionError("imaginary part of f enters the coherence rate")
    return kappa


def dephasing_coherence(Gamma: float, gamma: float, T: float, t: ArrayLike) -> ArrayLike:
    """|rho_01(t) / rho_01(0)| for one qubit, L = sigma^z, H_s = 0."""
    _check_gamma(gamma)
    kappa = dephasing_prefactor()
    return np.exp(-kappa * _integrated_F(Gamma, gamma, T, t).real)


def dephasing_residual(Gamma: float, gamma: float, T: float, t: ArrayLike) -> float:
    """max |c' - r(t) c| with r(t) taken from the bracket terms at the scalar solution."""
    kappa = dephasing_prefactor()
    t = np.atleast_1d(np.asarray(t, dtype=float))
    c = dephasing_coherence(Gamma, gamma, T, t)
    dc = -kappa * Gamma * T * (1.0 - np.exp(-gamma * t)) * c
    f_z, f_w = scalar_O_solution(Gamma, gamma, T, t)
    rate = np.array([_coherence_rate(a, b).real for a, b in zip(f_z, f_w)])
    return float(np.max(np.abs(dc - rate * c)))


# -------------------------
# Closed system
# -------------------------
def closed_system_reference(H: np.ndarray, t: float, rho0: np.ndarray) -> np.ndarray:
    if not opalg.is_hermitian(np.asarray(H, dtype=complex), tol=1e-10):
        raise ArgumentError("closed-system reference needs a Hermitian Hamiltonian")
    U = opalg.matrix_exponential(H, -1j * t)
    return U @ rho0 @ opalg.dagger(U)


# -------------------------
# Commuting (diagonal) models
# -------------------------
def _is_diagonal(A: np.ndarray, tol: float = 1e-14) -> bool:
    return np.max(np.abs(A - np.diag(np.diag(A))), initial=0.0) <= tol


def commuting_gate_fidelity(model: SystemModel, t: ArrayLike) -> ArrayLike:
    """Haar-averaged gate fidelity when H_gate, the LEO and every L_j are diagonal."""
    ops = [model.H_gate, model.leo_operator] + [c.L for c in model.channels]
    if not all(_is_diagonal(np.asarray(A)) for A in ops):
        raise ArgumentError("commuting-gate oracle needs diagonal H_gate, LEO and L_j")
    V = model.encoder
    idx = np.argmax(np.abs(V), axis=0)
    d = V.shape[1]
    t = np.asarray(t, dtype=float)
    expo = np.zeros(t.shape + (d, d), dtype=complex)
    for chan in model.channels:
        lam = np.real(np.diag(chan.L))[idx]
        G = np.asarray(_integrated_F(chan.Gamma, chan.gamma, chan.T, t))[..., None, None]
        lk, ll = lam[:, None], lam[None, :]
        expo = expo + np.conj(G) * (lk * ll - ll ** 2) + G * (lk * ll - lk ** 2)
    coh = np.exp(expo)
    F = (d + np.sum(coh, axis=(-2, -1)).real) / (d * (d + 1))
    return float(F) if F.ndim == 0 else F


def commuting_gate_threshold(model: SystemModel, F_star: float, theta_max: float,
                             step: float = 0.01 * math.pi) -> Optional[float]:
    """First theta = J t with F(theta) = F_star, or None below theta_max."""
    if not model.J > 0:
        raise ArgumentError("threshold needs J > 0")
    fid = lambda th: commuting_gate_fidelity(model, th / model.J) - F_star
    grid = np.arange(0.0, theta_max + 0.5 * step, step)
    vals = commuting_gate_fidelity(model, grid / model.J) - F_star
    below = np.flatnonzero(vals < 0)
    if below.size == 0:
        return None
    i = int(below[0])
    if i == 0:
        return 0.0
    return float(scipy.optimize.brentq(fid, grid[i - 1], grid[i], xtol=1e-12))


# -------------------------
# DFS immunity battery
# -------------------------
def dfs_immunity_reference(n_pairs: int, tol: float = 1e-12) -> List[Check]:
    if n_pairs < 1:
        raise ArgumentError(f"n_pairs must be >= 1, got {n_pairs}")
    n = 2 * n_pairs
    V = opalg.logical_basis(n_pairs)
    checks: List[Check] = []

    worst = 0.0
    for p in range(1, n_pairs + 1):
        S = opalg.sum_pauli("z", [2 * p - 1, 2 * p], n)
        worst = max(worst, float(np.max(np.abs(S @ V))))
    checks.append(Check("pair sigma^z sums annihilate encoded states", worst <= tol, worst, tol))

    L0 = opalg.sum_pauli("z", list(range(1, n + 1)), n)
    resid = float(np.max(np.abs(L0 @ V)))
    checks.append(Check("collective sigma^z annihilates encoded states", resid <= tol, resid, tol))

    rng = np.random.Generator(np.random.Philox(7))
    a = rng.standard_normal(V.shape[1]) + 1j * rng.standard_normal(V.shape[1])
    a /= np.linalg.norm(a)
    psi = V @ a
    rho = np.outer(psi, psi.conj())
    f_z, f_w = scalar_O_solution(0.005, 1.0, 50.0, 1.7)
    brackets = _bracket_terms(L0, f_z * L0, f_w * L0, rho)
    resid = opalg.frobenius_norm(brackets)
    checks.append(Check("collective-z bracket terms vanish on DFS states", resid <= tol, resid, tol))
    return checks


def transparency_models(gate: str = "Tz", Gamma: float = 0.005, gamma: float = 1.0,
                        T: float = 50.0) -> Tuple[SystemModel, SystemModel]:
    """An individual-z model, and the same model with a full-weight collective z channel added."""
    base = build_single_logical_model(gate, 1.0, NoiseMix(alpha_z=math.pi / 2, z=True),
                                      Gamma, gamma, T)
    collective = build_single_logical_model(gate, 1.0, NoiseMix(alpha_z=0.0, z=True),
                                            Gamma, gamma, T).channels
    return base, dataclasses.replace(base, channels=base.channels + collective)
