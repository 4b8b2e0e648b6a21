# dfs_gates/model.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from .conventions import AXES, TYPICAL_J_HZ
from .errors import ArgumentError, ModelError
from . import opalg

log = logging.getLogger(__name__)

# channel weights below this are dropped at build time
_WEIGHT_CUTOFF = 1e-15


# -------------------------
# Data model
# -------------------------
@dataclass(frozen=True)
class BathParams:
    Gamma: float
    gamma: float
    T: float

    def __post_init__(self):
        if not (math.isfinite(self.Gamma) and self.Gamma >= 0):
            raise ArgumentError(f"Gamma must be >= 0, got {self.Gamma}")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ArgumentError(f"gamma must be > 0, got {self.gamma}")
        if not (math.isfinite(self.T) and self.T >= 0):
            raise ArgumentError(f"T must be >= 0, got {self.T}")


@dataclass(frozen=True, eq=False)
class BathChannel:
    """One system-bath coupling; L already carries the mixing weight."""

    name: str
    scope: str                 # "collective" | "individual"
    axis: str
    qubit: Optional[int]       # only for individual channels
    weight: float
    params: BathParams
    L: np.ndarray

    @property
    def Gamma(self) -> float:
        return self.params.Gamma

    @property
    def gamma(self) -> float:
        return self.params.gamma

    @property
    def T(self) -> float:
        return self.params.T

    @property
    def source_z(self) -> complex:
        p = self.params
        return (p.Gamma * p.T * p.gamma - 1j * p.Gamma * p.gamma ** 2) / 2

    @property
    def source_w(self) -> float:
        p = self.params
        return p.Gamma * p.T * p.gamma / 2


@dataclass(frozen=True)
class NoiseMix:
    """Collective (cos^2 alpha) versus individual (sin^2 alpha) weight per noise axis."""

    alpha_x: float = math.pi / 2
    alpha_y: float = math.pi / 2
    alpha_z: float = math.pi / 2
    x: bool = False
    y: bool = False
    z: bool = False

    def __post_init__(self):
        for axis in AXES:
            a = self.alpha(axis)
            if not (0.0 <= a <= math.pi / 2 + 1e-12):
                raise ArgumentError(f"alpha_{axis} must lie in [0, pi/2], got {a}")

    def alpha(self, axis: str) -> float:
        return getattr(self, f"alpha_{axis}")

    def enabled(self, axis: str) -> bool:
        return bool(getattr(self, axis))

    def axes(self) -> Tuple[str, ...]:
        return tuple(a for a in AXES if self.enabled(a))

    def weights(self, axis: str) -> Tuple[float, float]:
        a = self.alpha(axis)
        return math.cos(a) ** 2, math.sin(a) ** 2


@dataclass(frozen=True, eq=False)
class SystemModel:
    kind: str                  # "single-logical" | "two-logical" | "physical"
    gate: str
    n_qubits: int
    J: float
    H_gate: np.ndarray
    leo_operator: np.ndarray
    channels: Tuple[BathChannel, ...]
    n_pairs: Optional[int]     # None for the bare physical qubit

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    @property
    def encoder(self) -> np.ndarray:
        """Isometry from the logical space into the physical space."""
        if self.n_pairs is None:
            return np.eye(self.dim, dtype=complex)
        return opalg.logical_basis(self.n_pairs)

    @property
    def d_logical(self) -> int:
        return self.encoder.shape[1]

    @property
    def projector(self) -> np.ndarray:
        V = self.encoder
        return V @ opalg.dagger(V)

    def describe(self) -> str:
        chans = ",".join(c.name for c in self.channels) or "closed"
        return f"{self.kind}:{self.gate}:J={self.J:g}:[{chans}]"


# -------------------------
# Helpers
# -------------------------
def _check_params(J: float, Gamma: float, gamma: float, T: float) -> BathParams:
    if not (math.isfinite(J) and J >= 0):
        raise ArgumentError(f"J must be >= 0, got {J}")
    return BathParams(Gamma=Gamma, gamma=gamma, T=T)


def _channel(name: str, scope: str, axis: str, qubits: List[int], n_qubits: int,
             weight: float, params: BathParams, overrides: Mapping[str, BathParams]) -> BathChannel:
    L = weight * opalg.sum_pauli(axis, qubits, n_qubits)
    return BathChannel(
        name=name,
        scope=scope,
        axis=axis,
        qubit=qubits[0] if scope == "individual" else None,
        weight=weight,
        params=overrides.get(name, params),
        L=L,
    )


def _mixed_channels(mix: NoiseMix, n_qubits: int, params: BathParams,
                    overrides: Mapping[str, BathParams]) -> Tuple[BathChannel, ...]:
    all_qubits = list(range(1, n_qubits + 1))
    out: List[BathChannel] = []
    for axis in mix.axes():
        w_col, w_ind = mix.weights(axis)
        if w_col > _WEIGHT_CUTOFF:
            out.append(_channel(f"collective-{axis}", "collective", axis, all_qubits,
                                n_qubits, w_col, params, overrides))
        if w_ind > _WEIGHT_CUTOFF:
            for q in all_qubits:
                out.append(_channel(f"individual-{axis}-{q}", "individual", axis, [q],
                                    n_qubits, w_ind, params, overrides))
    unknown = set(overrides) - {c.name for c in out}
    if unknown:
        raise ArgumentError(f"overrides for unknown channels: {sorted(unknown)}")
    return tuple(out)


def _assert_leo_commutes(leo: np.ndarray, H: np.ndarray, gate: str):
    resid = opalg.frobenius_norm(opalg.commutator(leo, H))
    if resid > 1e-12:
        raise ModelError(f"LEO operator does not commute with gate {gate} (residual {resid:.3e})")


# -------------------------
# Builders
# -------------------------
def build_single_logical_model(gate: str, J: float, mix: NoiseMix, Gamma: float, gamma: float,
                               T: float, overrides: Optional[Mapping[str, BathParams]] = None
                               ) -> SystemModel:
    """One logical qubit on two spins, H_gate = -J T_gate, mixed collective and individual baths."""
    params = _check_params(J, Gamma, gamma, T)
    if not mix.axes():
        raise ArgumentError("no noise axis enabled (use Gamma = 0 for a closed system)")
    Tx, Ty, Tz = opalg.logical_generators(1, 1)
    gens = {"Tx": Tx, "Ty": Ty, "Tz": Tz}
    if gate not in gens:
        raise ArgumentError(f"single-logical gate must be one of {sorted(gens)}, got {gate!r}")
    H = -J * gens[gate]
    leo = opalg.sum_pauli("z", [1, 2], 2)
    _assert_leo_commutes(leo, H, gate)
    channels = _mixed_channels(mix, 2, params, overrides or {})
    return SystemModel(kind="single-logical", gate=gate, n_qubits=2, J=J, H_gate=H,
                       leo_operator=leo, channels=channels, n_pairs=1)


def check_entangler_identity(tol: float = 1e-12) -> float:
    """Residual of T_z1 T_z2 = -Z_2 Z_3 on the encoded two-pair space."""
    _, _, Tz1 = opalg.logical_generators(1, 2)
    _, _, Tz2 = opalg.logical_generators(2, 2)
    ZZ = opalg.pauli("z", 2, 4) @ opalg.pauli("z", 3, 4)
    P = opalg.dfs_projector(2)
    resid = opalg.frobenius_norm(P @ (Tz1 @ Tz2 + ZZ) @ P)
    if resid > tol:
        raise ModelError(f"Tz1 Tz2 = -Z2 Z3 fails on the DFS (residual {resid:.3e})")
    return resid


def build_two_logical_model(J: float, mix: NoiseMix, Gamma: float, gamma: float, T: float,
                            overrides: Optional[Mapping[str, BathParams]] = None) -> SystemModel:
    """Two logical qubits on spins (1,2)(3,4), H_gate = -J T_z1 T_z2, z noise only.

    The collective channel couples through sigma^z summed over all four spins.
    """
    params = _check_params(J, Gamma, gamma, T)
    if mix.x or mix.y:
        raise ArgumentError("two-logical model supports z noise only")
    if not mix.z:
        raise ArgumentError("no noise axis enabled (use Gamma = 0 for a closed system)")
    _, _, Tz1 = opalg.logical_generators(1, 2)
    _, _, Tz2 = opalg.logical_generators(2, 2)
    check_entangler_identity()
    H = -J * (Tz1 @ Tz2)
    leo = opalg.sum_pauli("z", [1, 2, 3, 4], 4)
    _assert_leo_commutes(leo, H, "TzTz")
    channels = _mixed_channels(mix, 4, params, overrides or {})
    return SystemModel(kind="two-logical", gate="TzTz", n_qubits=4, J=J, H_gate=H,
                       leo_operator=leo, channels=channels, n_pairs=2)


def build_physical_qubit_model(gate_axis: str, J: float, Gamma: float, gamma: float, T: float
                               ) -> SystemModel:
    """Bare qubit, H_gate = J sigma^{x|z}, one individual sigma^z bath."""
    params = _check_params(J, Gamma, gamma, T)
    if gate_axis not in ("x", "z"):
        raise ArgumentError(f"physical gate axis must be 'x' or 'z', got {gate_axis!r}")
    H = J * opalg.pauli(gate_axis, 1, 1)
    sz = opalg.pauli("z", 1, 1)
    chan = BathChannel(name="individual-z-1", scope="individual", axis="z", qubit=1,
                       weight=1.0, params=params, L=sz.copy())
    return SystemModel(kind="physical", gate=gate_axis, n_qubits=1, J=J, H_gate=H,
                       leo_operator=sz, channels=(chan,), n_pairs=None)


def closed(model: SystemModel) -> SystemModel:
    """Same model with every bath coupling switched off."""
    return SystemModel(kind=model.kind, gate=model.gate, n_qubits=model.n_qubits, J=model.J,
                       H_gate=model.H_gate, leo_operator=model.leo_operator, channels=(),
                       n_pairs=model.n_pairs)


def leo_relation(A: np.ndarray, B: np.ndarray, tol: float = 1e-12) -> str:
    """'commutes', 'anticommutes' or 'mixed'."""
    if opalg.frobenius_norm(opalg.commutator(A, B)) <= tol:
        return "commutes"
    if opalg.frobenius_norm(opalg.anticommutator(A, B)) <= tol:
        return "anticommutes"
    return "mixed"


def _channel_leo_relation(model: SystemModel, c: BathChannel) -> str:
    """z couplings against the whole LEO; x/y couplings qubit by qubit against sigma^z_q."""
    if c.axis == "z":
        return leo_relation(c.L, model.leo_operator)
    n = model.n_qubits
    qubits = [c.qubit] if c.scope == "individual" else range(1, n + 1)
    rels = {leo_relation(opalg.pauli(c.axis, q, n), opalg.pauli("z", q, n)) for q in qubits}
    return rels.pop() if len(rels) == 1 else "mixed"


def channel_table(model: SystemModel) -> List[Dict[str, object]]:
    return [
        {"name": c.name, "scope": c.scope, "axis": c.axis, "weight": c.weight,
         "Gamma": c.Gamma, "gamma": c.gamma, "T": c.T, "leo": _channel_leo_relation(model, c)}
        for c in model.channels
    ]


# -------------------------
# Units
# -------------------------
@dataclass(frozen=True)
class TimeUnits:
    J_hz: float

    @property
    def time_unit_s(self) -> float:
        return 1.0 / self.J_hz

    @property
    def time_unit_us(self) -> float:
        return self.time_unit_s * 1e6

    def duration_s(self, theta: float) -> float:
        """Physical duration of rotation angle theta = J t."""
        return theta * self.time_unit_s

    def duration_us(self, theta: float) -> float:
        return self.duration_s(theta) * 1e6


def physical_units(J_hz: float = TYPICAL_J_HZ) -> TimeUnits:
    if not (math.isfinite(J_hz) and J_hz > 0):
        raise ArgumentError(f"coupling frequency must be > 0, got {J_hz}")
    return TimeUnits(J_hz=float(J_hz))
