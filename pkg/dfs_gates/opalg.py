# dfs_gates/opalg.py
"""
Dense operator algebra at small dimensions.

Operators are plain complex128 numpy arrays of shape (dim, dim). Qubit 1 is the
leftmost tensor factor and |0> is the +1 eigenstate of sigma^z, so the
computational basis of n qubits is ordered |0...0>, |0...1>, ..., |1...1>.

One logical qubit lives on each pair of physical qubits (2k-1, 2k):
    |0>_L = |01>,  |1>_L = |10>.
"""
from __future__ import annotations

from functools import reduce
from typing import Sequence, Tuple

import numpy as np
import scipy.linalg

from .errors import ArgumentError
from .conventions import NORMALIZATION_TOL

Operator = np.ndarray
StateVector = np.ndarray

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_I2 = np.eye(2, dtype=complex)

# per-pair encoded basis indices inside the 4-dim pair space: |01> -> 1, |10> -> 2
_PAIR_CODEWORDS = (1, 2)


# -------------------------
# Primitive suite
# -------------------------
def dagger(A: Operator) -> Operator:
    return np.conj(np.swapaxes(A, -1, -2))


def commutator(A: Operator, B: Operator) -> Operator:
    return A @ B - B @ A


def anticommutator(A: Operator, B: Operator) -> Operator:
    return A @ B + B @ A


def trace(A: Operator) -> complex:
    return complex(np.trace(A, axis1=-2, axis2=-1))


def frobenius_norm(A: Operator) -> float:
    return float(np.linalg.norm(A, ord="fro"))


def is_hermitian(A: Operator, tol: float = 1e-12) -> bool:
    return frobenius_norm(A - dagger(A)) <= tol


def hermitian_eigenvalues(A: Operator) -> np.ndarray:
    """Ascending eigenvalues of the Hermitian part of A."""
    return np.linalg.eigvalsh(0.5 * (A + dagger(A)))


def kron_all(ops: Sequence[Operator]) -> Operator:
    return reduce(np.kron, ops)


def _check_finite(A: Operator, what: str = "operator"):
    if not np.all(np.isfinite(A)):
        raise ArgumentError(f"{what} has non-finite entries")


# -------------------------
# Pauli / tensor construction
# -------------------------
def pauli(axis: str, qubit: int, n_qubits: int) -> Operator:
    """sigma^axis on `qubit` (1-based), identity on the other n_qubits - 1 factors."""
    if axis not in _PAULI:
        raise ArgumentError(f"unknown Pauli axis {axis!r}")
    if n_qubits < 1:
        raise ArgumentError(f"n_qubits must be >= 1, got {n_qubits}")
    if not 1 <= qubit <= n_qubits:
        raise ArgumentError(f"qubit index {qubit} outside 1..{n_qubits}")
    factors = [_I2] * n_qubits
    factors[qubit - 1] = _PAULI[axis]
    return kron_all(factors)


def sum_pauli(axis: str, qubits: Sequence[int], n_qubits: int) -> Operator:
    dim = 2 ** n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for q in qubits:
        out += pauli(axis, q, n_qubits)
    return out


def basis_ket(bits: str) -> StateVector:
    """Computational basis vector from a bit string such as '0101'."""
    if not bits or any(b not in "01" for b in bits):
        raise ArgumentError(f"bad bit string {bits!r}")
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


# -------------------------
# DFS encoding and logical generators
# -------------------------
def _check_pair(pair: int, n_pairs: int):
    if n_pairs < 1:
        raise ArgumentError(f"n_pairs must be >= 1, got {n_pairs}")
    if not 1 <= pair <= n_pairs:
        raise ArgumentError(f"pair index {pair} outside 1..{n_pairs}")


def logical_generators(pair: int, n_pairs: int) -> Tuple[Operator, Operator, Operator]:
    """(T_x, T_y, T_z) of the logical qubit stored on physical qubits (2*pair-1, 2*pair)."""
    _check_pair(pair, n_pairs)
    n = 2 * n_pairs
    a, b = 2 * pair - 1, 2 * pair
    sx = lambda q: pauli("x", q, n)
    sy = lambda q: pauli("y", q, n)
    sz = lambda q: pauli("z", q, n)
    Tx = (sx(a) @ sx(b) + sy(a) @ sy(b)) / 2
    Ty = (sy(a) @ sx(b) - sx(a) @ sy(b)) / 2
    Tz = (sz(a) - sz(b)) / 2
    return Tx, Ty, Tz


def logical_basis(n_pairs: int) -> np.ndarray:
    """Isometry V (2^(2n) x 2^n) whose k-th column encodes logical basis state k."""
    if n_pairs < 1:
        raise ArgumentError(f"n_pairs must be >= 1, got {n_pairs}")
    d_phys = 4 ** n_pairs
    d_log = 2 ** n_pairs
    V = np.zeros((d_phys, d_log), dtype=complex)
    for k in range(d_log):
        bits = format(k, f"0{n_pairs}b")
        idx = 0
        for b in bits:
            idx = idx * 4 + _PAIR_CODEWORDS[int(b)]
        V[idx, k] = 1.0
    return V


def encode_logical(amplitudes: Sequence[complex], n_pairs: int) -> StateVector:
    """Physical state of the logical amplitudes, e.g. (a, b) -> a|01> + b|10>."""
    amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if amps.size != 2 ** n_pairs:
        raise ArgumentError(f"expected {2 ** n_pairs} amplitudes, got {amps.size}")
    norm = float(np.vdot(amps, amps).real)
    if abs(norm - 1.0) > NORMALIZATION_TOL:
        raise ArgumentError(f"logical amplitudes not normalized (norm^2 = {norm:.12g})")
    return logical_basis(n_pairs) @ amps


def dfs_projector(n_pairs: int) -> Operator:
    V = logical_basis(n_pairs)
    return V @ dagger(V)


# -------------------------
# Matrix functions
# -------------------------
def matrix_exponential(A: Operator, s: complex = 1.0) -> Operator:
    """e^{sA}. Hermitian A goes through eigh, anything else through scipy's Pade expm."""
    A = np.asarray(A, dtype=complex)
    _check_finite(A)
    if not np.isfinite(s):
        raise ArgumentError("exponent scale is not finite")
    if is_hermitian(A):
        w, V = np.linalg.eigh(0.5 * (A + dagger(A)))
        return (V * np.exp(s * w)) @ dagger(V)
    return scipy.linalg.expm(s * A)


class SpectralPropagator:
    """exp(-i H t) for many t from a single eigendecomposition of Hermitian H."""

    def __init__(self, H: Operator):
        H = np.asarray(H, dtype=complex)
        _check_finite(H, "Hamiltonian")
        if not is_hermitian(H, tol=1e-10):
            raise ArgumentError("propagator needs a Hermitian generator")
        self.evals, self.evecs = np.linalg.eigh(0.5 * (H + dagger(H)))

    def at(self, t: float) -> Operator:
        return (self.evecs * np.exp(-1j * self.evals * t)) @ dagger(self.evecs)
