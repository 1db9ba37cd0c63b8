"""Exact statevector backend (ground-truth oracle)."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from numba import njit

from .circuit import Gate, GateCircuit
from .config import MATRIX_CAP, dense_cap
from .errors import NumericalIntegrityError, ResourceError, ValidationError
from .pauli import PauliSum, apply_string, pauli_to_matrix

NORM_TOL = 1e-10
IMAG_TOL = 1e-10


@njit(cache=True, nogil=True)
def _apply_1q(psi, q, m):
    low = (1 << q) - 1
    step = 1 << q
    for i in range(psi.size >> 1):
        i0 = ((i & ~low) << 1) | (i & low)
        i1 = i0 | step
        a0 = psi[i0]
        a1 = psi[i1]
        psi[i0] = m[0, 0] * a0 + m[0, 1] * a1
        psi[i1] = m[1, 0] * a0 + m[1, 1] * a1


@njit(cache=True, nogil=True)
def _apply_2q(psi, qa, qb, m):
    # local index = 2 * bit(qa) + bit(qb)
    lo = min(qa, qb)
    hi = max(qa, qb)
    mask_lo = (1 << lo) - 1
    mask_hi = (1 << hi) - 1
    ba = 1 << qa
    bb = 1 << qb
    for i in range(psi.size >> 2):
        j = ((i & ~mask_lo) << 1) | (i & mask_lo)
        base = ((j & ~mask_hi) << 1) | (j & mask_hi)
        i0 = base
        i1 = base | bb
        i2 = base | ba
        i3 = base | ba | bb
        a0 = psi[i0]
        a1 = psi[i1]
        a2 = psi[i2]
        a3 = psi[i3]
        psi[i0] = m[0, 0] * a0 + m[0, 1] * a1 + m[0, 2] * a2 + m[0, 3] * a3
        psi[i1] = m[1, 0] * a0 + m[1, 1] * a1 + m[1, 2] * a2 + m[1, 3] * a3
        psi[i2] = m[2, 0] * a0 + m[2, 1] * a1 + m[2, 2] * a2 + m[2, 3] * a3
        psi[i3] = m[3, 0] * a0 + m[3, 1] * a1 + m[3, 2] * a2 + m[3, 3] * a3


@dataclass(eq=False)
class DenseState:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValidationError(f"expected {1 << self.n_qubits} amplitudes, got {self.amplitudes.shape}")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> DenseState:
        return DenseState(self.n_qubits, self.amplitudes.copy())


def _check_cap(n_qubits: int, cap: int | None = None):
    cap = dense_cap() if cap is None else cap
    if n_qubits > cap:
        raise ResourceError(f"{n_qubits} qubits exceeds dense cap {cap}")


def init_basis(n_qubits: int, index: int) -> DenseState:
    _check_cap(n_qubits)
    if not 0 <= index < (1 << n_qubits):
        raise ValidationError(f"basis index {index} out of range for {n_qubits} qubits")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[index] = 1.0
    return DenseState(n_qubits, amps)


@njit(cache=True, nogil=True)
def _apply_packed(psi, arity, qa, qb, mats, start, stop):
    for k in range(start, stop):
        if arity[k] == 1:
            _apply_1q(psi, qa[k], mats[k])
        else:
            _apply_2q(psi, qa[k], qb[k], mats[k])


@dataclass(frozen=True, eq=False)
class PackedCircuit:
    """Gate list flattened into arrays so the whole sweep runs inside one kernel."""
    n_qubits: int
    arity: np.ndarray
    qa: np.ndarray
    qb: np.ndarray
    mats: np.ndarray

    def __len__(self):
        return int(self.arity.size)


def pack_circuit(circuit: GateCircuit) -> PackedCircuit:
    n = len(circuit.gates)
    arity = np.empty(n, dtype=np.int64)
    qa = np.zeros(n, dtype=np.int64)
    qb = np.zeros(n, dtype=np.int64)
    mats = np.zeros((n, 4, 4), dtype=np.complex128)
    for k, gate in enumerate(circuit.gates):
        m = gate.matrix()
        arity[k] = len(gate.qubits)
        qa[k] = gate.qubits[0]
        if gate.is_two_qubit:
            qb[k] = gate.qubits[1]
            mats[k] = m
        else:
            mats[k, :2, :2] = m
    return PackedCircuit(circuit.n_qubits, arity, qa, qb, mats)


def apply_gate_inplace(gate: Gate, psi: np.ndarray):
    m = np.ascontiguousarray(gate.matrix(), dtype=np.complex128)
    if gate.is_two_qubit:
        _apply_2q(psi, gate.qubits[0], gate.qubits[1], m)
    else:
        _apply_1q(psi, gate.qubits[0], m)


DEADLINE_CHUNK = 64


def apply_circuit(circuit, state: DenseState, deadline=None) -> DenseState:
    """Return ``U psi`` for a GateCircuit or PackedCircuit.

    ``deadline`` is an optional callable checked every ``DEADLINE_CHUNK`` gates.
    """
    if circuit.n_qubits != state.n_qubits:
        raise ValidationError(f"circuit on {circuit.n_qubits} qubits, state on {state.n_qubits}")
    packed = circuit if isinstance(circuit, PackedCircuit) else pack_circuit(circuit)
    psi = state.amplitudes.copy()
    n = len(packed)
    for start in range(0, n, DEADLINE_CHUNK):
        _apply_packed(psi, packed.arity, packed.qa, packed.qb, packed.mats, start, min(n, start + DEADLINE_CHUNK))
        if deadline is not None:
            deadline()
    out = DenseState(state.n_qubits, psi)
    if abs(out.norm - 1.0) > NORM_TOL * max(1, n / 1e4):
        raise NumericalIntegrityError(f"norm drifted to {out.norm!r}")
    return out


def circuit_unitary(circuit: GateCircuit) -> np.ndarray:
    """Dense unitary of ``circuit`` built column by column (small registers only)."""
    n = circuit.n_qubits
    if n > MATRIX_CAP:
        raise ResourceError(f"{n} qubits exceeds dense matrix cap {MATRIX_CAP}")
    packed = pack_circuit(circuit)
    dim = 1 << n
    u = np.eye(dim, dtype=np.complex128)
    for col in range(dim):
        psi = np.ascontiguousarray(u[:, col])
        _apply_packed(psi, packed.arity, packed.qa, packed.qb, packed.mats, 0, len(packed))
        u[:, col] = psi
    return u


def exact_evolution(H: PauliSum, t: float, state: DenseState) -> DenseState:
    """``exp(-i H t) psi`` through eigendecomposition of the dense Hamiltonian."""
    if H.n_qubits != state.n_qubits:
        raise ValidationError("Hamiltonian and state register sizes differ")
    _check_cap(H.n_qubits, min(dense_cap(), MATRIX_CAP))
    if t == 0:
        return state.copy()
    mat = pauli_to_matrix(H)
    evals, evecs = np.linalg.eigh(mat)
    coeffs = evecs.conj().T @ state.amplitudes
    return DenseState(state.n_qubits, evecs @ (np.exp(-1j * evals * t) * coeffs))


def string_expectations(masks, state: DenseState) -> dict[tuple[int, int], complex]:
    """``<psi|P|psi>`` for each unit string ``(x, z)`` in ``masks``."""
    psi = state.amplitudes
    idx = np.arange(psi.size, dtype=np.int64)
    conj = psi.conj()
    out = {}
    for x, z in masks:
        if x == 0 and z == 0:
            out[(x, z)] = complex(np.vdot(psi, psi))
            continue
        out[(x, z)] = complex(np.dot(conj, apply_string(x, z, psi, idx)))
    return out


def expectation(obs: PauliSum, state: DenseState) -> float:
    if obs.n_qubits != state.n_qubits:
        raise ValidationError("observable and state register sizes differ")
    vals = string_expectations(obs.masks.keys(), state)
    total = sum(c * vals[k] for k, c in sorted(obs.masks.items()))
    scale = max(1.0, sum(abs(c) for c in obs.masks.values()))
    if abs(total.imag) > IMAG_TOL * scale:
        raise NumericalIntegrityError(f"expectation has imaginary residue {total.imag:.3e}")
    return float(total.real)


# binary dump: uint64 N, then interleaved little-endian re/im float64 ------------

def dump_state(state: DenseState) -> bytes:
    return struct.pack("<Q", state.n_qubits) + state.amplitudes.astype("<c16").tobytes()


def load_state(blob: bytes) -> DenseState:
    if len(blob) < 8:
        raise ValidationError("state dump too short")
    (n,) = struct.unpack("<Q", blob[:8])
    amps = np.frombuffer(blob[8:], dtype="<c16")
    if amps.size != 1 << n:
        raise ValidationError(f"state dump holds {amps.size} amplitudes, header says N={n}")
    return DenseState(int(n), amps.astype(np.complex128))
