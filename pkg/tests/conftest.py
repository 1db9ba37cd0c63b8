import itertools

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import HealthCheck, settings

from qtnbench.chem_io import SpinOrbitalIntegrals
from qtnbench.circuit import Gate, GateCircuit

settings.register_profile("repo", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


def fock_annihilator(n: int, p: int) -> np.ndarray:
    """``a_p`` in the occupation basis, built by counting occupied modes below ``p``.

    Basis index bit ``q`` is the occupation of mode ``q``. Independent of any
    Pauli algebra, so it serves as the oracle for the mapping.
    """
    dim = 1 << n
    a = np.zeros((dim, dim))
    for col in range(dim):
        if not (col >> p) & 1:
            continue
        sign = (-1) ** bin(col & ((1 << p) - 1)).count("1")
        a[col ^ (1 << p), col] = sign
    return a


def fock_hamiltonian(ints: SpinOrbitalIntegrals) -> np.ndarray:
    n = ints.n_so
    a = [sp.csr_matrix(fock_annihilator(n, p)) for p in range(n)]
    ad = [m.T.tocsr() for m in a]
    dim = 1 << n
    H = sp.csr_matrix(ints.e_core * np.eye(dim, dtype=complex))
    for p, q in itertools.product(range(n), repeat=2):
        if ints.h[p, q] != 0:
            H = H + ints.h[p, q] * (ad[p] @ a[q])
    pairs_c = {(p, q): ad[p] @ ad[q] for p in range(n) for q in range(n) if p != q}
    pairs_a = {(r, s): a[r] @ a[s] for r in range(n) for s in range(n) if r != s}
    for p, q, r, s in zip(*np.nonzero(ints.g)):
        if p != q and r != s:
            H = H + 0.5 * ints.g[p, q, r, s] * (pairs_c[p, q] @ pairs_a[r, s])
    return H.toarray()


def random_integrals(n_so: int, rng, complex_valued: bool = False, two_body: bool = True,
                     n_e: int | None = None) -> SpinOrbitalIntegrals:
    """Random spin-orbital integrals with the physicist-tensor symmetries."""
    h = rng.standard_normal((n_so, n_so))
    if complex_valued:
        h = h + 1j * rng.standard_normal((n_so, n_so))
    h = (h + h.conj().T) / 2
    g = None
    if two_body:
        g = rng.standard_normal((n_so,) * 4)
        if complex_valued:
            g = g + 1j * rng.standard_normal((n_so,) * 4)
        # antisymmetry under p<->q, r<->s and Hermiticity g[pqrs] = conj(g[srqp])
        g = g - g.transpose(1, 0, 2, 3)
        g = g - g.transpose(0, 1, 3, 2)
        g = (g + g.transpose(3, 2, 1, 0).conj()) / 2
        g *= 0.1
    n_e = n_so // 2 if n_e is None else n_e
    occ = np.zeros(n_so, dtype=int)
    occ[:n_e] = 1
    return SpinOrbitalIntegrals(h=h, g=g, e_core=float(rng.standard_normal()), occupation=occ)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


_ONE = {
    "H": lambda a: np.array([[1, 1], [1, -1]]) / np.sqrt(2),
    "RX": lambda a: np.array([[np.cos(a / 2), -1j * np.sin(a / 2)], [-1j * np.sin(a / 2), np.cos(a / 2)]]),
    "RY": lambda a: np.array([[np.cos(a / 2), -np.sin(a / 2)], [np.sin(a / 2), np.cos(a / 2)]]),
    "RZ": lambda a: np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)]),
}


def _two_qubit_action(kind, angle, b0, b1):
    """Image of local basis |b0 b1> as {(c0, c1): amplitude}."""
    if kind == "CX":
        return {(b0, b1 ^ b0): 1.0}
    if kind == "SWAP":
        return {(b1, b0): 1.0}
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    if kind == "RZZ":
        return {(b0, b1): np.exp(-0.5j * angle * (1 - 2 * (b0 ^ b1)))}
    if kind == "RXX":
        return {(b0, b1): c, (1 - b0, 1 - b1): -1j * s}
    if kind == "RYY":
        # YY|b0 b1> = -(+1 if b0 == b1 else -1) |~b0 ~b1>
        yy = -1.0 if b0 == b1 else 1.0
        return {(b0, b1): c, (1 - b0, 1 - b1): -1j * s * yy}
    if kind == "RZX":
        # Z on the first qubit, X on the second
        return {(b0, b1): c, (b0, 1 - b1): -1j * s * (1 - 2 * b0)}
    raise KeyError(kind)


def gate_list_unitary(gates, n: int) -> np.ndarray:
    """Dense unitary of a gate list built column by column from basis actions."""
    dim = 1 << n
    U = np.eye(dim, dtype=complex)
    for g in gates:
        G = np.zeros((dim, dim), dtype=complex)
        for col in range(dim):
            if len(g.qubits) == 1:
                (q,) = g.qubits
                m = _ONE[g.kind](g.angle)
                b = (col >> q) & 1
                for out in (0, 1):
                    G[(col & ~(1 << q)) | (out << q), col] += m[out, b]
            else:
                qa, qb = g.qubits
                b0, b1 = (col >> qa) & 1, (col >> qb) & 1
                for (c0, c1), amp in _two_qubit_action(g.kind, g.angle, b0, b1).items():
                    row = (col & ~(1 << qa) & ~(1 << qb)) | (c0 << qa) | (c1 << qb)
                    G[row, col] += amp
        U = G @ U
    return U


def equal_up_to_phase(A, B, atol):
    k = np.unravel_index(np.argmax(np.abs(B)), B.shape)
    phase = A[k] / B[k]
    return abs(abs(phase) - 1) <= atol and np.abs(A - phase * B).max() <= atol


def random_circuit(n, n_gates, rng):
    kinds1 = ["H", "RX", "RY", "RZ"]
    kinds2 = ["CX", "SWAP", "RXX", "RYY", "RZZ", "RZX"]
    gates = []
    for _ in range(n_gates):
        if rng.random() < 0.4:
            k = kinds1[rng.integers(4)]
            gates.append(Gate(k, (int(rng.integers(n)),), None if k == "H" else float(rng.normal())))
        else:
            k = kinds2[rng.integers(6)]
            a, b = rng.choice(n, 2, replace=False)
            gates.append(Gate(k, (int(a), int(b)), float(rng.normal()) if k.startswith("R") else None))
    return GateCircuit(n, tuple(gates))
