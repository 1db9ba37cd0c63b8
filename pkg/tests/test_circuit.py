import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from conftest import equal_up_to_phase, gate_list_unitary, random_circuit
from qtnbench.benchlab.family import bundled_integrals
from qtnbench.circuit import (DepthReport, Gate, GateCircuit, cancel_adjacent, depth_metrics,
                              pauli_rotation_gates, route_linear, trotter_circuit)
from qtnbench.errors import ContractViolation, ValidationError
from qtnbench.fermion_map import jordan_wigner_hamiltonian
from qtnbench.pauli import PauliSum, pauli_to_matrix
from qtnbench.sim_dense import circuit_unitary

UNITARY_ATOL = 1e-12
ROUTED_ATOL = 1e-10

_X = np.array([[0, 1], [1, 0]])
_Z = np.diag([1.0, -1.0])


@pytest.mark.parametrize("seed", range(3))
def test_gate_matrices_match_independent_oracle(seed):
    circ = random_circuit(4, 30, np.random.default_rng(seed))
    np.testing.assert_allclose(circuit_unitary(circ), gate_list_unitary(circ.gates, 4), atol=UNITARY_ATOL)


def test_zz_ladder_example():
    gates = pauli_rotation_gates("ZZ", 0.4)
    assert [(g.kind, g.qubits) for g in gates] == [("CX", (0, 1)), ("RZ", (1,)), ("CX", (0, 1))]
    assert gates[1].angle == 0.4


def test_single_x_example():
    assert [g.kind for g in pauli_rotation_gates("X", 0.2)] == ["H", "RZ", "H"]


@pytest.mark.parametrize("axes", ["YIZ", "XYZ", "ZIIX", "YY", "IXIY"])
def test_rotation_matches_expm(rng, axes):
    theta = float(rng.normal())
    n = len(axes)
    P = pauli_to_matrix(PauliSum.from_list([(1.0, axes)]))
    got = gate_list_unitary(pauli_rotation_gates(axes, theta), n)
    np.testing.assert_allclose(got, expm(-0.5j * theta * P), atol=UNITARY_ATOL)
    touched = {q for g in pauli_rotation_gates(axes, theta) for q in g.qubits}
    assert touched == {q for q, ch in enumerate(axes) if ch != "I"}


def test_identity_string_rejected():
    with pytest.raises(ContractViolation):
        pauli_rotation_gates("II", 0.3)


def test_single_z_term():
    c, t = 0.7, 1.3
    circ = trotter_circuit(PauliSum.from_list([(c, "Z")]), t)
    assert [(g.kind, g.qubits, g.angle) for g in circ.gates] == [("RZ", (0,), 2 * c * t)]


def test_zero_time_is_empty():
    H = PauliSum.from_list([(0.3, "XY"), (0.2, "ZI"), (1.0, "II")])
    circ = trotter_circuit(H, 0.0)
    assert len(circ) == 0
    assert circ.metadata["identity_coefficient"] == 1.0


def test_two_term_order():
    a, b, t = 0.4, -0.9, 0.3
    circ = trotter_circuit(PauliSum.from_list([(b, "Z"), (a, "X")]), t)
    # X sorts before Z and the first canonical term acts first
    expected = expm(-1j * b * t * _Z) @ expm(-1j * a * t * _X)
    np.testing.assert_allclose(circuit_unitary(circ), expected, atol=UNITARY_ATOL)


def test_trotter_product_matches_term_exponentials(rng):
    ints = bundled_integrals(4, seed=0)
    H = jordan_wigner_hamiltonian(ints)
    t, n = 0.7, 3
    U = np.eye(16, dtype=complex)
    items = [(a, c) for a, _, _, c in H.canonical_items() if set(a) != {"I"}]
    for _ in range(n):
        for axes, c in items:
            P = pauli_to_matrix(PauliSum.from_list([(1.0, axes)]))
            U = expm(-1j * c.real * P * t / n) @ U
    got = circuit_unitary(trotter_circuit(H, t, n))
    assert equal_up_to_phase(got, U, 1e-10)
    np.testing.assert_allclose(circuit_unitary(trotter_circuit(H, t, n, optimize=False)), got, atol=1e-10)


def test_complex_coefficients_rejected():
    with pytest.raises(ValidationError):
        trotter_circuit(PauliSum.from_list([(1j, "Z")]), 1.0)
    with pytest.raises(ValidationError):
        trotter_circuit(PauliSum.from_list([(1.0, "Z")]), 1.0, n_steps=0)


@pytest.mark.parametrize("n_so", [4, 6, 8, 10])
def test_unitarity(n_so):
    H = jordan_wigner_hamiltonian(bundled_integrals(n_so, seed=0))
    U = circuit_unitary(trotter_circuit(H, 0.5))
    assert np.abs(U.conj().T @ U - np.eye(1 << n_so)).max() <= 1e-10


def test_first_order_error_rate():
    # fixed small H and t inside the asymptotic regime; error halves as steps double
    H = jordan_wigner_hamiltonian(bundled_integrals(4, seed=0))
    M = pauli_to_matrix(H) - H.identity_coefficient.real * np.eye(16)
    t = 0.5
    exact = expm(-1j * M * t)
    errs = [np.linalg.norm(circuit_unitary(trotter_circuit(H, t, n)) - exact, 2) for n in (1, 2, 4, 8)]
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios >= 1.6) & (ratios <= 2.4)), ratios


def test_cancel_adjacent():
    gates = [Gate("H", (0,)), Gate("H", (0,)), Gate("CX", (0, 1)), Gate("RZ", (2,), 0.1),
             Gate("CX", (0, 1)), Gate("SWAP", (1, 2)), Gate("SWAP", (2, 1))]
    assert cancel_adjacent(gates) == [Gate("RZ", (2,), 0.1)]
    # a gate on a shared qubit blocks the cancellation
    blocked = [Gate("CX", (0, 1)), Gate("H", (1,)), Gate("CX", (0, 1))]
    assert cancel_adjacent(blocked) == blocked
    # reversed CX is a different gate
    assert len(cancel_adjacent([Gate("CX", (0, 1)), Gate("CX", (1, 0))])) == 2


@given(st.integers(0, 2**20))
def test_cancel_adjacent_preserves_unitary(seed):
    rng = np.random.default_rng(seed)
    circ = random_circuit(3, 12, rng)
    doubled = list(circ.gates) + [g for g in circ.gates[::-1] if g.kind in ("H", "CX", "SWAP")]
    reduced = cancel_adjacent(doubled)
    assert len(reduced) <= len(doubled)
    np.testing.assert_allclose(gate_list_unitary(reduced, 3), gate_list_unitary(doubled, 3), atol=1e-12)


def test_route_adjacent_unchanged():
    circ = GateCircuit(3, (Gate("CX", (0, 1)), Gate("RZZ", (2, 1), 0.3), Gate("H", (2,))))
    assert route_linear(circ).gates == circ.gates


def test_route_long_cx():
    circ = GateCircuit(4, (Gate("CX", (0, 3)),))
    routed = route_linear(circ)
    assert [g.kind for g in routed.gates] == ["SWAP", "SWAP", "CX", "SWAP", "SWAP"]
    assert all(g.routing for g in routed.gates if g.kind == "SWAP")
    assert routed.gates[2].logical == (0, 3)
    np.testing.assert_allclose(circuit_unitary(routed), circuit_unitary(circ), atol=UNITARY_ATOL)


@pytest.mark.parametrize("seed", range(3))
def test_route_random_trotter_circuit(seed):
    rng = np.random.default_rng(seed)
    items = [(float(rng.normal()), "".join(rng.choice(list("IXYZ"), 6))) for _ in range(8)]
    circ = trotter_circuit(PauliSum.from_list(items, 6), 0.8)
    routed = route_linear(circ)
    assert all(abs(g.qubits[0] - g.qubits[1]) == 1 for g in routed.gates if g.is_two_qubit)
    np.testing.assert_allclose(circuit_unitary(routed), circuit_unitary(circ), atol=ROUTED_ATOL)
    assert depth_metrics(routed) == depth_metrics(circ)


@pytest.mark.parametrize("gates, expected", [
    ((), DepthReport(0, 0, 0, 0)),
    ((Gate("CX", (0, 1)),), DepthReport(1, 1, 1, 1)),
    ((Gate("CX", (0, 1)), Gate("CX", (2, 3))), DepthReport(1, 1, 2, 2)),
    ((Gate("H", (0,)), Gate("CX", (0, 1)), Gate("RZ", (1,), 0.1)), DepthReport(3, 1, 3, 1)),
])
def test_depth_examples(gates, expected):
    assert depth_metrics(GateCircuit(4, gates)) == expected


def test_depth_counts_swaps_on_request():
    routed = route_linear(GateCircuit(4, (Gate("CX", (0, 3)),)))
    assert depth_metrics(routed) == DepthReport(1, 1, 1, 1)
    assert depth_metrics(routed, count_swaps=True) == DepthReport(5, 5, 5, 5)


def test_depth_monotone_over_family():
    depths = [depth_metrics(trotter_circuit(jordan_wigner_hamiltonian(bundled_integrals(n, seed=0)), 10.0))
              for n in (4, 6, 8, 10, 12)]
    alls = [d.all_gate_depth for d in depths]
    twos = [d.two_qubit_depth for d in depths]
    assert alls == sorted(alls) and twos == sorted(twos)
    for d in depths:
        assert d.two_qubit_depth <= d.all_gate_depth <= d.gate_count


def test_json_round_trip(rng):
    circ = route_linear(random_circuit(5, 20, rng))
    back = GateCircuit.from_json(circ.to_json())
    assert back == circ
    d = trotter_circuit(PauliSum.from_list([(0.5, "XZ")]), 2.0, 2).to_dict()
    assert set(d) == {"n_qubits", "gates", "metadata"}
    assert {"time", "steps", "source_hash"} <= set(d["metadata"])


@pytest.mark.parametrize("kwargs", [
    dict(kind="CX", qubits=(1, 1)),
    dict(kind="RZ", qubits=(0,)),
    dict(kind="RZ", qubits=(0,), angle=float("nan")),
    dict(kind="H", qubits=(0,), angle=0.1),
    dict(kind="CZ", qubits=(0, 1)),
])
def test_gate_validation(kwargs):
    with pytest.raises(ValidationError):
        Gate(**kwargs)


def test_circuit_range_checked():
    with pytest.raises(ValidationError):
        GateCircuit(2, (Gate("CX", (0, 2)),))
