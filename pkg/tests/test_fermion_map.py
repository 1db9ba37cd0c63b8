import numpy as np
import pytest

from conftest import fock_annihilator, fock_hamiltonian, random_integrals
from qtnbench.chem_io import SpinOrbitalIntegrals
from qtnbench.errors import ValidationError
from qtnbench.fermion_map import (compile_observable, jordan_wigner_hamiltonian, ladder, number_operator,
                                  one_body_operator, rdm_operator_strings)
from qtnbench.pauli import PauliSum, pauli_to_matrix

CAR_ATOL = 1e-12
ORACLE_ATOL = 1e-10


@pytest.mark.parametrize("n", [1, 2, 4, 6])
def test_anticommutation_relations(n):
    a = [pauli_to_matrix(ladder(n, p)) for p in range(n)]
    ad = [pauli_to_matrix(ladder(n, p, dagger=True)) for p in range(n)]
    eye = np.eye(1 << n)
    for p in range(n):
        np.testing.assert_allclose(ad[p], a[p].conj().T, atol=CAR_ATOL)
        for q in range(n):
            np.testing.assert_allclose(a[p] @ ad[q] + ad[q] @ a[p], eye * (p == q), atol=CAR_ATOL)
            np.testing.assert_allclose(a[p] @ a[q] + a[q] @ a[p], 0, atol=CAR_ATOL)


@pytest.mark.parametrize("n", [3, 5])
def test_ladder_matches_fock_oracle(n):
    for p in range(n):
        np.testing.assert_allclose(pauli_to_matrix(ladder(n, p)), fock_annihilator(n, p), atol=CAR_ATOL)


@pytest.mark.parametrize("seed", range(20))
def test_hamiltonian_matches_fock_oracle(seed):
    rng = np.random.default_rng(1000 + seed)
    n_so = (2, 4, 6)[seed % 3]
    ints = random_integrals(n_so, rng, complex_valued=seed % 2 == 1)
    H = jordan_wigner_hamiltonian(ints)
    np.testing.assert_allclose(pauli_to_matrix(H), fock_hamiltonian(ints), atol=ORACLE_ATOL)


def test_diagonal_one_body():
    omega = np.array([0.3, -1.2, 0.7])
    ints = SpinOrbitalIntegrals(h=np.diag(np.r_[omega, 0.0]), g=None, e_core=0.1, occupation=[1, 1, 0, 0])
    H = jordan_wigner_hamiltonian(ints)
    expected = PauliSum.identity(4, 0.1 + omega.sum() / 2)
    for p, w in enumerate(omega):
        expected = expected + PauliSum.single(4, {p: "Z"}, -w / 2)
    # the identity cancels here: 0.1 + sum(omega) / 2 = 0 up to rounding
    assert H.identity_coefficient == 0
    for key, c in expected.masks.items():
        assert H.masks.get(key, 0) == pytest.approx(c, abs=1e-15)
    assert all(type(x) is int and type(z) is int for x, z in H.masks)


def test_hopping_example():
    c = 0.37
    h = np.array([[0.0, c], [c, 0.0]])
    H = jordan_wigner_hamiltonian(SpinOrbitalIntegrals(h=h, g=None, e_core=0.0, occupation=[1, 0]))
    assert H == PauliSum.from_list([(c / 2, "XX"), (c / 2, "YY")])


@pytest.mark.parametrize("n_so", [4, 6, 8])
def test_number_commutation(rng, n_so):
    H = pauli_to_matrix(jordan_wigner_hamiltonian(random_integrals(n_so, rng)))
    Nop = pauli_to_matrix(number_operator(n_so))
    assert np.abs(H @ Nop - Nop @ H).max() <= ORACLE_ATOL


@pytest.mark.parametrize("complex_valued", [False, True])
def test_exact_hermiticity(rng, complex_valued):
    ints = random_integrals(6, rng, complex_valued)
    H = jordan_wigner_hamiltonian(ints)
    assert H.adjoint() == H
    assert all(c.imag == 0 for c in H.masks.values())
    obs = compile_observable(ints.h)
    assert obs.adjoint() == obs


def test_non_hermitian_rejected(rng):
    with pytest.raises(ValidationError):
        compile_observable(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_identity_coefficient_exposed():
    h = np.diag([1.0, 2.0, 3.0, 4.0])
    obs = compile_observable(h)
    assert obs.identity_coefficient == pytest.approx(5.0)


@pytest.mark.parametrize("n_so", [4, 8, 16])
def test_observable_term_count_quadruples(rng, n_so):
    def count(n):
        h = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        return len(compile_observable(h + h.conj().T))

    assert count(2 * n_so) / count(n_so) == pytest.approx(4.0, rel=0.2)


def test_observable_expectation_is_trace_h_rho(rng):
    n = 4
    h = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = h + h.conj().T
    psi = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    psi /= np.linalg.norm(psi)
    a = [fock_annihilator(n, p) for p in range(n)]
    rho = np.array([[psi.conj() @ a[r].T @ a[s] @ psi for s in range(n)] for r in range(n)])
    M = pauli_to_matrix(compile_observable(h))
    assert (psi.conj() @ M @ psi).real == pytest.approx(np.trace(h @ rho.T).real, abs=ORACLE_ATOL)
    assert (psi.conj() @ M @ psi).real == pytest.approx(np.sum(h * rho).real, abs=ORACLE_ATOL)


def test_rdm_strings_match_oracle():
    n = 3
    a = [fock_annihilator(n, p) for p in range(n)]
    for (r, s), op in rdm_operator_strings(n).items():
        np.testing.assert_allclose(pauli_to_matrix(op), a[r].T @ a[s], atol=CAR_ATOL)
        np.testing.assert_allclose(pauli_to_matrix(one_body_operator(n, r, s)), a[r].T @ a[s], atol=CAR_ATOL)
