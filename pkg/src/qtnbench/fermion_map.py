"""Jordan-Wigner images of fermionic operators.

``a_p -> Z_0 ... Z_{p-1} (X_p + i Y_p) / 2`` so that an occupied spin orbital
is the qubit state ``|1>`` and ``a+_p a_p -> (I - Z_p) / 2``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .chem_io import SpinOrbitalIntegrals
from .config import DROP_TOL, HERMITIAN_TOL
from .errors import ValidationError
from .pauli import PauliSum, simplify


@lru_cache(maxsize=4096)
def _ladder_terms(p: int, dagger: bool) -> tuple[tuple[int, int, complex], ...]:
    tail = (1 << p) - 1
    bit = 1 << p
    # (X -/+ iY)/2; the Y string (bit, bit) already carries its i
    y_coeff = -0.5j if dagger else 0.5j
    return ((bit, tail, 0.5), (bit, tail | bit, y_coeff))


def ladder(n_qubits: int, p: int, dagger: bool = False) -> PauliSum:
    """JW image of ``a+_p`` (``dagger=True``) or ``a_p``."""
    if not 0 <= p < n_qubits:
        raise ValidationError(f"mode {p} outside register of {n_qubits}")
    psum = PauliSum(n_qubits)
    for x, z, c in _ladder_terms(p, dagger):
        # Z-tail times X/Y on p: tail qubits are Z (x=0, z=1) so masks just combine
        psum = psum + PauliSum(n_qubits, {(x, z): c})
    return psum


def one_body_operator(n_qubits: int, r: int, s: int) -> PauliSum:
    """JW image of ``a+_r a_s`` (unsimplified, not Hermitian for r != s)."""
    return ladder(n_qubits, r, True) * ladder(n_qubits, s, False)


def number_operator(n_qubits: int) -> PauliSum:
    total = PauliSum(n_qubits)
    for p in range(n_qubits):
        total = total + PauliSum.identity(n_qubits, 0.5) + PauliSum.single(n_qubits, {p: "Z"}, -0.5)
    return simplify(total)


def _hermitian_real(psum: PauliSum, scale: float) -> PauliSum:
    worst = max((abs(c.imag) for c in psum.masks.values()), default=0.0)
    if worst > HERMITIAN_TOL * max(1.0, scale):
        raise ValidationError(f"mapped operator is not Hermitian (imaginary residue {worst:.3e})")
    return PauliSum(psum.n_qubits, {k: c.real for k, c in psum.masks.items()})


def _check_hermitian_matrix(h: np.ndarray, what: str):
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError(f"{what} must be a square matrix")
    if np.abs(h - h.conj().T).max(initial=0.0) > HERMITIAN_TOL:
        raise ValidationError(f"{what} is not Hermitian")


def _accumulate(acc: dict, psum: PauliSum, scale: complex):
    for key, c in psum.masks.items():
        acc[key] = acc.get(key, 0j) + scale * c


def _one_body_terms(h: np.ndarray, acc: dict):
    n = h.shape[0]
    for r, s in zip(*np.nonzero(h)):
        _accumulate(acc, one_body_operator(n, r, s), h[r, s])


def _one_body_sum(h: np.ndarray) -> PauliSum:
    acc: dict = {}
    _one_body_terms(h, acc)
    return PauliSum(h.shape[0], acc)


def jordan_wigner_hamiltonian(integrals: SpinOrbitalIntegrals, drop_tol: float = DROP_TOL) -> PauliSum:
    """Qubit Hamiltonian on ``n_so`` qubits with real coefficients.

    The identity coefficient collects ``e_core`` and every constant produced by
    the mapping.
    """
    n = integrals.n_so
    h, g = integrals.h, integrals.g
    _check_hermitian_matrix(h, "one-body integrals")
    acc: dict = {(0, 0): complex(integrals.e_core)}
    _one_body_terms(h, acc)
    if integrals.has_two_body:
        create = [ladder(n, p, True) for p in range(n)]
        annihilate = [ladder(n, p, False) for p in range(n)]
        pair_c: dict[tuple[int, int], PauliSum] = {}
        pair_a: dict[tuple[int, int], PauliSum] = {}
        for p, q, r, s in zip(*np.nonzero(g)):
            if p == q or r == s:
                continue
            if (p, q) not in pair_c:
                pair_c[p, q] = create[p] * create[q]
            if (r, s) not in pair_a:
                pair_a[r, s] = annihilate[r] * annihilate[s]
            _accumulate(acc, pair_c[p, q] * pair_a[r, s], 0.5 * g[p, q, r, s])
    out = PauliSum(n, acc)
    scale = float(np.abs(h).max(initial=0.0) + np.abs(g).sum())
    return simplify(_hermitian_real(out, scale), drop_tol)


def compile_observable(h_eff, drop_tol: float = DROP_TOL) -> PauliSum:
    """JW image of ``sum_rs h_eff[r,s] a+_r a_s``, simplified and exactly Hermitian."""
    h_eff = np.asarray(h_eff, dtype=complex)
    _check_hermitian_matrix(h_eff, "h_eff")
    return simplify(_hermitian_real(_one_body_sum(h_eff), float(np.abs(h_eff).max(initial=0.0))), drop_tol)


def rdm_operator_strings(n_qubits: int) -> dict[tuple[int, int], PauliSum]:
    """JW images of every ``a+_r a_s`` keyed by ``(r, s)``."""
    return {(r, s): simplify(one_body_operator(n_qubits, r, s), 0.0)
            for r in range(n_qubits) for s in range(n_qubits)}
