import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import fock_hamiltonian, random_integrals
from qtnbench.chem_io import (ActiveSpaceError, ActiveSpaceSpec, SpinOrbitalIntegrals, active_window,
                              aufbau_occupation, expand_spatial, hf_reference, integrals_from_json,
                              integrals_to_json, parse_integrals, select_active_space, serialize_fcidump)
from qtnbench.errors import ParseError, ValidationError

ORACLE_ATOL = 1e-10


def spatial_fcidump(h1, eri, nelec, ms2=0, e_core=0.0) -> str:
    """Unique-record FCIDUMP text for real symmetric h1 and 8-fold symmetric eri."""
    n = h1.shape[0]
    lines = [f" &FCI NORB={n},NELEC={nelec},MS2={ms2},", " &END"]
    for i, j, k, l in itertools.product(range(n), repeat=4):
        if i >= j and k >= l and i * n + j >= k * n + l and eri[i, j, k, l] != 0:
            lines.append(f"{float(eri[i, j, k, l])!r} {i + 1} {j + 1} {k + 1} {l + 1}")
    for i in range(n):
        for j in range(i + 1):
            if h1[i, j] != 0:
                lines.append(f"{float(h1[i, j])!r} {i + 1} {j + 1} 0 0")
    lines.append(f"{e_core!r} 0 0 0 0")
    return "\n".join(lines) + "\n"


def random_spatial(n, rng):
    h1 = rng.standard_normal((n, n))
    h1 = (h1 + h1.T) / 2
    eri = rng.standard_normal((n,) * 4)
    for perm in [(1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)]:
        eri = (eri + eri.transpose(perm)) / 2
    return h1, eri


def test_single_orbital_example():
    ints = parse_integrals(" &FCI NORB=1,NELEC=2,MS2=0,\n &END\n-1.0 1 1 0 0\n")
    assert ints.n_so == 2
    np.testing.assert_array_equal(ints.h, np.diag([-1.0, -1.0]))
    assert ints.e_core == 0.0
    assert not ints.has_two_body
    np.testing.assert_array_equal(ints.occupation, [1, 1])


def test_empty_body_with_core():
    ints = parse_integrals(" &FCI NORB=2,NELEC=2,MS2=0,\n &END\n0.5 0 0 0 0\n")
    assert ints.e_core == 0.5
    assert not np.any(ints.h) and not np.any(ints.g)


def test_spatial_completion_matches_full_expansion(rng):
    h1, eri = random_spatial(3, rng)
    ints = parse_integrals(spatial_fcidump(h1, eri, 2, e_core=0.25))
    h, g = expand_spatial(h1, eri)
    np.testing.assert_allclose(ints.h, h, atol=1e-15)
    np.testing.assert_allclose(ints.g, g, atol=1e-15)
    assert ints.e_core == 0.25


def test_chemist_to_physicist_convention():
    # doubly occupied spatial orbital: E = 2 h00 + (00|00)
    h1 = np.array([[-1.3, 0.0], [0.0, 0.4]])
    eri = np.zeros((2,) * 4)
    eri[0, 0, 0, 0] = 0.7
    eri[0, 0, 1, 1] = eri[1, 1, 0, 0] = 0.3
    h, g = expand_spatial(h1, eri)
    occ = aufbau_occupation(2, 2)
    ints = SpinOrbitalIntegrals(h=h, g=g, e_core=0.0, occupation=occ)
    H = fock_hamiltonian(ints)
    idx = hf_reference(ints)
    assert H[idx, idx].real == pytest.approx(2 * -1.3 + 0.7, abs=1e-14)
    # alpha in orbital 0, alpha in orbital 1: h00 + h11 + J - K with K = (01|10) = 0 here
    both_alpha = (1 << 0) | (1 << 2)
    assert H[both_alpha, both_alpha].real == pytest.approx(-1.3 + 0.4 + 0.3, abs=1e-14)


def test_one_sided_hermitian_completion():
    text = " &FCI NORB=2,NELEC=2,SPINORB=1,\n &END\n(0.1,0.2) 1 2 0 0\n-0.5 1 1 0 0\n"
    ints = parse_integrals(text)
    assert ints.h[0, 1] == 0.1 + 0.2j
    assert ints.h[1, 0] == 0.1 - 0.2j


@pytest.mark.parametrize("body, line", [
    ("0.1 1 1 0\n", 3),
    ("abc 1 1 0 0\n", 3),
    ("-1.0 1 1 0 0\n0.3 5 1 0 0\n", 4),
    ("0.3 1 0 1 0\n", 3),
])
def test_malformed_records_report_line(body, line):
    with pytest.raises(ParseError) as err:
        parse_integrals(" &FCI NORB=2,NELEC=2,\n &END\n" + body)
    assert err.value.line == line
    assert f"line {line}" in str(err.value)


def test_conflicting_and_non_hermitian_inputs():
    with pytest.raises(ParseError):
        parse_integrals(" &FCI NORB=2,NELEC=2,\n &END\n0.1 1 2 0 0\n0.2 1 2 0 0\n")
    with pytest.raises(ValidationError):
        parse_integrals(" &FCI NORB=2,NELEC=2,SPINORB=1,\n &END\n0.1 1 2 0 0\n0.3 2 1 0 0\n")
    with pytest.raises(ValidationError):
        parse_integrals(" &FCI NORB=2,NELEC=2,\n &END\n(0.1,0.1) 1 2 0 0\n")


def test_odd_spin_orbital_count_and_header():
    with pytest.raises(ValidationError):
        parse_integrals(" &FCI NORB=3,NELEC=2,SPINORB=1,\n &END\n")
    with pytest.raises(ParseError):
        parse_integrals("-1.0 1 1 0 0\n")
    with pytest.raises(ParseError):
        parse_integrals(" &FCI NELEC=2,\n &END\n")


@pytest.mark.parametrize("n_so, complex_valued", [(2, False), (4, True), (6, True)])
def test_fcidump_round_trip_exact(rng, n_so, complex_valued):
    ints = random_integrals(n_so, rng, complex_valued)
    back = parse_integrals(serialize_fcidump(ints))
    assert back.equals(ints, atol=0.0)
    np.testing.assert_array_equal(back.occupation, ints.occupation)


@given(st.integers(0, 2**31), st.sampled_from([2, 4]), st.booleans())
def test_round_trip_property(seed, n_so, complex_valued):
    ints = random_integrals(n_so, np.random.default_rng(seed), complex_valued)
    assert parse_integrals(serialize_fcidump(ints)).equals(ints, atol=0.0)
    assert integrals_from_json(integrals_to_json(ints)).equals(ints, atol=0.0)


def test_json_source_accepted(rng):
    ints = random_integrals(4, rng)
    assert parse_integrals(integrals_to_json(ints)).equals(ints)


def test_invariants_enforced(rng):
    h = rng.standard_normal((4, 4))
    with pytest.raises(ValidationError):
        SpinOrbitalIntegrals(h=h, g=None, e_core=0.0, occupation=[1, 1, 0, 0])
    with pytest.raises(ValidationError):
        SpinOrbitalIntegrals(h=np.eye(4), g=None, e_core=0.0, occupation=[1, 1, 0, 0], n_e=3)
    with pytest.raises(ValidationError):
        SpinOrbitalIntegrals(h=np.eye(3), g=None, e_core=0.0, occupation=[1, 0, 0])
    ints = SpinOrbitalIntegrals(h=np.eye(4), g=None, e_core=0.0, occupation=[1, 1, 0, 0])
    with pytest.raises(ValueError):
        ints.h[0, 0] = 2.0


@pytest.mark.parametrize("ordering, expected", [
    ("interleaved", [1, 1, 1, 0, 0, 0]),
    ("blocked", [1, 1, 0, 1, 0, 0]),
])
def test_aufbau_orderings(ordering, expected):
    np.testing.assert_array_equal(aufbau_occupation(3, 3, ms2=1, ordering=ordering), expected)


def test_active_space_spec_defaults():
    assert ActiveSpaceSpec(8).n_e == 4
    for bad in [(7, 3), (4, 5), (4, 0), (0, None)]:
        with pytest.raises(ValidationError):
            ActiveSpaceSpec(*bad)


def test_window_example():
    window, frozen = active_window([1, 1, 1, 1, 0, 0, 0, 0], ActiveSpaceSpec(4, 2))
    assert window == [2, 3, 4, 5]
    assert frozen == [0, 1]


def test_identity_window(rng):
    ints = random_integrals(6, rng)
    out = select_active_space(ints, ActiveSpaceSpec(6, 3))
    assert out.equals(ints, atol=0.0)
    assert out.e_core == ints.e_core


def _projected_block(H_full, window, frozen, n_full):
    base = sum(1 << f for f in frozen)
    idx = []
    for k in range(1 << len(window)):
        full = base
        for bit, orb in enumerate(window):
            if (k >> bit) & 1:
                full |= 1 << orb
        idx.append(full)
    idx = np.array(idx)
    return H_full[np.ix_(idx, idx)]


@pytest.mark.parametrize("seed", range(3))
def test_frozen_core_matches_projected_full_hamiltonian(seed):
    rng = np.random.default_rng(seed)
    full = random_integrals(8, rng, complex_valued=seed == 2, n_e=4)
    spec = ActiveSpaceSpec(4, 2)
    window, frozen = active_window(full.occupation, spec)
    red = select_active_space(full, spec)
    H_block = _projected_block(fock_hamiltonian(full), window, frozen, 8)
    H_red = fock_hamiltonian(red)
    np.testing.assert_allclose(H_red, H_block, atol=ORACLE_ATOL)
    assert np.linalg.eigvalsh(H_red)[0] == pytest.approx(np.linalg.eigvalsh(H_block)[0], abs=ORACLE_ATOL)
    np.testing.assert_array_equal(red.occupation, [1, 1, 0, 0])


def test_window_errors(rng):
    ints = random_integrals(6, rng, n_e=1)
    with pytest.raises(ActiveSpaceError):
        select_active_space(ints, ActiveSpaceSpec(4, 2))
    with pytest.raises(ActiveSpaceError):
        select_active_space(random_integrals(4, rng), ActiveSpaceSpec(6, 3))
    ints = random_integrals(6, rng, n_e=5)
    with pytest.raises(ActiveSpaceError):
        select_active_space(ints, ActiveSpaceSpec(4, 1))


@pytest.mark.parametrize("occ, index", [
    ([1, 1, 0, 0], 0b0011),
    ([0, 0, 0, 0], 0),
    ([1, 0, 1, 0], 0b0101),
])
def test_hf_reference_examples(occ, index):
    ints = SpinOrbitalIntegrals(h=np.eye(4), g=None, e_core=0.0, occupation=occ)
    assert hf_reference(ints) == index


@given(st.lists(st.integers(0, 1), min_size=2, max_size=12).filter(lambda v: len(v) % 2 == 0))
def test_hf_reference_popcount(occ):
    ints = SpinOrbitalIntegrals(h=np.eye(len(occ)), g=None, e_core=0.0, occupation=occ)
    assert bin(hf_reference(ints)).count("1") == sum(occ)
