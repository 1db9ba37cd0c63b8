"""Synthetic embedded-fragment-style integral sets (deterministic per size and seed).

Spatial one-body integrals have ordered orbital energies and off-diagonal
couplings decaying with orbital distance; the two-body part is a sparse set of
on-site Coulomb and nearest-pair exchange-type elements. Everything is spin
expanded and occupied by aufbau filling with ``n_e = n_so / 2``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..chem_io import SpinOrbitalIntegrals, aufbau_occupation, expand_spatial
from ..errors import ValidationError

BUNDLED_SIZES = (4, 6, 8, 10, 12, 14, 16)
BUNDLED_PREFIX = "bundled:"


def _chem_symmetrize(eri: np.ndarray) -> np.ndarray:
    out = np.zeros_like(eri)
    for perm in ((0, 1, 2, 3), (1, 0, 2, 3), (0, 1, 3, 2), (1, 0, 3, 2),
                 (2, 3, 0, 1), (3, 2, 0, 1), (2, 3, 1, 0), (3, 2, 1, 0)):
        out = np.where(out != 0, out, eri.transpose(perm))
    return out


@lru_cache(maxsize=64)
def bundled_integrals(n_so: int, seed: int = 0, two_body: bool = True) -> SpinOrbitalIntegrals:
    if n_so < 2 or n_so % 2:
        raise ValidationError(f"bundled family needs an even n_so >= 2, got {n_so}")
    n = n_so // 2
    rng = np.random.default_rng([seed, n_so, int(two_body)])
    eps = np.linspace(-1.2, 0.6, n) + 0.05 * rng.standard_normal(n)
    h1 = np.diag(np.sort(eps))
    for i in range(n):
        for j in range(i + 1, n):
            h1[i, j] = h1[j, i] = 0.25 * np.exp(-(j - i - 1) / 2.0) * rng.standard_normal()
    eri = None
    if two_body:
        eri = np.zeros((n,) * 4)
        for i in range(n):
            eri[i, i, i, i] = 0.45 + 0.05 * rng.random()
        for i in range(n - 1):
            eri[i, i, i + 1, i + 1] = 0.2 + 0.05 * rng.random()
            eri[i, i + 1, i, i + 1] = 0.05 + 0.02 * rng.random()
        eri = _chem_symmetrize(eri)
    h, g = expand_spatial(h1, eri, "interleaved")
    n_e = n_so // 2
    occ = aufbau_occupation(n, n_e, ms2=n_e % 2)
    return SpinOrbitalIntegrals(h=h, g=g, e_core=-0.5 * n, occupation=occ, n_e=n_e)


def resolve_bundled(ref: str, seed: int = 0) -> SpinOrbitalIntegrals | None:
    """``"bundled:<n_so>"`` (optionally ``"bundled:<n_so>:onebody"``) or None."""
    if not ref.startswith(BUNDLED_PREFIX):
        return None
    parts = ref[len(BUNDLED_PREFIX):].split(":")
    try:
        n_so = int(parts[0])
    except ValueError:
        raise ValidationError(f"bad bundled reference {ref!r}") from None
    two_body = not (len(parts) > 1 and parts[1] == "onebody")
    return bundled_integrals(n_so, seed, two_body)
