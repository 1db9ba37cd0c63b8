"""Spin-orbital integral containers, FCIDUMP/JSON ingest and active-space reduction.

Conventions
-----------
The electronic Hamiltonian encoded by :class:`SpinOrbitalIntegrals` is::

    H = e_core + sum_pq h[p,q] a+_p a_q + 1/2 sum_pqrs g[p,q,r,s] a+_p a+_q a_r a_s

so ``g`` is the physicist-ordered coefficient tensor, and for spatial
chemist-notation integrals ``(ij|kl)`` the spin-orbital entry is
``g[iσ, kτ, lτ, jσ] = (ij|kl)``.

Spin orbitals are ordered interleaved (α0, β0, α1, β1, ...) unless the
``blocked`` ordering (α0..αn-1, β0..βn-1) is requested.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .config import HERMITIAN_TOL
from .errors import ParseError, ValidationError

Ordering = Literal["interleaved", "blocked"]


class ActiveSpaceError(ValidationError):
    """Requested window does not fit inside the occupied/virtual orbitals."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpinOrbitalIntegrals:
    """Immutable one-/two-electron integrals over ``n_so`` spin orbitals (Hartree)."""

    h: np.ndarray
    g: np.ndarray
    e_core: float
    occupation: np.ndarray
    n_e: int | None = None
    n_so: int = field(init=False)

    def __post_init__(self):
        h = np.array(self.h, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValidationError(f"one-body integrals must be square, got {h.shape}")
        n = h.shape[0]
        if n % 2:
            raise ValidationError(f"spin-orbital count must be even, got {n}")
        g = np.zeros((n,) * 4, dtype=complex) if self.g is None else np.array(self.g, dtype=complex)
        if g.shape != (n,) * 4:
            raise ValidationError(f"two-body tensor shape {g.shape} does not match n_so={n}")
        if np.abs(h - h.conj().T).max(initial=0.0) > HERMITIAN_TOL:
            raise ValidationError("one-body integrals are not Hermitian")
        g_adj = g.transpose(3, 2, 1, 0).conj()
        if np.abs(g - g_adj).max(initial=0.0) > HERMITIAN_TOL:
            raise ValidationError("two-body integrals violate g[pqrs] = conj(g[srqp])")
        # exact symmetrization; idempotent on already-Hermitian input
        h = (h + h.conj().T) / 2
        g = (g + g_adj) / 2
        occ = np.asarray(self.occupation, dtype=np.int8).ravel()
        if occ.shape != (n,) or not np.isin(occ, (0, 1)).all():
            raise ValidationError("occupation must be a binary vector of length n_so")
        n_e = int(occ.sum())
        if self.n_e is not None and int(self.n_e) != n_e:
            raise ValidationError(f"occupation holds {n_e} electrons, declared {self.n_e}")
        if not np.isfinite(self.e_core):
            raise ValidationError("core energy must be finite")
        object.__setattr__(self, "h", _readonly(h))
        object.__setattr__(self, "g", _readonly(g))
        object.__setattr__(self, "occupation", _readonly(occ))
        object.__setattr__(self, "n_e", n_e)
        object.__setattr__(self, "n_so", n)
        object.__setattr__(self, "e_core", float(self.e_core))

    @property
    def has_two_body(self) -> bool:
        return bool(np.any(self.g))

    def equals(self, other: SpinOrbitalIntegrals, atol: float = 0.0) -> bool:
        return (
            self.n_so == other.n_so
            and self.n_e == other.n_e
            and np.array_equal(self.occupation, other.occupation)
            and abs(self.e_core - other.e_core) <= atol
            and np.abs(self.h - other.h).max(initial=0.0) <= atol
            and np.abs(self.g - other.g).max(initial=0.0) <= atol
        )


@dataclass(frozen=True)
class ActiveSpaceSpec:
    n_so: int
    n_e: int | None = None

    def __post_init__(self):
        n_e = self.n_so // 2 if self.n_e is None else self.n_e
        if self.n_so <= 0 or self.n_so % 2:
            raise ValidationError(f"active n_so must be a positive even integer, got {self.n_so}")
        if not 0 < n_e <= self.n_so:
            raise ValidationError(f"active n_e must lie in 1..{self.n_so}, got {n_e}")
        object.__setattr__(self, "n_e", int(n_e))


# spin expansion -----------------------------------------------------------

def spin_orbital_index(i: int, spin: int, n_spatial: int, ordering: Ordering = "interleaved") -> int:
    if ordering == "interleaved":
        return 2 * i + spin
    if ordering == "blocked":
        return spin * n_spatial + i
    raise ValidationError(f"unknown spin ordering {ordering!r}")


def expand_spatial(h1, eri=None, ordering: Ordering = "interleaved"):
    """Spin-expand spatial ``h1[i,j]`` and chemist ``eri[i,j,k,l] = (ij|kl)``."""
    h1 = np.asarray(h1, dtype=complex)
    n = h1.shape[0]
    idx = np.array([[spin_orbital_index(i, s, n, ordering) for s in (0, 1)] for i in range(n)])
    h = np.zeros((2 * n, 2 * n), dtype=complex)
    g = np.zeros((2 * n,) * 4, dtype=complex)
    for s in (0, 1):
        h[np.ix_(idx[:, s], idx[:, s])] = h1
    if eri is not None:
        phys = np.einsum("psqr->pqrs", np.asarray(eri, dtype=complex))
        for s in (0, 1):
            for t in (0, 1):
                g[np.ix_(idx[:, s], idx[:, t], idx[:, t], idx[:, s])] = phys
    return h, g


def aufbau_occupation(n_spatial: int, n_e: int, ms2: int = 0, ordering: Ordering = "interleaved"):
    n_alpha, rem = divmod(n_e + ms2, 2)
    n_beta = n_e - n_alpha
    if rem or n_alpha > n_spatial or n_beta < 0 or n_beta > n_spatial:
        raise ValidationError(f"cannot place NELEC={n_e}, MS2={ms2} in {n_spatial} orbitals")
    occ = np.zeros(2 * n_spatial, dtype=np.int8)
    for i in range(n_alpha):
        occ[spin_orbital_index(i, 0, n_spatial, ordering)] = 1
    for i in range(n_beta):
        occ[spin_orbital_index(i, 1, n_spatial, ordering)] = 1
    return occ


# FCIDUMP ------------------------------------------------------------------

_KEY_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=")
_CHEM_PERMS = ((0, 1, 2, 3), (1, 0, 2, 3), (0, 1, 3, 2), (1, 0, 3, 2),
               (2, 3, 0, 1), (3, 2, 0, 1), (2, 3, 1, 0), (3, 2, 1, 0))


def _parse_namelist(text: str) -> dict[str, list[str]]:
    text = re.sub(r"&FCI|&END|/", " ", text, flags=re.IGNORECASE)
    parts = _KEY_RE.split(text)
    out = {}
    for key, raw in zip(parts[1::2], parts[2::2]):
        vals = [v.strip() for v in raw.replace("\n", " ").split(",")]
        out[key.upper()] = [v for v in vals if v]
    return out


def _parse_value(token: str) -> complex:
    token = token.strip()
    if token.startswith("("):
        if not token.endswith(")"):
            raise ValueError(token)
        re_s, im_s = token[1:-1].split(",")
        return complex(float(re_s), float(im_s))
    return complex(float(token.replace("D", "E").replace("d", "e")), 0.0)


def _as_bool(vals: list[str]) -> bool:
    v = vals[0].strip(".").upper() if vals else ""
    return v in {"1", "T", "TRUE", "Y", "YES"}


class _Accumulator:
    """Stores explicitly given entries, fills symmetric partners, flags conflicts."""

    def __init__(self, shape):
        self.values = np.zeros(shape, dtype=complex)
        self.given: dict[tuple, tuple[complex, int]] = {}

    def set(self, key, value, lineno):
        prev = self.given.get(key)
        if prev is not None and abs(prev[0] - value) > HERMITIAN_TOL:
            raise ParseError(f"conflicting values for entry {key}", lineno)
        self.given[key] = (value, lineno)
        self.values[key] = value

    def complete(self, partners):
        """``partners(key)`` yields ``(partner_key, conjugate_flag)``."""
        for key, (value, lineno) in list(self.given.items()):
            for pkey, conj in partners(key):
                pval = value.conjugate() if conj else value
                if pkey in self.given:
                    if abs(self.given[pkey][0] - pval) > HERMITIAN_TOL:
                        raise ValidationError(
                            f"Hermiticity violated between entries {key} (line {lineno}) "
                            f"and {pkey} (line {self.given[pkey][1]})")
                else:
                    self.values[pkey] = pval


def parse_integrals(source: str, spin_expansion: Ordering = "interleaved") -> SpinOrbitalIntegrals:
    """Parse FCIDUMP-style text (or the JSON mirror) into spin-orbital integrals.

    Standard FCIDUMP files are spatial-orbital, real and 8-fold symmetric. Two
    header extensions are understood: ``SPINORB=1`` marks spin-orbital indices
    with physicist-ordered two-body records (``g[p,q,r,s]`` as in the module
    docstring) and complex values written ``(re,im)``; ``OCC=`` supplies the
    occupation vector explicitly.
    """
    if source.lstrip().startswith("{"):
        return integrals_from_json(source)
    lines = source.splitlines()
    header_end = None
    for i, line in enumerate(lines):
        if re.search(r"&END|^\s*/\s*$", line, flags=re.IGNORECASE):
            header_end = i
            break
    if header_end is None:
        raise ParseError("missing '&END' terminating the FCIDUMP header", None)
    header = _parse_namelist("\n".join(lines[: header_end + 1]))
    try:
        norb = int(header["NORB"][0])
        nelec = int(header["NELEC"][0])
    except (KeyError, IndexError, ValueError):
        raise ParseError("header must declare NORB and NELEC", 1) from None
    ms2 = int(header.get("MS2", ["0"])[0])
    spinorb = _as_bool(header.get("SPINORB", ["0"]))
    n_so = norb if spinorb else 2 * norb
    if n_so % 2:
        raise ValidationError(f"spin-orbital count must be even, got {n_so}")

    one = _Accumulator((norb, norb))
    two = _Accumulator((norb,) * 4)
    e_core = 0.0
    for lineno, line in enumerate(lines[header_end + 1:], start=header_end + 2):
        stripped = line.strip()
        if not stripped or stripped.startswith(("#", "!")):
            continue
        fields = stripped.split()
        if len(fields) != 5:
            raise ParseError(f"expected 'value p q r s', got {stripped!r}", lineno)
        try:
            value = _parse_value(fields[0])
            p, q, r, s = (int(f) for f in fields[1:])
        except ValueError:
            raise ParseError(f"cannot parse record {stripped!r}", lineno) from None
        if not all(0 <= k <= norb for k in (p, q, r, s)):
            raise ParseError(f"orbital index out of range 0..{norb}", lineno)
        if p == q == r == s == 0:
            e_core += value.real
        elif r == s == 0 and p and q:
            one.set((p - 1, q - 1), value, lineno)
        elif p and q and r and s:
            two.set((p - 1, q - 1, r - 1, s - 1), value, lineno)
        else:
            raise ParseError(f"invalid index pattern {(p, q, r, s)}", lineno)

    one.complete(lambda k: [((k[1], k[0]), True)])
    if spinorb:
        two.complete(lambda k: [((k[3], k[2], k[1], k[0]), True)])
        h, g = one.values, two.values
    else:
        if np.abs(one.values.imag).max(initial=0.0) or np.abs(two.values.imag).max(initial=0.0):
            raise ValidationError("spatial FCIDUMP integrals must be real")
        two.complete(lambda k: [(tuple(k[i] for i in perm), False) for perm in _CHEM_PERMS[1:]])
        h, g = expand_spatial(one.values, two.values, spin_expansion)

    if "OCC" in header:
        occupation = np.array([int(v) for v in header["OCC"]], dtype=np.int8)
    elif spinorb:
        occupation = np.zeros(n_so, dtype=np.int8)
        occupation[:nelec] = 1
    else:
        occupation = aufbau_occupation(norb, nelec, ms2, spin_expansion)
    return SpinOrbitalIntegrals(h=h, g=g, e_core=e_core, occupation=occupation, n_e=nelec)


def _fmt(value: complex) -> str:
    if value.imag == 0:
        return repr(float(value.real))
    return f"({float(value.real)!r},{float(value.imag)!r})"


def serialize_fcidump(ints: SpinOrbitalIntegrals) -> str:
    """Spin-orbital FCIDUMP text that :func:`parse_integrals` reads back exactly."""
    n = ints.n_so
    occ = ",".join(str(int(v)) for v in ints.occupation)
    lines = [f" &FCI NORB={n},NELEC={ints.n_e},MS2=0,SPINORB=1,", f"  OCC={occ},", " &END"]
    for p, q, r, s in zip(*np.nonzero(ints.g)):
        lines.append(f"{_fmt(ints.g[p, q, r, s])} {p + 1} {q + 1} {r + 1} {s + 1}")
    for p, q in zip(*np.nonzero(ints.h)):
        lines.append(f"{_fmt(ints.h[p, q])} {p + 1} {q + 1} 0 0")
    lines.append(f"{ints.e_core!r} 0 0 0 0")
    return "\n".join(lines) + "\n"


# JSON mirror ----------------------------------------------------------------

def _num(v: complex):
    return float(v.real) if v.imag == 0 else [float(v.real), float(v.imag)]


def _unnum(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def integrals_to_dict(ints: SpinOrbitalIntegrals) -> dict:
    nz = zip(*np.nonzero(ints.g))
    return {
        "n_so": ints.n_so,
        "n_e": ints.n_e,
        "e_core": ints.e_core,
        "h": [[_num(v) for v in row] for row in ints.h],
        "g": [[int(p), int(q), int(r), int(s), float(ints.g[p, q, r, s].real), float(ints.g[p, q, r, s].imag)]
              for p, q, r, s in nz],
        "occupation": [int(v) for v in ints.occupation],
    }


def integrals_from_dict(data: dict) -> SpinOrbitalIntegrals:
    try:
        n = int(data["n_so"])
        h = np.array([[_unnum(v) for v in row] for row in data["h"]], dtype=complex).reshape(n, n)
        g = np.zeros((n,) * 4, dtype=complex)
        for rec in data.get("g", []):
            p, q, r, s = (int(k) for k in rec[:4])
            g[p, q, r, s] = complex(rec[4], rec[5] if len(rec) > 5 else 0.0)
        return SpinOrbitalIntegrals(h=h, g=g, e_core=float(data.get("e_core", 0.0)),
                                    occupation=data["occupation"], n_e=data.get("n_e"))
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ParseError(f"malformed integrals JSON: {exc}") from None


def integrals_to_json(ints: SpinOrbitalIntegrals) -> str:
    return json.dumps(integrals_to_dict(ints))


def integrals_from_json(text: str) -> SpinOrbitalIntegrals:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    return integrals_from_dict(data)


def load_integrals(path, spin_expansion: Ordering = "interleaved") -> SpinOrbitalIntegrals:
    with open(path) as fh:
        return parse_integrals(fh.read(), spin_expansion)


# active space -----------------------------------------------------------------

def active_window(occupation, spec: ActiveSpaceSpec) -> tuple[list[int], list[int]]:
    """Return ``(window, frozen)`` spin-orbital indices for the HOMO-LUMO window.

    The window keeps the ``n_e`` highest occupied and the ``n_so - n_e`` lowest
    virtual orbitals (index order is taken as energy order).
    """
    occupation = np.asarray(occupation)
    occ = [int(i) for i in np.flatnonzero(occupation == 1)]
    virt = [int(i) for i in np.flatnonzero(occupation == 0)]
    n_virt = spec.n_so - spec.n_e
    if spec.n_e > len(occ):
        raise ActiveSpaceError(f"window needs {spec.n_e} occupied orbitals, only {len(occ)} available")
    if n_virt > len(virt):
        raise ActiveSpaceError(f"window needs {n_virt} virtual orbitals, only {len(virt)} available")
    frozen = occ[: len(occ) - spec.n_e]
    window = sorted(occ[len(occ) - spec.n_e:] + virt[:n_virt])
    return window, frozen


def select_active_space(full: SpinOrbitalIntegrals, spec: ActiveSpaceSpec) -> SpinOrbitalIntegrals:
    """Restrict to the HOMO-LUMO window, folding frozen occupied orbitals into the core.

    Frozen orbitals contribute their mean-field energy to ``e_core`` and a
    Coulomb/exchange shift to the one-body block; discarded virtuals are dropped.
    """
    if spec.n_so > full.n_so:
        raise ActiveSpaceError(f"active space {spec.n_so} larger than full space {full.n_so}")
    window, frozen = active_window(full.occupation, spec)
    h, g = full.h, full.g
    e_core = full.e_core
    if frozen:
        f = np.array(frozen)
        e_core += float(np.real(np.trace(h[np.ix_(f, f)])))
        gff = g[np.ix_(f, f, f, f)]
        e_core += 0.5 * float(np.real(np.einsum("ijji->", gff) - np.einsum("ijij->", gff)))
    w = np.array(window)
    h_act = h[np.ix_(w, w)].copy()
    if frozen:
        # the four single contractions of a+_p a+_q a_r a_s against a frozen pair
        h_act += 0.5 * (
            np.einsum("piis->ps", g[np.ix_(w, f, f, w)])
            + np.einsum("ipsi->ps", g[np.ix_(f, w, w, f)])
            - np.einsum("ipis->ps", g[np.ix_(f, w, f, w)])
            - np.einsum("pisi->ps", g[np.ix_(w, f, w, f)])
        )
    g_act = g[np.ix_(w, w, w, w)]
    occ = full.occupation[w]
    return SpinOrbitalIntegrals(h=h_act, g=g_act, e_core=e_core, occupation=occ, n_e=spec.n_e)


def hf_reference(integrals: SpinOrbitalIntegrals) -> int:
    """Basis index whose bit ``q`` is the occupation of spin orbital ``q``."""
    return sum(1 << q for q, v in enumerate(integrals.occupation) if v)
