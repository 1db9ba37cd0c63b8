"""Weighted Pauli strings in symplectic (x-mask, z-mask) form.

A string with masks ``(x, z)`` denotes ``i**|x & z| * X**x Z**z`` applied
qubit-wise, so bit ``q`` of ``x``/``z`` describes qubit ``q``. With this
choice a qubit with both bits set carries exactly ``Y``. Axes strings are
written with character ``q`` describing qubit ``q``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .config import DROP_TOL, MATRIX_CAP
from .errors import ResourceError, ValidationError

_I_POW = (1, 1j, -1, -1j)
_AXIS_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_AXIS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}


def _popcount(v: int) -> int:
    return v.bit_count()


def masks_from_axes(axes: str) -> tuple[int, int]:
    x = z = 0
    for q, ch in enumerate(axes):
        try:
            bx, bz = _AXIS_BITS[ch]
        except KeyError:
            raise ValidationError(f"invalid Pauli axis {ch!r} in {axes!r}") from None
        x |= bx << q
        z |= bz << q
    return x, z


def axes_from_masks(x: int, z: int, n_qubits: int) -> str:
    return "".join(_BITS_AXIS[((x >> q) & 1, (z >> q) & 1)] for q in range(n_qubits))


def multiply_masks(x1: int, z1: int, x2: int, z2: int) -> tuple[complex, int, int]:
    """Product of two unit Pauli strings: returns ``(phase, x, z)``."""
    x, z = x1 ^ x2, z1 ^ z2
    k = _popcount(x1 & z1) + _popcount(x2 & z2) - _popcount(x & z) + 2 * _popcount(z1 & x2)
    return _I_POW[k % 4], x, z


@dataclass(frozen=True)
class PauliString:
    coefficient: complex
    axes: str

    @property
    def n_qubits(self) -> int:
        return len(self.axes)

    @property
    def support(self) -> list[int]:
        return [q for q, ch in enumerate(self.axes) if ch != "I"]

    def is_identity(self) -> bool:
        return all(ch == "I" for ch in self.axes)


class PauliSum:
    """Linear combination of Pauli strings on a fixed register.

    Arithmetic merges identical strings immediately; near-zero coefficients are
    only removed by :meth:`simplify`.
    """

    __slots__ = ("n_qubits", "_terms")

    def __init__(self, n_qubits: int, terms: dict[tuple[int, int], complex] | None = None):
        if n_qubits < 0:
            raise ValidationError("register size must be non-negative")
        self.n_qubits = int(n_qubits)
        self._terms: dict[tuple[int, int], complex] = {}
        full = (1 << self.n_qubits) - 1
        for (x, z), c in (terms or {}).items():
            x, z = int(x), int(z)
            if (x | z) & ~full:
                raise ValidationError("Pauli mask exceeds register size")
            c = complex(c)
            if not np.isfinite(c):
                raise ValidationError("Pauli coefficient must be finite")
            self._terms[(x, z)] = self._terms.get((x, z), 0j) + c

    # construction -------------------------------------------------------
    @classmethod
    def from_list(cls, items: Iterable[tuple[complex, str]], n_qubits: int | None = None) -> PauliSum:
        items = list(items)
        if n_qubits is None:
            if not items:
                raise ValidationError("n_qubits required for an empty sum")
            n_qubits = len(items[0][1])
        out = cls(n_qubits)
        for c, axes in items:
            if len(axes) != n_qubits:
                raise ValidationError(f"axes {axes!r} do not match register size {n_qubits}")
            out._add_term(masks_from_axes(axes), complex(c))
        return out

    @classmethod
    def identity(cls, n_qubits: int, coefficient: complex = 1.0) -> PauliSum:
        return cls(n_qubits, {(0, 0): coefficient})

    @classmethod
    def single(cls, n_qubits: int, ops: dict[int, str], coefficient: complex = 1.0) -> PauliSum:
        """``coefficient`` times the string with ``ops[q]`` on qubit ``q``."""
        axes = ["I"] * n_qubits
        for q, ch in ops.items():
            if not 0 <= q < n_qubits:
                raise ValidationError(f"qubit {q} out of range")
            axes[q] = ch
        return cls.from_list([(coefficient, "".join(axes))], n_qubits)

    def _add_term(self, key, c):
        self._terms[key] = self._terms.get(key, 0j) + c

    def copy(self) -> PauliSum:
        out = PauliSum(self.n_qubits)
        out._terms = dict(self._terms)
        return out

    # access -------------------------------------------------------------
    def __len__(self):
        return len(self._terms)

    def __iter__(self) -> Iterator[PauliString]:
        return iter(self.strings())

    @property
    def masks(self) -> dict[tuple[int, int], complex]:
        return dict(self._terms)

    def canonical_items(self) -> list[tuple[str, int, int, complex]]:
        """``(axes, x, z, coefficient)`` in lexicographic axes order."""
        rows = [(axes_from_masks(x, z, self.n_qubits), x, z, c) for (x, z), c in self._terms.items()]
        rows.sort(key=lambda r: r[0])
        return rows

    def strings(self) -> list[PauliString]:
        return [PauliString(c, axes) for axes, _, _, c in self.canonical_items()]

    @property
    def identity_coefficient(self) -> complex:
        return self._terms.get((0, 0), 0j)

    def coefficient(self, axes: str) -> complex:
        return self._terms.get(masks_from_axes(axes), 0j)

    # algebra ------------------------------------------------------------
    def _check_compatible(self, other: PauliSum):
        if other.n_qubits != self.n_qubits:
            raise ValidationError(f"register mismatch: {self.n_qubits} vs {other.n_qubits}")

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = PauliSum.identity(self.n_qubits, other)
        if not isinstance(other, PauliSum):
            return NotImplemented
        self._check_compatible(other)
        out = self.copy()
        for key, c in other._terms.items():
            out._add_term(key, c)
        return out

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-1) * other

    def __rsub__(self, other):
        return (-1) * self + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            out = PauliSum(self.n_qubits)
            out._terms = {k: c * other for k, c in self._terms.items()}
            return out
        if not isinstance(other, PauliSum):
            return NotImplemented
        self._check_compatible(other)
        out = PauliSum(self.n_qubits)
        for (x1, z1), c1 in self._terms.items():
            for (x2, z2), c2 in other._terms.items():
                phase, x, z = multiply_masks(x1, z1, x2, z2)
                out._add_term((x, z), phase * c1 * c2)
        return out

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self * other
        return NotImplemented

    def adjoint(self) -> PauliSum:
        # every unit string in this basis is Hermitian
        out = PauliSum(self.n_qubits)
        out._terms = {k: c.conjugate() for k, c in self._terms.items()}
        return out

    def is_hermitian(self, tol: float = 0.0) -> bool:
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def max_abs_difference(self, other: PauliSum) -> float:
        self._check_compatible(other)
        keys = set(self._terms) | set(other._terms)
        if not keys:
            return 0.0
        return max(abs(self._terms.get(k, 0j) - other._terms.get(k, 0j)) for k in keys)

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self._terms == other._terms

    __hash__ = None

    def __repr__(self):
        body = " + ".join(f"({c:.6g})*{axes}" for axes, _, _, c in self.canonical_items()[:8])
        more = "" if len(self) <= 8 else f" + ... ({len(self)} terms)"
        return f"PauliSum(n_qubits={self.n_qubits}, {body or '0'}{more})"

    # serialization ------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "terms": [
                {"coeff_re": c.real, "coeff_im": c.imag, "axes": axes}
                for axes, _, _, c in self.canonical_items()
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> PauliSum:
        try:
            n = int(data["n_qubits"])
            items = [(complex(t["coeff_re"], t.get("coeff_im", 0.0)), t["axes"]) for t in data["terms"]]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed PauliSum JSON: {exc}") from None
        return cls.from_list(items, n)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> PauliSum:
        return cls.from_dict(json.loads(text))


def simplify(psum: PauliSum, drop_tol: float = DROP_TOL) -> PauliSum:
    """Merge duplicates and drop terms with ``|coefficient| < drop_tol``.

    Exact zeros are always dropped.
    """
    out = PauliSum(psum.n_qubits)
    for axes, x, z, c in psum.canonical_items():
        if c == 0 or abs(c) < drop_tol:
            continue
        out._terms[(x, z)] = c
    return out


# dense helpers ---------------------------------------------------------

def _basis_indices(n_qubits: int) -> np.ndarray:
    return np.arange(1 << n_qubits, dtype=np.int64)


def _sign_vector(idx: np.ndarray, z: int) -> np.ndarray:
    parity = np.bitwise_count(idx & z) & 1
    return 1 - 2 * parity.astype(np.int8)


def apply_string(x: int, z: int, psi: np.ndarray, idx: np.ndarray | None = None) -> np.ndarray:
    """Return ``P psi`` for the unit string ``(x, z)`` without forming a matrix."""
    if idx is None:
        idx = _basis_indices(int(np.log2(psi.size)))
    src = idx ^ x
    phase = _I_POW[_popcount(x & z) % 4]
    return phase * _sign_vector(src, z) * psi[src]


def pauli_to_matrix(psum: PauliSum, cap: int = MATRIX_CAP) -> np.ndarray:
    """Dense ``2**N x 2**N`` matrix; row/column index bit ``q`` is qubit ``q``."""
    n = psum.n_qubits
    if n > cap:
        raise ResourceError(f"{n} qubits exceeds dense matrix cap {cap}")
    dim = 1 << n
    idx = _basis_indices(n)
    mat = np.zeros((dim, dim), dtype=complex)
    for (x, z), c in psum.masks.items():
        phase = _I_POW[_popcount(x & z) % 4]
        # P|b> = phase * (-1)^{|z & b|} |b ^ x>
        mat[idx ^ x, idx] += c * phase * _sign_vector(idx, z)
    return mat
