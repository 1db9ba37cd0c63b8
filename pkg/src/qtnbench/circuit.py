"""Gate circuits: first-order Trotter synthesis, linear routing, depth metrics.

Two-qubit gate matrices act on the local index ``2 * bit(qubits[0]) + bit(qubits[1])``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .config import HERMITIAN_TOL
from .errors import ContractViolation, ValidationError
from .pauli import PauliSum

ONE_QUBIT = frozenset({"H", "RX", "RY", "RZ"})
TWO_QUBIT = frozenset({"CX", "SWAP", "RXX", "RYY", "RZZ", "RZX"})
ROTATIONS = frozenset({"RX", "RY", "RZ", "RXX", "RYY", "RZZ", "RZX"})
SELF_INVERSE = frozenset({"H", "CX", "SWAP"})

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_CX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
_GENERATORS = {
    "RX": _X, "RY": _Y, "RZ": _Z,
    "RXX": np.kron(_X, _X), "RYY": np.kron(_Y, _Y), "RZZ": np.kron(_Z, _Z), "RZX": np.kron(_Z, _X),
}


def _rotation(generator: np.ndarray, theta: float) -> np.ndarray:
    # generator squares to identity: exp(-i theta/2 G) = cos I - i sin G
    return math.cos(theta / 2) * np.eye(generator.shape[0]) - 1j * math.sin(theta / 2) * generator


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    routing: bool = False
    logical: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.logical is not None:
            object.__setattr__(self, "logical", tuple(int(q) for q in self.logical))
        arity = 1 if self.kind in ONE_QUBIT else 2 if self.kind in TWO_QUBIT else None
        if arity is None:
            raise ValidationError(f"unknown gate kind {self.kind!r}")
        if len(self.qubits) != arity or len(set(self.qubits)) != arity:
            raise ValidationError(f"{self.kind} needs {arity} distinct qubits, got {self.qubits}")
        if self.kind in ROTATIONS:
            if self.angle is None or not math.isfinite(self.angle):
                raise ValidationError(f"{self.kind} needs a finite angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ValidationError(f"{self.kind} takes no angle")

    @property
    def is_two_qubit(self) -> bool:
        return len(self.qubits) == 2

    def matrix(self) -> np.ndarray:
        if self.kind == "H":
            return _H
        if self.kind == "CX":
            return _CX
        if self.kind == "SWAP":
            return _SWAP
        return _rotation(_GENERATORS[self.kind], self.angle)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "qubits": list(self.qubits)}
        if self.angle is not None:
            d["angle"] = self.angle
        if self.routing:
            d["routing"] = True
        if self.logical is not None:
            d["logical"] = list(self.logical)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> Gate:
        logical = d.get("logical")
        return cls(d["kind"], tuple(d["qubits"]), d.get("angle"), bool(d.get("routing", False)),
                   tuple(logical) if logical is not None else None)


@dataclass(frozen=True)
class GateCircuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if any(not 0 <= q < self.n_qubits for q in g.qubits):
                raise ValidationError(f"gate {g} outside register of {self.n_qubits}")
        if self.metadata.get("time", 0.0) < 0:
            raise ValidationError("evolution time must be non-negative")
        if self.metadata.get("steps", 1) < 1:
            raise ValidationError("Trotter steps must be >= 1")

    def __len__(self):
        return len(self.gates)

    def to_dict(self) -> dict:
        return {"n_qubits": self.n_qubits, "gates": [g.to_dict() for g in self.gates],
                "metadata": dict(self.metadata)}

    @classmethod
    def from_dict(cls, d: dict) -> GateCircuit:
        try:
            return cls(int(d["n_qubits"]), tuple(Gate.from_dict(g) for g in d["gates"]),
                       dict(d.get("metadata", {})))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed circuit JSON: {exc}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> GateCircuit:
        return cls.from_dict(json.loads(text))


def hamiltonian_hash(H: PauliSum) -> str:
    return hashlib.sha256(H.to_json().encode()).hexdigest()[:16]


# synthesis -------------------------------------------------------------------

def pauli_rotation_gates(axes: str, theta: float) -> list[Gate]:
    """Gates implementing ``exp(-i theta/2 P)`` for the Pauli string ``axes``.

    Basis change onto Z (H for X, RX(pi/2) for Y), a CX parity ladder over the
    support, RZ on the last support qubit, then the mirror image.
    """
    support = [q for q, ch in enumerate(axes) if ch != "I"]
    if not support:
        raise ContractViolation("identity string has no rotation circuit")
    pre, post = [], []
    for q in support:
        ch = axes[q]
        if ch == "X":
            pre.append(Gate("H", (q,)))
            post.append(Gate("H", (q,)))
        elif ch == "Y":
            pre.append(Gate("RX", (q,), math.pi / 2))
            post.append(Gate("RX", (q,), -math.pi / 2))
        elif ch != "Z":
            raise ValidationError(f"invalid Pauli axis {ch!r}")
    ladder = [Gate("CX", (a, b)) for a, b in zip(support, support[1:])]
    return pre + ladder + [Gate("RZ", (support[-1],), theta)] + ladder[::-1] + post


def cancel_adjacent(gates: list[Gate]) -> list[Gate]:
    """Remove back-to-back pairs of identical self-inverse gates."""
    out: list[Gate | None] = []
    last: dict[int, list[int]] = {}
    for g in gates:
        if g.kind in SELF_INVERSE:
            heads = {last[q][-1] if last.get(q) else None for q in g.qubits}
            if len(heads) == 1:
                j = heads.pop()
                prev = out[j] if j is not None else None
                same = prev is not None and prev.kind == g.kind and (
                    prev.qubits == g.qubits or (g.kind == "SWAP" and set(prev.qubits) == set(g.qubits)))
                if same:
                    out[j] = None
                    for q in g.qubits:
                        last[q].pop()
                    continue
        out.append(g)
        for q in g.qubits:
            last.setdefault(q, []).append(len(out) - 1)
    return [g for g in out if g is not None]


def _real_coefficients(H: PauliSum) -> list[tuple[str, float]]:
    scale = max((abs(c) for c in H.masks.values()), default=0.0)
    terms = []
    for axes, _, _, c in H.canonical_items():
        if abs(c.imag) > HERMITIAN_TOL * max(1.0, scale):
            raise ValidationError(f"Hamiltonian term {axes} has complex coefficient {c}")
        terms.append((axes, c.real))
    return terms


def trotter_circuit(H: PauliSum, t: float, n_steps: int = 1, optimize: bool = True) -> GateCircuit:
    """First-order product formula for ``exp(-i H t)``.

    Each step applies ``exp(-i c_j P_j t/n)`` for the non-identity terms in
    canonical (lexicographic) order, first term first. The identity
    coefficient is recorded in the metadata rather than synthesized.
    """
    if n_steps < 1 or int(n_steps) != n_steps:
        raise ValidationError(f"Trotter steps must be a positive integer, got {n_steps}")
    if not math.isfinite(t) or t < 0:
        raise ValidationError(f"evolution time must be finite and non-negative, got {t}")
    terms = _real_coefficients(H)
    gates: list[Gate] = []
    ident = 0.0
    dt = t / n_steps
    for axes, c in terms:
        if all(ch == "I" for ch in axes):
            ident += c
    for _ in range(int(n_steps)):
        for axes, c in terms:
            theta = 2.0 * c * dt
            if theta == 0.0 or all(ch == "I" for ch in axes):
                continue
            gates.extend(pauli_rotation_gates(axes, theta))
    if optimize:
        gates = cancel_adjacent(gates)
    meta = {"time": float(t), "steps": int(n_steps), "source_hash": hamiltonian_hash(H),
            "identity_coefficient": ident}
    return GateCircuit(H.n_qubits, tuple(gates), meta)


# routing ---------------------------------------------------------------------

def _swap_chain(lo: int, hi: int) -> list[Gate]:
    return [Gate("SWAP", (k, k + 1), routing=True) for k in range(lo, hi - 1)]


def route_linear(circuit: GateCircuit) -> GateCircuit:
    """Make every two-qubit gate nearest-neighbour with symmetric SWAP chains.

    The lower qubit is swapped up next to the upper one, the gate applied and
    the chain undone, so the qubit layout is restored after every gate. Routed
    gates keep their original qubits in ``logical``.
    """
    out: list[Gate] = []
    for g in circuit.gates:
        if not g.is_two_qubit or abs(g.qubits[0] - g.qubits[1]) == 1:
            out.append(g)
            continue
        a, b = g.qubits
        lo, hi = min(a, b), max(a, b)
        chain = _swap_chain(lo, hi)
        phys = (hi - 1, hi) if a == lo else (hi, hi - 1)
        out.extend(chain)
        out.append(Gate(g.kind, phys, g.angle, logical=g.logical or g.qubits))
        out.extend(chain[::-1])
    meta = dict(circuit.metadata)
    meta["routed"] = True
    return GateCircuit(circuit.n_qubits, tuple(out), meta)


# depth -------------------------------------------------------------------------

@dataclass(frozen=True)
class DepthReport:
    all_gate_depth: int
    two_qubit_depth: int
    gate_count: int
    two_qubit_count: int


def depth_metrics(circuit: GateCircuit, count_swaps: bool = False) -> DepthReport:
    """ASAP layering depth over all gates and over two-qubit gates alone.

    With ``count_swaps=False`` routing SWAPs are skipped and routed gates are
    placed on their logical qubits, reproducing the pre-routing depth.
    """
    level = [0] * circuit.n_qubits
    level2 = [0] * circuit.n_qubits
    count = count2 = 0
    for g in circuit.gates:
        if g.routing and not count_swaps:
            continue
        qubits = g.qubits if count_swaps or g.logical is None else g.logical
        count += 1
        d = max(level[q] for q in qubits) + 1
        for q in qubits:
            level[q] = d
        if g.is_two_qubit:
            count2 += 1
            d2 = max(level2[q] for q in qubits) + 1
            for q in qubits:
                level2[q] = d2
    return DepthReport(max(level, default=0), max(level2, default=0), count, count2)
