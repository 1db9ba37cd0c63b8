"""Matrix-product-state backend with a bond-dimension cap.

Site ``k`` holds qubit ``k`` as a ``(left, 2, right)`` tensor. The state is
kept in mixed canonical form around ``ortho_center``; two-site gates are
applied by contraction and SVD, truncating to at most ``max_bond_dim``
singular values and dropping those whose relative weight falls below
``trunc_tol``. Discarded weight ``w`` multiplies ``fidelity_estimate`` by
``1 - w`` and the state is renormalized.
"""

from __future__ import annotations

import io
import json
import math

import numpy as np
import scipy.linalg

from .circuit import Gate, GateCircuit
from .config import dense_cap
from .errors import ContractViolation, NumericalIntegrityError, ResourceError, ValidationError
from .pauli import PauliSum, axes_from_masks
from .sim_dense import DenseState

IMAG_TOL = 1e-8
DEFAULT_TRUNC_TOL = 1e-14
FIDELITY_FLOOR = 1e-16

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def max_bond_dim_for(n_qubits: int) -> int:
    """Largest Schmidt rank across the middle cut, ``2**floor(N/2)``."""
    if n_qubits < 1:
        raise ValidationError("need at least one qubit")
    return 1 << (n_qubits // 2)


def normalized_bond_dim(bond_dim: int, n_qubits: int) -> float:
    return min(1.0, bond_dim / max_bond_dim_for(n_qubits))


def _svd(mat):
    try:
        return scipy.linalg.svd(mat, full_matrices=False, lapack_driver="gesdd", check_finite=False)
    except np.linalg.LinAlgError:
        return scipy.linalg.svd(mat, full_matrices=False, lapack_driver="gesvd", check_finite=False)


class MpsState:
    def __init__(self, tensors, max_bond_dim: int, trunc_tol: float = DEFAULT_TRUNC_TOL,
                 ortho_center: int = 0, fidelity_estimate: float = 1.0):
        if max_bond_dim < 1:
            raise ValidationError(f"bond dimension must be >= 1, got {max_bond_dim}")
        self.tensors = [np.asarray(t, dtype=np.complex128) for t in tensors]
        self.n_qubits = len(self.tensors)
        if self.n_qubits < 1:
            raise ValidationError("MPS needs at least one site")
        self.max_bond_dim = int(max_bond_dim)
        self.trunc_tol = float(trunc_tol)
        self.ortho_center = int(ortho_center)
        self.fidelity_estimate = float(fidelity_estimate)
        self.truncations = 0
        self.discarded_weight = 0.0
        self._stored = sum(t.size for t in self.tensors)
        self.peak_amplitudes = self._stored

    @property
    def bond_dims(self) -> list[int]:
        return [1] + [t.shape[2] for t in self.tensors]

    def copy(self) -> MpsState:
        out = MpsState([t.copy() for t in self.tensors], self.max_bond_dim, self.trunc_tol,
                       self.ortho_center, self.fidelity_estimate)
        out.truncations = self.truncations
        out.discarded_weight = self.discarded_weight
        out.peak_amplitudes = self.peak_amplitudes
        return out

    def _replace(self, k, tensor):
        self._stored += tensor.size - self.tensors[k].size
        self.tensors[k] = tensor

    def _track(self, extra=0):
        self.peak_amplitudes = max(self.peak_amplitudes, self._stored + extra)

    # canonical form -----------------------------------------------------
    def _shift_right(self):
        k = self.ortho_center
        a = self.tensors[k]
        dl, d, dr = a.shape
        q, r = np.linalg.qr(a.reshape(dl * d, dr))
        self._replace(k, q.reshape(dl, d, q.shape[1]))
        self._replace(k + 1, np.tensordot(r, self.tensors[k + 1], axes=(1, 0)))
        self.ortho_center = k + 1

    def _shift_left(self):
        k = self.ortho_center
        a = self.tensors[k]
        dl, d, dr = a.shape
        q, r = np.linalg.qr(a.reshape(dl, d * dr).T)
        self._replace(k, q.T.reshape(q.shape[1], d, dr))
        self._replace(k - 1, np.tensordot(self.tensors[k - 1], r.T, axes=(2, 0)))
        self.ortho_center = k - 1

    def move_center(self, site: int):
        if not 0 <= site < self.n_qubits:
            raise ValidationError(f"site {site} out of range")
        while self.ortho_center < site:
            self._shift_right()
        while self.ortho_center > site:
            self._shift_left()

    def canonical_residual(self) -> float:
        """Max deviation from left-/right-orthonormality away from the centre."""
        worst = 0.0
        for k, a in enumerate(self.tensors):
            dl, d, dr = a.shape
            if k < self.ortho_center:
                m = a.reshape(dl * d, dr)
                worst = max(worst, np.abs(m.conj().T @ m - np.eye(dr)).max())
            elif k > self.ortho_center:
                m = a.reshape(dl, d * dr)
                worst = max(worst, np.abs(m @ m.conj().T - np.eye(dl)).max())
        return float(worst)

    # gates --------------------------------------------------------------
    def _bond_cap(self, bond: int) -> int:
        # bond index b sits between sites b-1 and b
        return min(self.max_bond_dim, 1 << min(bond, self.n_qubits - bond, 62))

    def apply_gate(self, gate: Gate) -> MpsState:
        """Apply ``gate`` in place and return ``self``."""
        if any(not 0 <= q < self.n_qubits for q in gate.qubits):
            raise ValidationError(f"gate {gate} outside register of {self.n_qubits}")
        if not gate.is_two_qubit:
            k = gate.qubits[0]
            self.tensors[k] = np.einsum("ij,ajb->aib", gate.matrix(), self.tensors[k])
            return self
        a, b = gate.qubits
        if abs(a - b) != 1:
            raise ContractViolation(f"two-qubit gate on non-adjacent sites {gate.qubits}; route first")
        m = gate.matrix()
        if a > b:
            m = m.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)
        return self.apply_two_site(min(a, b), m)

    def apply_two_site(self, k: int, matrix: np.ndarray) -> MpsState:
        """Apply a 4x4 unitary to sites ``(k, k+1)`` (local index ``2*s_k + s_{k+1}``)."""
        if not 0 <= k < self.n_qubits - 1:
            raise ContractViolation(f"no adjacent pair starting at site {k}")
        g4 = np.asarray(matrix, dtype=np.complex128).reshape(2, 2, 2, 2)
        if self.ortho_center < k:
            self.move_center(k)
        elif self.ortho_center > k + 1:
            self.move_center(k + 1)
        left, right = self.tensors[k], self.tensors[k + 1]
        dl, dr = left.shape[0], right.shape[2]
        theta = np.tensordot(left, right, axes=(2, 0))
        theta = np.einsum("ijkl,aklc->aijc", g4, theta)
        self._track(theta.size)
        u, s, vh = _svd(theta.reshape(dl * 2, 2 * dr))
        total = float(np.dot(s, s))
        if not total > 0 or not math.isfinite(total):
            raise NumericalIntegrityError("two-site block has vanishing or non-finite norm")
        keep = min(len(s), self._bond_cap(k + 1))
        weights = s[:keep] ** 2 / total
        while keep > 1 and weights[keep - 1] < self.trunc_tol:
            keep -= 1
        kept = float(np.dot(s[:keep], s[:keep]))
        lost = max(0.0, 1.0 - kept / total)
        if keep < len(s):
            self.truncations += 1
        if lost > 0.0:
            self.discarded_weight += lost
            self.fidelity_estimate *= 1.0 - lost
        s_kept = s[:keep] / math.sqrt(kept)
        self._replace(k, u[:, :keep].reshape(dl, 2, keep))
        self._replace(k + 1, (s_kept[:, None] * vh[:keep]).reshape(keep, 2, dr))
        self.ortho_center = k + 1
        self._track()
        return self


def mps_from_basis(n_qubits: int, index: int, max_bond_dim: int | None = None,
                   trunc_tol: float = DEFAULT_TRUNC_TOL) -> MpsState:
    if n_qubits < 1 or not 0 <= index < (1 << n_qubits):
        raise ValidationError(f"basis index {index} out of range for {n_qubits} qubits")
    tensors = []
    for q in range(n_qubits):
        t = np.zeros((1, 2, 1), dtype=np.complex128)
        t[0, (index >> q) & 1, 0] = 1.0
        tensors.append(t)
    D = max_bond_dim_for(n_qubits) if max_bond_dim is None else max_bond_dim
    return MpsState(tensors, D, trunc_tol)


def apply_gate(gate: Gate, state: MpsState) -> MpsState:
    return state.apply_gate(gate)


def _embed(gate: Gate, pair: tuple[int, int]) -> np.ndarray:
    """4x4 matrix of ``gate`` on the local index ``2 * bit(pair[0]) + bit(pair[1])``."""
    m = gate.matrix()
    if not gate.is_two_qubit:
        return np.kron(m, np.eye(2)) if gate.qubits[0] == pair[0] else np.kron(np.eye(2), m)
    if gate.qubits == pair:
        return m
    return m.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)


def fused_blocks(gates):
    """Yield gates with runs on one adjacent pair merged into a single 4x4 block.

    Single-qubit gates outside the open block are emitted immediately; they
    act on other qubits and commute with it. Blocks are emitted as
    ``(pair, matrix)`` tuples, everything else as :class:`Gate`.
    """
    pair = None
    block = None
    for g in gates:
        if pair is not None and set(g.qubits) <= set(pair):
            block = _embed(g, pair) @ block
            continue
        if g.is_two_qubit:
            if pair is not None:
                yield pair, block
            pair = (min(g.qubits), max(g.qubits))
            block = _embed(g, pair)
        else:
            yield g
    if pair is not None:
        yield pair, block


def apply_circuit(circuit: GateCircuit, state: MpsState, deadline=None, check_every: int = 0,
                  fuse: bool = True) -> MpsState:
    """Apply the circuit in place.

    With ``fuse`` (default) consecutive gates on one adjacent pair are
    contracted into a single two-site update, so truncation happens once per
    block. ``check_every > 0`` spot-checks the canonical form.
    """
    if circuit.n_qubits != state.n_qubits:
        raise ValidationError(f"circuit on {circuit.n_qubits} qubits, state on {state.n_qubits}")
    ops = fused_blocks(circuit.gates) if fuse else iter(circuit.gates)
    for k, op in enumerate(ops):
        if isinstance(op, Gate):
            state.apply_gate(op)
        else:
            state.apply_two_site(op[0][0], op[1])
        if check_every and (k + 1) % check_every == 0:
            res = state.canonical_residual()
            if res > 1e-10:
                raise NumericalIntegrityError(f"canonical residual {res:.3e} after operation {k}")
        if deadline is not None and k % 16 == 0:
            deadline()
    return state


def mps_to_dense(state: MpsState) -> DenseState:
    n = state.n_qubits
    if n > dense_cap():
        raise ResourceError(f"{n} qubits exceeds dense cap {dense_cap()}")
    psi = np.ones((1, 1), dtype=np.complex128)
    for a in state.tensors:
        dl, d, dr = a.shape
        psi = (psi @ a.reshape(dl, d * dr)).reshape(-1, dr)
    # psi index is s_0 s_1 ... s_{N-1} with s_0 most significant; flip to qubit-0-LSB
    vec = psi.reshape((2,) * n).transpose(tuple(range(n - 1, -1, -1))).ravel()
    return DenseState(n, vec)


# expectation values ------------------------------------------------------------

def _environments(state: MpsState):
    t = state.tensors
    n, c = state.n_qubits, state.ortho_center
    dims = state.bond_dims
    left = [None] * (n + 1)
    right = [None] * (n + 1)
    for k in range(c + 1):
        left[k] = np.eye(dims[k], dtype=np.complex128)
    for k in range(c, n):
        a = t[k]
        dl, d, dr = a.shape
        tmp = (left[k] @ a.reshape(dl, d * dr)).reshape(dl * d, dr)
        left[k + 1] = a.reshape(dl * d, dr).conj().T @ tmp
    for k in range(c + 1, n + 1):
        right[k] = np.eye(dims[k], dtype=np.complex128)
    for k in range(c, -1, -1):
        a = t[k]
        dl, d, dr = a.shape
        tmp = (a.reshape(dl * d, dr) @ right[k + 1].T).reshape(dl, d * dr)
        right[k] = (a.reshape(dl, d * dr).conj() @ tmp.T)
    return left, right


def _step(env, a, op):
    dl, d, dr = a.shape
    tmp = (env @ a.reshape(dl, d * dr)).reshape(dl, d, dr)
    if op is not None:
        tmp = np.einsum("ij,ajb->aib", op, tmp)
    return a.reshape(dl * d, dr).conj().T @ tmp.reshape(dl * d, dr)


def string_expectations_mps(masks, state: MpsState) -> dict[tuple[int, int], complex]:
    """``<psi|P|psi>`` for each unit string, sharing prefix contractions in a trie.

    Environments are ordered (bra, ket); strings are grouped by their first
    non-identity site so common operator prefixes are contracted once.
    """
    n = state.n_qubits
    left, right = _environments(state)
    out: dict[tuple[int, int], complex] = {}
    tries: dict[int, dict] = {}
    for x, z in masks:
        axes = axes_from_masks(x, z, n)
        support = [q for q, ch in enumerate(axes) if ch != "I"]
        if not support:
            out[(x, z)] = complex(np.vdot(left[n].ravel(), right[n].ravel()))
            continue
        lo, hi = support[0], support[-1]
        node = tries.setdefault(lo, {})
        for ch in axes[lo:hi + 1]:
            node = node.setdefault(ch, {})
        node.setdefault(None, []).append((x, z))
    for lo, root in sorted(tries.items()):
        stack = [(lo, left[lo], root)]
        while stack:
            site, env, node = stack.pop()
            for ch in sorted(k for k in node if k is not None):
                child = node[ch]
                env2 = _step(env, state.tensors[site], None if ch == "I" else _PAULI[ch])
                if None in child:
                    val = complex(np.sum(env2 * right[site + 1]))
                    for key in child[None]:
                        out[key] = val
                if len(child) > (1 if None in child else 0):
                    stack.append((site + 1, env2, child))
    return out


def expectation_mps(obs: PauliSum, state: MpsState) -> float:
    if obs.n_qubits != state.n_qubits:
        raise ValidationError("observable and state register sizes differ")
    vals = string_expectations_mps(obs.masks.keys(), state)
    total = sum(c * vals[k] for k, c in sorted(obs.masks.items()))
    scale = max(1.0, sum(abs(c) for c in obs.masks.values()))
    if abs(total.imag) > IMAG_TOL * scale:
        raise NumericalIntegrityError(f"MPS expectation has imaginary residue {total.imag:.3e}")
    return float(total.real)


def fidelity_exact(state: MpsState, reference: DenseState) -> float:
    """``|<reference|psi>|**2`` by full contraction (dense cap applies)."""
    if reference.n_qubits != state.n_qubits:
        raise ValidationError("register sizes differ")
    psi = mps_to_dense(state).amplitudes
    f = abs(np.vdot(reference.amplitudes, psi)) ** 2
    return float(min(1.0, max(0.0, f)))


# dump format: one JSON header line, then row-major little-endian complex128 data

def dump_mps(state: MpsState) -> bytes:
    header = {
        "N": state.n_qubits, "bond_dims": state.bond_dims, "D": state.max_bond_dim,
        "fidelity_estimate": state.fidelity_estimate, "trunc_tol": state.trunc_tol,
        "ortho_center": state.ortho_center, "shapes": [list(t.shape) for t in state.tensors],
    }
    buf = io.BytesIO()
    buf.write(json.dumps(header).encode() + b"\n")
    for t in state.tensors:
        buf.write(np.ascontiguousarray(t).astype("<c16").tobytes())
    return buf.getvalue()


def load_mps(blob: bytes) -> MpsState:
    nl = blob.index(b"\n")
    header = json.loads(blob[:nl])
    offset = nl + 1
    tensors = []
    for shape in header["shapes"]:
        count = int(np.prod(shape))
        data = np.frombuffer(blob, dtype="<c16", count=count, offset=offset)
        tensors.append(data.reshape(shape).astype(np.complex128))
        offset += 16 * count
    if offset != len(blob):
        raise ValidationError("MPS dump has trailing or missing data")
    return MpsState(tensors, header["D"], header["trunc_tol"], header["ortho_center"],
                    header["fidelity_estimate"])
