"""Chemistry-level observables: one-body RDM, temporal observable F(t), accuracy gate."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .config import ACCURACY_THRESHOLD_HA
from .errors import NumericalIntegrityError, ValidationError
from .fermion_map import rdm_operator_strings
from .sim_dense import DenseState, string_expectations
from .sim_mps import MpsState, string_expectations_mps

RDM_TOL = 1e-8


@dataclass(frozen=True)
class ObservableResult:
    value: float
    time: float
    identity_offset: float
    backend_label: str
    imag_residue: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> ObservableResult:
        return cls(float(d["value"]), float(d["time"]), float(d["identity_offset"]),
                   str(d["backend_label"]), float(d["imag_residue"]))


@dataclass(frozen=True, eq=False)
class OneBodyRdm:
    rho: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.rho).real)


@lru_cache(maxsize=32)
def _rdm_strings(n: int):
    ops = rdm_operator_strings(n)
    masks = sorted({k for op in ops.values() for k in op.masks})
    return ops, masks


def string_values(masks, state) -> dict:
    if isinstance(state, MpsState):
        return string_expectations_mps(masks, state)
    if isinstance(state, DenseState):
        return string_expectations(masks, state)
    raise ValidationError(f"unsupported state type {type(state).__name__}")


def one_body_rdm(state) -> OneBodyRdm:
    """``rho[r, s] = <a+_r a_s>`` from the Pauli decomposition of each operator pair."""
    n = state.n_qubits
    ops, masks = _rdm_strings(n)
    vals = string_values(masks, state)
    rho = np.zeros((n, n), dtype=complex)
    for (r, s), op in ops.items():
        rho[r, s] = sum(c * vals[k] for k, c in sorted(op.masks.items()))
    herm = np.abs(rho - rho.conj().T).max()
    if herm > RDM_TOL:
        raise NumericalIntegrityError(f"one-body RDM not Hermitian (max deviation {herm:.3e})")
    rho = (rho + rho.conj().T) / 2
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < -RDM_TOL or evals.max() > 1 + RDM_TOL:
        raise NumericalIntegrityError(f"RDM occupancies outside [0, 1]: {evals.min():.3e}..{evals.max():.3e}")
    return OneBodyRdm(rho)


def temporal_observable(state, h_eff, time: float = 0.0, offset: float = 0.0,
                        backend_label: str | None = None, rdm: OneBodyRdm | None = None) -> ObservableResult:
    """``F = Re sum_rs h_eff[r,s] rho[r,s] + offset``.

    ``offset`` is an additive constant reported separately as
    ``identity_offset``; it defaults to zero.
    """
    h_eff = np.asarray(h_eff, dtype=complex)
    if h_eff.shape != (state.n_qubits, state.n_qubits):
        raise ValidationError(f"h_eff shape {h_eff.shape} does not match {state.n_qubits} spin orbitals")
    if np.abs(h_eff - h_eff.conj().T).max(initial=0.0) > 1e-10:
        raise ValidationError("h_eff is not Hermitian")
    if rdm is None:
        rdm = one_body_rdm(state)
    f = complex(np.sum(h_eff * rdm.rho))
    scale = max(1.0, float(np.abs(h_eff).sum()))
    if abs(f.imag) > RDM_TOL * scale:
        raise NumericalIntegrityError(f"F has imaginary residue {f.imag:.3e}")
    if backend_label is None:
        backend_label = "mps" if isinstance(state, MpsState) else "dense"
    return ObservableResult(f.real + float(offset), float(time), float(offset), backend_label, abs(f.imag))


def accuracy_check(f_test: float, f_ref: float, threshold: float = ACCURACY_THRESHOLD_HA) -> bool:
    """True when ``|f_test - f_ref| <= threshold`` (Hartree)."""
    for v in (f_test, f_ref, threshold):
        if v is None or not math.isfinite(v):
            raise ValidationError(f"accuracy check needs finite inputs, got {v!r}")
    return abs(f_test - f_ref) <= threshold
