"""Single-run measurement kernel and bond-dimension sweeps."""

from __future__ import annotations

import time
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .. import sim_dense, sim_mps
from ..chem_io import ActiveSpaceSpec, SpinOrbitalIntegrals, hf_reference, load_integrals, select_active_space
from ..circuit import DepthReport, GateCircuit, cancel_adjacent, depth_metrics, route_linear, trotter_circuit
from ..config import ACCURACY_THRESHOLD_HA, dense_cap
from ..errors import ResourceError, RunTimeout, ValidationError
from ..fermion_map import compile_observable, jordan_wigner_hamiltonian
from ..measure import accuracy_check, temporal_observable
from ..pauli import PauliSum
from ..sim_mps import FIDELITY_FLOOR, max_bond_dim_for, normalized_bond_dim
from .family import resolve_bundled
from .records import BenchRecord, RunConfig

# stored amplitudes per site at saturation: left * 2 * right with both bonds at D
MEMORY_STRUCTURE_CONSTANT = 2
_REFERENCE_CACHE_SIZE = 8


def memory_estimate(n_qubits: int, bond_dim: int) -> int:
    """Bytes for an ``N``-site MPS at bond dimension ``D``: ``16 * c * D**2 * N``, c = 2."""
    if n_qubits < 1 or bond_dim < 1:
        raise ValidationError("memory estimate needs N >= 1 and D >= 1")
    return 16 * MEMORY_STRUCTURE_CONSTANT * bond_dim * bond_dim * n_qubits


def dense_memory_bytes(n_qubits: int) -> int:
    return 16 << n_qubits


def default_grid(n_qubits: int) -> list[int]:
    """Powers of two from 2 up to the exact maximum ``2**floor(N/2)``."""
    top = max_bond_dim_for(n_qubits)
    grid = []
    d = 2
    while d < top:
        grid.append(d)
        d *= 2
    grid.append(top)
    return grid


def resolve_integrals(hamiltonian_ref: str, n_so: int, n_e: int, seed: int = 0) -> SpinOrbitalIntegrals:
    """Bundled reference or integral file, reduced to the requested active space."""
    ints = resolve_bundled(hamiltonian_ref, seed)
    if ints is None:
        ints = load_integrals(hamiltonian_ref)
    return fit_active_space(ints, n_so, n_e)


def fit_active_space(ints: SpinOrbitalIntegrals, n_so: int, n_e: int) -> SpinOrbitalIntegrals:
    if ints.n_so == n_so and int(ints.occupation.sum()) == n_e:
        return ints
    if ints.n_so < n_so:
        raise ValidationError(f"integrals cover {ints.n_so} spin orbitals, config asks for {n_so}")
    return select_active_space(ints, ActiveSpaceSpec(n_so, n_e))


@dataclass
class Prepared:
    """Everything a run needs before the timed section."""

    integrals: SpinOrbitalIntegrals
    hamiltonian: PauliSum
    observable: PauliSum
    circuit: GateCircuit
    depth: DepthReport
    basis_index: int
    synthesis_time_s: float

    @property
    def key(self):
        m = self.circuit.metadata
        return (m["source_hash"], m["time"], m["steps"], self.basis_index)


def prepare(config: RunConfig, integrals: SpinOrbitalIntegrals | None = None) -> Prepared:
    t0 = time.perf_counter()
    if integrals is None:
        integrals = resolve_integrals(config.hamiltonian_ref, config.n_so, config.n_e, config.seed)
    else:
        integrals = fit_active_space(integrals, config.n_so, config.n_e)
    H = jordan_wigner_hamiltonian(integrals)
    obs = compile_observable(integrals.h)
    circ = trotter_circuit(H, config.t, config.trotter_steps)
    depth = depth_metrics(circ)
    return Prepared(integrals, H, obs, circ, depth, hf_reference(integrals), time.perf_counter() - t0)


def mps_circuit(circuit: GateCircuit) -> GateCircuit:
    """Linear routing followed by adjacent cancellation of back-to-back SWAPs."""
    routed = route_linear(circuit)
    return GateCircuit(routed.n_qubits, cancel_adjacent(list(routed.gates)), routed.metadata)


class _Deadline:
    def __init__(self, seconds: float):
        self.limit = time.perf_counter() + seconds
        self.seconds = seconds

    def __call__(self):
        if time.perf_counter() > self.limit:
            raise RunTimeout(f"run exceeded {self.seconds} s")


_reference_cache: OrderedDict = OrderedDict()


def dense_reference(prep: Prepared):
    """``(state, F)`` from the dense oracle, or None above the dense cap. Cached per circuit."""
    n = prep.integrals.n_so
    if n > dense_cap():
        return None
    key = prep.key
    hit = _reference_cache.get(key)
    if hit is not None:
        _reference_cache.move_to_end(key)
        return hit
    psi = sim_dense.apply_circuit(prep.circuit, sim_dense.init_basis(n, prep.basis_index))
    f = temporal_observable(psi, prep.integrals.h).value
    _reference_cache[key] = (psi, f)
    while len(_reference_cache) > _REFERENCE_CACHE_SIZE:
        _reference_cache.popitem(last=False)
    return psi, f


def clear_reference_cache():
    _reference_cache.clear()


def _record(config, prep, status, wall, f_value=None, f_ref=None, fid_exact=None, fid_est=None,
            threshold=ACCURACY_THRESHOLD_HA):
    n = config.n_so
    abs_err = accurate = None
    if f_value is not None and f_ref is not None:
        abs_err = abs(f_value - f_ref)
        accurate = accuracy_check(f_value, f_ref, threshold)
    if config.backend == "mps":
        mem = memory_estimate(n, config.bond_dim)
        norm_d = normalized_bond_dim(config.bond_dim, n)
    else:
        mem = dense_memory_bytes(n)
        norm_d = None
    return BenchRecord(
        config=config, wall_time_s=wall, f_value=f_value, f_reference=f_ref, abs_error=abs_err,
        accurate=accurate, fidelity_exact=fid_exact, fidelity_estimate=fid_est, depth=prep.depth,
        pauli_term_count=len(prep.hamiltonian), observable_term_count=len(prep.observable),
        mem_estimate_bytes=mem, status=status, normalized_bond_dim=norm_d,
        synthesis_time_s=prep.synthesis_time_s,
    )


def run_single(config: RunConfig, integrals: SpinOrbitalIntegrals | None = None,
               f_reference: float | None = None, threshold: float = ACCURACY_THRESHOLD_HA,
               prepared: Prepared | None = None) -> BenchRecord:
    """Synthesize, evolve the Hartree-Fock state and measure ``F``.

    ``wall_time_s`` covers circuit application and observable evaluation only.
    Cap and wall-clock failures come back as ``oom`` / ``timeout`` records.
    ``f_reference`` supplies an external reference when the dense oracle is
    out of reach.
    """
    prep = prepared if prepared is not None else prepare(config, integrals)
    n = config.n_so
    circ = mps_circuit(prep.circuit) if config.backend == "mps" else prep.circuit
    deadline = _Deadline(config.timeout_s)
    start = time.perf_counter()
    try:
        if config.backend == "dense":
            if n > dense_cap():
                raise ResourceError(f"{n} qubits exceeds dense cap {dense_cap()}")
            psi = sim_dense.apply_circuit(circ, sim_dense.init_basis(n, prep.basis_index), deadline)
            f_value = temporal_observable(psi, prep.integrals.h, config.t).value
            wall = time.perf_counter() - start
            f_ref = f_value if f_reference is None else f_reference
            return _record(config, prep, "ok", wall, f_value, f_ref, 1.0, 1.0, threshold)
        state = sim_mps.mps_from_basis(n, prep.basis_index, config.bond_dim)
        sim_mps.apply_circuit(circ, state, deadline)
        f_value = temporal_observable(state, prep.integrals.h, config.t).value
        wall = time.perf_counter() - start
    except RunTimeout:
        return _record(config, prep, "timeout", time.perf_counter() - start, threshold=threshold)
    except (ResourceError, MemoryError):
        return _record(config, prep, "oom", time.perf_counter() - start, threshold=threshold)

    fid_exact = None
    ref = dense_reference(prep) if f_reference is None else None
    if ref is not None:
        psi, f_reference = ref
        fid_exact = sim_mps.fidelity_exact(state, psi)
    fid_est = state.fidelity_estimate
    probe = fid_exact if fid_exact is not None else fid_est
    status = "numerical_noise" if probe < FIDELITY_FLOOR else "ok"
    return _record(config, prep, status, wall, f_value, f_reference, fid_exact, fid_est, threshold)


def _source(ham, seed=0):
    if isinstance(ham, SpinOrbitalIntegrals):
        return "<integrals>", ham
    if isinstance(ham, str):
        ints = resolve_bundled(ham, seed)
        if ints is None:
            ints = load_integrals(ham)
        return ham, ints
    raise ValidationError(f"cannot use {type(ham).__name__} as a Hamiltonian source")


def sweep_min_accurate_D(ham, t: float = 10.0, steps: int = 1, D_grid=None,
                         threshold: float = ACCURACY_THRESHOLD_HA, *, seed: int = 0,
                         f_reference: float | None = None, backend_label: str = "mps",
                         timeout_s: float | None = None):
    """Run every ``D`` in ``D_grid`` and return ``(D_min, records)``.

    ``D_min`` is the least grid value whose record is accurate, or None when
    none qualifies. ``ham`` is a :class:`SpinOrbitalIntegrals` or a reference
    string (``bundled:<n_so>`` or an integral file path).
    """
    ref_name, ints = _source(ham, seed)
    n = ints.n_so
    grid = default_grid(n) if D_grid is None else [int(d) for d in D_grid]
    if not grid:
        raise ValidationError("bond-dimension grid is empty")
    if any(d < 1 for d in grid) or grid != sorted(grid):
        raise ValidationError(f"bond-dimension grid must be ascending positive integers, got {grid}")
    n_e = int(ints.occupation.sum())
    extra = {} if timeout_s is None else {"timeout_s": timeout_s}
    base = RunConfig(ref_name, n, n_e, t, steps, "mps", grid[0], seed, backend_label, **extra)
    prep = prepare(base, ints)
    if f_reference is None and dense_reference(prep) is None:
        raise ResourceError(f"{n} qubits exceeds dense cap and no reference value was supplied")
    records = []
    for d in grid:
        cfg = RunConfig(ref_name, n, n_e, t, steps, "mps", d, seed, backend_label, **extra)
        records.append(run_single(cfg, f_reference=f_reference, threshold=threshold, prepared=prep))
    d_min = next((r.config.bond_dim for r in records if r.accurate), None)
    return d_min, records


def f_value_bits(record: BenchRecord) -> str | None:
    """Hex image of ``f_value`` for bit-level determinism checks."""
    if record.f_value is None:
        return None
    return np.float64(record.f_value).tobytes().hex()

