"""Runtime-scaling probes: fixed-circuit dense timings and slope helpers."""

from __future__ import annotations

import time

import numpy as np

from .. import sim_dense
from ..circuit import Gate, GateCircuit


def fixed_gate_list(span: int = 10, n_pairs: int = 300, seed: int = 0) -> list[Gate]:
    """Random RXX/RY pairs on qubits below ``span``; the same list for every register size."""
    rng = np.random.default_rng(seed)
    gates = []
    for _ in range(n_pairs):
        a, b = (int(q) for q in rng.choice(span, 2, replace=False))
        gates.append(Gate("RXX", (a, b), float(rng.uniform(-np.pi, np.pi))))
        gates.append(Gate("RY", (a,), float(rng.uniform(-np.pi, np.pi))))
    return gates


def dense_fixed_circuit_times(ns, n_pairs: int = 300, rounds: int = 15, seed: int = 0) -> dict[int, float]:
    """Best-of-``rounds`` wall time of one fixed gate list applied at each register size.

    Sizes are timed round-robin so slow drifts in machine load hit all of them alike.
    """
    ns = sorted(ns)
    gates = fixed_gate_list(min(ns), n_pairs, seed)
    jobs = {n: (sim_dense.pack_circuit(GateCircuit(n, tuple(gates))), sim_dense.init_basis(n, 0)) for n in ns}
    best = {n: float("inf") for n in ns}
    for _ in range(rounds):
        for n in ns:
            packed, psi = jobs[n]
            start = time.perf_counter()
            sim_dense.apply_circuit(packed, psi)
            best[n] = min(best[n], time.perf_counter() - start)
    return best


def step_ratios(times: dict[int, float]) -> dict[tuple[int, int], float]:
    ns = sorted(times)
    return {(a, b): times[b] / times[a] for a, b in zip(ns, ns[1:])}


def loglog_slope(ns, ys) -> float:
    """Least-squares slope of log y against log N."""
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(ys, float)), 1)[0])


def log2_slope_per_qubit(ns, ys) -> float:
    """Least-squares slope of log2 y against N."""
    return float(np.polyfit(np.asarray(ns, float), np.log2(np.asarray(ys, float)), 1)[0])
