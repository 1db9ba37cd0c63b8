"""Command-line front end: ingest, compile, run, sweep, bench, fit, report.

Exit codes: 0 success, 1 validation / usage / missing file, 2 resource cap or
timeout, 3 numerical-integrity failure.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from . import sim_dense, sim_mps
from .benchlab.family import resolve_bundled
from .benchlab.fitting import fit_scaling
from .benchlab.records import RunConfig, parse_csv_rows, records_from_csv, records_to_csv, records_to_json
from .benchlab.report import VIEWS, identity_coefficients, write_views
from .benchlab.runner import default_grid, dense_reference, mps_circuit, prepare, run_single
from .chem_io import (ActiveSpaceSpec, hf_reference, integrals_from_dict, integrals_to_dict, load_integrals,
                      select_active_space)
from .circuit import GateCircuit, depth_metrics, hamiltonian_hash, trotter_circuit
from .config import ACCURACY_THRESHOLD_HA
from .errors import NumericalIntegrityError, ResourceError, ValidationError
from .fermion_map import compile_observable, jordan_wigner_hamiltonian
from .measure import temporal_observable
from .pauli import PauliSum

EXIT_OK, EXIT_VALIDATION, EXIT_RESOURCE, EXIT_NUMERICAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _dump_json(obj, path):
    text = json.dumps(obj, indent=1) + "\n"
    _write_text(text, path)


def _write_text(text, path):
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ValidationError(f"cannot write {path}: {exc.strerror}") from None


def _read_json(path):
    with open(path) as fh:
        return json.load(fh)


def _read_text(path):
    with open(path) as fh:
        return fh.read()


def _load_ham(path):
    data = _read_json(path)
    try:
        ints = integrals_from_dict(data["integrals"])
        H = PauliSum.from_dict(data["pauli_hamiltonian"])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: not a Hamiltonian file ({exc})") from None
    return data, ints, H


# subcommands -------------------------------------------------------------------

def cmd_ingest(args):
    ints = resolve_bundled(args.integrals, args.seed)
    if ints is None:
        ints = load_integrals(args.integrals, args.spin_expansion)
    n_e = args.n_e if args.n_e is not None else args.n_so // 2
    spec = ActiveSpaceSpec(args.n_so, n_e)
    if ints.n_so != spec.n_so or int(ints.occupation.sum()) != spec.n_e:
        ints = select_active_space(ints, spec)
    H = jordan_wigner_hamiltonian(ints)
    obs = compile_observable(ints.h)
    _dump_json({
        "source": args.integrals, "n_so": ints.n_so, "n_e": int(ints.occupation.sum()),
        "integrals": integrals_to_dict(ints), "pauli_hamiltonian": H.to_dict(),
        "observable": obs.to_dict(),
    }, args.out)
    print(f"{ints.n_so} spin orbitals, {len(H)} Pauli terms, {len(obs)} observable terms")


def cmd_compile(args):
    _, _, H = _load_ham(args.ham)
    circ = trotter_circuit(H, args.time, args.steps, optimize=not args.no_optimize)
    _dump_json(circ.to_dict(), args.out)
    d = depth_metrics(circ)
    print(f"{d.gate_count} gates, depth {d.all_gate_depth}, two-qubit depth {d.two_qubit_depth}")


def cmd_run(args):
    _, ints, H = _load_ham(args.obs)
    circ = GateCircuit.from_dict(_read_json(args.circ))
    if circ.n_qubits != ints.n_so:
        raise ValidationError(f"circuit has {circ.n_qubits} qubits, Hamiltonian {ints.n_so}")
    src = circ.metadata.get("source_hash")
    if src is not None and src != hamiltonian_hash(H):
        raise ValidationError("circuit was compiled from a different Hamiltonian")
    t = float(circ.metadata.get("time", 0.0))
    idx = hf_reference(ints)
    out = {"backend": args.backend}
    if args.backend == "dense":
        state = sim_dense.apply_circuit(circ, sim_dense.init_basis(ints.n_so, idx))
        fid = 1.0
    else:
        if args.bond_dim is None:
            raise ValidationError("--bond-dim is required for the mps backend")
        state = sim_mps.mps_from_basis(ints.n_so, idx, args.bond_dim)
        sim_mps.apply_circuit(mps_circuit(circ), state)
        fid = state.fidelity_estimate
        out["bond_dim"] = args.bond_dim
    res = temporal_observable(state, ints.h, t, backend_label=args.backend_label or args.backend)
    out.update(res.to_dict())
    out["f_value"] = res.value
    out["fidelity_estimate"] = fid
    _dump_json(out, args.out)
    print(f"F = {res.value!r}")


def _parse_grid(text, n):
    if text == "auto":
        return default_grid(n)
    try:
        grid = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"bad grid {text!r}; use 'auto' or a comma list like 2,4,8") from None
    if not grid:
        raise ValidationError("bond-dimension grid is empty")
    if grid != sorted(grid):
        raise ValidationError("bond-dimension grid must be ascending")
    return grid


def _sweep_worker(payload):
    cfg, ints_dict, f_ref, threshold = payload
    return run_single(cfg, integrals_from_dict(ints_dict), f_reference=f_ref, threshold=threshold)


def _strip_timing(records, omit):
    return [replace(r, wall_time_s=None, synthesis_time_s=None) for r in records] if omit else records


def cmd_sweep(args):
    _, ints, _ = _load_ham(args.ham)
    n, n_e = ints.n_so, int(ints.occupation.sum())
    grid = _parse_grid(args.grid, n)
    cfgs = [RunConfig(args.ham, n, n_e, args.time, args.steps, "mps", d, args.seed, args.backend_label or "mps")
            for d in grid]
    prep = prepare(cfgs[0], ints)
    f_ref = args.reference
    if f_ref is None:
        ref = dense_reference(prep)
        if ref is None:
            raise ResourceError(f"{n} qubits exceeds the dense cap; pass --reference")
        f_ref = ref[1]
    if args.parallel > 1:
        payloads = [(c, integrals_to_dict(ints), f_ref, args.threshold) for c in cfgs]
        with ProcessPoolExecutor(max_workers=args.parallel) as pool:
            records = list(pool.map(_sweep_worker, payloads))
    else:
        records = [run_single(c, f_reference=f_ref, threshold=args.threshold, prepared=prep) for c in cfgs]
    d_min = next((r.config.bond_dim for r in records if r.accurate), None)
    _write_text(records_to_csv(_strip_timing(records, args.omit_timing)), args.out)
    print(f"D_min = {d_min}" if d_min is not None else "no accurate bond dimension in grid")


def _suite_configs(path):
    data = _read_json(path)
    defaults = {}
    if isinstance(data, dict):
        defaults = dict(data.get("defaults", {}))
        data = data.get("runs")
    if not isinstance(data, list) or not data:
        raise ValidationError(f"{path}: suite needs a non-empty 'runs' list")
    return [RunConfig.from_dict({**defaults, **run}) for run in data]


def cmd_bench(args):
    records = []
    for cfg in _suite_configs(args.suite):
        records.append(run_single(cfg))
    records = _strip_timing(records, args.omit_timing)
    text = records_to_json(records) + "\n" if args.format == "json" else records_to_csv(records)
    _write_text(text, args.out)
    print(f"{len(records)} records")


def cmd_fit(args):
    rows = parse_csv_rows(_read_text(args.csv))
    by_n = {}
    for row in rows:
        if row["status"] != "ok" or row["wall_time_s"] is None:
            continue
        if args.backend and row["backend"] != args.backend and row["backend_label"] != args.backend:
            continue
        if args.bond_dim is not None and row["bond_dim"] != args.bond_dim:
            continue
        by_n.setdefault(row["n_so"], []).append(row["wall_time_s"])
    points = [(n, statistics.median(v)) for n, v in sorted(by_n.items())]
    res = fit_scaling(points, args.model, args.window, extrapolate_to=args.extrapolate_to)
    _dump_json({"points": [list(p) for p in points], **res.to_dict()}, args.out)
    print(f"{res.model}: params {list(res.params)}, r^2 {res.r_squared!r}")


def cmd_report(args):
    records = records_from_csv(_read_text(args.csv))
    views = [v.strip() for v in args.views.split(",") if v.strip()]
    identity = None
    if args.suite:
        refs = [(c.hamiltonian_ref, c.n_so, c.n_e, c.seed) for c in _suite_configs(args.suite)]
        identity = identity_coefficients(refs)
    for p in write_views(records, views, args.out_dir, identity):
        print(p)


# parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qtnbench", description="Trotterized molecular dynamics on dense and MPS emulators.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("ingest", help="integrals -> active-space Hamiltonian JSON")
    s.add_argument("--integrals", required=True, help="FCIDUMP/JSON integral file or bundled:<n_so>")
    s.add_argument("--n-so", type=int, required=True, help="active spin orbitals")
    s.add_argument("--n-e", type=int, default=None, help="active electrons (default n_so/2)")
    s.add_argument("--spin-expansion", choices=("interleaved", "blocked"), default="interleaved",
                   help="spin-orbital ordering for spatial integrals")
    s.add_argument("--seed", type=int, default=0, help="seed for bundled integral sets")
    s.add_argument("--out", required=True, help="output Hamiltonian JSON")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("compile", help="Hamiltonian JSON -> Trotter circuit JSON")
    s.add_argument("--ham", required=True, help="Hamiltonian JSON from ingest")
    s.add_argument("--time", type=float, required=True, help="evolution time (au)")
    s.add_argument("--steps", type=int, default=1, help="Trotter steps")
    s.add_argument("--no-optimize", action="store_true", help="skip adjacent-gate cancellation")
    s.add_argument("--out", required=True, help="output circuit JSON")
    s.set_defaults(func=cmd_compile)

    s = sub.add_parser("run", help="execute a circuit and measure F")
    s.add_argument("--circ", required=True, help="circuit JSON from compile")
    s.add_argument("--backend", choices=("dense", "mps"), default="dense", help="simulator backend")
    s.add_argument("--bond-dim", type=int, default=None, help="MPS bond dimension cap")
    s.add_argument("--obs", required=True, help="Hamiltonian JSON providing h_eff and the initial state")
    s.add_argument("--backend-label", default=None, help="free-text label stored in the result")
    s.add_argument("--out", required=True, help="output result JSON")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="bond-dimension sweep and minimal accurate D")
    s.add_argument("--ham", required=True, help="Hamiltonian JSON from ingest")
    s.add_argument("--time", type=float, default=10.0, help="evolution time (au)")
    s.add_argument("--steps", type=int, default=1, help="Trotter steps")
    s.add_argument("--threshold", type=float, default=ACCURACY_THRESHOLD_HA, help="accuracy gate (Ha)")
    s.add_argument("--grid", default="auto", help="'auto' or ascending comma list of D values")
    s.add_argument("--reference", type=float, default=None, help="external reference F beyond the dense cap")
    s.add_argument("--seed", type=int, default=0, help="seed recorded with each run")
    s.add_argument("--backend-label", default=None, help="label for capability grouping")
    s.add_argument("--parallel", type=int, default=1, help="worker processes (correctness sweeps only)")
    s.add_argument("--omit-timing", action="store_true", help="leave wall_time_s empty for byte-stable output")
    s.add_argument("--out", required=True, help="output CSV")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("bench", help="run every configuration in a suite file")
    s.add_argument("--suite", required=True, help="suite JSON: list of run configs or {defaults, runs}")
    s.add_argument("--format", choices=("csv", "json"), default="csv", help="record format")
    s.add_argument("--omit-timing", action="store_true", help="leave wall_time_s empty for byte-stable output")
    s.add_argument("--out", required=True, help="output file")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("fit", help="runtime scaling fit from a record CSV")
    s.add_argument("--csv", required=True, help="record CSV")
    s.add_argument("--model", choices=("exp", "exponential", "cubic"), default="exp", help="fit model")
    s.add_argument("--window", default="all", help="'all' or 'last:k'")
    s.add_argument("--extrapolate-to", type=int, default=None, help="extrapolate up to this N")
    s.add_argument("--backend", default=None, help="keep rows with this backend or backend_label")
    s.add_argument("--bond-dim", type=int, default=None, help="keep rows with this bond dimension")
    s.add_argument("--out", required=True, help="output fit JSON")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("report", help="aggregate tables from a record CSV")
    s.add_argument("--csv", required=True, help="record CSV")
    s.add_argument("--views", default=",".join(VIEWS), help=f"comma list from {','.join(VIEWS)}")
    s.add_argument("--suite", default=None, help="suite JSON used to compute identity reference lines")
    s.add_argument("--out-dir", required=True, help="directory for the view tables")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except NumericalIntegrityError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ResourceError, MemoryError) as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValidationError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
