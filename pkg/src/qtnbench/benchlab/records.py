"""Run configurations and benchmark records, with CSV / JSON serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace

from ..circuit import DepthReport
from ..errors import ParseError, ValidationError

BACKENDS = ("dense", "mps")
STATUSES = ("ok", "oom", "timeout", "numerical_noise")
DEFAULT_TIMEOUT_S = 3600.0

CSV_COLUMNS = (
    "n_so", "n_e", "backend", "backend_label", "bond_dim", "normalized_bond_dim", "t",
    "trotter_steps", "wall_time_s", "f_value", "f_reference", "abs_error", "accurate",
    "fidelity_exact", "fidelity_estimate", "all_gate_depth", "two_qubit_depth",
    "pauli_term_count", "observable_term_count", "mem_estimate_bytes", "status", "seed",
)


@dataclass(frozen=True)
class RunConfig:
    hamiltonian_ref: str
    n_so: int
    n_e: int
    t: float = 10.0
    trotter_steps: int = 1
    backend: str = "dense"
    bond_dim: int | None = None
    seed: int = 0
    backend_label: str = ""
    timeout_s: float = DEFAULT_TIMEOUT_S

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValidationError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.n_so < 2 or self.n_so % 2:
            raise ValidationError(f"n_so must be even and >= 2, got {self.n_so}")
        if not 0 < self.n_e <= self.n_so:
            raise ValidationError(f"n_e must lie in (0, n_so], got {self.n_e}")
        if not math.isfinite(self.t) or self.t < 0:
            raise ValidationError(f"time must be finite and non-negative, got {self.t}")
        if int(self.trotter_steps) != self.trotter_steps or self.trotter_steps < 1:
            raise ValidationError(f"trotter_steps must be a positive integer, got {self.trotter_steps}")
        if self.backend == "mps" and self.bond_dim is None:
            raise ValidationError("mps runs need a bond dimension")
        if self.bond_dim is not None and self.bond_dim < 1:
            raise ValidationError(f"bond dimension must be >= 1, got {self.bond_dim}")
        if not self.timeout_s > 0:
            raise ValidationError("timeout must be positive")
        if not self.backend_label:
            object.__setattr__(self, "backend_label", self.backend)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValidationError(f"unknown RunConfig fields {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ValidationError(f"bad RunConfig: {exc}") from None


@dataclass(frozen=True)
class BenchRecord:
    config: RunConfig
    wall_time_s: float = field(compare=False)
    f_value: float | None
    f_reference: float | None
    abs_error: float | None
    accurate: bool | None
    fidelity_exact: float | None
    fidelity_estimate: float | None
    depth: DepthReport
    pauli_term_count: int
    observable_term_count: int
    mem_estimate_bytes: int
    status: str = "ok"
    normalized_bond_dim: float | None = None
    synthesis_time_s: float | None = field(default=0.0, compare=False)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValidationError(f"status must be one of {STATUSES}, got {self.status!r}")

    def with_timing(self, wall: float, synth: float = 0.0) -> BenchRecord:
        return replace(self, wall_time_s=wall, synthesis_time_s=synth)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["depth"] = asdict(self.depth)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> BenchRecord:
        d = dict(d)
        try:
            d["config"] = RunConfig.from_dict(d["config"])
            d["depth"] = DepthReport(**d["depth"])
            return cls(**d)
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad BenchRecord: {exc}") from None

    def csv_row(self) -> dict:
        c = self.config
        return {
            "n_so": c.n_so, "n_e": c.n_e, "backend": c.backend, "backend_label": c.backend_label,
            "bond_dim": c.bond_dim, "normalized_bond_dim": self.normalized_bond_dim, "t": c.t,
            "trotter_steps": c.trotter_steps, "wall_time_s": self.wall_time_s,
            "f_value": self.f_value, "f_reference": self.f_reference, "abs_error": self.abs_error,
            "accurate": self.accurate, "fidelity_exact": self.fidelity_exact,
            "fidelity_estimate": self.fidelity_estimate,
            "all_gate_depth": self.depth.all_gate_depth, "two_qubit_depth": self.depth.two_qubit_depth,
            "pauli_term_count": self.pauli_term_count,
            "observable_term_count": self.observable_term_count,
            "mem_estimate_bytes": self.mem_estimate_bytes, "status": self.status, "seed": c.seed,
        }


# CSV cells: repr for floats (exact round-trip), empty for absent values

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


_INT_COLS = {"n_so", "n_e", "bond_dim", "trotter_steps", "all_gate_depth", "two_qubit_depth",
             "pauli_term_count", "observable_term_count", "mem_estimate_bytes", "seed"}
_FLOAT_COLS = {"normalized_bond_dim", "t", "wall_time_s", "f_value", "f_reference", "abs_error",
               "fidelity_exact", "fidelity_estimate"}


def _parse_cell(col: str, text: str, line: int):
    if text == "":
        return None
    try:
        if col in _INT_COLS:
            return int(text)
        if col in _FLOAT_COLS:
            return float(text)
    except ValueError:
        raise ParseError(f"column {col}: cannot parse {text!r}", line) from None
    if col == "accurate":
        if text not in ("true", "false"):
            raise ParseError(f"column accurate: expected true/false, got {text!r}", line)
        return text == "true"
    return text


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        row = r.csv_row()
        w.writerow([_cell(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def parse_csv_rows(text: str) -> list[dict]:
    """Typed rows keyed by column name; header must match the column order exactly."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty CSV", 1) from None
    if tuple(header) != CSV_COLUMNS:
        raise ParseError("CSV header does not match the record columns", 1)
    rows = []
    for lineno, raw in enumerate(reader, start=2):
        if not raw:
            continue
        if len(raw) != len(CSV_COLUMNS):
            raise ParseError(f"expected {len(CSV_COLUMNS)} cells, got {len(raw)}", lineno)
        rows.append({c: _parse_cell(c, v, lineno) for c, v in zip(CSV_COLUMNS, raw)})
    return rows


def records_from_csv(text: str, hamiltonian_ref: str = "") -> list[BenchRecord]:
    """Rebuild records from CSV; fields outside the column set take defaults."""
    out = []
    for row in parse_csv_rows(text):
        cfg = RunConfig(hamiltonian_ref, row["n_so"], row["n_e"], row["t"], row["trotter_steps"],
                        row["backend"], row["bond_dim"], row["seed"], row["backend_label"] or "")
        depth = DepthReport(row["all_gate_depth"], row["two_qubit_depth"], 0, 0)
        out.append(BenchRecord(cfg, row["wall_time_s"], row["f_value"], row["f_reference"],
                               row["abs_error"], row["accurate"], row["fidelity_exact"],
                               row["fidelity_estimate"], depth, row["pauli_term_count"],
                               row["observable_term_count"], row["mem_estimate_bytes"],
                               row["status"], row["normalized_bond_dim"]))
    return out


def records_to_json(records) -> str:
    return json.dumps([r.to_dict() for r in records], indent=1)


def records_from_json(text: str) -> list[BenchRecord]:
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValidationError("record JSON must be an array")
    return [BenchRecord.from_dict(d) for d in data]
