"""Record emission and the aggregate, plot-ready tables (CSV only, no rendering)."""

from __future__ import annotations

import csv
import io
import os
from collections import defaultdict

import numpy as np

from ..errors import ValidationError
from ..fermion_map import compile_observable
from .records import _cell, records_to_csv, records_to_json

VIEWS = ("spread", "fidelity", "capability")
WHISKER_IQR = 1.5


def emit_report(records, format: str = "csv", path=None) -> str:
    """Serialize records (CSV or JSON); writes ``path`` when given and returns the text."""
    records = list(records)
    if not records:
        raise ValidationError("no records to report")
    if format == "csv":
        text = records_to_csv(records)
    elif format == "json":
        text = records_to_json(records)
    else:
        raise ValidationError(f"unknown report format {format!r}")
    if path is not None:
        _write(path, text)
    return text


def _write(path, text: str):
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ValidationError(f"cannot write {path}: {exc.strerror}") from None


def spread_stats(values) -> dict:
    """Boxplot numbers: median, quartiles (linear interpolation), 1.5 IQR whiskers, outliers."""
    v = np.sort(np.asarray(list(values), dtype=float))
    if v.size == 0:
        raise ValidationError("spread of an empty sample")
    q1, med, q3 = (float(x) for x in np.percentile(v, [25, 50, 75]))
    iqr = q3 - q1
    lo, hi = q1 - WHISKER_IQR * iqr, q3 + WHISKER_IQR * iqr
    inside = v[(v >= lo) & (v <= hi)]
    return {
        "median": med, "q1": q1, "q3": q3,
        "whisker_low": float(inside.min()), "whisker_high": float(inside.max()),
        "outliers": [float(x) for x in v if x < lo or x > hi],
    }


def identity_coefficients(refs) -> dict[int, float]:
    """Identity coefficient of the compiled observable per n_so.

    ``refs`` is an iterable of ``(hamiltonian_ref, n_so, n_e, seed)``; bundled
    references resolve directly, files through the runner's active-space fit.
    """
    from .runner import resolve_integrals

    out = {}
    for ref, n_so, n_e, seed in refs:
        if n_so in out or not ref:
            continue
        ints = resolve_integrals(ref, n_so, n_e, seed)
        out[n_so] = float(compile_observable(ints.h).identity_coefficient.real)
    return out


def spread_by_D(records, identity: dict[int, float] | None = None) -> list[dict]:
    """Per n_so spread of MPS ``f_value`` over the swept bond dimensions."""
    groups = defaultdict(list)
    refs = {}
    for r in records:
        if r.f_value is None:
            continue
        n = r.config.n_so
        if r.config.backend == "mps" and r.status == "ok":
            groups[n].append(r.f_value)
        if r.f_reference is not None:
            refs.setdefault(n, r.f_reference)
    identity = identity or {}
    rows = []
    for n in sorted(groups):
        s = spread_stats(groups[n])
        rows.append({
            "n_so": n, "count": len(groups[n]), "median": s["median"], "q1": s["q1"], "q3": s["q3"],
            "whisker_low": s["whisker_low"], "whisker_high": s["whisker_high"],
            "outliers": ";".join(repr(x) for x in s["outliers"]),
            "f_reference": refs.get(n), "identity_coefficient": identity.get(n),
        })
    return rows


def fidelity_curves(records) -> list[dict]:
    """Fidelity against normalized bond dimension and active-space size (one row per run)."""
    rows = []
    for r in records:
        if r.config.backend != "mps" or r.status not in ("ok", "numerical_noise"):
            continue
        rows.append({
            "n_so": r.config.n_so, "bond_dim": r.config.bond_dim,
            "normalized_bond_dim": r.normalized_bond_dim, "fidelity_exact": r.fidelity_exact,
            "fidelity_estimate": r.fidelity_estimate, "status": r.status,
        })
    rows.sort(key=lambda d: (d["n_so"], d["bond_dim"]))
    return rows


def capability_table(records) -> list[dict]:
    """Largest bond dimension with a successful run per (backend_label, n_so)."""
    best = {}
    for r in records:
        if r.status != "ok" or r.config.bond_dim is None:
            continue
        key = (r.config.backend_label, r.config.n_so)
        best[key] = max(best.get(key, 0), r.config.bond_dim)
    return [{"backend_label": k[0], "n_so": k[1], "max_bond_dim": v} for k, v in sorted(best.items())]


def table_to_csv(rows, columns=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if columns is None:
        columns = list(rows[0]) if rows else []
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row[c]) for c in columns])
    return buf.getvalue()


_COLUMNS = {
    "spread": ["n_so", "count", "median", "q1", "q3", "whisker_low", "whisker_high", "outliers",
               "f_reference", "identity_coefficient"],
    "fidelity": ["n_so", "bond_dim", "normalized_bond_dim", "fidelity_exact", "fidelity_estimate", "status"],
    "capability": ["backend_label", "n_so", "max_bond_dim"],
}


def write_views(records, views, out_dir, identity: dict[int, float] | None = None) -> list[str]:
    """Write one ``<view>.csv`` per requested view into ``out_dir``; returns the paths."""
    records = list(records)
    if not records:
        raise ValidationError("no records to report")
    unknown = [v for v in views if v not in VIEWS]
    if unknown:
        raise ValidationError(f"unknown views {unknown}; choose from {VIEWS}")
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise ValidationError(f"cannot create {out_dir}: {exc.strerror}") from None
    paths = []
    for view in views:
        if view == "spread":
            if identity is None:
                identity = identity_coefficients(
                    (r.config.hamiltonian_ref, r.config.n_so, r.config.n_e, r.config.seed) for r in records)
            rows = spread_by_D(records, identity)
        elif view == "fidelity":
            rows = fidelity_curves(records)
        else:
            rows = capability_table(records)
        path = os.path.join(out_dir, f"{view}.csv")
        _write(path, table_to_csv(rows, _COLUMNS[view]))
        paths.append(path)
    return paths
