"""Benchmark harness: runs, sweeps, scaling fits and report tables."""

from .family import BUNDLED_SIZES, bundled_integrals, resolve_bundled
from .fitting import FitResult, crossover, fit_scaling
from .records import BenchRecord, RunConfig, records_from_csv, records_from_json, records_to_csv, records_to_json
from .report import capability_table, emit_report, fidelity_curves, spread_by_D, spread_stats, write_views
from .runner import default_grid, memory_estimate, run_single, sweep_min_accurate_D

__all__ = [
    "BUNDLED_SIZES", "BenchRecord", "FitResult", "RunConfig", "bundled_integrals", "capability_table",
    "crossover", "default_grid", "emit_report", "fidelity_curves", "fit_scaling", "memory_estimate",
    "records_from_csv", "records_from_json", "records_to_csv", "records_to_json", "resolve_bundled",
    "run_single", "spread_by_D", "spread_stats", "sweep_min_accurate_D", "write_views",
]
