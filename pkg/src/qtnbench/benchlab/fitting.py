"""Runtime scaling fits: exponential (log-linear) and cubic polynomial models."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import reduce

import numpy as np

from ..errors import FitError

MODELS = ("exponential", "cubic")
_ALIASES = {"exp": "exponential", "exponential": "exponential", "cubic": "cubic"}


@dataclass(frozen=True)
class FitResult:
    """``params``: ``[prefactor, base]`` for exponential, ``[c3, c2, c1, c0]`` for cubic.

    ``r_squared`` is computed in the space the fit was made in (log-runtime
    for the exponential model). ``fit_window`` is the ``[start, stop)`` index
    range into the N-sorted points.
    """

    model: str
    params: tuple[float, ...]
    r_squared: float
    fit_window: tuple[int, int]
    extrapolation: tuple[tuple[float, float], ...] = ()

    def predict(self, n):
        n = np.asarray(n, dtype=float)
        if self.model == "exponential":
            a, b = self.params
            return a * b ** n
        return np.polyval(self.params, n)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = list(self.params)
        d["fit_window"] = list(self.fit_window)
        d["extrapolation"] = [list(p) for p in self.extrapolation]
        return d


def parse_window(spec, n_points: int) -> tuple[int, int]:
    """``None``/"all", an int k or ``"last:k"`` (last k points), or a ``(start, stop)`` pair."""
    if spec is None or spec == "all":
        return 0, n_points
    if isinstance(spec, str):
        if not spec.startswith("last:"):
            raise FitError(f"unknown window {spec!r}; use 'all' or 'last:k'")
        try:
            spec = int(spec[5:])
        except ValueError:
            raise FitError(f"bad window {spec!r}") from None
    if isinstance(spec, int):
        if not 1 <= spec <= n_points:
            raise FitError(f"window of {spec} points does not fit {n_points} data points")
        return n_points - spec, n_points
    start, stop = (int(v) for v in spec)
    if not 0 <= start < stop <= n_points:
        raise FitError(f"window {start}:{stop} outside {n_points} data points")
    return start, stop


def _r_squared(y, y_fit) -> float:
    ss_res = float(np.sum((y - y_fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else -math.inf
    return 1.0 - ss_res / ss_tot


def _default_extrapolation(ns, target):
    if target is None:
        return []
    ints = [int(n) for n in ns]
    step = reduce(math.gcd, (b - a for a, b in zip(ints, ints[1:])), 0) or 1
    return list(range(ints[-1] + step, int(target) + 1, step))


def fit_scaling(points, model: str = "exponential", fit_window=None, extrapolate=None,
                extrapolate_to: int | None = None) -> FitResult:
    """Least-squares scaling fit of ``(N, runtime)`` points inside ``fit_window``.

    ``extrapolate`` lists the N values to predict; ``extrapolate_to`` instead
    fills in N beyond the data up to that value at the data spacing.
    """
    try:
        model = _ALIASES[model]
    except KeyError:
        raise FitError(f"unknown model {model!r}; choose from {MODELS}") from None
    pts = sorted((float(n), float(y)) for n, y in points)
    if not pts:
        raise FitError("no data points")
    start, stop = parse_window(fit_window, len(pts))
    window = pts[start:stop]
    n = np.array([p[0] for p in window])
    y = np.array([p[1] for p in window])
    if not (np.all(np.isfinite(n)) and np.all(np.isfinite(y))):
        raise FitError("non-finite data point")
    distinct = len(np.unique(n))
    if model == "exponential":
        if distinct < 2:
            raise FitError("exponential fit needs at least 2 distinct N in the window")
        if np.any(y <= 0):
            raise FitError("exponential fit needs positive runtimes")
        slope, intercept = np.polyfit(n, np.log(y), 1)
        params = (float(math.exp(intercept)), float(math.exp(slope)))
        r2 = _r_squared(np.log(y), intercept + slope * n)
    else:
        if distinct < 4:
            raise FitError("cubic fit needs at least 4 distinct N in the window")
        coeffs = np.polyfit(n, y, 3)
        params = tuple(float(c) for c in coeffs)
        r2 = _r_squared(y, np.polyval(coeffs, n))
    result = FitResult(model, params, r2, (start, stop))
    targets = list(extrapolate) if extrapolate is not None else _default_extrapolation([p[0] for p in pts], extrapolate_to)
    preds = tuple((float(t), float(result.predict(t))) for t in targets)
    return FitResult(model, params, r2, (start, stop), preds)


def crossover(fit_a: FitResult, fit_b: FitResult, n_min: float, n_max: float, samples: int = 2001):
    """First N in ``[n_min, n_max]`` where the two fitted curves cross, or None."""
    grid = np.linspace(n_min, n_max, samples)
    diff = fit_a.predict(grid) - fit_b.predict(grid)
    sign = np.sign(diff)
    idx = np.flatnonzero(sign[:-1] * sign[1:] <= 0)
    if idx.size == 0:
        return None
    i = int(idx[0])
    d0, d1 = diff[i], diff[i + 1]
    if d0 == d1:
        return float(grid[i])
    return float(grid[i] + (grid[i + 1] - grid[i]) * d0 / (d0 - d1))
