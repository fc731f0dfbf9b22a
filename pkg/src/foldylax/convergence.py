"""Direction grids, Foldy-Lax vs oracle comparisons and parameter sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .capacitance import CapacitanceMatrix
from .errors import UsageError
from .foldy_lax import (
    ChargeSet,
    FarFieldPattern,
    ScatteringConfig,
    assemble,
    farfield,
    solve_charges,
)
from .geometry import Obstacle
from .oracle import ErrorMetrics, OracleSolution, compare, oracle_farfield, oracle_solve

SWEEP_PARAMETERS = ("a", "d", "omega")


def fibonacci_directions(count: int) -> np.ndarray:
    """Near-uniform unit vectors on the sphere, ``(count, 3)``."""
    if count < 1:
        raise UsageError("direction count must be >= 1")
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    out = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def fit_loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3 or len(x) != len(y):
        raise UsageError("a slope fit needs at least 3 (value, error) pairs")
    if np.any(x <= 0.0) or np.any(y <= 0.0):
        raise UsageError("log-log fit needs positive values and errors")
    lx = np.log(x)
    ly = np.log(y)
    if np.ptp(lx) == 0.0:
        raise UsageError("sweep values must not all be equal")
    return float(np.polyfit(lx, ly, 1)[0])


@dataclass(frozen=True, eq=False)
class ComparisonRun:
    charges: ChargeSet
    foldy: FarFieldPattern
    oracle_solution: OracleSolution
    oracle: FarFieldPattern
    metrics: ErrorMetrics


def run_forward(config: ScatteringConfig, caps, directions):
    charges = solve_charges(assemble(config, caps))
    return charges, farfield(charges, config.centers, directions, config.wn, config.lame)


def run_compare(config: ScatteringConfig, caps, directions) -> ComparisonRun:
    charges, foldy = run_forward(config, caps, directions)
    sol = oracle_solve(config)
    oracle = oracle_farfield(sol, directions, config.wn, config.lame)
    return ComparisonRun(charges, foldy, sol, oracle, compare(foldy, oracle))


def with_diameter(config: ScatteringConfig, a: float) -> ScatteringConfig:
    """Rescale every obstacle so the largest diameter equals ``a``; centers fixed."""
    current = max(ob.diameter for ob in config.obstacles)
    factor = a / current
    obstacles = [Obstacle(ob.center, ob.shape, ob.scale * factor) for ob in config.obstacles]
    return replace(config, obstacles=obstacles)


def with_distance(config: ScatteringConfig, d: float) -> ScatteringConfig:
    """Spread centers about their mean so the closest surfaces are roughly ``d`` apart.

    The minimum center distance is set to ``d + a``; for balls that is the
    exact surface gap.
    """
    if config.M < 2:
        raise UsageError("a distance sweep needs at least two obstacles")
    z = config.centers
    mean = z.mean(axis=0)
    diff = z[:, None, :] - z[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    dmin = dist[np.triu_indices(config.M, 1)].min()
    a = max(ob.diameter for ob in config.obstacles)
    factor = (d + a) / dmin
    obstacles = [
        Obstacle(mean + factor * (ob.center - mean), ob.shape, ob.scale) for ob in config.obstacles
    ]
    return replace(config, obstacles=obstacles)


def with_parameter(config: ScatteringConfig, parameter: str, value: float) -> ScatteringConfig:
    if parameter == "a":
        return with_diameter(config, value)
    if parameter == "d":
        return with_distance(config, value)
    if parameter == "omega":
        return replace(config, omega=float(value))
    raise UsageError(f"unknown sweep parameter {parameter!r}; use one of {SWEEP_PARAMETERS}")


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    values: tuple
    metrics: tuple
    slope: float


def sweep(config: ScatteringConfig, caps, directions, parameter: str, values) -> SweepResult:
    """Rerun the comparison for each value and fit the log-log slope of ``max_abs``."""
    values = tuple(float(v) for v in values)
    if len(values) < 3:
        raise UsageError("a sweep needs at least 3 values")
    if parameter not in SWEEP_PARAMETERS:
        raise UsageError(f"unknown sweep parameter {parameter!r}; use one of {SWEEP_PARAMETERS}")
    metrics = tuple(
        run_compare(with_parameter(config, parameter, v), caps, directions).metrics
        for v in values
    )
    errors = [m.max_abs for m in metrics]
    if np.allclose(errors, errors[0], rtol=0.0, atol=0.0):
        slope = 0.0
    else:
        slope = fit_loglog_slope(values, errors)
    return SweepResult(parameter, values, metrics, slope)


def reference_caps(shapes, lame, cache=None) -> list[CapacitanceMatrix]:
    """Capacitance per obstacle, computing each distinct reference shape once."""
    from .capacitance import capacitance_matrix

    cache = {} if cache is None else cache
    out = []
    for shape in shapes:
        key = id(shape)
        if key not in cache:
            cache[key] = capacitance_matrix(shape, lame)
        out.append(cache[key])
    return out
