"""Scenario files: TOML with [lame], [wave], [directions], [output], [sweep] and [[obstacle]]."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .convergence import SWEEP_PARAMETERS, fibonacci_directions
from .errors import ConfigError, DomainError
from .foldy_lax import IncidentWave, ScatteringConfig
from .geometry import Obstacle, SurfaceMesh, load_mesh, make_sphere_mesh
from .kernels import LameParameters

DEFAULT_REFINEMENT = 3
DEFAULT_DIRECTIONS = 100


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    scattering: ScatteringConfig
    directions: np.ndarray
    output_dir: Path | None = None
    sweep_parameter: str | None = None
    sweep_values: tuple = field(default_factory=tuple)
    source: Path | None = None


def _number(table, key, where, default=None, positive=False, minimum=None):
    value = table.get(key, default)
    if value is None:
        raise ConfigError(f"missing field '{where}.{key}'")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"field '{where}.{key}' must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"field '{where}.{key}' must be finite")
    if positive and value <= 0.0:
        raise ConfigError(f"field '{where}.{key}' must be > 0, got {value}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"field '{where}.{key}' must be >= {minimum}, got {value}")
    return value


def _vector(table, key, where, default=None):
    value = table.get(key, default)
    if value is None:
        raise ConfigError(f"missing field '{where}.{key}'")
    try:
        vec = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field '{where}.{key}' must be a list of 3 numbers") from exc
    if vec.shape != (3,) or not np.all(np.isfinite(vec)):
        raise ConfigError(f"field '{where}.{key}' must be a list of 3 finite numbers")
    return vec


def _table(data, key, required=True):
    value = data.get(key)
    if value is None:
        if required:
            raise ConfigError(f"missing section '[{key}]'")
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"'{key}' must be a section")
    return value


def _shape(entry, where, base: Path, cache: dict) -> SurfaceMesh:
    shape = entry.get("shape", "sphere")
    if not isinstance(shape, str):
        raise ConfigError(f"field '{where}.shape' must be a string")
    if shape == "sphere":
        level = entry.get("refinement", DEFAULT_REFINEMENT)
        if isinstance(level, bool) or not isinstance(level, int):
            raise ConfigError(f"field '{where}.refinement' must be an integer")
        key = ("sphere", level)
        if key not in cache:
            cache[key] = make_sphere_mesh(level)
        return cache[key]
    path = (base / shape).resolve()
    key = ("file", str(path))
    if key not in cache:
        if not path.is_file():
            raise ConfigError(f"field '{where}.shape': mesh file {shape!r} not found")
        cache[key] = load_mesh(path)
    return cache[key]


def _directions(data) -> np.ndarray:
    table = _table(data, "directions", required=False)
    if "list" in table:
        try:
            dirs = np.array(table["list"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ConfigError("field 'directions.list' must be a list of 3-vectors") from exc
        if dirs.ndim != 2 or dirs.shape[1] != 3 or len(dirs) == 0:
            raise ConfigError("field 'directions.list' must be a non-empty list of 3-vectors")
        norms = np.linalg.norm(dirs, axis=1)
        if not np.all(np.isfinite(norms)) or np.any(norms == 0.0):
            raise ConfigError("field 'directions.list' contains a zero or non-finite vector")
        return dirs / norms[:, None]
    grid = table.get("grid", "fibonacci")
    if grid != "fibonacci":
        raise ConfigError(f"field 'directions.grid' must be 'fibonacci', got {grid!r}")
    count = table.get("count", DEFAULT_DIRECTIONS)
    if isinstance(count, bool) or not isinstance(count, int) or count < 1:
        raise ConfigError("field 'directions.count' must be an integer >= 1")
    return fibonacci_directions(count)


def parse_config(data: dict, base: Path | None = None, source: Path | None = None) -> ScenarioConfig:
    """Validate a parsed TOML document into module inputs."""
    base = Path(".") if base is None else base
    omega = _number(data, "omega", "root", minimum=0.0)
    lame_t = _table(data, "lame")
    try:
        lame = LameParameters(_number(lame_t, "lambda", "lame"), _number(lame_t, "mu", "lame"))
    except DomainError as exc:
        raise ConfigError(f"section '[lame]': {exc}") from exc

    wave_t = _table(data, "wave")
    alpha = complex(_number(wave_t, "alpha_re", "wave", 0.0), _number(wave_t, "alpha_im", "wave", 0.0))
    beta = complex(_number(wave_t, "beta_re", "wave", 0.0), _number(wave_t, "beta_im", "wave", 0.0))
    theta = _vector(wave_t, "theta", "wave", [0.0, 0.0, 1.0])
    try:
        wave = IncidentWave.along(theta, alpha, beta)
    except DomainError as exc:
        raise ConfigError(f"field 'wave.theta': {exc}") from exc

    entries = data.get("obstacle", [])
    if not isinstance(entries, list):
        raise ConfigError("'obstacle' must be an array of tables ([[obstacle]])")
    cache: dict = {}
    obstacles = []
    for k, entry in enumerate(entries):
        where = f"obstacle[{k}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"'{where}' must be a table")
        shape = _shape(entry, where, base, cache)
        center = _vector(entry, "center", where, [0.0, 0.0, 0.0])
        scale = _number(entry, "scale", where, positive=True)
        obstacles.append(Obstacle(center, shape, scale))

    out_t = _table(data, "output", required=False)
    out_dir = out_t.get("dir")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ConfigError("field 'output.dir' must be a string")

    sweep_t = _table(data, "sweep", required=False)
    parameter, values = None, ()
    if sweep_t:
        parameter = sweep_t.get("parameter")
        if parameter not in SWEEP_PARAMETERS:
            raise ConfigError(f"field 'sweep.parameter' must be one of {SWEEP_PARAMETERS}")
        raw = sweep_t.get("values")
        if not isinstance(raw, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw
        ):
            raise ConfigError("field 'sweep.values' must be a list of numbers")
        values = tuple(float(v) for v in raw)

    return ScenarioConfig(
        ScatteringConfig(obstacles, lame, omega, wave),
        _directions(data),
        None if out_dir is None else base / out_dir,
        parameter,
        values,
        source,
    )


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return parse_config(data, path.parent, path)
