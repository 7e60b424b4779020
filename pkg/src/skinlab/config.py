"""Run configuration: one JSON document with a strict schema.

Every section is optional; missing physics parameters fall back to the
reference set t=1, m=2, gamma=2, eta=0.05.  Unknown keys are errors.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .greens import EDGES
from .lattice import SHAPES
from .model import ModelParams

REFERENCE_ENERGIES = (2.7, -3.3, -1.7, 4.5)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GeometryConfig:
    shape: str = "triangle"
    L: int = 16


@dataclass(frozen=True)
class GridConfig:
    pbc_grid_n: int = 201
    afunc_grid_n: int = 301
    efc_grid_n: int = 301
    raster_cell: float = 0.05


@dataclass(frozen=True)
class ThresholdConfig:
    skin_ratio: float = 2.0
    dds_fraction: float = 0.1
    open_fraction: float = 0.1


@dataclass(frozen=True)
class SpectrumConfig:
    include_pbc: bool = True
    max_dim: int = 6000


@dataclass(frozen=True)
class EnergyListConfig:
    energies: tuple[float, ...] = REFERENCE_ENERGIES


@dataclass(frozen=True)
class ScatterConfig:
    E: float = 2.7
    k_i: tuple[float, float] = (0.86, -math.pi)
    edges: tuple[str, ...] = EDGES


@dataclass(frozen=True)
class ReportConfig:
    energies: tuple[float, ...] = REFERENCE_ENERGIES
    window_half_width: float = 0.2


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams = field(default_factory=ModelParams)
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    grids: GridConfig = field(default_factory=GridConfig)
    thresholds: ThresholdConfig = field(default_factory=ThresholdConfig)
    output_dir: str = "out"
    spectrum: SpectrumConfig = field(default_factory=SpectrumConfig)
    afunc: EnergyListConfig = field(default_factory=EnergyListConfig)
    dds: EnergyListConfig = field(default_factory=EnergyListConfig)
    scatter: ScatterConfig = field(default_factory=ScatterConfig)
    report: ReportConfig = field(default_factory=ReportConfig)


def _number(path, value, *, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        # k_i components may be written as "pi" / "-pi"
        if isinstance(value, str) and value.strip() in ("pi", "-pi", "+pi") and not integer:
            return -math.pi if value.strip().startswith("-") else math.pi
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return int(value)
    if not math.isfinite(value):
        raise ConfigError(f"{path}: must be finite")
    return float(value)


def _check_keys(path, raw, cls):
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected an object, got {type(raw).__name__}")
    allowed = {f.name for f in fields(cls)}
    for key in raw:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}: unknown key (allowed: {', '.join(sorted(allowed))})")


def _energies(path, value):
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{path}: expected a non-empty list of numbers")
    return tuple(_number(f"{path}[{i}]", v) for i, v in enumerate(value))


def _positive_int(path, value, minimum=1):
    n = _number(path, value, integer=True)
    if n < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}, got {n}")
    return n


def _positive(path, value):
    x = _number(path, value)
    if x <= 0:
        raise ConfigError(f"{path}: must be > 0, got {x}")
    return x


def _section(raw, name, cls, convert):
    if name not in raw:
        return cls()
    body = raw[name]
    _check_keys(name, body, cls)
    kwargs = {key: convert(f"{name}.{key}", key, val) for key, val in body.items()}
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from None


def _model(path, key, val):
    return _number(path, val)


def _geometry(path, key, val):
    if key == "shape":
        if val not in SHAPES or val == "polygon":
            raise ConfigError(f"{path}: unknown shape {val!r}; expected 'square' or 'triangle'")
        return val
    return _positive_int(path, val)


def _grids(path, key, val):
    if key == "raster_cell":
        return _positive(path, val)
    minimum = {"pbc_grid_n": 2, "afunc_grid_n": 16, "efc_grid_n": 64}[key]
    return _positive_int(path, val, minimum)


def _thresholds(path, key, val):
    return _positive(path, val)


def _spectrum(path, key, val):
    if key == "include_pbc":
        if not isinstance(val, bool):
            raise ConfigError(f"{path}: expected true or false")
        return val
    return _positive_int(path, val)


def _energy_list(path, key, val):
    return _energies(path, val)


def _scatter(path, key, val):
    if key == "E":
        return _number(path, val)
    if key == "k_i":
        if not isinstance(val, list) or len(val) != 2:
            raise ConfigError(f"{path}: expected [kx, ky]")
        return (_number(f"{path}[0]", val[0]), _number(f"{path}[1]", val[1]))
    if not isinstance(val, list) or not val:
        raise ConfigError(f"{path}: expected a non-empty list of edges")
    for i, edge in enumerate(val):
        if edge not in EDGES:
            raise ConfigError(f"{path}[{i}]: unknown edge {edge!r}; expected one of {EDGES}")
    return tuple(val)


def _report(path, key, val):
    if key == "energies":
        return _energies(path, val)
    return _positive(path, val)


def parse_config(raw: dict) -> RunConfig:
    _check_keys("config", raw, RunConfig)
    if "output_dir" in raw and not isinstance(raw["output_dir"], str):
        raise ConfigError("output_dir: expected a string")
    return RunConfig(
        model=_section(raw, "model", ModelParams, _model),
        geometry=_section(raw, "geometry", GeometryConfig, _geometry),
        grids=_section(raw, "grids", GridConfig, _grids),
        thresholds=_section(raw, "thresholds", ThresholdConfig, _thresholds),
        output_dir=raw.get("output_dir", "out"),
        spectrum=_section(raw, "spectrum", SpectrumConfig, _spectrum),
        afunc=_section(raw, "afunc", EnergyListConfig, _energy_list),
        dds=_section(raw, "dds", EnergyListConfig, _energy_list),
        scatter=_section(raw, "scatter", ScatterConfig, _scatter),
        report=_section(raw, "report", ReportConfig, _report),
    )


def load_config(path: Path | str) -> RunConfig:
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return parse_config(raw)
