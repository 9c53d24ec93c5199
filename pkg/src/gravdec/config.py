"""Run configuration: TOML schema, validation and bundled presets.

Schema (SI units; ``?`` marks optional keys)::

    seed?            unsigned 64-bit integer (default 0)
    [scenario]       delta_x
    [constants]?     g?, c?, hbar?, kB?
    [environment]    alpha, alpha_phase?, temperature? | nbar?
      [environment.unobserved]  count, distribution, low/high | frequencies | frequency
      [environment.observed]    count, fractions?, distribution, ...
    [time_grid]?     kind?, points?, t_max? | t_max_factor?, t_min?
    [checks]?        margin?
    [output]?        reference_time?
"""

from __future__ import annotations

import cmath
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import PhysicalConstants, Scenario
from .ensemble import EnvironmentPartition, FrequencyDistribution, StateTemplate, sample_partition

PRESETS = ("fig1a", "fig1b")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


_MISSING = object()

_DIST_KEYS = {"count", "distribution", "low", "high", "frequencies", "frequency"}
_SCHEMA = {
    "seed": None,
    "scenario": {"delta_x"},
    "constants": {"g", "c", "hbar", "kB"},
    "environment": {"alpha", "alpha_phase", "temperature", "nbar", "unobserved", "observed"},
    "time_grid": {"kind", "points", "t_max", "t_max_factor", "t_min"},
    "checks": {"margin"},
    "output": {"reference_time"},
}


def _reject_unknown(table, allowed, where):
    for key in table:
        if key not in allowed:
            raise ConfigError(f"{where}: unknown key {key!r}")


def _table(doc, key, where, required=True):
    value = doc.get(key, _MISSING)
    if value is _MISSING:
        if required:
            raise ConfigError(f"missing required field {where}{key!r}")
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{where}{key!r} must be a table")
    return value


def _number(table, key, where, required=True, default=None, positive=False, nonneg=False):
    value = table.get(key, _MISSING)
    if value is _MISSING:
        if required:
            raise ConfigError(f"missing required field {where}.{key}")
        return default
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{where}.{key} must be a finite number, got {value!r}")
    if positive and value <= 0:
        raise ConfigError(f"{where}.{key} must be > 0, got {value!r}")
    if nonneg and value < 0:
        raise ConfigError(f"{where}.{key} must be >= 0, got {value!r}")
    return float(value)


def _integer(table, key, where, required=True, default=None, minimum=1):
    value = table.get(key, _MISSING)
    if value is _MISSING:
        if required:
            raise ConfigError(f"missing required field {where}.{key}")
        return default
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{where}.{key} must be an integer >= {minimum}, got {value!r}")
    return value


def _distribution(table, where, extra=()):
    _reject_unknown(table, _DIST_KEYS | set(extra), where)
    kind = table.get("distribution", _MISSING)
    if kind is _MISSING:
        raise ConfigError(f"missing required field {where}.distribution")
    try:
        if kind == "uniform":
            dist = FrequencyDistribution.uniform(_number(table, "low", where, positive=True),
                                                 _number(table, "high", where, positive=True))
        elif kind == "discrete":
            freqs = table.get("frequencies", _MISSING)
            if freqs is _MISSING or not isinstance(freqs, list):
                raise ConfigError(f"{where}.frequencies must be a list of rad/s values")
            dist = FrequencyDistribution.discrete(freqs)
        elif kind == "single":
            dist = FrequencyDistribution.single(_number(table, "frequency", where, positive=True))
        else:
            raise ConfigError(f"{where}.distribution must be 'uniform', 'discrete' or 'single', got {kind!r}")
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None
    return dist


@dataclass(frozen=True)
class RunConfig:
    """Validated run description."""

    scenario: Scenario
    unobserved_dist: FrequencyDistribution
    observed_dist: FrequencyDistribution
    n_perp: int
    n_mac: int
    n_fractions: int
    template: StateTemplate
    grid_kind: str
    grid_points: int
    t_max: float | None
    t_max_factor: float
    t_min: float | None
    margin: float
    reference_time: float | None
    seed: int
    normalized: dict

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.normalized, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def partition(self, seed=None) -> EnvironmentPartition:
        return sample_partition(self.unobserved_dist, self.n_perp, self.n_mac, self.n_fractions, self.template,
                                self.seed if seed is None else seed, observed_dist=self.observed_dist,
                                constants=self.scenario.constants)


def parse_config(doc: dict) -> RunConfig:
    """Validate a parsed TOML document."""
    _reject_unknown(doc, _SCHEMA, "config")
    scen = _table(doc, "scenario", "")
    _reject_unknown(scen, _SCHEMA["scenario"], "scenario")
    delta_x = _number(scen, "delta_x", "scenario")

    const = _table(doc, "constants", "", required=False)
    _reject_unknown(const, _SCHEMA["constants"], "constants")
    defaults = PhysicalConstants()
    constants = PhysicalConstants(**{k: _number(const, k, "constants", required=False, default=getattr(defaults, k),
                                                positive=True) for k in _SCHEMA["constants"]})

    env = _table(doc, "environment", "")
    _reject_unknown(env, _SCHEMA["environment"], "environment")
    alpha_abs = _number(env, "alpha", "environment", nonneg=True)
    alpha_phase = _number(env, "alpha_phase", "environment", required=False, default=0.0)
    temperature = _number(env, "temperature", "environment", required=False, nonneg=True)
    nbar = _number(env, "nbar", "environment", required=False, nonneg=True)
    if temperature is None and nbar is None:
        raise ConfigError("missing required field environment.temperature (or environment.nbar)")
    alpha = alpha_abs if alpha_phase == 0 else cmath.rect(alpha_abs, alpha_phase)

    unobs = _table(env, "unobserved", "environment.")
    obs = _table(env, "observed", "environment.")
    unobserved_dist = _distribution(unobs, "environment.unobserved")
    observed_dist = _distribution(obs, "environment.observed", extra=("fractions",))
    n_perp = _integer(unobs, "count", "environment.unobserved")
    n_mac = _integer(obs, "count", "environment.observed")
    n_fractions = _integer(obs, "fractions", "environment.observed", required=False, default=1)

    grid = _table(doc, "time_grid", "", required=False)
    _reject_unknown(grid, _SCHEMA["time_grid"], "time_grid")
    kind = grid.get("kind", "linear")
    if kind not in ("linear", "log"):
        raise ConfigError(f"time_grid.kind must be 'linear' or 'log', got {kind!r}")
    points = _integer(grid, "points", "time_grid", required=False, default=2000, minimum=2)
    t_max = _number(grid, "t_max", "time_grid", required=False, positive=True)
    factor = _number(grid, "t_max_factor", "time_grid", required=False, default=5.0, positive=True)
    t_min = _number(grid, "t_min", "time_grid", required=False, positive=True)

    checks = _table(doc, "checks", "", required=False)
    _reject_unknown(checks, _SCHEMA["checks"], "checks")
    margin = _number(checks, "margin", "checks", required=False, default=100.0, positive=True)
    out = _table(doc, "output", "", required=False)
    _reject_unknown(out, _SCHEMA["output"], "output")
    reference_time = _number(out, "reference_time", "output", required=False, positive=True)

    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}")

    normalized = {
        "scenario": {"delta_x": delta_x},
        "constants": {k: getattr(constants, k) for k in sorted(_SCHEMA["constants"])},
        "environment": {
            "alpha": alpha_abs, "alpha_phase": alpha_phase, "temperature": temperature, "nbar": nbar,
            "unobserved": {"count": n_perp, **_dist_dict(unobserved_dist)},
            "observed": {"count": n_mac, "fractions": n_fractions, **_dist_dict(observed_dist)},
        },
        "time_grid": {"kind": kind, "points": points, "t_max": t_max, "t_max_factor": factor, "t_min": t_min},
        "checks": {"margin": margin},
        "output": {"reference_time": reference_time},
    }
    try:
        scenario = Scenario(delta_x, constants)
    except ValueError as exc:
        raise ConfigError(f"scenario: {exc}") from None
    return RunConfig(scenario, unobserved_dist, observed_dist, n_perp, n_mac, n_fractions,
                     StateTemplate(alpha=alpha, nbar=nbar, temperature=temperature),
                     kind, points, t_max, factor, t_min, margin, reference_time, seed, normalized)


def _dist_dict(dist):
    if dist.kind == "uniform":
        return {"distribution": "uniform", "low": dist.low, "high": dist.high}
    return {"distribution": dist.kind, "frequencies": list(dist.values)}


def load_config(path) -> RunConfig:
    """Read and validate a TOML run description."""
    text = Path(path).read_text(encoding="utf-8")
    return loads_config(text, source=str(path))


def loads_config(text: str, source="<string>") -> RunConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: parse error: {exc}") from None
    try:
        return parse_config(doc)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_preset(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    text = resources.files("gravdec").joinpath("presets", f"{name}.toml").read_text(encoding="utf-8")
    return loads_config(text, source=f"preset:{name}")
