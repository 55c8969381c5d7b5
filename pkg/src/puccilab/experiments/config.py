"""Strict JSON scenario configs.

Every key is whitelisted per section and per scenario; unknown keys
are rejected so a typo cannot silently run a different study than the
one intended.  Values are range-checked here only as far as the
scenario layer needs; module-level preconditions still apply when the
scenario runs.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from ..errors import ConfigError, InputError
from ..grid import Grid
from .fields import make_field

__all__ = ["ScenarioConfig", "parse_config", "load_config", "SCENARIO_TAGS"]

SCENARIO_TAGS = (
    "solve",
    "class_check",
    "decay",
    "boundary",
    "counterexample",
    "p_sweep",
    "ellipticity_sweep",
    "eps_sweep",
)

_GRID_KEYS = {
    "n_dim",
    "h",
    "tau",
    "spatial_extent",
    "time_extent",
    "half_space",
    "stagger",
}

_OPERATOR_KEYS = {
    "solve": {"kind", "lam", "Lam", "p", "epsilon"},
    "class_check": {"lam", "Lam", "f_bound", "tolerance"},
    "decay": set(),
    "boundary": {"lam"},
    "counterexample": {"delta"},
    "p_sweep": {"p_list", "epsilon"},
    "ellipticity_sweep": {"delta_list"},
    "eps_sweep": {"p", "eps_schedule"},
}

_DATA_KEYS = {"f", "g", "u", "affine_part"}

_ANALYSIS_KEYS = {"eta", "K", "alpha", "c1", "n_points", "points", "center"}


@dataclass(frozen=True)
class ScenarioConfig:
    """Parsed and validated scenario description."""

    scenario: str
    grid: Grid
    operator: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)
    analysis: dict = field(default_factory=dict)
    seed: int = 0
    base_dir: str = "."


def _reject_unknown(section: dict, allowed: set, where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(
            f"unknown key(s) {sorted(unknown)} in section '{where}'; "
            f"allowed: {sorted(allowed)}"
        )


def _require(section: dict, keys, where: str) -> None:
    missing = [k for k in keys if k not in section]
    if missing:
        raise ConfigError(f"section '{where}' is missing required key(s) {missing}")


def _build_grid(section) -> Grid:
    if not isinstance(section, dict):
        raise ConfigError("'grid' must be an object")
    _reject_unknown(section, _GRID_KEYS, "grid")
    _require(section, ("n_dim", "h", "tau"), "grid")
    try:
        return Grid(
            n_dim=int(section["n_dim"]),
            h=float(section["h"]),
            tau=float(section["tau"]),
            spatial_extent=float(section.get("spatial_extent", 1.0)),
            time_extent=float(section.get("time_extent", 1.0)),
            half_space=bool(section.get("half_space", False)),
            stagger=bool(section.get("stagger", False)),
        )
    except InputError as exc:
        raise ConfigError(f"grid: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"grid: malformed value ({exc})") from exc


def _check_field_specs(config: ScenarioConfig) -> None:
    """Build every referenced field once, so bad specs fail at parse time."""
    for key, spec in config.data.items():
        if key == "affine_part":
            if not isinstance(spec, dict) or set(spec) != {"value", "gradient"}:
                raise ConfigError(
                    "data.affine_part must be {'value': a, 'gradient': [...]}"
                )
            gradient = spec["gradient"]
            if len(gradient) != config.grid.n_dim:
                raise ConfigError(
                    f"affine_part gradient needs {config.grid.n_dim} components"
                )
            continue
        make_field(spec, config.grid.n_dim, config.base_dir)


def _validate_operator(config: ScenarioConfig) -> None:
    tag = config.scenario
    op = config.operator
    _reject_unknown(op, _OPERATOR_KEYS[tag], f"operator ({tag})")
    if tag == "solve":
        _require(op, ("kind",), "operator")
        kind = op["kind"]
        if kind not in ("heat", "pucci_plus", "pucci_minus", "p_laplace"):
            raise ConfigError(f"unknown operator kind {kind!r}")
        if kind in ("pucci_plus", "pucci_minus"):
            _require(op, ("lam", "Lam"), "operator")
        if kind == "p_laplace":
            _require(op, ("p",), "operator")
            if float(op["p"]) <= 1.0:
                raise ConfigError(f"p must exceed 1, got {op['p']}")
    elif tag == "class_check":
        _require(op, ("lam", "Lam", "f_bound"), "operator")
    elif tag == "counterexample":
        _require(op, ("delta",), "operator")
        if float(op["delta"]) <= 0.0:
            raise ConfigError(f"counterexample needs delta > 0, got {op['delta']}")
    elif tag == "p_sweep":
        _require(op, ("p_list",), "operator")
        if not isinstance(op["p_list"], list):
            raise ConfigError("operator.p_list must be a list")
        for p in op["p_list"]:
            if float(p) <= 1.0:
                raise ConfigError(f"p values must exceed 1, got {p}")
    elif tag == "ellipticity_sweep":
        _require(op, ("delta_list",), "operator")
        for d in op["delta_list"]:
            if float(d) < 0.0:
                raise ConfigError(f"delta values must be >= 0, got {d}")
    elif tag == "eps_sweep":
        _require(op, ("p", "eps_schedule"), "operator")
        if float(op["p"]) <= 1.0:
            raise ConfigError(f"p must exceed 1, got {op['p']}")


def _validate_data(config: ScenarioConfig) -> None:
    tag = config.scenario
    data = config.data
    _reject_unknown(data, _DATA_KEYS, "data")
    if tag in ("solve", "p_sweep", "ellipticity_sweep", "eps_sweep"):
        _require(data, ("f", "g"), "data")
    elif tag in ("class_check", "decay"):
        _require(data, ("u",), "data")
    elif tag == "boundary":
        _require(data, ("affine_part",), "data")
        if ("u" in data) == ("g" in data):
            raise ConfigError(
                "boundary study needs exactly one of data.u (sample mode) "
                "or data.g (solve mode)"
            )
    _check_field_specs(config)


def _validate_analysis(config: ScenarioConfig) -> None:
    an = config.analysis
    _reject_unknown(an, _ANALYSIS_KEYS, "analysis")
    if "eta" in an and not 0.0 < float(an["eta"]) < 1.0:
        raise ConfigError(f"analysis.eta must lie in (0, 1), got {an['eta']}")
    if "K" in an and int(an["K"]) < 0:
        raise ConfigError(f"analysis.K must be >= 0, got {an['K']}")
    if "n_points" in an and int(an["n_points"]) < 1:
        raise ConfigError(f"analysis.n_points must be >= 1, got {an['n_points']}")
    for key in ("points", "center"):
        if key not in an:
            continue
        pts = an[key] if key == "points" else [an[key]]
        for pt in pts:
            if not isinstance(pt, list) or len(pt) != config.grid.n_dim + 1:
                raise ConfigError(
                    f"analysis.{key} entries are [x_1..x_n, t] lists of length "
                    f"{config.grid.n_dim + 1}"
                )
    if config.scenario == "boundary" and not config.grid.half_space:
        raise ConfigError("boundary study needs grid.half_space = true")


def parse_config(raw: dict, base_dir: str = ".") -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    _reject_unknown(
        raw, {"scenario", "grid", "operator", "data", "analysis", "seed"}, "config"
    )
    _require(raw, ("scenario", "grid"), "config")
    tag = raw["scenario"]
    if tag not in SCENARIO_TAGS:
        raise ConfigError(f"unknown scenario {tag!r}; valid tags: {list(SCENARIO_TAGS)}")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed must be a nonnegative integer, got {seed!r}")
    config = ScenarioConfig(
        scenario=tag,
        grid=_build_grid(raw["grid"]),
        operator=dict(raw.get("operator", {})),
        data=dict(raw.get("data", {})),
        analysis=dict(raw.get("analysis", {})),
        seed=seed,
        base_dir=base_dir,
    )
    _validate_operator(config)
    _validate_data(config)
    _validate_analysis(config)
    return config


def load_config(path: str) -> ScenarioConfig:
    if not os.path.isfile(path):
        raise ConfigError(f"config file does not exist: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return parse_config(raw, base_dir=os.path.dirname(os.path.abspath(path)))
