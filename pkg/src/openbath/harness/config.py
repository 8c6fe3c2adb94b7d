#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Scenario configuration: per-scenario schemas with defaults.

A schema is a nested dictionary of default values; the type of a default
fixes the accepted type of the key, None marks an optional number and a
list holding one dictionary is the template of a list of sections.
"""

from __future__ import annotations

import copy
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from openbath.errors import ConfigError
from openbath.quantum.damped_oscillator import (
    Constants,
    OscillatorParams,
    gibbs_params,
    persistent_pure_params,
)

logger = logging.getLogger(__name__)

# - global parameters ------------------------------
SCENARIOS = ("coeffs", "simulate", "compare", "thermalize", "classical", "validate")

CHECK_NAMES = (
    "spectral_identity",
    "h_positivity",
    "moment_consistency",
    "correlation_oracle",
    "cptp",
    "convergence",
    "insensitivity",
    "thermalization",
    "classical",
    "simple_markov",
)

MAX_COMPOSITE_DIM = 128
U64_MAX = 2**64 - 1

CHOICES = {
    "diffusion": ("gibbs", "persistent_pure", "explicit"),
    "potential": ("harmonic", "double_well"),
    "init": ("rest", "thermal"),
}

COMMON = {"seed": 20240101, "threads": 1, "out": "openbath_out", "hbar": 1.0, "k_b": 1.0}


def _mode(lam: float, mu: float, temperature: float, **extra: Any) -> dict[str, Any]:
    return {
        "m": 1.0,
        "omega": 1.0,
        "lam": lam,
        "mu": mu,
        "temperature": temperature,
        "diffusion": "gibbs",
        "d_qq": None,
        "d_pp": None,
        "d_pq": None,
        **extra,
    }


SCHEMAS: dict[str, dict[str, Any]] = {
    "coeffs": {
        "mode": {"m": 1.0, "omega": 1.0, "temperature": 1.0},
        "lam_over_omega": [0.01, 0.1, 0.5],
        "mu_over_lam": [0.0, 0.5],
        "delta_range": [-3.0, 3.0],
        "delta_step": 0.5,
        "rel_tol": 1e-8,
        "threshold": 1e-6,
    },
    "simulate": {
        "mode": _mode(0.1, 0.05, 1.0),
        "dim": 40,
        "alpha": 1.0,
        "horizon": 5.0,
        "n_times": 11,
        "threshold": 1e-6,
    },
    "compare": {
        "system": {"m": 1.0, "omega": 1.0, "dim": 8},
        "bath": _mode(0.3, 0.0, 0.5, dim=8),
        "scales": [0.1, 0.05, 0.025, 0.0125],
        "horizon": 5.0,
        "n_times": 41,
        "initial": {"alpha": 0.8, "mixing": 0.5, "correlation_weight": 0.5},
        "sensitivity_scale": 1e-3,
        "sensitivity_horizon": 20.0,
        "ratio_range": [2.2, 6.5],
        "sensitivity_threshold": 1e-3,
    },
    "thermalize": {
        "system": {"m": 1.0, "omega": 1.0, "dim": 30},
        "temperature": 1.0,
        "bath": {"n_modes": 1, "span": [1.0, 1.0], "coupling": 0.05,
                 "damping": 0.01, "m": 1.0},
        "alpha": 1.5,
        "horizon": 3.0,
        "n_times": 31,
        "threshold": 0.02,
    },
    "classical": {
        "system": {"potential": "harmonic", "m": 1.0, "omega0": 1.0,
                   "a4": 0.25, "b2": 0.5, "x0": 0.0, "v0": 0.0},
        "bath": {
            "modes": [{"m": 1.0, "omega": 10.0, "gamma": 5.0, "c": 0.2}],
            "init": "rest",
            "init_temperature": None,
        },
        "temperature": 1.0,
        "dt": 0.005,
        "t_end": 40.0,
        "n_traj": 1000,
        "sample_every": 10,
        "discard": 20.0,
        "max_lag": 100,
        "markov": True,
        "archive": False,
    },
    "validate": {
        "checks": list(CHECK_NAMES),
        "h_positivity_sets": 1000,
        "cptp_configs": 50,
        "moment_dim": 40,
        "classical_traj": 10000,
    },
}


# - Classes ----------------------------------------
@dataclass(frozen=True)
class ScenarioConfig:
    """Validated and fully defaulted configuration of one scenario run.

    Structure elements
    ------------------
    - kind    :  one of SCENARIOS
    - seed    :  unsigned 64-bit seed of every random draw of the run
    - threads :  size of the worker pool
    - out     :  output directory
    - constants :  hbar and k_B
    - params  :  scenario specific section
    """

    kind: str
    seed: int
    threads: int
    out: str
    constants: Constants
    params: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(
        cls: type[ScenarioConfig], data: dict[str, Any], kind: str | None = None
    ) -> ScenarioConfig:
        """Validate a configuration dictionary against the schema of its kind."""
        if not isinstance(data, dict):
            raise ConfigError("", "configuration must be a mapping")
        data = dict(data)
        declared = data.pop("scenario", None)
        if kind is None:
            kind = declared
        elif declared is not None and declared != kind:
            raise ConfigError("scenario", f"config is for {declared!r}, not {kind!r}")
        if kind not in SCENARIOS:
            raise ConfigError("scenario", f"unknown scenario {kind!r}")

        schema = {**COMMON, **SCHEMAS[kind]}
        values = _validate(data, schema, "")
        _check_ranges(kind, values)
        try:
            constants = Constants(values["hbar"], values["k_b"])
        except ValueError as exc:
            raise ConfigError("hbar", str(exc)) from exc
        params = {key: values[key] for key in SCHEMAS[kind]}
        return cls(kind, values["seed"], values["threads"], values["out"],
                   constants, params)

    def as_dict(self: ScenarioConfig) -> dict[str, Any]:
        """Return the echo of the configuration, valid input to from_dict."""
        return {
            "scenario": self.kind,
            "seed": self.seed,
            "threads": self.threads,
            "out": self.out,
            "hbar": self.constants.hbar,
            "k_b": self.constants.k_b,
            **copy.deepcopy(self.params),
        }


# - local functions --------------------------------
def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _is_number(value: Any) -> bool:
    return isinstance(value, int | float) and not isinstance(value, bool)


def _validate(value: Any, default: Any, path: str) -> Any:
    """Return value checked against its default, with missing keys filled."""
    if isinstance(default, dict):
        if not isinstance(value, dict):
            raise ConfigError(path, "expected a section")
        unknown = sorted(set(value) - set(default))
        if unknown:
            raise ConfigError(_join(path, unknown[0]), "unknown key")
        return {
            key: _validate(value[key], dflt, _join(path, key)) if key in value
            else copy.deepcopy(dflt)
            for key, dflt in default.items()
        }
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(path, "expected a list")
        if default and isinstance(default[0], dict):
            return [_validate(item, default[0], f"{path}[{nr}]")
                    for nr, item in enumerate(value)]
        item_default = default[0] if default else 0.0
        return [_validate(item, item_default, f"{path}[{nr}]")
                for nr, item in enumerate(value)]

    key = path.rsplit(".", 1)[-1]
    if default is None:
        if value is None:
            return None
        if not _is_number(value):
            raise ConfigError(path, "expected a number or null")
        return float(value)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(path, "expected true or false")
        return value
    if isinstance(default, int):
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(path, "expected an integer")
        return value
    if isinstance(default, float):
        if not _is_number(value):
            raise ConfigError(path, "expected a number")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(path, "expected a string")
    if key in CHOICES and value not in CHOICES[key]:
        raise ConfigError(path, f"must be one of {', '.join(CHOICES[key])}")
    return value


def _check_ranges(kind: str, values: dict[str, Any]) -> None:
    """Reject values that pass the type check but cannot be run."""
    if not 0 <= values["seed"] <= U64_MAX:
        raise ConfigError("seed", "must be an unsigned 64-bit integer")
    if values["threads"] < 1:
        raise ConfigError("threads", "must be at least 1")

    def pair(name: str, section: dict[str, Any], path: str) -> None:
        if len(section[name]) != 2:
            raise ConfigError(_join(path, name), "expected two values")

    if kind == "coeffs":
        pair("delta_range", values, "")
        if values["delta_step"] <= 0:
            raise ConfigError("delta_step", "must be positive")
    elif kind == "compare":
        pair("ratio_range", values, "")
        d_s, d_e = values["system"]["dim"], values["bath"]["dim"]
        if d_s < 2 or d_e < 2:
            raise ConfigError("system.dim", "truncations need at least two levels")
        if d_s * d_e > MAX_COMPOSITE_DIM:
            raise ConfigError(
                "bath.dim", f"d_S * d_E = {d_s * d_e} exceeds {MAX_COMPOSITE_DIM}"
            )
        if not values["scales"]:
            raise ConfigError("scales", "at least one coupling scale is required")
        if not 0 <= values["initial"]["correlation_weight"] <= 1:
            raise ConfigError("initial.correlation_weight", "must lie in [0, 1]")
    elif kind == "thermalize":
        pair("span", values["bath"], "bath")
        if values["bath"]["n_modes"] < 1:
            raise ConfigError("bath.n_modes", "at least one mode is required")
    elif kind == "classical":
        if not values["bath"]["modes"]:
            raise ConfigError("bath.modes", "at least one bath mode is required")
        if values["n_traj"] < 2:
            raise ConfigError("n_traj", "statistics need at least two trajectories")
        if values["sample_every"] < 1:
            raise ConfigError("sample_every", "must be at least 1")
    elif kind == "validate":
        for nr, name in enumerate(values["checks"]):
            if name not in CHECK_NAMES:
                raise ConfigError(f"checks[{nr}]", f"unknown check {name!r}")


# - exported functions -----------------------------
def mode_from_config(
    section: dict[str, Any], constants: Constants, path: str = "mode"
) -> OscillatorParams:
    """Return the bath-mode parameters described by a mode section."""
    args = (section["m"], section["omega"], section["lam"], section["mu"])
    try:
        if section["diffusion"] == "gibbs":
            return gibbs_params(*args, section["temperature"], constants)
        if section["diffusion"] == "persistent_pure":
            return persistent_pure_params(*args, constants)
        for key in ("d_qq", "d_pp", "d_pq"):
            if section[key] is None:
                raise ConfigError(_join(path, key), "required for explicit diffusion")
        return OscillatorParams(
            *args, section["d_qq"], section["d_pp"], section["d_pq"], constants
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def load_config(
    path: Path | str | None,
    kind: str,
    overrides: dict[str, Any] | None = None,
) -> ScenarioConfig:
    """Read a JSON or TOML configuration and apply command-line overrides.

    Without a path the defaults of the scenario are used.
    """
    data: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        if path.suffix == ".toml":
            try:
                import toml
            except ImportError as exc:
                raise ConfigError("", "TOML configs need the 'toml' extra") from exc
            try:
                data = toml.loads(text)
            except toml.TomlDecodeError as exc:
                raise ConfigError("", f"invalid TOML in {path}: {exc}") from exc
        else:
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError("", f"invalid JSON in {path}: {exc}") from exc
        logger.debug("read configuration from %s", path)
    if not isinstance(data, dict):
        raise ConfigError("", "configuration must be a mapping")
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    return ScenarioConfig.from_dict(data, kind)
