"""
Run configuration: strict JSON parsing and the figure presets.

A configuration is a JSON object. Unknown keys are rejected. A config may name
a ``preset`` to start from; its own keys then override the preset's (nested
objects are merged key by key).
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from .errors import ConfigError, PolarRabiError
from .formfactor import FormFactor, make_form_factor
from .model import ModelParams, StateLabel

MODES = ("spectrum", "rates", "sweep", "crossings", "validate")

DEFAULTS: Dict[str, Any] = {
    "mode": "spectrum",
    "params": {"omega_c": 1.0, "omega_a": 1.0, "g_R": 0.01, "g_S": 0.01, "g_S_prime": 0.0, "unit_scale": 1.0},
    "initial": ["10+"],
    "form_factor": {"kind": "constant"},
    "gamma_ext_relative_to": "omega_c",
    "base_rate": 1e-3,
    "lamb_shift": False,
    "grid": {"min": 0.0, "max": 3.5, "points": 4000},
    "sweep": {"variable": "g_R", "min": 1e-3, "max": 5e-2, "points": 60, "spacing": "log",
              "ratios": [1.0, 0.1, 0.01], "norm_tolerance": 0.01, "warn_above": 0.1},
    "crossings": {"g_min": 0.0, "g_max": 0.3, "n_min": 7, "n_max": 10, "points": 2000, "table_points": 301},
    "validate": {"g_values": [0.02, 0.01, 0.005, 0.0025], "norm_max": 0.15, "norm_points": 150,
                 "norm_labels": ["10+"], "fock_cutoff": 40, "finals": ["9+", "10-", "7-"]},
    "strict": False,
    "jobs": 1,
}

_RESONANT = {"omega_a": 1.0}
_DETUNED = {"omega_a": 0.8}


def _preset(mode, **over):
    cfg = {"mode": mode}
    cfg.update(over)
    return cfg


PRESETS: Dict[str, Dict[str, Any]] = {
    "fig2a": _preset("crossings", params=_RESONANT),
    "fig2b": _preset("crossings", params=_DETUNED),
    "fig3a": _preset("spectrum", params={**_RESONANT, "g_R": 0.01, "g_S": 0.01}, initial=["10+", "10-"],
                     form_factor={"kind": "powerlaw", "exponent": 2.0}),
    "fig3b": _preset("spectrum", params={**_RESONANT, "g_R": 0.01, "g_S": 0.01}, initial=["10+", "10-"],
                     form_factor={"kind": "constant"}),
    "appendixA": _preset("validate", params={**_RESONANT, "g_R": 0.01, "g_S": 0.01}, initial=["10+"]),
}
_FF4 = {
    "a": {"kind": "constant"},
    "b": {"kind": "powerlaw", "exponent": 2.0},
    "c": {"kind": "lorentzian", "omega_ext": "intramanifold", "gamma_ext": 1e-4},
}
for _i, _panel in enumerate("abcdef"):
    _par = _RESONANT if _i < 3 else _DETUNED
    PRESETS[f"fig4{_panel}"] = _preset("sweep", params=dict(_par), initial=["10+"],
                                       form_factor=dict(_FF4["abc"[_i % 3]]))
for _panel, _par in zip("abcd", (_RESONANT, _DETUNED, _RESONANT, _DETUNED)):
    PRESETS[f"fig5{_panel}"] = _preset("sweep", params=dict(_par), initial=["10+"],
                                       form_factor={"kind": "constant"}, sweep={"ratios": [1.0]})


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown configuration key '{where}'")
        if isinstance(base[key], dict) and key != "form_factor":
            if not isinstance(val, dict):
                raise ConfigError(f"configuration key '{where}' must be an object")
            out[key] = _merge(base[key], val, where + ".")
        else:
            out[key] = copy.deepcopy(val)
    return out


@dataclass
class RunConfig:
    mode: str
    params: ModelParams
    initial: List[StateLabel]
    form_factor: Dict[str, Any]
    gamma_ext_relative_to: str
    base_rate: float
    lamb_shift: bool
    grid: Dict[str, Any]
    sweep: Dict[str, Any]
    crossings: Dict[str, Any]
    validate: Dict[str, Any]
    strict: bool
    jobs: int
    preset: Optional[str] = None
    raw: Dict[str, Any] = field(default_factory=dict)

    def grid_array(self) -> np.ndarray:
        g = self.grid
        if int(g["points"]) < 1:
            raise ConfigError("grid.points must be at least 1")
        if not g["max"] > g["min"]:
            raise ConfigError("grid.max must exceed grid.min")
        return np.linspace(float(g["min"]), float(g["max"]), int(g["points"]))

    def sweep_values(self) -> np.ndarray:
        s = self.sweep
        lo, hi, n = float(s["min"]), float(s["max"]), int(s["points"])
        if n < 1 or not hi >= lo or lo < 0:
            raise ConfigError("sweep range must satisfy 0 <= min <= max with points >= 1")
        if s["spacing"] == "log":
            if lo <= 0:
                raise ConfigError("log-spaced sweep needs min > 0")
            return np.geomspace(lo, hi, n)
        if s["spacing"] == "linear":
            return np.linspace(lo, hi, n)
        raise ConfigError(f"sweep.spacing must be 'log' or 'linear', got {s['spacing']!r}")

    def form_factor_for(self, p: ModelParams, initial: StateLabel) -> FormFactor:
        """Concrete form factor at parameter point ``p`` (resolves an intramanifold-centred Lorentzian)."""
        from .emission import intramanifold_frequency

        spec = dict(self.form_factor)
        if spec.get("kind") == "lorentzian":
            if spec.get("omega_ext") == "intramanifold":
                spec["omega_ext"] = intramanifold_frequency(initial.n, p)
            if not isinstance(spec.get("omega_ext"), (int, float)):
                raise ConfigError("form_factor.omega_ext must be a number or \"intramanifold\"")
            # gamma_ext is given relative to omega_c (default) or to omega_ext
            ref = spec["omega_ext"] if self.gamma_ext_relative_to == "omega_ext" else p.omega_c
            spec["gamma_ext"] = float(spec.get("gamma_ext", 1e-4)) * ref
        try:
            return make_form_factor(spec, omega_c=p.omega_c)
        except PolarRabiError as exc:
            raise ConfigError(f"form_factor: {exc}") from exc

    def to_dict(self) -> Dict[str, Any]:
        return copy.deepcopy(self.raw)


def _validate(raw: Dict[str, Any], preset: Optional[str]) -> RunConfig:
    if raw["mode"] not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {raw['mode']!r}")
    try:
        params = ModelParams(**{k: float(v) for k, v in raw["params"].items()})
    except (TypeError, ValueError, PolarRabiError) as exc:
        raise ConfigError(f"params: {exc}") from exc
    if not isinstance(raw["initial"], list) or not raw["initial"]:
        raise ConfigError("initial must be a non-empty list of state labels like \"10+\"")
    try:
        initial = [StateLabel.parse(str(x)) for x in raw["initial"]]
    except PolarRabiError as exc:
        raise ConfigError(f"initial: {exc}") from exc
    if not isinstance(raw["form_factor"], dict) or "kind" not in raw["form_factor"]:
        raise ConfigError("form_factor must be an object with a 'kind'")
    if raw["gamma_ext_relative_to"] not in ("omega_c", "omega_ext"):
        raise ConfigError("gamma_ext_relative_to must be 'omega_c' or 'omega_ext'")
    if not float(raw["base_rate"]) > 0:
        raise ConfigError("base_rate must be positive")
    if int(raw["jobs"]) < 1:
        raise ConfigError("jobs must be >= 1")
    cfg = RunConfig(mode=raw["mode"], params=params, initial=initial, form_factor=dict(raw["form_factor"]),
                    gamma_ext_relative_to=raw["gamma_ext_relative_to"], base_rate=float(raw["base_rate"]),
                    lamb_shift=bool(raw["lamb_shift"]), grid=dict(raw["grid"]), sweep=dict(raw["sweep"]),
                    crossings=dict(raw["crossings"]), validate=dict(raw["validate"]),
                    strict=bool(raw["strict"]), jobs=int(raw["jobs"]), preset=preset, raw=raw)
    # surface form-factor errors at parse time
    cfg.form_factor_for(params, initial[0])
    if cfg.mode == "spectrum":
        cfg.grid_array()
    if cfg.mode == "sweep":
        cfg.sweep_values()
    return cfg


def build_config(overrides: Optional[Dict[str, Any]] = None, preset: Optional[str] = None) -> RunConfig:
    """Resolve defaults <- preset <- overrides into a validated :class:`RunConfig`."""
    overrides = dict(overrides or {})
    preset = overrides.pop("preset", None) if preset is None else preset
    overrides.pop("preset", None)
    raw = copy.deepcopy(DEFAULTS)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; available: {', '.join(sorted(PRESETS))}")
        raw = _merge(raw, PRESETS[preset])
    raw = _merge(raw, overrides)
    if preset is not None:
        raw_out = {"preset": preset, **raw}
    else:
        raw_out = raw
    cfg = _validate(raw, preset)
    cfg.raw = raw_out
    return cfg


def load_config(path: Path, preset: Optional[str] = None) -> RunConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    try:
        return build_config(data, preset=preset if preset is not None else data.get("preset"))
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
