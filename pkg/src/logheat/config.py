"""Run configuration: JSON schema, validation and resolution to solver objects."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .model import Params, Sign
from .solver import Grid1D, SolverConfig, initial_data


class ConfigError(ValueError):
    pass


_POS = {"type": "number", "exclusiveMinimum": 0}
_NUM = {"type": "number"}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "additionalProperties": False, "properties": props, "required": list(required)}


_INITIAL_KINDS = {
    "gaussian": _obj({"a0": _POS, "b0": _POS}, ["a0", "b0"]),
    "scaled_steady": _obj({"eps": {"type": "number", "exclusiveMinimum": -1}}),
    "heavy_tail": {
        **_obj({"m_infinity": _POS, "alpha": _POS, "tau": _POS}, ["m_infinity"]),
        "oneOf": [{"required": ["alpha"]}, {"required": ["tau"]}],
    },
    "compact_bump": _obj({"M": {"type": "number", "minimum": 0}, "half_width": _POS, "ramp": _POS, "center": _NUM}),
    "plateau": _obj({"L": _POS, "eps": _POS, "K": _POS, "center": _NUM}, ["L", "eps"]),
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "logheat run configuration",
    **_obj(
        {
            "equation": _obj({"lambda": _POS, "sign": {"enum": [s.value for s in Sign]}}, ["lambda"]),
            "domain": {
                "oneOf": [
                    _obj({"x_min": _NUM, "x_max": _NUM, "n_points": {"type": "integer", "minimum": 3}},
                         ["x_min", "x_max", "n_points"]),
                    _obj({"alpha": _NUM, "beta": _NUM, "n_points": {"type": "integer", "minimum": 3}},
                         ["alpha", "beta", "n_points"]),
                ]
            },
            "initial_data": {
                **_obj({"kind": {"enum": sorted(_INITIAL_KINDS)}, "parameters": {"type": "object"}},
                       ["kind", "parameters"]),
                "allOf": [
                    {"if": {"properties": {"kind": {"const": k}}},
                     "then": {"properties": {"parameters": s}}}
                    for k, s in sorted(_INITIAL_KINDS.items())
                ],
            },
            "time": _obj(
                {
                    "t_end": _POS,
                    "record_every": _POS,
                    "safety": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                    "scheme": {"enum": ["euler", "rk2"]},
                    "amplitude_cap": {"type": "number", "exclusiveMinimum": 1},
                    "log_floor_stop": _NUM,
                },
                ["t_end"],
            ),
            "outputs": _obj(
                {
                    "directory": {"type": "string"},
                    "snapshot_times": {"type": "array", "items": {"type": "number", "minimum": 0}},
                }
            ),
            "experiment": _obj(
                {
                    "threshold": _obj({"half_width": _POS, "ramp": _POS, "plateau_L": _POS, "plateau_eps": _POS,
                                       "max_probes": {"type": "integer", "minimum": 2}, "rel_width": _POS}),
                    "sweep": _obj({"eps_list": {"type": "array", "minItems": 1,
                                                "items": {"type": "number", "exclusiveMinimum": 0,
                                                          "exclusiveMaximum": 1}},
                                   "psi_tol": _POS, "include_steady": {"type": "boolean"}, "small_eps": _POS},
                                  ["eps_list"]),
                    "front": _obj({"level": _POS, "center_target": _POS}),
                    "verify": _obj({
                        "gaussian_envelope": _obj({"a0": _POS, "b0": _POS,
                                                   "side": {"enum": ["UpperDecay", "LowerGrowth"]},
                                                   "radius": {"type": "number", "minimum": 0},
                                                   "t_min": {"type": "number", "minimum": 0}},
                                                  ["a0", "b0", "side"]),
                        "small_data": {"type": "boolean"},
                        "rtol": _POS,
                    }),
                }
            ),
        },
        ["equation", "domain", "initial_data", "time"],
    ),
}

_TIME_DEFAULTS = {"record_every": 0.05, "safety": 0.5, "scheme": "rk2", "amplitude_cap": 1e100,
                  "log_floor_stop": -1e4}


@dataclass
class RunConfig:
    params: Params
    grid: Grid1D
    initial_kind: str
    initial_parameters: dict
    t_end: float
    record_every: float
    safety: float
    scheme: str
    amplitude_cap: float
    log_floor_stop: float
    output_directory: str
    snapshot_times: list
    experiment: dict = field(default_factory=dict)
    resolved: dict = field(default_factory=dict)

    @property
    def lam(self) -> float:
        return self.params.lam

    @property
    def dx(self) -> float:
        return self.grid.dx

    def solver_config(self, **overrides) -> SolverConfig:
        kw = dict(params=self.params, scheme=self.scheme, safety=self.safety, amplitude_cap=self.amplitude_cap,
                  record_every=self.record_every, log_floor_stop=self.log_floor_stop)
        kw.update(overrides)
        return SolverConfig(**kw)

    def initial_profile(self):
        p = dict(self.initial_parameters)
        if self.initial_kind == "scaled_steady":
            p["lam"] = self.lam
        if self.initial_kind == "heavy_tail" and "tau" in p:
            from .solver import heavy_tail_alpha

            p["alpha"] = heavy_tail_alpha(p.pop("tau"))
        return initial_data(self.initial_kind, **p)


def _path(err: jsonschema.ValidationError) -> str:
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def validate(raw: dict) -> None:
    """Raise ConfigError naming the offending field."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: (list(e.absolute_path), e.message))
    if errors:
        # the most specific error is the deepest one
        err = max(errors, key=lambda e: len(e.absolute_path))
        if err.context:
            err = max(err.context, key=lambda e: len(e.absolute_path))
        raise ConfigError(f"invalid config at '{_path(err)}': {err.message}")


def resolve(raw: dict) -> RunConfig:
    validate(raw)
    eq = raw["equation"]
    sign = eq.get("sign", Sign.FOCUSING.value)
    dom = raw["domain"]
    lo, hi = (dom["x_min"], dom["x_max"]) if "x_min" in dom else (dom["alpha"], dom["beta"])
    try:
        params = Params(eq["lambda"], Sign(sign))
        grid = Grid1D(lo, hi, dom["n_points"])
    except ValueError as e:
        raise ConfigError(f"invalid config at 'domain': {e}") from e
    time = {**_TIME_DEFAULTS, **raw["time"]}
    outputs = {"directory": "out", "snapshot_times": [], **raw.get("outputs", {})}
    init = raw["initial_data"]
    resolved = {
        "equation": {"lambda": params.lam, "sign": sign},
        "domain": dict(dom),
        "initial_data": {"kind": init["kind"], "parameters": dict(init["parameters"])},
        "time": time,
        "outputs": outputs,
        "experiment": raw.get("experiment", {}),
    }
    cfg = RunConfig(
        params=params,
        grid=grid,
        initial_kind=init["kind"],
        initial_parameters=dict(init["parameters"]),
        t_end=time["t_end"],
        record_every=time["record_every"],
        safety=time["safety"],
        scheme=time["scheme"],
        amplitude_cap=time["amplitude_cap"],
        log_floor_stop=time["log_floor_stop"],
        output_directory=outputs["directory"],
        snapshot_times=list(outputs["snapshot_times"]),
        experiment=resolved["experiment"],
        resolved=resolved,
    )
    try:
        cfg.initial_profile()
        cfg.solver_config()
    except (ValueError, KeyError) as e:
        raise ConfigError(f"invalid config at 'initial_data/parameters': {e}") from e
    if any(t > cfg.t_end for t in cfg.snapshot_times):
        raise ConfigError("invalid config at 'outputs/snapshot_times': times beyond t_end")
    if not math.isfinite(cfg.t_end):
        raise ConfigError("invalid config at 'time/t_end': must be finite")
    return cfg


def load_config(path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError("invalid config at '<root>': expected a JSON object")
    return resolve(raw)
