"""Versioned job-config schemas and loading.

Configs are YAML or JSON. Every object rejects unknown keys and physical
quantities carry their SI unit in the key name.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import jsonschema
import yaml

from .exceptions import DomainError

SCHEMA_VERSION = 1
COMMANDS = ("solve", "calibrate", "extract", "oracle", "stats")

_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_mode = {"type": "integer", "minimum": 0}
_name = {"type": "string", "minLength": 1}
_kind = {"enum": ["capacitor", "inductor"]}
_u64 = {"type": "integer", "minimum": 0, "maximum": 2**64 - 1}


def _obj(properties, required=(), **extra):
    return {
        "type": "object",
        "properties": properties,
        "required": list(required),
        "additionalProperties": False,
        **extra,
    }


_line = _obj(
    {"z0_ohm": _pos, "f_open_hz": _pos, "q_open_ref": _pos, "exponent_s": {"type": "number"}},
    ["z0_ohm", "f_open_hz"],
)
_load = _obj(
    {"name": _name, "c_farad": _pos, "l_henry": _pos, "tan_delta": _nonneg},
    ["name"],
    anyOf=[{"required": ["c_farad"]}, {"required": ["l_henry"]}],
)
_check = _obj(
    {
        "name": _name,
        "output": {"type": "string", "minLength": 1},
        "target": {"type": "number"},
        "abs_tol": _nonneg,
        "rel_tol": _nonneg,
        "max": {"type": "number"},
        "min": {"type": "number"},
    },
    ["output"],
)
_header = {
    "schema_version": {"const": SCHEMA_VERSION},
    "seed": _u64,
    "description": {"type": "string"},
    "checks": {"type": "array", "items": _check},
}
_mode_row = _obj(
    {"mode_n": _mode, "f_r_hz": _pos, "q_i": _pos, "f_r_sigma_hz": _pos, "q_i_sigma": _pos},
    ["mode_n", "f_r_hz"],
)


def _command_schema(command, properties, required=()):
    props = dict(_header)
    props["command"] = {"const": command}
    props.update(properties)
    return _obj(props, ["schema_version", *required])


SCHEMAS = {
    "solve": _command_schema(
        "solve",
        {
            "line": _line,
            "loads": {"type": "array", "items": _load},
            "modes": {"type": "array", "items": _mode, "minItems": 1},
            "sweep": _obj(
                {
                    "kinds": {"type": "array", "items": _kind, "minItems": 1},
                    "modes": {"type": "array", "items": _mode, "minItems": 1},
                    "x_over_z0_min": _pos,
                    "x_over_z0_max": _pos,
                    "points": {"type": "integer", "minimum": 2},
                },
                ["x_over_z0_min", "x_over_z0_max", "points"],
            ),
            "design": _obj(
                {"kinds": {"type": "array", "items": _kind}, "modes": {"type": "array", "items": _mode}},
            ),
        },
        ["line"],
    ),
    "calibrate": _command_schema(
        "calibrate",
        {
            "z0_ohm": _pos,
            "kind": _kind,
            "exponent_s": {"type": "number"},
            "f_r_rel_sigma": _pos,
            "reference_f_open_hz": _pos,
            "parasitics": {"type": "boolean"},
            "area_rel_sigma": _nonneg,
            "devices": {
                "type": "array",
                "minItems": 1,
                "items": _obj(
                    {
                        "name": _name,
                        "modes": {"type": "array", "items": _mode_row},
                        "mode_table_csv": {"type": "string"},
                        "area_m2": _pos,
                        "thickness_m": _pos,
                    },
                    ["name"],
                    oneOf=[{"required": ["modes"]}, {"required": ["mode_table_csv"]}],
                ),
            },
        },
        ["devices"],
    ),
    "extract": _command_schema(
        "extract",
        {
            "z0_ohm": _pos,
            "kind": _kind,
            "exponent_s": {"type": "number"},
            "reference": _obj(
                {
                    "f_open_hz": _pos,
                    "f_open_rel_sigma": _pos,
                    "q_open": _pos,
                    "q_open_rel_sigma": _pos,
                    "q_open_samples": {"type": "array", "items": _pos, "minItems": 3},
                    "q_open_lognormal": _obj(
                        {"median": _pos, "sigma_log": _pos, "n": {"type": "integer", "minimum": 3}},
                        ["median", "sigma_log", "n"],
                    ),
                },
                ["f_open_hz"],
            ),
            "measurements": {
                "type": "array",
                "minItems": 1,
                "items": _obj(
                    {"name": _name, "mode_n": _mode, "f_r_hz": _pos, "q_i": _pos, "trace_csv": {"type": "string"}},
                    ["name", "mode_n"],
                    anyOf=[{"required": ["f_r_hz"]}, {"required": ["trace_csv"]}],
                ),
            },
            "multimode_check": {"type": "boolean"},
        },
        ["reference", "measurements"],
    ),
    "oracle": _command_schema(
        "oracle",
        {
            "line": _line,
            "mode_n": {"type": "integer", "minimum": 1},
            "tan_deltas": {"type": "array", "items": _nonneg, "minItems": 1},
            "x_over_z0": _obj(
                {"min": _pos, "max": _pos, "points": {"type": "integer", "minimum": 1}},
                ["min", "max", "points"],
            ),
            "rel_pull": _pos,
            "points": {"type": "integer", "minimum": 101},
            "linewidths": _pos,
            "delay_s": {"type": "number"},
            "snr_db": {"type": "number"},
            "write_traces": {"type": "boolean"},
            "q_i_rel_tol": _pos,
            "f_r_rel_tol": _pos,
        },
        ["line", "tan_deltas", "x_over_z0"],
    ),
    "stats": _command_schema(
        "stats",
        {
            "n_samples": {"type": "integer", "minimum": 1000},
            "workers": {"type": "integer", "minimum": 1},
            "mc_rel_tol": _pos,
            "monte_carlo": {
                "type": "array",
                "items": {
                    "oneOf": [
                        _obj(
                            {
                                "name": _name,
                                "quantity": {"const": "reactance"},
                                "kind": _kind,
                                "mode_n": _mode,
                                "f_r_hz": _pos,
                                "f_open_hz": _pos,
                                "z0_ohm": _pos,
                                "rel_sigma_f_open": _pos,
                            },
                            ["name", "quantity", "kind", "mode_n", "f_r_hz", "f_open_hz", "rel_sigma_f_open"],
                        ),
                        _obj(
                            {
                                "name": _name,
                                "quantity": {"const": "tan_delta"},
                                "q_i": _pos,
                                "q_open": _pos,
                                "f_r_hz": _pos,
                                "f_open_hz": _pos,
                                "rel_sigma_q_open": _pos,
                                "exponent_s": {"type": "number"},
                            },
                            ["name", "quantity", "q_i", "q_open", "f_r_hz", "f_open_hz", "rel_sigma_q_open"],
                        ),
                    ]
                },
            },
            "kappa": {
                "type": "array",
                "items": _obj(
                    {
                        "name": _name,
                        "area_rel_sigma": _nonneg,
                        "points": {
                            "type": "array",
                            "minItems": 1,
                            "items": _obj(
                                {"name": _name, "area_m2": _pos, "thickness_m": _pos, "c_farad": _pos},
                                ["area_m2", "thickness_m", "c_farad"],
                            ),
                        },
                    },
                    ["name", "points"],
                ),
            },
            "lognormal": _obj(
                {
                    "samples": {"type": "array", "items": _pos, "minItems": 3},
                    "synthetic": _obj(
                        {"median": _pos, "sigma_log": _pos, "n": {"type": "integer", "minimum": 3}},
                        ["median", "sigma_log", "n"],
                    ),
                },
            ),
        },
    ),
}


class _Loader(yaml.SafeLoader):
    pass


# YAML 1.1 needs a dot in floats; accept plain scientific notation like 7e9
_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(
        r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
        |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
        |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
        |[-+]?\.(?:inf|Inf|INF)
        |\.(?:nan|NaN|NAN))$""",
        re.X,
    ),
    list("-+0123456789."),
)


class ConfigError(DomainError):
    """Config file is unreadable or fails schema validation."""


def load_config(path, command=None):
    """Parse and validate a config file; returns ``(command, config_dict)``."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(text)
        else:
            data = yaml.load(text, Loader=_Loader)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping")
    declared = data.get("command")
    if command is None:
        command = declared
    if command not in SCHEMAS:
        raise ConfigError(f"config {path}: unknown or missing command {command!r}")
    if declared is not None and declared != command:
        raise ConfigError(f"config {path} is for {declared!r}, not {command!r}")
    validate(data, command)
    return command, data


def validate(data, command):
    try:
        jsonschema.validate(data, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{command} config invalid at {where}: {exc.message}") from None
