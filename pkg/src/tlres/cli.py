"""Command-line front end.

    tlres solve|calibrate|extract|oracle|stats --config FILE [--seed N] [--out DIR] [--strict]
    tlres batch --config-dir DIR [--out DIR] [--strict]

Exit codes: 0 success, 2 validation error, 3 numerical failure,
4 low-confidence result (only with ``--strict``).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, io
from .exceptions import (
    DegenerateGeometryError,
    DegenerateModesError,
    DivergentUncertaintyError,
    FitError,
    TlresError,
)
from .pipelines import RUNNERS
from .schema import COMMANDS, SCHEMA_VERSION, load_config

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_LOW_CONFIDENCE = 4

NUMERICAL_ERRORS = (
    FitError,
    DegenerateModesError,
    DegenerateGeometryError,
    DivergentUncertaintyError,
    np.linalg.LinAlgError,
    ArithmeticError,
    RuntimeError,
)


def exit_code_for(exc):
    if isinstance(exc, NUMERICAL_ERRORS):
        return EXIT_NUMERICAL
    if isinstance(exc, TlresError):
        return EXIT_VALIDATION
    if isinstance(exc, ValueError):
        # scipy root finders and linear algebra report failures as ValueError
        return EXIT_NUMERICAL
    raise exc


def _plain(obj):
    """Convert numpy scalars/arrays and tuples into JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def dumps(envelope):
    return json.dumps(_plain(envelope), sort_keys=True, indent=2) + "\n"


def lookup(outputs, path):
    node = outputs
    for part in path.split("."):
        if isinstance(node, list):
            node = node[int(part)]
        elif isinstance(node, dict) and part in node:
            node = node[part]
        else:
            raise KeyError(path)
    return node


def evaluate_checks(outputs, checks):
    results = []
    for chk in checks:
        name = chk.get("name", chk["output"])
        entry = {"name": name, "output": chk["output"]}
        try:
            value = float(lookup(outputs, chk["output"]))
        except (KeyError, IndexError, TypeError, ValueError):
            entry.update(value=None, passed=False, reason="output not found")
            results.append(entry)
            continue
        ok = math.isfinite(value)
        if "target" in chk:
            tol = chk.get("abs_tol", 0.0) + chk.get("rel_tol", 0.0) * abs(chk["target"])
            ok = ok and abs(value - chk["target"]) <= tol
            entry["target"] = chk["target"]
            entry["tolerance"] = tol
        if "max" in chk:
            ok = ok and value <= chk["max"]
            entry["max"] = chk["max"]
        if "min" in chk:
            ok = ok and value >= chk["min"]
            entry["min"] = chk["min"]
        entry.update(value=value, passed=bool(ok))
        results.append(entry)
    return results


def run_job(command, cfg, seed, base_dir):
    """Run one job; returns ``(envelope, tables, traces, exit_code)``."""
    env = {
        "tool": "tlres",
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "seed": seed,
        "inputs": cfg,
        "outputs": {},
        "flags": [],
        "warnings": [],
        "checks": [],
        "status": "ok",
        "error": None,
    }
    tables, traces, code = {}, {}, EXIT_OK
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                result = RUNNERS[command](cfg, seed=seed, base_dir=base_dir)
        except Exception as exc:  # noqa: BLE001 - mapped to exit codes
            code = exit_code_for(exc)
            env["status"] = "error"
            env["error"] = {"type": type(exc).__name__, "message": str(exc)}
            result = None
    seen = []
    for w in caught:
        msg = f"{w.category.__name__}: {w.message}"
        if msg not in seen:
            seen.append(msg)
    env["warnings"] = seen
    if result is not None:
        env["outputs"] = result.outputs
        flags = list(result.flags)
        if any(w.startswith("LowConfidenceWarning") for w in seen):
            flags.append("low_confidence_warning")
        env["checks"] = evaluate_checks(result.outputs, cfg.get("checks", []))
        flags.extend(f"check_failed:{c['name']}" for c in env["checks"] if not c["passed"])
        env["flags"] = flags
        if flags:
            env["status"] = "low_confidence"
        tables, traces = result.tables, result.traces
    return env, tables, traces, code


def write_outputs(out_dir, stem, env, tables, traces):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for name, (rows, cols) in sorted(tables.items()):
        path = out_dir / f"{stem}_{name}.csv"
        io.write_table(path, rows, cols)
        files.append(path.name)
    if traces:
        tdir = out_dir / f"{stem}_traces"
        tdir.mkdir(exist_ok=True)
        for tag, trace in sorted(traces.items()):
            io.write_trace_csv(tdir / f"{tag}.csv", trace)
        files.append(tdir.name + "/")
    env["files"] = files
    path = out_dir / f"{stem}.json"
    path.write_text(dumps(env), encoding="utf-8")
    return path


def _stamp(env):
    # the only non-deterministic field
    env["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return env


def _seed(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog="tlres", description=__doc__.splitlines()[0] if __doc__ else None)
    parser.add_argument("--version", action="version", version=f"tlres {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "solve": "resonance frequencies, participation and design points",
        "calibrate": "multimode self-calibration of f_open, load value and loss",
        "extract": "single-mode extraction against a reference resonator",
        "oracle": "network synthesis + circle fit vs the analytic model",
        "stats": "Monte Carlo uncertainties, log-normal fits and kappa fits",
    }
    for cmd in COMMANDS:
        p = sub.add_parser(cmd, help=helps[cmd])
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--seed", type=_seed, default=None)
        p.add_argument("--out", type=Path, default=None)
        p.add_argument("--strict", action="store_true", help="exit 4 when the result carries flags")
    b = sub.add_parser("batch", help="run every config in a directory")
    b.add_argument("--config-dir", required=True, type=Path)
    b.add_argument("--seed", type=_seed, default=None)
    b.add_argument("--out", type=Path, default=None)
    b.add_argument("--strict", action="store_true")
    return parser


def _final_code(env, code, strict):
    if code == EXIT_OK and strict and env["flags"]:
        return EXIT_LOW_CONFIDENCE
    return code


def run_single(command, config_path, seed, out, strict, stream=None):
    stream = sys.stdout if stream is None else stream
    try:
        command, cfg = load_config(config_path, command)
    except TlresError as exc:
        print(f"tlres: {exc}", file=sys.stderr)
        return EXIT_VALIDATION, None
    seed = seed if seed is not None else cfg.get("seed", 0)
    env, tables, traces, code = run_job(command, cfg, seed, Path(config_path).parent)
    _stamp(env)
    if out is not None:
        path = write_outputs(out, Path(config_path).stem, env, tables, traces)
        print(f"{command}: {env['status']} -> {path}", file=stream)
    else:
        stream.write(dumps(env))
    if env["error"]:
        print(f"tlres: {env['error']['type']}: {env['error']['message']}", file=sys.stderr)
    return _final_code(env, code, strict), env


def run_batch(config_dir, seed, out, strict, stream=None):
    stream = sys.stdout if stream is None else stream
    paths = sorted(p for p in Path(config_dir).iterdir() if p.suffix.lower() in (".yaml", ".yml", ".json"))
    if not paths:
        print(f"tlres: no configs in {config_dir}", file=sys.stderr)
        return EXIT_VALIDATION
    worst = EXIT_OK
    for path in paths:
        code, env = run_single(None, path, seed, out, strict, stream=stream)
        if env is not None:
            for chk in env["checks"]:
                mark = "PASS" if chk["passed"] else "FAIL"
                print(f"  [{mark}] {path.stem}: {chk['name']} = {chk['value']!r}", file=stream)
        worst = max(worst, code)
    return worst


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "batch":
        return run_batch(args.config_dir, args.seed, args.out, args.strict)
    code, _ = run_single(args.command, args.config, args.seed, args.out, args.strict)
    return code


if __name__ == "__main__":
    sys.exit(main())
