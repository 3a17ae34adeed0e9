"""``rigid-points`` command line: validated configs, replica-parallel runs, JSON/CSV artifacts."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import experiments as ex
from .core import RigidPointsError

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


class ValidationError(Exception):
    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


# per command: key -> (kind, default); kinds: int, float, str, bool, [int], [float], choice tuple
COMMON = {"seed": ("int", 0), "replicas": ("int", None), "threads": ("int", None), "out": ("str", None),
          "schema_version": ("int", SCHEMA_VERSION)}

SCHEMAS = {
    "sample-ginibre": {"n": ("int", 16), "stream": ("int", 0), "method": (("lapack", "qr"), "lapack")},
    "sample-gaf": {"n": ("int", 20), "stream": ("int", 0)},
    "vieta-check": {"n": ("int", 20)},
    "reconstruct": {"n": ("int", 60), "chi_replicas": ("int", None)},
    "rigidity-count": {"eps": ("[float]", [1.0, 0.5, 0.33]), "r0": ("float", 1.0), "predict": ("bool", True)},
    "rigidity-sum": {"eps": ("[float]", [1.0, 0.5, 0.33]), "n": ("int", 100), "r0": ("float", 0.3)},
    "power-tails": {"model": (("ginibre", "gaf"), "gaf"), "n": ("int", 100), "l": ("int", 2),
                    "scales": ("[int]", [1, 2, 3]), "r0": ("float", 0.25)},
    "variance-quadrature": {"radii": ("[float]", [2.0, 4.0, 8.0]), "degrees": ("[int]", [16, 64, 256]),
                            "mc_replicas": ("int", 100_000), "mc_n": ("int", 3)},
    "tolerance-mcmc": {"model": (("ginibre", "gaf"), "ginibre"), "n": ("int", 64), "m": ("int", 2),
                       "r0": ("float", 0.8), "steps": ("int", 100_000), "delta": ("float", 0.05),
                       "empty_outside": ("bool", False)},
    "diagnostics-gaf": {"degrees": ("[int]", [40, 60, 80]), "m": ("int", 2), "r0": ("float", 1.0),
                        "zeta_draws": ("int", 50), "delta": ("float", 0.0)},
    "ratio-envelope": {"n": ("int", 256), "m": ("int", 2), "r0": ("float", math.sqrt(2.0)),
                       "delta": ("float", 0.1), "pairs": ("int", 10_000), "calibration_pairs": ("int", 2_000),
                       "draws": ("int", 50)},
}

DEFAULT_REPLICAS = {"vieta-check": 100, "reconstruct": 500, "rigidity-count": 200, "rigidity-sum": 200,
                    "power-tails": 500, "diagnostics-gaf": 300}


def _coerce(key, kind, value):
    def bad():
        return ValidationError(f"invalid value for {key!r}: {value!r}", key)

    if value is None:
        return None
    if isinstance(kind, tuple):
        if value not in kind:
            raise ValidationError(f"{key!r} must be one of {list(kind)}", key)
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise bad()
        return value
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            raise bad()
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise bad()
        return float(value)
    if kind == "str":
        if not isinstance(value, str):
            raise bad()
        return value
    if kind.startswith("["):
        if not isinstance(value, list) or not value:
            raise bad()
        inner = kind[1:-1]
        return [_coerce(key, inner, v) for v in value]
    raise AssertionError(kind)


def resolve_config(command: str, file_cfg: dict, overrides: dict) -> dict:
    schema = {**COMMON, **SCHEMAS[command]}
    for key in list(file_cfg) + list(overrides):
        if key not in schema:
            raise ValidationError(f"unknown config key {key!r}", key)
    if file_cfg.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema_version {file_cfg['schema_version']!r}", "schema_version")
    cfg = {}
    for key, (kind, default) in schema.items():
        value = overrides.get(key)
        if value is None:
            value = file_cfg.get(key, default)
        cfg[key] = _coerce(key, kind, value)
    if cfg["replicas"] is None:
        cfg["replicas"] = DEFAULT_REPLICAS.get(command, 1)
    if cfg["threads"] is None:
        env = os.environ.get("RIGIDPOINTS_THREADS")
        try:
            cfg["threads"] = int(env) if env else 1
        except ValueError:
            raise ValidationError("RIGIDPOINTS_THREADS must be an integer", "threads") from None
    if cfg["threads"] < 1:
        raise ValidationError("threads must be >= 1", "threads")
    if cfg["seed"] >= 2 ** 64:
        raise ValidationError("seed must fit in 64 bits", "seed")
    if cfg["out"] is None:
        cfg["out"] = os.path.join("rigid-points-out", command)
    return cfg


def dispatch(command: str, c: dict) -> ex.ExperimentReport:
    seed, reps, threads = c["seed"], c["replicas"], c["threads"]
    if command == "sample-ginibre":
        return ex.run_sample("ginibre", c["n"], seed, c["stream"], c["method"])
    if command == "sample-gaf":
        return ex.run_sample("gaf", c["n"], seed, c["stream"])
    if command == "vieta-check":
        return ex.run_vieta_check(c["n"], reps, seed, threads)
    if command == "reconstruct":
        return ex.run_reconstruct(c["n"], reps, seed, c["chi_replicas"], threads)
    if command == "rigidity-count":
        return ex.run_rigidity_count(c["eps"], reps, seed, c["r0"], threads, c["predict"])
    if command == "rigidity-sum":
        return ex.run_rigidity_sum(c["eps"], reps, seed, c["n"], c["r0"], threads)
    if command == "power-tails":
        return ex.run_power_tails(c["model"], c["n"], c["l"], c["scales"], reps, seed, c["r0"])
    if command == "variance-quadrature":
        return ex.run_variance_quadrature(c["radii"], c["degrees"], seed, c["mc_replicas"], c["mc_n"])
    if command == "tolerance-mcmc":
        return ex.run_tolerance_mcmc(c["model"], c["n"], c["m"], c["r0"], c["steps"], seed, c["delta"],
                                     c["empty_outside"])
    if command == "diagnostics-gaf":
        return ex.run_diagnostics_gaf(c["degrees"], c["m"], c["r0"], reps, seed, c["zeta_draws"], c["delta"])
    if command == "ratio-envelope":
        return ex.run_ratio_envelope(c["n"], c["m"], c["r0"], c["delta"], c["pairs"], c["calibration_pairs"],
                                     c["draws"], seed)
    raise AssertionError(command)


def _add_flag(p, key, kind):
    flag = "--" + key.replace("_", "-")
    if isinstance(kind, tuple):
        p.add_argument(flag, dest=key, choices=kind, default=None)
    elif kind == "bool":
        p.add_argument(flag, dest=key, action=argparse.BooleanOptionalAction, default=None)
    elif kind.startswith("["):
        p.add_argument(flag, dest=key, nargs="+", type=int if kind == "[int]" else float, default=None)
    else:
        p.add_argument(flag, dest=key, type={"int": int, "float": float, "str": str}[kind], default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rigid-points", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for command, schema in SCHEMAS.items():
        p = sub.add_parser(command)
        p.add_argument("--config", default=None, help="JSON config file; flags override its values")
        for key, (kind, _) in {**COMMON, **schema}.items():
            if key != "schema_version":
                _add_flag(p, key, kind)
    return parser


def _fail(code, kind, message, key=None):
    print(json.dumps({"error": kind, "key": key, "message": message}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code else EXIT_OK
    command = args.command
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config") and v is not None}
    try:
        file_cfg = {}
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
            if not isinstance(file_cfg, dict):
                raise ValidationError("config file must hold a JSON object")
        cfg = resolve_config(command, file_cfg, overrides)
    except ValidationError as exc:
        return _fail(EXIT_VALIDATION, "validation", str(exc), exc.key)
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(EXIT_VALIDATION, "validation", str(exc), "config")
    try:
        report = dispatch(command, cfg)
    except ValueError as exc:
        # includes InvalidEps, a bad input rather than a numerical failure
        return _fail(EXIT_VALIDATION, "validation", str(exc))
    except RigidPointsError as exc:
        return _fail(EXIT_NUMERICAL, "numerical", f"{type(exc).__name__}: {exc}")
    except (ArithmeticError, RuntimeError) as exc:
        return _fail(EXIT_NUMERICAL, "numerical", f"{type(exc).__name__}: {exc}")
    report.config = {k: v for k, v in cfg.items() if k not in ("out", "threads")}
    files = report.write(cfg["out"])
    print(json.dumps({"command": command, "out": cfg["out"], "files": files, "summary": report.summary},
                     default=ex._json_default))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
