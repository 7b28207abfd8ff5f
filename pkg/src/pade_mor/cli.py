"""Command-line entry point: ``pade-mor run|preset|validate``."""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources

from . import config as config_mod
from .errors import ConfigError, DegeneratePolynomialError, PoleAtCenterError, SolverError

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3

PRESETS = ("section4", "section5", "section6", "section7")


def preset_dict(name):
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    text = resources.files("pade_mor").joinpath("presets", f"{name}.json").read_text(encoding="utf-8")
    return json.loads(text)


def _execute(raw):
    from .experiments import run  # heavy imports only when running

    try:
        cfg = config_mod.from_dict(raw)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        written = run(cfg)
    except (SolverError, PoleAtCenterError, DegeneratePolynomialError, ArithmeticError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    for p in written:
        print(p)
    return EXIT_OK


def _load_raw(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from None


def main(argv=None):
    parser = argparse.ArgumentParser(prog="pade-mor", description="Least-squares Padé model order reduction experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a JSON config")
    p_run.add_argument("config")

    p_pre = sub.add_parser("preset", help="run a bundled preset")
    p_pre.add_argument("name", choices=PRESETS)
    p_pre.add_argument("--out", help="output directory")
    p_pre.add_argument("--seed", type=int, help="random seed")
    p_pre.add_argument("--grid", type=int, help="grid resolution (cells per side)")

    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config")

    args = parser.parse_args(argv)
    try:
        if args.command == "preset":
            raw = preset_dict(args.name)
            if args.out is not None:
                raw["output"] = args.out
            if args.seed is not None:
                raw["seed"] = args.seed
            if args.grid is not None:
                raw["grid"] = args.grid
            return _execute(raw)
        raw = _load_raw(args.config)
        if args.command == "validate":
            cfg = config_mod.from_dict(raw)
            print(f"ok: {cfg.problem} config, hash {cfg.digest()}")
            return EXIT_OK
        return _execute(raw)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
