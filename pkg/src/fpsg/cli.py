"""Command-line entry point: ``fpsg run|sweep|compare-exact <config.json>``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import traceback
from pathlib import Path

from .config import parse_config, validate
from .errors import ConfigurationError


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fpsg", description="Stochastic-Galerkin solvers for Fokker-Planck equations with random inputs"
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", type=Path, help="JSON run configuration")
    common.add_argument("--output-dir", type=Path, default=None, help="directory for the CSV artifacts")
    common.add_argument("--threads", type=int, default=1, help="parallel sweep entries (default 1)")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run one configuration")
    sub.add_parser("sweep", parents=[common], help="run every value of the configured sweep")
    sub.add_parser(
        "compare-exact", parents=[common], help="classical model: compare against the closed-form solution"
    )
    return parser


def _output_dir(args, cfg) -> Path:
    if args.output_dir is not None:
        return args.output_dir
    if cfg.output_dir:
        return Path(cfg.output_dir)
    return Path("fpsg-output") / args.config.stem


def _fail(out_dir: Path | None, exc: BaseException, code: int) -> int:
    record = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(record), file=sys.stderr)
    if out_dir is not None:
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            (out_dir / "error.json").write_text(json.dumps(record, indent=2) + "\n")
        except OSError:
            pass
    return code


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.threads < 1:
        return _fail(None, ConfigurationError("--threads must be at least 1"), 2)
    os.environ.setdefault("OMP_NUM_THREADS", str(args.threads))
    try:
        cfg = parse_config(args.config)
    except ConfigurationError as exc:
        return _fail(args.output_dir, exc, 2)
    out_dir = _output_dir(args, cfg)
    # imported here so that configuration errors are reported without the solver stack
    from . import runner

    try:
        if args.command == "run":
            runner.run_one(cfg, out_dir)
        elif args.command == "sweep":
            runner.run_sweep(cfg, out_dir, threads=args.threads)
        else:
            if cfg.model.name != "classical":
                raise ConfigurationError("compare-exact needs the classical model")
            if cfg.reference is None:
                cfg = validate(dict(cfg.raw, reference={"kind": "exact", "M": 50}))
            if cfg.sweep is not None:
                runner.run_sweep(cfg, out_dir, threads=args.threads, exact_columns=True)
            else:
                runner.run_one(cfg, out_dir, exact_columns=True)
    except ConfigurationError as exc:
        return _fail(out_dir, exc, 2)
    except Exception as exc:  # noqa: BLE001 - every failure becomes an error record
        if args.verbose:
            traceback.print_exc()
        return _fail(out_dir, exc, 1)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
