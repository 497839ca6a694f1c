"""Command-line entry point: ``subrad <experiment> --config <path> [--out <dir>] [--jobs <n>]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
The output directory defaults to ``$SUBRAD_OUT`` or ``./subrad_out``;
``output.dir`` in the config overrides the environment and ``--out``
overrides both.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import EXPERIMENTS, parse_config
from .errors import ConfigError, NumericalError

ENV_OUT = "SUBRAD_OUT"
DEFAULT_OUT = "subrad_out"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="subrad", description=__doc__.splitlines()[0])
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", required=True, help="TOML run configuration")
    p.add_argument("--out", help=f"output directory (default ${ENV_OUT} or ./{DEFAULT_OUT})")
    p.add_argument("--jobs", type=int, default=1, help="concurrent eigensolves (default 1)")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return p


def resolve_out(cli_out, config_out) -> str:
    return cli_out or config_out or os.environ.get(ENV_OUT) or DEFAULT_OUT


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG

    # deferred so that argument errors do not pay the numpy import
    from .experiments import run

    try:
        config = parse_config(args.config, args.experiment)
        out = resolve_out(args.out, config.output_dir)
        manifest = run(config, out, jobs=args.jobs)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    if config.experiment == "k4":
        print(f"{manifest['summary']['k4_pi']:.8f}")
    else:
        for f in manifest["files"]:
            print(os.path.join(out, f["name"]))
    if manifest["truncated"]:
        print("warning: eigensolve budget exhausted; series truncated", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
