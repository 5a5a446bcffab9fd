#!/usr/bin/env python3
"""Command line for functional regression with ARH(1) errors.

    python arhgls.py [--config PATH] [--seed INT] [--out DIR] [--threads INT]
                     [--model ID|PATH] <subcommand> [options]

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
"""

import argparse
import os
import sys

import numpy as np

from commands import COMMANDS
from utils.config import load_config, resolve_threads
from utils.errors import NUMERICAL_ERRORS, ArhGlsError, ConfigError, ModelError
from utils.formatter import Formatter
from utils.logger import RunLogger, resolve_log_dir

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class UsageError(Exception):
    """argparse rejected the command line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    parser = _Parser(prog="arhgls", description="Functional regression with ARH(1) errors")
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--seed", type=int, help="base seed (overrides the config)")
    parser.add_argument("--out", default=".", help="output directory (default: current directory)")
    parser.add_argument("--threads", help="worker threads (default: $ARHGLS_THREADS or 1)")
    parser.add_argument("--model", help="preset id or path to a model JSON (overrides the config)")

    sub = parser.add_subparsers(dest="command", metavar="<subcommand>")
    sub.required = True
    sub.add_parser("simulate", help="simulate one sample path as CSV")
    fit = sub.add_parser("fit", help="estimate beta from simulated CSV data")
    fit.add_argument("--input", required=True, help="directory written by simulate")
    fit.add_argument("--estimator", choices=("ols", "plugin"), default="plugin")
    predict = sub.add_parser("predict", help="one-step-ahead forecast from simulated CSV data")
    predict.add_argument("--input", required=True, help="directory written by simulate")
    experiment = sub.add_parser("experiment", help="EFMQE and CEMQE tables")
    experiment.add_argument("--rolling", action="store_true", help="refit on times 1..n-1 for each report time")
    sub.add_parser("sweep", help="consistency sweep over the configured sample sizes")
    sub.add_parser("normality", help="moments of the standardized GLS error")
    return parser


class ArhGlsApp:
    """Per-invocation state shared by the command handlers."""

    def __init__(self, config, out_dir, threads, formatter=None, run_logger=None, stream=None):
        self.config = config
        self.out_dir = out_dir
        self.threads = threads
        self.stream = stream or sys.stdout
        self.formatter = (formatter or Formatter()).for_stream(self.stream)
        self.run_logger = run_logger or RunLogger(None)

    def output_path(self, name):
        return os.path.join(self.out_dir, name)

    def send(self, message):
        self.formatter.emit(message, self.stream)


def cli_main(argv=None, stdout=None, stderr=None):
    """Run one subcommand and return its exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    formatter = Formatter().for_stream(stderr)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        formatter.emit(formatter.format_error(f"usage error: {e}"), stderr)
        return EXIT_USAGE

    run_logger = None
    try:
        config = load_config(args.config, seed=args.seed, model=args.model)
        threads = resolve_threads(args.threads)
        os.makedirs(args.out, exist_ok=True)
        run_logger = RunLogger(resolve_log_dir(args.out))
        app = ArhGlsApp(config, args.out, threads, run_logger=run_logger, stream=stdout)
        settings = dict(config.to_dict(), threads=threads)
        run_logger.log_run_start(args.command, settings)
        outputs = COMMANDS[args.command](app, args)
        run_logger.log_run_end(args.command, outputs)
        return EXIT_OK
    except (ConfigError, ModelError) as e:
        if run_logger:
            run_logger.log_error(type(e).__name__, str(e), args.command)
        formatter.emit(formatter.format_error(f"configuration error: {e}"), stderr)
        return EXIT_USAGE
    except OSError as e:
        formatter.emit(formatter.format_error(f"file error: {e}"), stderr)
        return EXIT_USAGE
    except NUMERICAL_ERRORS + (np.linalg.LinAlgError,) as e:
        if run_logger:
            run_logger.log_error(type(e).__name__, str(e), args.command)
        formatter.emit(formatter.format_error(f"numerical failure: {type(e).__name__}: {e}"), stderr)
        return EXIT_NUMERICAL
    except ArhGlsError as e:
        formatter.emit(formatter.format_error(f"error: {e}"), stderr)
        return EXIT_USAGE
    finally:
        if run_logger:
            run_logger.close()


def main():
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
