"""Command-line entry point of the OTFS array simulator."""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

import voluptuous as vol

from .config import ExperimentConfig, load_config
from .const import (
    ANGLE_MODES,
    CONF_ANGLES,
    CONF_MODE,
    CONF_SEED,
    EXPERIMENT_ARRAYGAIN,
    EXPERIMENT_BER,
    EXPERIMENT_MSE,
    EXPERIMENT_OVERHEAD,
    EXPERIMENT_SCALING,
    MODES,
    OUTPUT_FORMATS,
)
from .coordinator import SimulationCoordinator
from .exceptions import OtfsArrayError
from .experiments import build_setup, run_arraygain, run_ber, run_mse, run_overhead, run_scaling
from .results import write_pattern, write_results
from .selftest import run_selftest

_LOGGER = logging.getLogger(__name__)

COMMAND_PATTERN = "pattern"
COMMAND_SELFTEST = "selftest"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="otfs-array",
        description="Link-level simulator of OTFS received through a large uniform linear array.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug")
    subparsers = parser.add_subparsers(dest="command", required=True)

    commands = {
        EXPERIMENT_BER: "BER and SER versus SNR",
        EXPERIMENT_MSE: "channel-estimation MSE versus pilot SNR",
        EXPERIMENT_OVERHEAD: "pilot and guard overhead of every pattern",
        EXPERIMENT_ARRAYGAIN: "normalized array gain versus angle offset",
        EXPERIMENT_SCALING: "detection runtime versus B*M*N",
        COMMAND_PATTERN: "dump the pilot/guard/data role grid",
        COMMAND_SELFTEST: "run the oracle-equivalence checks",
    }
    for name, help_text in commands.items():
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", help="flat key = value config file")
        sub.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
        sub.add_argument("--full", action="store_true", help="use the M=512, N=128 frame and array sweep")
        if name == COMMAND_SELFTEST:
            continue
        sub.add_argument("--out", default="results", help="output directory (default: results)")
        sub.add_argument("--mode", choices=MODES, help="propagation model")
        sub.add_argument("--angles", choices=ANGLE_MODES, help="beam directions")
        sub.add_argument("--format", choices=OUTPUT_FORMATS, default="csv", dest="fmt")
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _load(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {
        CONF_SEED: args.seed,
        CONF_MODE: getattr(args, "mode", None),
        CONF_ANGLES: getattr(args, "angles", None),
    }
    config = load_config(args.config, overrides)
    return config.with_full_scale() if args.full else config


def _run_selftest(args: argparse.Namespace) -> int:
    config = _load(args)
    results = run_selftest(config.seed)
    for result in results:
        print(result)
    return EXIT_OK if all(result.passed for result in results) else EXIT_FAILURE


def _run_pattern(args: argparse.Namespace, config: ExperimentConfig) -> list:
    setup = build_setup(
        config, config.antennas[0], config.velocities_kmh[0], config.snr_db[0], config.snr_p_db
    )
    return [write_pattern(setup.pattern, args.out)]


def run(args: argparse.Namespace) -> int:
    """Execute one subcommand; print the written files to stdout."""
    if args.command == COMMAND_SELFTEST:
        return _run_selftest(args)

    config = _load(args)
    if args.command == COMMAND_PATTERN:
        paths = _run_pattern(args, config)
    else:
        coordinator = SimulationCoordinator(config.seed, config.workers, progress=True)
        if args.command == EXPERIMENT_BER:
            records = run_ber(config, coordinator)
        elif args.command == EXPERIMENT_MSE:
            records = run_mse(config, coordinator)
        elif args.command == EXPERIMENT_OVERHEAD:
            records = run_overhead(config)
        elif args.command == EXPERIMENT_ARRAYGAIN:
            records = run_arraygain(config)
        else:
            records = run_scaling(config, coordinator)
        paths = write_results(records, args.out, args.command, args.fmt)

    for path in paths:
        print(path)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return run(args)
    except (OtfsArrayError, vol.Invalid) as err:
        _LOGGER.error("%s failed: %s", args.command, err)
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as err:  # pylint: disable=broad-except
        _LOGGER.exception("Unexpected error in %s", args.command)
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_FAILURE
