"""Command-line entry point for igs-smac."""

import argparse
import logging
import sys
from typing import Callable, Dict, List, Optional

from pydantic import ValidationError

from .commands import CommandOutput, ExperimentCommands, ScenarioCommands, SolverCommands
from .config import Config, load_config, setup_logging
from .output import write_output
from .solvers.base import IgsError, InfeasibleScenarioError, VerificationError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_INFEASIBLE = 3
EXIT_VERIFICATION_FAILED = 4

Handler = Callable[[argparse.Namespace, Config], CommandOutput]


def _common_options() -> argparse.ArgumentParser:
    """Options accepted by every subcommand; unset values fall back to the config."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="random seed (IGS_SEED)")
    common.add_argument("--trials", type=int, help="Monte Carlo trials (IGS_TRIALS)")
    common.add_argument("--tol", type=float, help="bisection tolerance on r (IGS_BISECTION_TOL)")
    common.add_argument("--workers", type=int, help="worker processes (IGS_WORKERS)")
    common.add_argument(
        "--format", choices=("csv", "json", "svg"), help="output format (IGS_OUTPUT_FORMAT)"
    )
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--log-level", help="logging level (IGS_LOG_LEVEL)")
    return common


def _add_scenario_source(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--scenario", help="scenario JSON file")
    source.add_argument("--preset", type=int, choices=(1, 2, 3), help="published two-user scenario")
    parser.add_argument(
        "--order", help="decoding order: default (K..1), swapped (1..K) or e.g. 2,1"
    )


def _register_canonical(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(
        "canonical", parents=[common], help="reduce a scenario to the canonical model"
    )
    _add_scenario_source(parser)
    parser.add_argument(
        "--save-scenario", help="also write the (reordered) scenario as a scenario file"
    )

    def run(args: argparse.Namespace, config: Config) -> CommandOutput:
        return ScenarioCommands(config).canonical(
            scenario_path=args.scenario,
            preset=args.preset,
            order=args.order,
            save_scenario=args.save_scenario,
        )

    parser.set_defaults(handler=run)


def _register_single_user(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(
        "single-user", parents=[common], help="optimal circularity and power of one SU"
    )
    parser.add_argument("--p", type=float, required=True, help="PU SNR p")
    parser.add_argument("--a", type=float, required=True, help="SU-to-PU interference gain a_S")
    parser.add_argument("--budget", type=float, required=True, help="SU power budget P_S")
    target = parser.add_mutually_exclusive_group(required=True)
    target.add_argument("--target", type=float, help="PU rate target (bit/s/Hz)")
    target.add_argument("--fraction", type=float, help="PU target as a share of its capacity")
    parser.add_argument("--p-i", type=float, default=0.0, help="improper noise power at the PU")
    parser.add_argument("--c-i", type=float, default=0.0, help="circularity of that noise")
    parser.add_argument("--sweep-c", type=int, help="emit the normalized rate curve on n points")

    def run(args: argparse.Namespace, config: Config) -> CommandOutput:
        return SolverCommands(config).single_user(
            pu_snr=args.p,
            gain=args.a,
            budget=args.budget,
            pu_rate_target=args.target,
            pu_rate_fraction=args.fraction,
            improper_power=args.p_i,
            improper_circularity=args.c_i,
            sweep_c=args.sweep_c,
        )

    parser.set_defaults(handler=run)


def _register_boundary(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(
        "boundary", parents=[common], help="rate-region boundary point or two-user sweep"
    )
    _add_scenario_source(parser)
    point = parser.add_mutually_exclusive_group(required=True)
    point.add_argument("--alpha", help="rate profile, e.g. 0.3,0.7")
    point.add_argument("--sweep", type=int, help="number of profiles on a two-user sweep")
    parser.add_argument("--mode", choices=("igs", "pgs", "both"), default="igs")
    parser.add_argument(
        "--hull", action="store_true", help="add the time-sharing hull of both decoding orders"
    )

    def run(args: argparse.Namespace, config: Config) -> CommandOutput:
        return SolverCommands(config).boundary(
            scenario_path=args.scenario,
            preset=args.preset,
            order=args.order,
            alpha=args.alpha,
            sweep=args.sweep,
            mode=args.mode,
            hull=args.hull,
        )

    parser.set_defaults(handler=run)


def _register_verify(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(
        "verify", parents=[common], help="compare solvers against brute-force grid searches"
    )
    _add_scenario_source(parser)
    parser.add_argument("--alpha", help="rate profile (default: equal shares)")
    parser.add_argument("--random", type=int, metavar="SEED", help="check random problems instead")
    parser.add_argument("--users", type=int, default=1, help="K for random problems")
    parser.add_argument("--count", type=int, default=10, help="number of random problems")
    parser.add_argument("--grid", type=int, help="grid points per dimension")

    def run(args: argparse.Namespace, config: Config) -> CommandOutput:
        return SolverCommands(config).verify(
            scenario_path=args.scenario,
            preset=args.preset,
            order=args.order,
            alpha=args.alpha,
            random_seed=args.random,
            users=args.users,
            count=args.count,
            grid=args.grid,
        )

    parser.set_defaults(handler=run)


def _register_experiment(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(
        "experiment", parents=[common], help="Monte Carlo sum-rate study"
    )
    parser.add_argument("name", choices=("fig7", "fig8"))
    parser.add_argument("--budgets", help="comma-separated SU budgets")
    parser.add_argument("--users", help="user counts for fig8, e.g. 1-6")
    parser.add_argument("--alpha", help="rate profile for fig7")
    parser.add_argument("--fraction", type=float, help="PU target as a share of its capacity")

    def run(args: argparse.Namespace, config: Config) -> CommandOutput:
        return ExperimentCommands(config).experiment(
            name=args.name,
            budgets=args.budgets,
            users=args.users,
            alpha=args.alpha,
            fraction=args.fraction,
            out=args.out,
        )

    parser.set_defaults(handler=run)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="igs-smac",
        description="Improper Gaussian signaling for an underlay secondary MAC",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_options()
    _register_canonical(subparsers, common)
    _register_single_user(subparsers, common)
    _register_boundary(subparsers, common)
    _register_verify(subparsers, common)
    _register_experiment(subparsers, common)
    return parser


def _config_for(args: argparse.Namespace) -> Config:
    return load_config().with_overrides(
        seed=args.seed,
        trials=args.trials,
        bisection_tol=args.tol,
        workers=args.workers,
        output_format=args.format,
        log_level=args.log_level,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)

    try:
        config = _config_for(args)
    except IgsError as e:
        print(f"Failed to load configuration: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    setup_logging(config)

    handler: Handler = args.handler
    try:
        result = handler(args, config)
    except InfeasibleScenarioError as e:
        logger.error(f"Infeasible: {e}")
        return EXIT_INFEASIBLE
    except VerificationError as e:
        logger.error(f"Verification failed: {e}")
        return EXIT_VERIFICATION_FAILED
    except (IgsError, ValidationError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_INPUT_ERROR

    write_output(result.text, args.out)
    extra: Dict[str, str] = result.extra_files
    for path, text in extra.items():
        write_output(text, path)
    if not result.ok:
        return EXIT_VERIFICATION_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
