"""
Command-line front end.

Exit codes: 0 when every check passes, 1 on a property violation, 2 on a
usage or configuration error.
"""

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .channels import (
    channel_from_json,
    ensemble_from_json,
    unitary_from_json,
)
from .config import configure, get_settings
from .core import random_haar_unitary, random_state, registry_create
from .exceptions import ConfigurationException, QuantumInfoLabException
from .protocols import (
    CascadeConfig,
    KnowledgeSetup,
    MeasurementSpec,
    cascade_statistics,
    check_zeroth_law,
    simulate_cascade,
    simulate_classical_communication,
    simulate_dpi_chain,
)
from .reports import to_json_bytes, write_json_atomic, write_trajectory_csv
from .suite import PropertyCheckConfig, default_suite, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
LOG_FORMAT = "%(asctime)s — %(levelname)s — %(message)s"


def _positive_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value!r} is not an integer")
    if number < 1:
        raise argparse.ArgumentTypeError(f"{value!r} must be >= 1")
    return number


def _seed(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value!r} is not an integer")
    if not 0 <= number < 2**64:
        raise argparse.ArgumentTypeError(f"{value!r} is not a u64 seed")
    return number


def _tolerance(value: str) -> float:
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value!r} is not a number")
    if not 0 <= number < float("inf"):
        raise argparse.ArgumentTypeError(f"{value!r} must be >= 0")
    return number


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0, help="Root seed")
    common.add_argument(
        "--tol",
        type=_tolerance,
        default=1e-9,
        help="Absolute tolerance of every check",
    )
    common.add_argument(
        "--max-dim",
        type=_positive_int,
        default=None,
        help="Largest total dimension of a dense state",
    )
    common.add_argument(
        "--out", type=Path, default=None, help="Report path (JSON)"
    )
    common.add_argument(
        "--workers",
        type=_positive_int,
        default=1,
        help="Threads for independent trials",
    )
    common.add_argument(
        "--verbose", action="store_true", help="Log progress"
    )

    parser = argparse.ArgumentParser(
        prog="quantuminfolab",
        description="Directed-entanglement simulations and property checks",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    verify = commands.add_parser(
        "verify", parents=[common], help="Run the property suite"
    )
    verify.add_argument(
        "--trials",
        type=_positive_int,
        default=500,
        help="Trials per property",
    )
    verify.add_argument(
        "--config",
        type=Path,
        default=None,
        help="JSON list of property configs",
    )

    holevo = commands.add_parser(
        "holevo", parents=[common], help="Classical communication experiment"
    )
    holevo.add_argument("--ensemble", type=Path, required=True)
    holevo.add_argument("--channel", type=Path, required=True)
    holevo.add_argument(
        "--basis",
        type=Path,
        default=None,
        help="Unitary JSON whose columns are the measurement basis",
    )

    dpi = commands.add_parser(
        "dpi", parents=[common], help="Two-channel data processing chain"
    )
    dpi.add_argument(
        "--ensemble",
        type=Path,
        default=None,
        help="Ensemble whose average state is the input",
    )
    dpi.add_argument(
        "--channel", type=Path, action="append", default=[], required=True
    )

    zeroth = commands.add_parser(
        "zeroth", parents=[common], help="Zeroth-law interaction check"
    )
    zeroth.add_argument(
        "--ensemble",
        type=Path,
        action="append",
        default=[],
        help="Ensembles for Q1 and Q2 (give both or neither)",
    )
    zeroth.add_argument(
        "--unitary",
        type=Path,
        default=None,
        help="Interaction unitary JSON on Q1Q2 (Haar-random if omitted)",
    )
    zeroth.add_argument(
        "--setup",
        choices=[s.value for s in KnowledgeSetup],
        default=KnowledgeSetup.DISENTANGLED.value,
    )

    cascade = commands.add_parser(
        "cascade", parents=[common], help="Second-law cascade"
    )
    cascade.add_argument("--cascade", type=Path, default=None)
    cascade.add_argument(
        "--csv", type=Path, default=None, help="Trajectory CSV path"
    )
    cascade.add_argument(
        "--runs",
        type=_positive_int,
        default=1,
        help="Seeded runs for trajectory statistics",
    )
    return parser


def _read_json(path: Path):
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def _load_channel(path: Path, dim: int):
    payload = _read_json(path)
    if isinstance(payload, dict) and "preset" in payload:
        payload = {"dim": dim, **payload}
    return channel_from_json(payload)


def _emit(payload, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(to_json_bytes(payload).decode())
    else:
        write_json_atomic(out, payload)


def _random_qubit(rng: np.random.Generator, label: str):
    return random_state(registry_create([(label, 2)]), 2, rng)


def cmd_verify(args) -> int:
    if args.config is not None:
        payload = _read_json(args.config)
        if not isinstance(payload, list):
            raise ConfigurationException(
                "Suite config must be a JSON list of property configs."
            )
        configs = [PropertyCheckConfig.from_dict(c) for c in payload]
    else:
        configs = default_suite(args.seed, args.trials, args.tol)
    report = run_suite(configs, args.workers, args.verbose)
    _emit(report.to_dict(), args.out)
    return EXIT_OK if report.passed else EXIT_VIOLATION


def cmd_holevo(args) -> int:
    ens = ensemble_from_json(_read_json(args.ensemble))
    ch = _load_channel(args.channel, ens.dim)
    basis = (
        unitary_from_json(_read_json(args.basis), (ens.label,))
        if args.basis is not None
        else None
    )
    report = simulate_classical_communication(
        ens, ch, MeasurementSpec(ens.label, basis), args.tol
    )
    report.seed = args.seed
    _emit(report.to_dict(), args.out)
    return EXIT_OK if report.passed else EXIT_VIOLATION


def cmd_dpi(args) -> int:
    if len(args.channel) != 2:
        raise ConfigurationException(
            f"dpi needs exactly two --channel files, got {len(args.channel)}."
        )
    if args.ensemble is not None:
        rho = ensemble_from_json(_read_json(args.ensemble)).average_state()
    else:
        rho = _random_qubit(np.random.default_rng(args.seed), "Q")
    dim = rho.registry.total_dim
    first, second = (_load_channel(path, dim) for path in args.channel)
    report = simulate_dpi_chain(rho, first, second, args.tol)
    report.seed = args.seed
    _emit(report.to_dict(), args.out)
    return EXIT_OK if report.passed else EXIT_VIOLATION


def cmd_zeroth(args) -> int:
    rng = np.random.default_rng(args.seed)
    if len(args.ensemble) == 2:
        rho_1, rho_2 = (
            ensemble_from_json(_read_json(path), label).average_state()
            for path, label in zip(args.ensemble, ("Q1", "Q2"))
        )
    elif not args.ensemble:
        rho_1, rho_2 = _random_qubit(rng, "Q1"), _random_qubit(rng, "Q2")
    else:
        raise ConfigurationException(
            "zeroth takes two --ensemble files (Q1 and Q2) or none."
        )
    targets = ("Q1", "Q2")
    if args.unitary is not None:
        u = unitary_from_json(_read_json(args.unitary), targets)
    else:
        side = rho_1.registry.total_dim * rho_2.registry.total_dim
        u = random_haar_unitary(side, rng, targets)
    report = check_zeroth_law(
        rho_1, rho_2, u, KnowledgeSetup(args.setup), tolerance=args.tol
    )
    report.seed = args.seed
    _emit(report.to_dict(), args.out)
    return EXIT_OK if report.passed else EXIT_VIOLATION


def cmd_cascade(args) -> int:
    if args.cascade is not None:
        cfg = CascadeConfig.from_json(
            _read_json(args.cascade), default_seed=args.seed
        )
    else:
        cfg = CascadeConfig(seed=args.seed)
    report = simulate_cascade(cfg, tolerance=args.tol)
    summary = report.to_dict()
    summary["config"] = cfg.to_dict()
    first_step = report.checks.get("first_step")
    summary["first_step_margin"] = first_step.margin if first_step else None
    summary["final"] = report.values["final"]
    passed = report.passed
    if args.runs > 1:
        stats = cascade_statistics(
            cfg, args.runs, args.workers, args.verbose, args.tol
        )
        summary["statistics"] = stats.to_dict()
        passed = passed and not (
            stats.first_step_violations or stats.bound_violations
        )
    if args.csv is not None:
        write_trajectory_csv(args.csv, report.trajectory)
    _emit(summary, args.out)
    return EXIT_OK if passed else EXIT_VIOLATION


COMMANDS = {
    "verify": cmd_verify,
    "holevo": cmd_holevo,
    "dpi": cmd_dpi,
    "zeroth": cmd_zeroth,
    "cascade": cmd_cascade,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one command.
    :param argv: Arguments without the program name (defaults to sys.argv).
    :return: Exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format=LOG_FORMAT,
    )
    previous = get_settings()
    try:
        if args.max_dim is not None:
            configure(max_total_dim=args.max_dim)
        code = COMMANDS[args.command](args)
    except (QuantumInfoLabException, json.JSONDecodeError, OSError) as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_USAGE
    except Exception:
        logger.exception(f"{args.command} failed unexpectedly.")
        raise
    finally:
        configure(**asdict(previous))
    if code == EXIT_VIOLATION:
        logger.warning(f"{args.command}: some checks failed.")
    return code
