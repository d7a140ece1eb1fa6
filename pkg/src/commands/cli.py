import argparse
import sys
import uuid
from typing import List, Optional, TextIO

from .. import __version__
from .experiment_commands import ExperimentCommands
from ..config.logging import bind_run_context, clear_run_context, get_logger, setup_logging
from ..config.settings import get_settings
from ..models.errors import ChannelError

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"{text} is not positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zxqos",
        description="QoS temporal precoding with zero-crossing modulation for 1-bit oversampled MIMO downlinks"
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--log-file", default=None, help="Also write JSON log records to this file")
    parser.add_argument("--archive", default=None, help="SQLAlchemy URL of the run archive, e.g. sqlite:///runs.db")
    parser.add_argument("--out", default=None, help="Directory for result files")

    commands = parser.add_subparsers(dest="command", required=True)

    bound = commands.add_parser("ser-bound", help="Semi-analytical SER/BER upper bound")
    bound.add_argument("--mrx", type=int, required=True, choices=[2, 3])
    threshold = bound.add_mutually_exclusive_group(required=True)
    threshold.add_argument("--gamma", type=float)
    threshold.add_argument("--target-ser", type=float)
    threshold.add_argument("--gamma-grid", help="start:step:stop or comma separated values")
    bound.add_argument("--sigma2", type=_positive_float, default=1.0)
    bound.add_argument("--sigma-mode", choices=["correlated", "white"], default=None)
    bound.add_argument("--rolloff-rx", type=float, default=None)

    sim = commands.add_parser("simulate", help="Monte Carlo link simulation, sweeps and SER CDFs")
    sim.add_argument("--config", help="Experiment file (.toml or .json)")
    sim.add_argument("--from-manifest", help="Replay the run recorded in this manifest")
    sim.add_argument("--mrx", type=int)
    sim.add_argument("--mtx", type=int)
    sim.add_argument("--n", type=int)
    sim.add_argument("--ntx", type=int)
    sim.add_argument("--nu", type=int)
    sim.add_argument("--sigma2", type=float)
    sim.add_argument("--n0", type=float)
    sim_threshold = sim.add_mutually_exclusive_group()
    sim_threshold.add_argument("--gamma", type=float)
    sim_threshold.add_argument("--target-ser", type=float)
    sim_grid = sim.add_mutually_exclusive_group()
    sim_grid.add_argument("--gamma-grid")
    sim_grid.add_argument("--ser-grid")
    sim_grid.add_argument("--n-grid")
    sim_grid.add_argument("--ntx-grid")
    sim.add_argument("--trials", type=int)
    sim.add_argument("--batch-size", type=int)
    sim.add_argument("--max-errors", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--sigma-mode", choices=["correlated", "white"])
    sim.add_argument("--channel-mode", choices=["fixed", "redraw"])
    sim.add_argument("--workers", type=int)
    sim.add_argument("--no-bound", action="store_true", help="Skip the SER_ub column")
    sim.add_argument("--cdf", action="store_true", help="Empirical CDF of per-channel SER")
    sim.add_argument("--channels", type=int, default=200, help="Channel draws for --cdf")

    design = commands.add_parser("design", help="QoS precoders for one channel matrix")
    channel = design.add_mutually_exclusive_group(required=True)
    channel.add_argument("--channel", help="Inline matrix: rows split by ';', cells by ','")
    channel.add_argument("--channel-file", help="CSV of complex cells written as a+bi")
    design.add_argument("--mrx", type=int, required=True)
    design.add_argument("--mtx", type=int)
    design.add_argument("--n", type=int, default=1)
    design_threshold = design.add_mutually_exclusive_group(required=True)
    design_threshold.add_argument("--gamma", type=float)
    design_threshold.add_argument("--target-ser", type=float)
    design.add_argument("--sigma2", type=_positive_float, default=1.0)
    design.add_argument("--sigma-mode", choices=["correlated", "white"], default=None)
    design.add_argument("--n0", type=_positive_float, default=1.0)
    design.add_argument("--rolloff-rx", type=float, default=None)
    design.add_argument("--seed", type=int, default=7)

    return parser


def run(argv: Optional[List[str]] = None, out: Optional[TextIO] = None) -> int:
    """Parse arguments, dispatch the sub-command and map failures to exit codes"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK

    setup_logging(args.log_level, args.log_file)
    clear_run_context()
    bind_run_context(invocation=uuid.uuid4().hex[:12], command=args.command, tool_version=__version__)
    commands = ExperimentCommands.from_settings(get_settings(), out)
    handlers = {
        "ser-bound": commands.cmd_ser_bound,
        "simulate": commands.cmd_simulate,
        "design": commands.cmd_design,
    }

    try:
        return handlers[args.command](args)
    except ChannelError as e:
        logger.error("Channel cannot be precoded", error=str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as e:
        logger.error("Invalid configuration", error=str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as e:
        logger.error("Run failed", error=str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    finally:
        clear_run_context()
