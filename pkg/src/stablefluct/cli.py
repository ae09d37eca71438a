"""Command-line front end: ``stablefluct eval|check|simulate``.

Each subcommand dispatches to a registry of tool handlers. Output is JSON
(stable key order) for eval and check and CSV plus a JSON manifest for
simulate. Exit codes: 0 success, 1 failed check cases, 2 anything else.
"""

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
import time
import traceback
from typing import Any, Optional, Sequence

import numpy as np
import scipy
from pydantic import ValidationError

from stablefluct import config, toolhandler, tools_check, tools_eval, tools_simulate
from stablefluct.api.records import SimulationRow
from stablefluct.api.run import RunConfig
from stablefluct.model import StableFluctError

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

SIGNIFICANT_DIGITS = 9

NAME_FIELDS = {"eval": "identity", "check": "suite", "simulate": "experiment"}

logger = logging.getLogger("stablefluct")


class UsageError(StableFluctError):
    """Error raised for malformed command lines and unknown registry names."""


tool_handlers: dict[str, dict[str, toolhandler.ToolHandler]] = {command: {} for command in NAME_FIELDS}


def add_tool_handler(command: str, tool_class: toolhandler.ToolHandler):
    global tool_handlers

    tool_handlers[command][tool_class.name] = tool_class


def get_tool_handler(command: str, name: str) -> toolhandler.ToolHandler | None:
    if name not in tool_handlers[command]:
        return None

    return tool_handlers[command][name]


for handler in tools_eval.get_eval_handlers():
    add_tool_handler("eval", handler)
for handler in tools_check.get_check_handlers():
    add_tool_handler("check", handler)
for handler in tools_simulate.get_simulate_handlers():
    add_tool_handler("simulate", handler)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--d", type=int, help="Dimension, d >= 2")
    common.add_argument("--alpha", type=float, help="Stability index in (0, 2)")
    common.add_argument("--config", type=str, help="JSON document whose keys mirror the flag names")
    common.add_argument("--out", type=str, help="Output path; stdout when absent")
    common.add_argument("--list", action="store_true", help="Print the registry and exit")
    common.add_argument("--verbose", action="store_true", help="Log at INFO")
    common.add_argument("--debug", action="store_true", help="Log at DEBUG")

    parser = _Parser(prog="stablefluct", description="Fluctuation identities of isotropic stable processes")
    commands = parser.add_subparsers(dest="command", required=True)

    eval_parser = commands.add_parser("eval", parents=[common], help="Evaluate one identity")
    eval_parser.add_argument("--identity", type=str)
    for point in ("x", "y", "z", "v", "w", "theta"):
        eval_parser.add_argument(f"--{point}", type=str, help="Comma-separated coordinates")
    for scalar in ("r", "rho", "s", "gamma", "zeta", "arg", "index", "a", "b"):
        eval_parser.add_argument(f"--{scalar}", type=float)
    eval_parser.add_argument("--lambda", dest="lam", type=float, help="Laplace argument")
    eval_parser.add_argument("--mode", choices=["entrance", "exit"])
    eval_parser.add_argument("--side", choices=["minus", "plus"])

    check_parser = commands.add_parser("check", parents=[common], help="Run an identity suite")
    check_parser.add_argument("--suite", type=str)
    check_parser.add_argument("--tol", type=float, help="Tolerance; nested-quadrature cases keep their floor")

    simulate_parser = commands.add_parser("simulate", parents=[common], help="Run a Monte Carlo experiment")
    simulate_parser.add_argument("--experiment", type=str)
    simulate_parser.add_argument("--x", type=str, help="Comma-separated starting point")
    for scalar in ("r", "a", "b", "dt", "gamma"):
        simulate_parser.add_argument(f"--{scalar}", type=float)
    simulate_parser.add_argument("--n", type=int, help="Sample count, >= 100")
    simulate_parser.add_argument("--workers", type=int)
    simulate_parser.add_argument("--seed", type=int, help=f"Master seed; default ${config.SEED_ENV} or 0")
    simulate_parser.add_argument("--doublings", type=int)
    simulate_parser.add_argument("--clock", choices=["real", "lamperti"])
    simulate_parser.add_argument("--manifest", type=str, help="Manifest path; default <out>.manifest.json")
    return parser


def round_floats(value: Any, digits: int = SIGNIFICANT_DIGITS) -> Any:
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, (float, np.floating)):
        return float(f"{float(value):.{digits}g}")
    if isinstance(value, dict):
        return {k: round_floats(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_floats(v, digits) for v in value]
    return value


def to_json(document: Any) -> str:
    return json.dumps(round_floats(document), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.{SIGNIFICANT_DIGITS}g}"
    return str(value)


def to_csv(rows: Sequence[SimulationRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    first = rows[0]
    header = ["experiment", "d", "alpha", *[k for k, _ in first.param_items], "estimate", "stderr", "n", "reference", "seed"]
    if first.with_ks:
        header.append("ks")
    writer.writerow(header)
    for row in rows:
        cells = [row.experiment, row.d, row.alpha, *[v for _, v in row.param_items]]
        cells += [row.estimate, row.stderr, row.n, row.reference, row.seed]
        if row.with_ks:
            cells.append(row.ks)
        writer.writerow([_csv_cell(c) for c in cells])
    return buffer.getvalue()


def write_outputs(outputs: Sequence[tuple[Optional[str], str]]):
    """Write every (path, text) pair; a None path means stdout.

    Files go to temporaries in the target directory first and are renamed
    only once all of them are complete.
    """
    staged: list[tuple[str, str]] = []
    try:
        for path, text in outputs:
            if path is None:
                continue
            directory = os.path.dirname(os.path.abspath(path))
            fd, tmp = tempfile.mkstemp(prefix=".stablefluct-", dir=directory)
            staged.append((tmp, path))
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
                f.write(text)
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, path in staged:
        os.replace(tmp, path)
    for path, text in outputs:
        if path is None:
            sys.stdout.write(text)
    sys.stdout.flush()


def _handler_for(run: RunConfig) -> toolhandler.ToolHandler:
    field = NAME_FIELDS[run.command]
    name = getattr(run, field)
    handler = get_tool_handler(run.command, name)
    if not handler:
        raise UsageError(f"unknown {field}: {name}")
    logger.info(f"dispatching {run.command} {name}")
    return handler


def run_eval(run: RunConfig) -> int:
    result = _handler_for(run).run_tool(run.arguments())
    write_outputs([(run.out, to_json(result.model_dump()))])
    return EXIT_OK


def run_check(run: RunConfig) -> int:
    result = _handler_for(run).run_tool(run.arguments())
    write_outputs([(run.out, to_json(result.to_json_dict()))])
    return EXIT_OK if result.all_passed else EXIT_CHECK_FAILED


def run_simulate(run: RunConfig) -> int:
    started = time.perf_counter()
    row = _handler_for(run).run_tool(run.arguments())
    wall_time = time.perf_counter() - started
    outputs: list[tuple[Optional[str], str]] = [(run.out, to_csv([row]))]
    manifest_path = run.manifest or (f"{run.out}.manifest.json" if run.out else None)
    if manifest_path:
        manifest = {
            "config": run.model_dump(by_alias=True),
            "wall_time_s": wall_time,
            "versions": {"numpy": np.__version__, "scipy": scipy.__version__},
        }
        outputs.append((manifest_path, to_json(manifest)))
    write_outputs(outputs)
    return EXIT_OK


COMMANDS = {"eval": run_eval, "check": run_check, "simulate": run_simulate}


def _list_registry(command: str) -> int:
    descriptions = [h.get_tool_description().model_dump() for h in tool_handlers[command].values()]
    sys.stdout.write(json.dumps(descriptions, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def _one_line(e: ValidationError) -> str:
    first = e.errors()[0]
    where = ".".join(str(p) for p in first["loc"])
    message = first["msg"].removeprefix("Value error, ")
    return f"{where}: {message}" if where else message


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s", force=True)
    try:
        flags = vars(build_parser().parse_args(argv))
        command = flags.pop("command")
        debug, verbose = flags.pop("debug", False), flags.pop("verbose", False)
        if debug or verbose:
            logging.getLogger().setLevel(logging.DEBUG if debug else logging.INFO)
        if flags.pop("list", False):
            return _list_registry(command)
        config_path = flags.pop("config", None)
        run = config.resolve(command, flags, config_path)
        return COMMANDS[command](run)
    except ValidationError as e:
        logging.error(_one_line(e))
    except StableFluctError as e:
        logging.error(str(e))
    except SystemExit as e:
        # --help
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    except Exception as e:
        logger.debug(traceback.format_exc())
        logging.error(f"unexpected {type(e).__name__}: {e}")
    return EXIT_USAGE
