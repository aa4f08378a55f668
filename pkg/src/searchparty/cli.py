"""Command line entry points.

Exit codes: 0 object found (or command succeeded), 10 search exhausted,
11 tick limit reached, 2 usage or validation problem, 1 unexpected failure.
Seed and output directory resolve flag first, then environment
(SEARCHPARTY_SEED, SEARCHPARTY_OUT), then the scenario file.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import sim
from .bt import BTValidationError
from .comms import CommsError
from .inputs import InputError, load_input_script
from .knowledge import KnowledgeError
from .language import LanguageError, load_lexicon
from .scenario import ScenarioError, load_scenario
from .scripts import ScriptError, load_library

logger = logging.getLogger(__name__)

EXIT_USAGE = 2
EXIT_RUNTIME = 1

_CONFIG_ERRORS = (ScenarioError, ScriptError, LanguageError, InputError,
                  BTValidationError, CommsError, KnowledgeError, ValueError)


def _resolve_seed(flag: int | None) -> int | None:
    if flag is not None:
        return flag
    raw = os.environ.get("SEARCHPARTY_SEED")
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ValueError(
            f"SEARCHPARTY_SEED must be an integer, got {raw!r}") from None


def _resolve_out(flag: str | None) -> str | None:
    if flag is not None:
        return flag
    return os.environ.get("SEARCHPARTY_OUT") or None


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    triggers = load_input_script(args.input)
    seed = _resolve_seed(args.seed)
    out_dir = _resolve_out(args.out)
    simulation = sim.Simulation(scenario, seed=seed, triggers=triggers)
    report = simulation.run()
    if out_dir is not None:
        report = simulation.write_artifacts(out_dir)
    print(f"scenario: {report.scenario} (seed {report.seed})")
    print(f"leader:   {report.leader}")
    print(f"outcome:  {report.outcome} after {report.ticks} ticks")
    if report.found_by is not None:
        print(f"found:    {report.object_location} (by {report.found_by})")
    zones = ", ".join(f"{z}={o}" for z, o in report.zone_outcomes.items())
    print(f"zones:    {zones}")
    print(f"chat:     {report.chat_messages} messages "
          f"({report.envelopes} envelopes)")
    if report.out_dir:
        print(f"artifacts: {report.out_dir}")
    return report.exit_code


def _cmd_replay(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    if not Path(args.transcript).exists():
        raise InputError(f"no such transcript: {args.transcript}")
    report, original, replayed = sim.replay(scenario, args.transcript)
    if original == replayed:
        print(f"replay: identical ({len(original)} lines, "
              f"outcome {report.outcome})")
        return 0
    for i, (a, b) in enumerate(zip(original, replayed)):
        if a != b:
            print(f"replay: diverged at line {i}")
            print(f"  recorded: {a}")
            print(f"  replayed: {b}")
            return 1
    print(f"replay: length mismatch (recorded {len(original)} lines, "
          f"replayed {len(replayed)})")
    return 1


def _cmd_validate(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    library = load_library(scenario.scripts_path)
    lexicon = load_lexicon(scenario.lexicon_path)
    parts = [
        f"scenario {scenario.name}: {len(scenario.zones)} zones, "
        f"{len(scenario.robots)} robots, {len(scenario.objects)} objects",
        f"scripts: {len(library)} ({', '.join(library.names())})",
        f"lexicon: {len(lexicon.entries)} entries",
    ]
    if args.input is not None:
        triggers = load_input_script(args.input)
        parts.append(f"input script: {len(triggers)} triggers")
    print("\n".join(parts))
    print("ok")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from . import server
    scenario = load_scenario(args.scenario)
    triggers = load_input_script(args.input) if args.input else None
    seed = _resolve_seed(args.seed)
    out_dir = _resolve_out(args.out)
    return server.serve(scenario, host=args.host, port=args.port, seed=seed,
                        triggers=triggers, out_dir=out_dir,
                        rate=args.rate, open_ticks=args.ticks)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="searchparty",
        description="Deterministic multi-robot search simulator with a "
                    "plan-script strategic layer over behavior trees.")
    parser.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario headless")
    p_run.add_argument("scenario", help="scenario file")
    p_run.add_argument("--input", required=True,
                       help="scripted chat input (required headless)")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None,
                       help="artifact directory (transcript, traces, report)")
    p_run.set_defaults(fn=_cmd_run)

    p_serve = sub.add_parser("serve", help="serve the live console UI")
    p_serve.add_argument("scenario")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8008)
    p_serve.add_argument("--seed", type=int, default=None)
    p_serve.add_argument("--out", default=None)
    p_serve.add_argument("--input", default=None,
                         help="optional scripted input to drive the run")
    p_serve.add_argument("--rate", type=float, default=10.0,
                         help="ticks per second")
    p_serve.add_argument("--ticks", type=int, default=None,
                         help="stop stepping after this many ticks")
    p_serve.set_defaults(fn=_cmd_serve)

    p_replay = sub.add_parser(
        "replay", help="re-run a transcript's inputs and compare byte-exact")
    p_replay.add_argument("scenario")
    p_replay.add_argument("transcript")
    p_replay.set_defaults(fn=_cmd_replay)

    p_val = sub.add_parser("validate",
                           help="check a scenario and its referenced files")
    p_val.add_argument("scenario")
    p_val.add_argument("--input", default=None)
    p_val.set_defaults(fn=_cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level))
    try:
        return args.fn(args)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        return 130
    except Exception:
        logger.exception("unexpected failure")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
