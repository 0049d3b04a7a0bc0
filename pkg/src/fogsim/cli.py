"""Command-line entry point.

    fogsim run --builtin deadline_test --seed 7 --horizon 10000 --out report.json
    fogsim run --scenario scenarios/healthcare.yaml --format csv
    fogsim run --builtin mobility_demo --sweep 1-8 --out sweep.json
    fogsim scenario --builtin healthcare > healthcare.yaml

Exit status: 0 success, 1 runtime fault, 2 usage error, 3 validation error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from fogsim import __version__
from fogsim.errors import FogSimError, ScenarioSyntaxError, ValidationError
from fogsim.placement import POLICIES
from fogsim.report import FORMATS, dumps_machine, emit_report
from fogsim.scenario import (
    BUILTIN_HEADERS,
    BUILTIN_SCENARIOS,
    Scenario,
    dump_scenario,
    generate_builtin,
    parse_scenario,
    report_document,
    run_scenario,
)

logger = logging.getLogger("fogsim")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, EXIT_VALIDATION = 0, 1, 2, 3


class UsageError(Exception):
    pass


def parse_seeds(text: str) -> list[int]:
    """``"1,2,5"`` or ``"1-4"`` (inclusive) or a mix, e.g. ``"1-3,10"``."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        try:
            if sep:
                a, b = int(lo), int(hi)
                if b < a:
                    raise UsageError(f"empty seed range {part!r}")
                seeds.extend(range(a, b + 1))
            else:
                seeds.append(int(part))
        except ValueError:
            raise UsageError(f"bad seed list {text!r}") from None
    if not seeds:
        raise UsageError("--sweep needs at least one seed")
    return seeds


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fogsim", description="Fog computing discrete-event simulator")
    parser.add_argument("--version", action="version", version=f"fogsim {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and report metrics")
    source = run.add_mutually_exclusive_group(required=True)
    source.add_argument("--scenario", metavar="PATH", help="scenario file (YAML or JSON)")
    source.add_argument("--builtin", metavar="NAME", choices=sorted(BUILTIN_SCENARIOS),
                        help="builtin scenario: %(choices)s")
    run.add_argument("--seed", type=int, help="override the scenario seed")
    run.add_argument("--horizon", type=float, metavar="MS", help="override the horizon (ms)")
    run.add_argument("--policy", choices=POLICIES, help="override the placement policy")
    run.add_argument("--out", metavar="PATH", help="write the machine-readable report here")
    run.add_argument("--event-log", metavar="PATH", help="write the line-delimited event log here")
    run.add_argument("--format", choices=FORMATS, default="human", help="stdout format (default: human)")
    run.add_argument("--sweep", metavar="SEEDS", help="run several seeds in parallel, e.g. 1-8 or 1,4,9")
    run.add_argument("--jobs", type=int, default=None, help="worker processes for --sweep")

    scen = sub.add_parser("scenario", help="print a builtin scenario as an editable file")
    scen.add_argument("--builtin", metavar="NAME", required=True, choices=sorted(BUILTIN_SCENARIOS))
    scen.add_argument("--seed", type=int, default=0)
    scen.add_argument("--out", metavar="PATH")
    return parser


def _load(args) -> Scenario:
    if args.builtin:
        return generate_builtin(args.builtin, 0)
    path = Path(args.scenario)
    if not path.is_file():
        raise UsageError(f"scenario file not found: {path}")
    return parse_scenario(path)


def _one_run(scenario: Scenario, seed, horizon, policy, want_log: bool) -> tuple[dict, str | None]:
    result = run_scenario(scenario, seed=seed, horizon=horizon, policy=policy, log_events=want_log)
    return report_document(result), (result.event_log.dumps() if want_log else None)


def _seeded_path(path: str, seed: int) -> Path:
    p = Path(path)
    return p.with_name(f"{p.stem}.seed{seed}{p.suffix}")


def cmd_run(args) -> int:
    scenario = _load(args)
    want_log = args.event_log is not None
    if args.sweep is None:
        doc, log_text = _one_run(scenario, args.seed, args.horizon, args.policy, want_log)
        if args.out:
            Path(args.out).write_text(dumps_machine(doc))
        if want_log:
            Path(args.event_log).write_text(log_text)
        sys.stdout.buffer.write(emit_report(doc, args.format))
        return EXIT_OK

    seeds = parse_seeds(args.sweep)
    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
        futures = [
            pool.submit(_one_run, scenario, seed, args.horizon, args.policy, want_log) for seed in seeds
        ]
        results = [f.result() for f in futures]
    for seed, (doc, log_text) in zip(seeds, results):
        if want_log:
            _seeded_path(args.event_log, seed).write_text(log_text)
        sys.stdout.buffer.write(emit_report(doc, args.format))
        if args.format == "human":
            sys.stdout.write("\n")
    if args.out:
        Path(args.out).write_text(dumps_machine({"runs": [doc for doc, _ in results], "seeds": seeds}))
    return EXIT_OK


def cmd_scenario(args) -> int:
    text = dump_scenario(generate_builtin(args.builtin, args.seed), BUILTIN_HEADERS.get(args.builtin))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "run":
            return cmd_run(args)
        return cmd_scenario(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"fogsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioSyntaxError as exc:
        print(f"fogsim: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValidationError as exc:
        print("fogsim: scenario is invalid:", file=sys.stderr)
        for v in exc.violations:
            print(f"  - {v}", file=sys.stderr)
        return EXIT_VALIDATION
    except FogSimError as exc:
        print(f"fogsim: run failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"fogsim: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
