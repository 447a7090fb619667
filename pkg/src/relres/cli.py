"""Command-line front end."""

from __future__ import annotations

import argparse
import json
import sys

from . import bench
from .errors import ExplorationCapExceeded, NoAdmissibleStrategy, SpecError
from .planner import build_constraints, min_resources
from .reliability import admissible_strategies
from .report import (
    Report, render_report, render_schedule, render_strategy_table,
    schedule_json, strategy_table, suite_digest, use_color,
)
from .smtlib import export_smtlib
from .spec_model import SpecSuite, parse_suite
from .strategy import flatten

EXIT_OK, EXIT_DIAG, EXIT_INFEASIBLE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors share the diagnostics exit status
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_DIAG, f"{self.prog}: error: {message}\n")


def load_suite(path: str) -> SpecSuite:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        raise OSError(f"{path}: file not found") from None
    return parse_suite(text)


def pick_scenario(suite: SpecSuite, sid: str | None) -> str:
    if sid is not None:
        suite.scenario(sid)
        return sid
    if len(suite.scenarios) == 1:
        return suite.scenarios[0].id
    if not suite.scenarios:
        raise UsageError("suite defines no scenario")
    names = ", ".join(s.id for s in suite.scenarios)
    raise UsageError(f"--scenario required (one of: {names})")


def _strategy_tables(suite: SpecSuite, pids, anchors=None):
    anchors = anchors or {}
    out = []
    for pid in pids:
        anchor = anchors.get(pid, 0)
        table = flatten(suite.property(pid), anchor, suite.property_index(pid))
        out.append(strategy_table(suite, table,
                                  admissible_strategies(suite, pid, anchor)))
    return out


def _emit(args, report: Report, text: str) -> None:
    if getattr(args, "json", False):
        json.dump(report.to_json(), sys.stdout, indent=2, ensure_ascii=False)
        sys.stdout.write("\n")
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    suite = load_suite(args.file)
    sid = pick_scenario(suite, args.scenario)
    sc = suite.scenario(sid)
    tables = _strategy_tables(suite, [p for p, _ in sc.firings], sc.anchors)
    schedule = min_resources(suite, sid)
    report = Report(suite_digest(suite), tables, schedule)
    _emit(args, report, render_report(report, use_color()))
    return EXIT_OK


def cmd_strategies(args) -> int:
    suite = load_suite(args.file)
    tables = _strategy_tables(suite, [args.property])
    report = Report(suite_digest(suite), tables)
    color = use_color()
    _emit(args, report, "\n\n".join(render_strategy_table(t, color)
                                    for t in tables) + "\n")
    return EXIT_OK


def cmd_min_resources(args) -> int:
    suite = load_suite(args.file)
    sid = pick_scenario(suite, args.scenario)
    schedule = min_resources(suite, sid)
    if args.json:
        json.dump({"suite_digest": suite_digest(suite),
                   "schedule": schedule_json(schedule)},
                  sys.stdout, indent=2, ensure_ascii=False)
        sys.stdout.write("\n")
    else:
        sys.stdout.write(render_schedule(schedule) + "\n")
    return EXIT_OK


def cmd_export_smt(args) -> int:
    if args.gamma < 1:
        raise UsageError("gamma must be ≥ 1")
    suite = load_suite(args.file)
    sid = pick_scenario(suite, args.scenario)
    text = export_smtlib(build_constraints(suite, sid, args.gamma),
                         optimize=args.optimize)
    with open(args.out, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)
    print(args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    depths = [int(d) for d in str(args.depth).split(",")]
    specs = [bench.BenchSpec(args.properties, args.actions, d,
                             bench.parse_range(args.spatial),
                             bench.parse_range(args.temporal), args.seed)
             for d in depths]
    for s in specs:
        s.check()
    rows = []
    for s in specs:
        rows.append(bench.run_one(s, args.repeats))
    sys.stdout.write(bench.to_csv(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="relres",
                description="Reliability-aware processor estimation for "
                            "redundant control specifications.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="strategy tables and minimal schedule")
    a.add_argument("file")
    a.add_argument("--scenario")
    a.add_argument("--json", action="store_true")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("strategies", help="enumerate strategies of a property")
    s.add_argument("file")
    s.add_argument("--property", required=True)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_strategies)

    m = sub.add_parser("min-resources", help="minimal processor count")
    m.add_argument("file")
    m.add_argument("--scenario")
    m.add_argument("--json", action="store_true")
    m.set_defaults(func=cmd_min_resources)

    e = sub.add_parser("export-smt", help="write the constraint set as SMT-LIB2")
    e.add_argument("file")
    e.add_argument("--gamma", type=int, required=True)
    e.add_argument("--scenario")
    e.add_argument("--out", required=True)
    e.add_argument("--optimize", action="store_true",
                   help="free gamma with a minimize objective")
    e.set_defaults(func=cmd_export_smt)

    b = sub.add_parser("bench", help="seeded scalability runs, CSV on stdout")
    b.add_argument("--properties", type=int, required=True)
    b.add_argument("--actions", type=int, required=True)
    b.add_argument("--depth", required=True,
                   help="depth or comma-separated depth list")
    b.add_argument("--spatial", default="1")
    b.add_argument("--temporal", default="1")
    b.add_argument("--seed", type=int, required=True)
    b.add_argument("--repeats", type=int, default=1)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpecError as exc:
        for d in exc.diagnostics:
            sep = ":" if d.line is not None else ": "
            print(f"{getattr(args, 'file', '')}{sep}{d}", file=sys.stderr)
        return EXIT_DIAG
    except (UsageError, ValueError, ExplorationCapExceeded,
            bench.BenchCapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIAG
    except KeyError as exc:
        print(f"error: unknown id {exc.args[0]}", file=sys.stderr)
        return EXIT_DIAG
    except NoAdmissibleStrategy as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
