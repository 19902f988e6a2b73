"""Command-line entry point: run scripts with hooks, run test files.

Exit codes: 0 success / all tests pass, 1 runtime error, 2 test
failures present, 3 parse error, 4 usage error.
"""

from __future__ import annotations

import argparse
import csv
import glob
import os
import sys

from .errors import ParseError
from .evaluator import FixedClock, RealClock, default_context
from .flow import MaskSet, RunResult, change_hook, counting_hook, memory_hook, run_file, timing_hook
from .testkit import format_results, run_test_file
from .values import format_value

EXIT_OK = 0
EXIT_RUNTIME_ERROR = 1
EXIT_TEST_FAILURES = 2
EXIT_PARSE_ERROR = 3
EXIT_USAGE = 4


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="tapscript", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    run_p = sub.add_parser("run", help="run a script with optional hooks")
    run_p.add_argument("file")
    run_p.add_argument("--count", action="store_true", help="count every top-level expression")
    run_p.add_argument("--count-gated", action="store_true",
                       help="count expressions after the script calls start_counting()")
    run_p.add_argument("--time", action="store_true", help="time each expression")
    run_p.add_argument("--mem", action="store_true", help="measure heap cells after each expression")
    run_p.add_argument("--track", action="append", default=[], metavar="NAME",
                       help="record whether NAME changed at each expression (repeatable)")
    run_p.add_argument("--log-dir", default=".", metavar="DIR",
                       help="directory for dumped change logs")
    run_p.add_argument("--report", metavar="FILE", help="write hook rows as CSV")
    run_p.add_argument("--print-env", action="store_true",
                       help="print the final bindings, name-sorted")
    run_p.add_argument("--clock", default="real", metavar="real|fixed[:STEP]",
                       help="clock source; 'fixed' makes all output deterministic")

    test_p = sub.add_parser("test", help="run a test file, or every test_*.ts file in a directory")
    test_p.add_argument("path")
    test_p.add_argument("--passes", action="store_true", help="also show passing assertions")
    return parser


def _make_clock(choice: str):
    if choice == "real":
        return RealClock()
    if choice == "fixed":
        return FixedClock()
    if choice.startswith("fixed:"):
        try:
            return FixedClock(step_seconds=float(choice.split(":", 1)[1]))
        except ValueError:
            pass
    raise SystemExit(EXIT_USAGE)


def _cmd_run(args) -> int:
    try:
        clock = _make_clock(args.clock)
    except SystemExit:
        sys.stderr.write(f"tapscript: error: bad --clock value {args.clock!r}\n")
        return EXIT_USAGE
    os.makedirs(args.log_dir, exist_ok=True)
    ctx = default_context(output=sys.stdout, messages=sys.stderr, clock=clock,
                          log_dir=args.log_dir)
    hooks = []
    if args.count:
        hooks.append(counting_hook(gated=False))
    if args.count_gated:
        hooks.append(counting_hook(gated=True))
    if args.time:
        hooks.append(timing_hook())
    if args.mem:
        hooks.append(memory_hook())
    for name in args.track:
        hooks.append(change_hook(name))
    try:
        result = run_file(args.file, hooks, MaskSet.standard(), ctx)
    except ParseError as err:
        sys.stderr.write(f"tapscript: {err}\n")
        return EXIT_PARSE_ERROR
    except OSError as err:
        sys.stderr.write(f"tapscript: cannot run '{args.file}': {err.strerror}\n")
        return EXIT_RUNTIME_ERROR
    if args.report:
        _write_report(args.report, result)
    if args.print_env:
        _print_env(result)
    if result.error is not None:
        where = result.error.span or result.error.step_span
        sys.stderr.write(
            f"tapscript: error at {where.file}:{where.start_line}: {result.error.message}\n"
        )
        return EXIT_RUNTIME_ERROR
    return EXIT_OK


def _write_report(path: str, result: RunResult) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["hook", "step", "metric", "value"])
        for report in result.reports:
            for step, metric, value in report.rows:
                writer.writerow([report.name, str(step), metric, value])


def _print_env(result: RunResult) -> None:
    for name in sorted(result.runtime.bindings):
        sys.stdout.write(f"${name}\n{format_value(result.runtime.bindings[name])}\n\n")


def _cmd_test(args) -> int:
    if os.path.isdir(args.path):
        files = sorted(glob.glob(os.path.join(args.path, "test_*.ts")))
    elif os.path.exists(args.path):
        files = [args.path]
    else:
        sys.stderr.write(f"tapscript: cannot open '{args.path}'\n")
        return EXIT_RUNTIME_ERROR
    ctx = default_context(output=sys.stdout, messages=sys.stderr)
    all_results = []
    for path in files:
        try:
            all_results.extend(run_test_file(path, ctx))
        except ParseError as err:
            sys.stderr.write(f"tapscript: {err}\n")
            return EXIT_PARSE_ERROR
        except OSError as err:
            sys.stderr.write(f"tapscript: cannot run '{path}': {err.strerror}\n")
            return EXIT_RUNTIME_ERROR
    blocks = format_results(all_results, show_passes=args.passes)
    if blocks:
        sys.stdout.write(blocks)
    if any(not r.passed for r in all_results):
        return EXIT_TEST_FAILURES
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_test(args)


def console_main() -> None:
    raise SystemExit(main())
