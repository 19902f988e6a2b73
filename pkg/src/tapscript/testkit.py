"""Assertions that return first-class results, and the test-file runner.

Assertions never signal: a failing expectation is an ordinary return
value, a logical scalar carrying a reserved outcome marker.  The
test-file runner masks every registered assertion with a wrapper that
captures the outcome (together with the call's verbatim text and line
span) into a runner-private store; results of all other expressions
are discarded.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

from .errors import EvalError
from .evaluator import BuiltinCall, Environment, EvalContext, call_function, register_builtin
from .flow import CaptureStore, MaskSet, RunState, run_file
from .syntax import source_slice
from .values import (
    ASSERTION_ATTR,
    INFO_ATTR,
    Builtin,
    LogicalVector,
    NumericVector,
    StringVector,
    Table,
    Value,
    deep_equal,
    kind_name,
    logical,
    string,
)

BASE_ASSERTIONS = ("expect_true", "expect_false", "expect_equal")


@dataclass
class TestResult:
    __test__ = False  # not a pytest class, despite the name

    passed: bool
    call_text: str
    file: str
    first_line: int
    last_line: int
    info: str | None = None


def _outcome(passed: bool, info: str | None = None) -> Value:
    attrs = {ASSERTION_ATTR: logical([True])}
    if info is not None:
        attrs[INFO_ATTR] = string([info])
    return Value(LogicalVector([passed]), attrs)


def outcome_fields(v: Value) -> tuple[bool, str | None] | None:
    """Read (passed, info) off an assertion result, or None if the
    value is not one."""
    if ASSERTION_ATTR not in v.attributes:
        return None
    passed = isinstance(v.payload, LogicalVector) and v.payload.items == [True]
    info_attr = v.attributes.get(INFO_ATTR)
    info = info_attr.payload.items[0] if info_attr is not None else None
    return passed, info


def _bi_expect_true(call: BuiltinCall) -> Value:
    if len(call.args) != 1 or call.named:
        raise EvalError("expect_true() expects exactly 1 argument(s)")
    p = call.args[0].payload
    if not (isinstance(p, LogicalVector) and len(p.items) == 1):
        return _outcome(False, "not a length-1 logical")
    return _outcome(True) if p.items[0] else _outcome(False, "not TRUE")


def _bi_expect_false(call: BuiltinCall) -> Value:
    if len(call.args) != 1 or call.named:
        raise EvalError("expect_false() expects exactly 1 argument(s)")
    p = call.args[0].payload
    if not (isinstance(p, LogicalVector) and len(p.items) == 1):
        return _outcome(False, "not a length-1 logical")
    return _outcome(True) if not p.items[0] else _outcome(False, "not FALSE")


def _bi_expect_equal(call: BuiltinCall) -> Value:
    if len(call.args) != 2 or call.named:
        raise EvalError("expect_equal() expects exactly 2 argument(s)")
    current, target = call.args
    if deep_equal(current, target):
        return _outcome(True)
    return _outcome(False, first_difference(current, target))


def first_difference(current: Value, target: Value) -> str:
    a, b = current.payload, target.payload
    if type(a) is not type(b):
        return f"payload kinds differ: {kind_name(a)} vs {kind_name(b)}"
    if isinstance(a, (NumericVector, LogicalVector, StringVector)):
        if len(a.items) != len(b.items):
            return f"lengths differ: {len(a.items)} vs {len(b.items)}"
        for i, (x, y) in enumerate(zip(a.items, b.items)):
            if _scalar_differs(x, y):
                return f"first difference at element {i + 1}"
    if isinstance(a, Table):
        if list(a.columns) != list(b.columns):
            return "column names differ"
        for name in a.columns:
            ca, cb = a.columns[name], b.columns[name]
            if len(ca.items) != len(cb.items):
                return f"column '{name}' lengths differ: {len(ca.items)} vs {len(cb.items)}"
            for i in range(len(ca.items)):
                if _scalar_differs(ca.items[i], cb.items[i]):
                    return f"first difference in column '{name}', row {i + 1}"
    return "attributes differ"


def _scalar_differs(x, y) -> bool:
    if isinstance(x, float) and isinstance(y, float):
        if math.isnan(x) and math.isnan(y):
            return False
    return x != y


def register_builtins(env: Environment) -> None:
    register_builtin(env, "expect_true", _bi_expect_true)
    register_builtin(env, "expect_false", _bi_expect_false)
    register_builtin(env, "expect_equal", _bi_expect_equal)


def register_assertion(ctx: EvalContext, name: str, fn) -> None:
    """Add an assertion to the registry; test-file runs will mask it
    just like the built-in ones.  Outside a test run it behaves as an
    ordinary function."""
    if name in ctx.assertions:
        raise EvalError(f"assertion '{name}' is already registered")
    if ctx.builtin_env.lookup(name) is not None:
        raise EvalError(f"name '{name}' is already bound")
    value = fn if isinstance(fn, Value) else Value(Builtin(name, fn))
    ctx.builtin_env.define(name, value)
    ctx.assertions[name] = value


def unregister_assertion(ctx: EvalContext, name: str) -> None:
    if name in BASE_ASSERTIONS:
        raise EvalError(f"cannot unregister the built-in assertion '{name}'")
    ctx.assertions.pop(name, None)
    ctx.builtin_env.bindings.pop(name, None)


def make_assertion_mask(name: str, inner: Value, store: CaptureStore, state: RunState) -> Value:
    def impl(call: BuiltinCall) -> Value:
        result = call_function(inner, call.args, call.named, call.ctx, env=call.env)
        span = call.call_node.span if call.call_node is not None else (
            state.node.span if state.node is not None else None
        )
        if span is not None and state.program is not None:
            call_text = source_slice(state.program, span)
            file = os.path.basename(span.file)
            first, last = span.start_line, span.end_line
        else:
            call_text, file, first, last = f"{name}(...)", "", 0, 0
        fields = outcome_fields(result)
        if fields is None:
            passed, info = False, "assertion did not return a test outcome"
        else:
            passed, info = fields
        store.get("results").append(TestResult(passed, call_text, file, first, last, info))
        return result

    return Value(Builtin(name, impl))


def run_test_file(path: str, ctx: EvalContext) -> list[TestResult]:
    """Run one test file, print its summary line, return its results in
    execution order.  A script error becomes a synthetic failed result;
    results gathered before the error are kept."""
    result = run_file(path, [], MaskSet(testing=True), ctx, print_values=False)
    results = list(result.test_results)
    if result.error is not None:
        span = result.error.step_span
        results.append(
            TestResult(
                False,
                result.error.step_text,
                os.path.basename(path),
                span.start_line,
                span.end_line,
                result.error.message,
            )
        )
    ctx.output.write(summary_line(os.path.basename(path), results) + "\n")
    return results


def summary_line(name: str, results: list[TestResult]) -> str:
    fails = sum(1 for r in results if not r.passed)
    padded = name if len(name) >= 38 else name + "." * (38 - len(name))
    if fails:
        return f"Running {padded} {fails} fails / {len(results)} tests"
    return f"Running {padded} {len(results)} tests OK"


def format_results(results: list[TestResult], show_passes: bool = False) -> str:
    """Failures always; passes only when asked.  Block format:

    ----- PASSED      : file<first--last>
     call| <verbatim assertion call>
    and, for failures, an extra " info| ..." line.
    """
    lines: list[str] = []
    for r in results:
        if r.passed and not show_passes:
            continue
        status = "PASSED" if r.passed else "FAILED"
        lines.append(f"----- {status}      : {r.file}<{r.first_line}--{r.last_line}>")
        lines.append(f" call| {r.call_text}")
        if not r.passed and r.info:
            lines.append(f" info| {r.info}")
    if not lines:
        return ""
    return "\n".join(lines) + "\n"
