"""The file runner and its secondary data flow.

run_file() parses a script and evaluates its top-level expressions one
by one in a fresh runtime environment.  Between the expressions it
interleaves hooks (counting, timing, memory, change tracking) that read
the runtime but keep their own state in capture stores: runner-private
environments that no script lookup can ever reach.  Control functions
such as start_counting(), start_log() and dump_log() are locally masked
in the runtime so the script can steer the secondary flow without any
global side effects.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import EvalError
from .evaluator import (
    BuiltinCall,
    Environment,
    EvalContext,
    call_function,
    eval_expr,
)
from .loggers import TrackedObject, make_dump_log_mask, make_start_log_mask
from .syntax import ExprNode, Program, SourceSpan, parse_program, source_slice
from .values import (
    LOGGERS_ATTR,
    Builtin,
    Value,
    cell_count,
    copy_value,
    deep_equal,
    format_value,
    is_null,
    is_true,
    logical,
)


class CaptureStore:
    """Runner-owned key-value store, invisible to script code.

    It lives outside every environment chain, so nothing a script can
    evaluate (including exists()) will ever see its keys.
    """

    def __init__(self):
        self.data: dict[str, object] = {}

    def get(self, key: str):
        return self.data.get(key)

    def set(self, key: str, value) -> None:
        self.data[key] = value

    def has(self, key: str) -> bool:
        return key in self.data


@dataclass
class HookReport:
    name: str
    rows: list[tuple[int, str, str]]
    message: str | None = None


class Hook:
    """A secondary expression run around each primary expression."""

    name = "hook"
    group: str | None = None  # share the capture store of this mask group

    def before_step(self, step: int, node: ExprNode, text: str, runtime: Environment,
                    store: CaptureStore, clock) -> None:
        pass

    def on_step(self, step: int, node: ExprNode, text: str, runtime: Environment,
                store: CaptureStore, clock) -> None:
        pass

    def on_finish(self, store: CaptureStore, report_sink) -> HookReport:
        return HookReport(self.name, [])


class CountingHook(Hook):
    name = "counting"
    group = "counting"

    def __init__(self, gated: bool = False):
        self.gated = gated
        self.count = 0
        self.rows: list[tuple[int, str, str]] = []
        self._armed = False

    def before_step(self, step, node, text, runtime, store, clock):
        # the gate is read before the expression runs, so the
        # start_counting() line itself is never counted
        self._armed = (not self.gated) or _store_flag(store, "counting")

    def on_step(self, step, node, text, runtime, store, clock):
        if self._armed:
            self.count += 1
        self.rows.append((step, "counted", "TRUE" if self._armed else "FALSE"))

    def on_finish(self, store, report_sink):
        message = f"Counted {self.count} expressions"
        report_sink(self.name, message)
        return HookReport(self.name, self.rows, message)


def _store_flag(store: CaptureStore, key: str) -> bool:
    value = store.get(key)
    return isinstance(value, Value) and is_true(value)


class TimingHook(Hook):
    name = "timing"

    def __init__(self):
        self.durations: list[float] = []
        self.rows: list[tuple[int, str, str]] = []
        self._last: float | None = None

    def before_step(self, step, node, text, runtime, store, clock):
        if self._last is None:  # baseline before the first expression
            self._last = clock.monotonic()

    def on_step(self, step, node, text, runtime, store, clock):
        now = clock.monotonic()
        self.durations.append(now - self._last)
        self.rows.append((step, "duration", f"{now - self._last:.6f}"))
        self._last = now

    def on_finish(self, store, report_sink):
        return HookReport(self.name, self.rows)


class MemoryHook(Hook):
    name = "memory"

    def __init__(self):
        self.totals: list[int] = []
        self.rows: list[tuple[int, str, str]] = []

    def on_step(self, step, node, text, runtime, store, clock):
        total = sum(cell_count(v) for v in runtime.bindings.values())
        self.totals.append(total)
        self.rows.append((step, "cells", str(total)))

    def on_finish(self, store, report_sink):
        return HookReport(self.name, self.rows)


class ChangeHook(Hook):
    def __init__(self, var_name: str):
        self.var_name = var_name
        self.name = f"change({var_name})"
        self.flags: list[tuple[int, bool]] = []
        self.rows: list[tuple[int, str, str]] = []
        self._snapshot: Value | None = None

    def on_step(self, step, node, text, runtime, store, clock):
        current = runtime.lookup(self.var_name)
        if current is None:
            return
        if self._snapshot is None:  # first sighting: snapshot, record nothing
            self._snapshot = copy_value(current)
            return
        changed = not deep_equal(self._snapshot, current)
        self.flags.append((step, changed))
        self.rows.append((step, "changed", "TRUE" if changed else "FALSE"))
        self._snapshot = copy_value(current)

    def on_finish(self, store, report_sink):
        return HookReport(self.name, self.rows)


def counting_hook(gated: bool = False) -> CountingHook:
    return CountingHook(gated)


def timing_hook() -> TimingHook:
    return TimingHook()


def memory_hook() -> MemoryHook:
    return MemoryHook()


def change_hook(var_name: str) -> ChangeHook:
    return ChangeHook(var_name)


class _LogWriterHook(Hook):
    """Feeds tracked objects' loggers one row per expression."""

    name = "log"
    group = "logging"

    def __init__(self):
        self.rows: list[tuple[int, str, str]] = []

    def on_step(self, step, node, text, runtime, store, clock):
        tracked: list[TrackedObject] = store.get("tracked") or []
        if not tracked:
            return
        when = clock.wall()
        for t in tracked:
            current = runtime.lookup(t.name)
            if current is None:
                continue
            changed = not deep_equal(t.snapshot, current)
            t.logger.add(when, text, t.snapshot, current)
            self.rows.append((step, "changed", "TRUE" if changed else "FALSE"))
            t.snapshot = copy_value(current)

    def on_finish(self, store, report_sink):
        return HookReport(self.name, self.rows)


@dataclass(frozen=True)
class MaskSet:
    counting: bool = False
    logging: bool = False
    testing: bool = False

    @staticmethod
    def standard() -> "MaskSet":
        return MaskSet(counting=True, logging=True)


@dataclass
class RunState:
    """What the runner is currently evaluating; masks read this."""

    program: Program | None = None
    step: int = 0
    node: ExprNode | None = None
    text: str = ""


@dataclass
class RunError:
    message: str
    span: SourceSpan | None
    step_span: SourceSpan
    step_text: str


@dataclass
class RunResult:
    runtime: Environment
    reports: list[HookReport]
    test_results: list = field(default_factory=list)
    error: RunError | None = None


def make_capture(inner: Value, store: CaptureStore, key: str) -> Value:
    """Wrap a function: call it, copy the result into the store, return
    the result unchanged.  The store write happens only on success."""

    def impl(call: BuiltinCall) -> Value:
        out = call_function(inner, call.args, call.named, call.ctx, env=call.env)
        store.set(key, out)
        return out

    inner_name = inner.payload.name if isinstance(inner.payload, Builtin) else "function"
    return Value(Builtin(f"capture[{inner_name}->{key}]", impl))


def _true_builtin(name: str) -> Value:
    def impl(call: BuiltinCall) -> Value:
        if call.args or call.named:
            raise EvalError(f"{name}() takes no arguments")
        return logical([True])

    return Value(Builtin(name, impl))


def install_masks(
    mask_env: Environment,
    masks: MaskSet,
    stores: dict[str, CaptureStore],
    state: RunState,
    ctx: EvalContext,
) -> None:
    """Bind the masking versions of the control functions so script
    lookups find them before the fallback builtins."""
    if masks.counting:
        captured = make_capture(_true_builtin("start_counting"), stores["counting"], "counting")

        def start_counting_mask(call: BuiltinCall) -> Value:
            if call.pipe_rhs:
                from .pipe import counting_stage

                if call.args or call.named:
                    raise EvalError("start_counting() takes no arguments")
                return counting_stage()
            return call_function(captured, call.args, call.named, call.ctx, env=call.env)

        mask_env.define("start_counting", Value(Builtin("start_counting", start_counting_mask)))
    if masks.logging:
        stores["logging"].set("tracked", [])
        mask_env.define("start_log", make_start_log_mask(stores["logging"]))
        mask_env.define("dump_log", make_dump_log_mask(stores["logging"]))
    if masks.testing:
        from .testkit import make_assertion_mask

        stores["testing"].set("results", [])
        for name, inner in ctx.assertions.items():
            mask_env.define(name, make_assertion_mask(name, inner, stores["testing"], state))


def run_file(
    path: str,
    hooks: list[Hook],
    masks: MaskSet,
    ctx: EvalContext,
    print_values: bool = True,
) -> RunResult:
    with open(path, "r", encoding="utf-8") as handle:
        source = handle.read()
    program = parse_program(source, path)
    return run_program(program, hooks, masks, ctx, print_values)


def run_program(
    program: Program,
    hooks: list[Hook],
    masks: MaskSet,
    ctx: EvalContext,
    print_values: bool = True,
) -> RunResult:
    mask_env = Environment(ctx.builtin_env)
    runtime = Environment(mask_env)
    state = RunState(program=program)
    stores: dict[str, CaptureStore] = {}
    for group, active in (("counting", masks.counting), ("logging", masks.logging),
                          ("testing", masks.testing)):
        if active:
            stores[group] = CaptureStore()
    install_masks(mask_env, masks, stores, state, ctx)

    all_hooks = list(hooks)
    if masks.logging:
        all_hooks.append(_LogWriterHook())
    hook_stores = {
        id(h): stores.get(h.group) if h.group in stores else CaptureStore()
        for h in all_hooks
    }

    error: RunError | None = None
    for step, node in enumerate(program.exprs, start=1):
        text = source_slice(program, node.span)
        state.step, state.node, state.text = step, node, text
        for h in all_hooks:
            h.before_step(step, node, text, runtime, hook_stores[id(h)], ctx.clock)
        try:
            value = eval_expr(node, runtime, ctx)
        except EvalError as err:
            error = RunError(err.message, err.span, node.span, text)
            break
        if print_values and not is_null(value):
            ctx.output.write(format_value(value) + "\n")
        for h in all_hooks:
            h.on_step(step, node, text, runtime, hook_stores[id(h)], ctx.clock)

    def report_sink(name: str, message: str) -> None:
        ctx.messages.write(f"{name}: {message}\n")

    reports = [h.on_finish(hook_stores[id(h)], report_sink) for h in all_hooks]
    _auto_dump(stores.get("logging"), runtime, ctx)
    test_results = list(stores["testing"].get("results")) if "testing" in stores else []
    return RunResult(runtime, reports, test_results, error)


def _auto_dump(logging_store: CaptureStore | None, runtime: Environment, ctx: EvalContext):
    """Dump every logger the run created but never dumped."""
    seen: set[int] = set()
    if logging_store is not None:
        for t in logging_store.get("tracked") or []:
            if id(t.logger) not in seen:
                seen.add(id(t.logger))
                t.logger.dump(ctx.log_dir, ctx)
    for value in runtime.bindings.values():
        for logger in value.attributes.get(LOGGERS_ATTR) or []:
            if id(logger) not in seen:
                seen.add(id(logger))
                logger.dump(ctx.log_dir, ctx)
