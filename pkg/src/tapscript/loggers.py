"""Change loggers: audit objects with an add/dump protocol.

A logger is a reference object.  In runner mode it is attached to a
named object through the masked start_log() and fed one row per
top-level expression; in pipe mode it rides along on the value's
".loggers" attribute and is fed one row per pipe stage.  dump() writes
the accumulated rows as a CSV file and announces the path.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from datetime import datetime

from .errors import EvalError
from .evaluator import BuiltinCall, Environment, EvalContext, eval_expr, register_builtin
from .syntax import Ident
from .values import (
    LOGGERS_ATTR,
    Builtin,
    LoggerRef,
    Record,
    Table,
    Value,
    VectorPayload,
    copy_value,
    deep_equal,
    format_cell,
    format_value,
    kind_name,
    null_value,
    without_attr,
)

TIME_FORMAT = "%Y-%m-%d %H:%M:%S"


class Logger:
    """Accumulates change records; reference semantics, dump-once."""

    kind = "logger"

    def __init__(self):
        self.rows: list[list[str]] = []
        self.step_counter = 0
        self.dumped = False
        self.target_name: str | None = None

    def add(self, when: datetime, expr_text: str, old: Value, new: Value) -> None:
        if self.dumped:
            raise EvalError("cannot add to a log that was already dumped")
        self.step_counter += 1
        self._record(self.step_counter, when.strftime(TIME_FORMAT), expr_text, old, new)

    def _record(self, step: int, time_str: str, expr_text: str, old: Value, new: Value):
        raise NotImplementedError

    def header(self) -> list[str]:
        raise NotImplementedError

    def dump(self, directory: str, ctx: EvalContext) -> str | None:
        """Write the CSV and mark the logger dumped.  A second call is a
        no-op.  Paths already written in this context get a numeric
        suffix instead of being overwritten."""
        if self.dumped:
            return None
        stem = f"{self.target_name}_{self.kind}" if self.target_name else self.kind
        path = os.path.join(directory, f"{stem}.csv")
        suffix = 2
        while os.path.abspath(path) in ctx.claimed_log_paths:
            path = os.path.join(directory, f"{stem}_{suffix}.csv")
            suffix += 1
        ctx.claimed_log_paths.add(os.path.abspath(path))
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(self.header())
            writer.writerows(self.rows)
        ctx.messages.write(f"Dumped a log at {path}\n")
        self.dumped = True
        return path


class SimpleLogger(Logger):
    """One row per step: did the object change at all?"""

    kind = "simple"

    def header(self) -> list[str]:
        return ["step", "time", "expression", "changed"]

    def _record(self, step, time_str, expr_text, old, new):
        changed = not deep_equal(old, new)
        self.rows.append([str(step), time_str, expr_text, "TRUE" if changed else "FALSE"])


class CellwiseLogger(Logger):
    """One row per changed table cell, with old and new contents."""

    kind = "cellwise"

    def header(self) -> list[str]:
        return ["step", "time", "expression", "variable", "row", "col", "old", "new"]

    def _record(self, step, time_str, expr_text, old, new):
        var = self.target_name or ""
        head = [str(step), time_str, expr_text, var]
        op, np = old.payload, new.payload
        if isinstance(op, Table) and isinstance(np, Table) and op.n_rows() == np.n_rows():
            n = op.n_rows()
            for name, col in np.columns.items():
                old_col = op.columns.get(name)
                for i in range(n):
                    if old_col is None:
                        self.rows.append(head + [str(i + 1), name, "", format_cell(col, i)])
                    elif not _cells_equal(old_col, col, i):
                        self.rows.append(
                            head
                            + [str(i + 1), name, format_cell(old_col, i), format_cell(col, i)]
                        )
            for name, col in op.columns.items():
                if name not in np.columns:
                    for i in range(n):
                        self.rows.append(head + [str(i + 1), name, format_cell(col, i), ""])
        elif not deep_equal(old, new):
            # shape changed or not a table: fall back to one whole-object row
            self.rows.append(head + ["", "", _object_text(old), _object_text(new)])


def _cells_equal(a: VectorPayload, b: VectorPayload, i: int) -> bool:
    x, y = a.items[i], b.items[i]
    if isinstance(x, float) and isinstance(y, float) and math.isnan(x) and math.isnan(y):
        return True
    return type(x) is type(y) and x == y


def _object_text(v: Value) -> str:
    return format_value(v)


def logger_add(logger: Logger, when: datetime, expr_text: str, old: Value, new: Value) -> None:
    logger.add(when, expr_text, old, new)


def logger_dump(logger: Logger, directory: str, ctx: EvalContext) -> str | None:
    return logger.dump(directory, ctx)


# language surface -------------------------------------------------------


def require_logger(v: Value) -> Logger:
    if not isinstance(v.payload, LoggerRef):
        raise EvalError(f"expected a logger, not {kind_name(v.payload)}")
    return v.payload.logger


def attach_logger(data: Value, logger: Logger) -> Value:
    existing = data.attributes.get(LOGGERS_ATTR) or []
    out = Value(data.payload, dict(data.attributes))
    out.attributes[LOGGERS_ATTR] = list(existing) + [logger]
    return out


def start_log_stage(logger: Logger) -> Value:
    def impl(call: BuiltinCall) -> Value:
        if len(call.args) != 1 or call.named:
            raise EvalError("start_log stage expects exactly one argument")
        return attach_logger(call.args[0], logger)

    return Value(Builtin("start_log", impl, flow_control=True))


def dump_log_stage() -> Value:
    def impl(call: BuiltinCall) -> Value:
        if len(call.args) != 1 or call.named:
            raise EvalError("dump_log stage expects exactly one argument")
        data = call.args[0]
        for logger in data.attributes.get(LOGGERS_ATTR) or []:
            logger.dump(call.ctx.log_dir, call.ctx)
        return without_attr(data, LOGGERS_ATTR)

    return Value(Builtin("dump_log", impl, flow_control=True))


def _bi_start_log(call: BuiltinCall) -> Value:
    if len(call.args) != 1 or call.named:
        raise EvalError("start_log() expects a logger")
    return start_log_stage(require_logger(call.args[0]))


def _bi_dump_log(call: BuiltinCall) -> Value:
    if call.args or call.named:
        raise EvalError("dump_log() takes no arguments")
    return dump_log_stage()


@dataclass
class TrackedObject:
    name: str
    logger: Logger
    snapshot: Value


def make_start_log_mask(store) -> Value:
    """Runner mask: start_log(obj, logger) starts tracking the named
    object; the one-argument form keeps the pipe behavior."""

    def impl(call: BuiltinCall) -> Value:
        nodes = call.arg_nodes
        if call.named_nodes:
            raise EvalError("start_log() takes positional arguments only")
        values = [eval_expr(n, call.env, call.ctx) for n in nodes]
        if len(nodes) == 1:
            return start_log_stage(require_logger(values[0]))
        if len(nodes) != 2:
            raise EvalError("start_log() expects an object and a logger")
        obj_node = nodes[0]
        if not isinstance(obj_node, Ident):
            raise EvalError("start_log() needs a named object to track", obj_node.span)
        obj, logger_value = values
        logger = require_logger(logger_value)
        logger.target_name = obj_node.name
        store.get("tracked").append(TrackedObject(obj_node.name, logger, copy_value(obj)))
        return obj

    return Value(Builtin("start_log", impl, lazy_args=True))


def make_dump_log_mask(store) -> Value:
    """Runner mask: dump_log() dumps every tracked log now, dump_log(x)
    just the logs tracking x; in pipe position it keeps pipe behavior."""

    def impl(call: BuiltinCall) -> Value:
        nodes = call.arg_nodes
        if call.named_nodes:
            raise EvalError("dump_log() takes positional arguments only")
        if call.pipe_rhs and not nodes:
            return dump_log_stage()
        tracked: list[TrackedObject] = store.get("tracked")
        if not nodes:
            for t in tracked:
                t.logger.dump(call.ctx.log_dir, call.ctx)
            tracked.clear()
            return null_value()
        if len(nodes) == 1 and isinstance(nodes[0], Ident):
            name = nodes[0].name
            remaining = []
            for t in tracked:
                if t.name == name:
                    t.logger.dump(call.ctx.log_dir, call.ctx)
                else:
                    remaining.append(t)
            store.set("tracked", remaining)
            return eval_expr(nodes[0], call.env, call.ctx)
        raise EvalError("dump_log() expects no arguments or one object name")

    return Value(Builtin("dump_log", impl, lazy_args=True))


def _logger_ctor(cls) -> Value:
    def impl(call: BuiltinCall) -> Value:
        if call.args or call.named:
            raise EvalError("new() takes no arguments")
        return Value(LoggerRef(cls()))

    return Value(Builtin(f"{cls.kind}$new", impl))


def register_builtins(env: Environment) -> None:
    env.define("simple", Value(Record({"new": _logger_ctor(SimpleLogger)})))
    env.define("cellwise", Value(Record({"new": _logger_ctor(CellwiseLogger)})))
    register_builtin(env, "start_log", _bi_start_log)
    register_builtin(env, "dump_log", _bi_dump_log)
