"""Expression evaluation: environments, contexts, and the core builtins.

Scoping is lexical.  Lookup walks the parent chain; assignment always
writes to the local bindings of the environment it is given, so a
script can shadow anything from an enclosing environment but can never
modify it.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import Any, Callable, TextIO

from .datasets import load_dataset, make_women
from .errors import EvalError, ParseError
from .syntax import (
    Assign,
    Binary,
    Block,
    BoolLit,
    Call,
    ExprNode,
    Field,
    FieldAssign,
    FnDef,
    Ident,
    If,
    Index,
    IndexAssign,
    NullLit,
    NumberLit,
    Pipe,
    StringLit,
    Unary,
    VectorCtor,
    parse_program,
)
from .values import (
    Builtin,
    Closure,
    LogicalVector,
    NumericVector,
    Record,
    StringVector,
    Table,
    Value,
    VectorPayload,
    copy_payload,
    copy_value,
    format_num,
    format_value,
    is_null,
    kind_name,
    logical,
    null_value,
    numeric,
    string,
)


class Environment:
    """A name-to-value mapping with an optional parent, reference semantics."""

    __slots__ = ("bindings", "parent")

    def __init__(self, parent: "Environment | None" = None):
        self.bindings: dict[str, Value] = {}
        self.parent = parent

    def lookup(self, name: str) -> Value | None:
        env: Environment | None = self
        while env is not None:
            if name in env.bindings:
                return env.bindings[name]
            env = env.parent
        return None

    def has(self, name: str) -> bool:
        return self.lookup(name) is not None

    def define(self, name: str, value: Value) -> None:
        self.bindings[name] = value


def new_environment(parent: Environment | None = None) -> Environment:
    return Environment(parent)


class RealClock:
    def wall(self) -> datetime:
        return datetime.now()

    def monotonic(self) -> float:
        return time.monotonic()


class FixedClock:
    """Deterministic clock: every reading advances it by a fixed step."""

    def __init__(self, start: datetime | None = None, step_seconds: float = 0.0):
        self.current = start if start is not None else datetime(2019, 8, 9, 11, 29, 6)
        self.step = step_seconds
        self._origin = self.current

    def wall(self) -> datetime:
        now = self.current
        self.current = self.current + timedelta(seconds=self.step)
        return now

    def monotonic(self) -> float:
        now = self.current
        self.current = self.current + timedelta(seconds=self.step)
        return (now - self._origin).total_seconds()


@dataclass
class EvalContext:
    clock: Any
    output: TextIO
    messages: TextIO
    builtin_env: Environment
    log_dir: str = "."
    assertions: dict[str, Value] = field(default_factory=dict)
    claimed_log_paths: set[str] = field(default_factory=set)


@dataclass
class BuiltinCall:
    """Everything a builtin may want to see about its call site."""

    args: list[Value]
    named: dict[str, Value]
    ctx: EvalContext
    env: Environment
    call_node: Call | None = None
    arg_nodes: tuple | list = ()
    named_nodes: tuple | list = ()
    pipe_rhs: bool = False


def register_builtin(env: Environment, name: str, behavior: Callable, *, lazy_args: bool = False) -> None:
    if name in env.bindings:
        raise EvalError(f"builtin '{name}' is already registered")
    env.define(name, Value(Builtin(name, behavior, lazy_args=lazy_args)))


# evaluation -----------------------------------------------------------


def eval_expr(node: ExprNode, env: Environment, ctx: EvalContext) -> Value:
    match node:
        case NumberLit(value=v):
            return numeric([v])
        case StringLit(value=s):
            return string([s])
        case BoolLit(value=b):
            return logical([b])
        case NullLit():
            return null_value()
        case Ident(name=name):
            found = env.lookup(name)
            if found is None:
                raise EvalError(f"object '{name}' not found", node.span)
            return found
        case Assign(name=name, value=value_node):
            env.define(name, copy_value(eval_expr(value_node, env, ctx)))
            return null_value()
        case IndexAssign():
            return _eval_index_assign(node, env, ctx)
        case FieldAssign():
            return _eval_field_assign(node, env, ctx)
        case Binary():
            left = eval_expr(node.left, env, ctx)
            right = eval_expr(node.right, env, ctx)
            return _binary_op(node.op, left, right, node.span)
        case Unary():
            operand = eval_expr(node.operand, env, ctx)
            return _unary_op(node.op, operand, node.span)
        case Index():
            obj = eval_expr(node.obj, env, ctx)
            idx = eval_expr(node.index, env, ctx)
            return _index_get(obj, idx, node.span)
        case Field():
            obj = eval_expr(node.obj, env, ctx)
            return _field_get(obj, node.field_name, node.span)
        case VectorCtor():
            items = [eval_expr(a, env, ctx) for a in node.args]
            return _concat(items, node.span)
        case Call():
            return _eval_call(node, env, ctx, pipe_rhs=False)
        case Block(exprs=exprs):
            result = null_value()
            for child in exprs:
                result = eval_expr(child, env, ctx)
            return result
        case If():
            if _condition(eval_expr(node.cond, env, ctx), node.cond.span):
                return eval_expr(node.then, env, ctx)
            if node.orelse is not None:
                return eval_expr(node.orelse, env, ctx)
            return null_value()
        case FnDef(params=params, body=body):
            return Value(Closure(params, body, env))
        case Pipe():
            from . import pipe as pipe_mod

            lhs = eval_expr(node.left, env, ctx)
            if isinstance(node.right, Call):
                rhs_fn = _eval_call(node.right, env, ctx, pipe_rhs=True)
            else:
                rhs_fn = eval_expr(node.right, env, ctx)
            try:
                return pipe_mod.pipe_apply(lhs, rhs_fn, node.right_text, ctx)
            except EvalError as err:
                if err.span is None:
                    err.span = node.span
                raise
    raise EvalError(f"cannot evaluate node {type(node).__name__}", getattr(node, "span", None))


def _eval_call(node: Call, env: Environment, ctx: EvalContext, *, pipe_rhs: bool) -> Value:
    if isinstance(node.callee, Ident) and node.callee.name == "with":
        return _eval_with(node, env, ctx)
    callee = eval_expr(node.callee, env, ctx)
    payload = callee.payload
    try:
        if isinstance(payload, Builtin) and payload.lazy_args:
            call = BuiltinCall(
                [], {}, ctx, env, node, tuple(node.args), tuple(node.named), pipe_rhs
            )
            return payload.fn(call)
        positional = [eval_expr(a, env, ctx) for a in node.args]
        named: dict[str, Value] = {}
        for name, arg_node in node.named:
            if name in named:
                raise EvalError(f"duplicate named argument '{name}'", arg_node.span)
            named[name] = eval_expr(arg_node, env, ctx)
        return call_function(
            callee, positional, named, ctx,
            env=env, call_node=node, arg_nodes=tuple(node.args), pipe_rhs=pipe_rhs,
        )
    except EvalError as err:
        if err.span is None:
            err.span = node.span
        raise


def call_function(
    fn: Value,
    positional: list[Value],
    named: dict[str, Value],
    ctx: EvalContext,
    *,
    env: Environment | None = None,
    call_node: Call | None = None,
    arg_nodes: tuple | list = (),
    pipe_rhs: bool = False,
) -> Value:
    payload = fn.payload
    if isinstance(payload, Closure):
        bound: dict[str, Value] = {}
        if len(positional) > len(payload.params):
            raise EvalError(
                f"too many arguments: expected {len(payload.params)}, got {len(positional)}"
            )
        for param, value in zip(payload.params, positional):
            bound[param] = value
        for name, value in named.items():
            if name not in payload.params:
                raise EvalError(f"unknown named parameter '{name}'")
            if name in bound:
                raise EvalError(f"parameter '{name}' bound twice")
            bound[name] = value
        for param in payload.params:
            if param not in bound:
                raise EvalError(f"argument '{param}' is missing")
        local = Environment(payload.env)
        for param, value in bound.items():
            local.define(param, copy_value(value))
        return eval_expr(payload.body, local, ctx)
    if isinstance(payload, Builtin):
        call = BuiltinCall(
            positional, named, ctx, env if env is not None else ctx.builtin_env,
            call_node, tuple(arg_nodes), (), pipe_rhs,
        )
        return payload.fn(call)
    raise EvalError(f"attempt to call a non-function ({kind_name(payload)})")


def _eval_with(node: Call, env: Environment, ctx: EvalContext) -> Value:
    if len(node.args) != 2 or node.named:
        raise EvalError("with() expects a table and one expression", node.span)
    table_value = eval_expr(node.args[0], env, ctx)
    if not isinstance(table_value.payload, Table):
        raise EvalError("with() expects a table as its first argument", node.args[0].span)
    local = Environment(env)
    for name, col in table_value.payload.columns.items():
        local.define(name, Value(copy_payload(col)))
    return eval_expr(node.args[1], local, ctx)


def _eval_index_assign(node: IndexAssign, env: Environment, ctx: EvalContext) -> Value:
    current = env.lookup(node.name)
    if current is None:
        raise EvalError(f"object '{node.name}' not found", node.span)
    idx = eval_expr(node.index, env, ctx)
    value = eval_expr(node.value, env, ctx)
    env.define(node.name, _index_assign(current, idx, value, node.span))
    return null_value()


def _eval_field_assign(node: FieldAssign, env: Environment, ctx: EvalContext) -> Value:
    current = env.lookup(node.name)
    if current is None:
        raise EvalError(f"object '{node.name}' not found", node.span)
    if not isinstance(current.payload, Table):
        raise EvalError(f"'{node.name}' is not a table", node.span)
    value = eval_expr(node.value, env, ctx)
    column = value.payload
    if not isinstance(column, (NumericVector, LogicalVector, StringVector)):
        raise EvalError(f"a table column must be a vector, not {kind_name(column)}", node.span)
    table = current.payload
    n_rows = table.n_rows()
    items = list(column.items)
    if table.columns and len(items) == 1 and n_rows != 1:
        items = items * n_rows
    elif table.columns and len(items) != n_rows:
        raise EvalError(
            f"replacement has {len(items)} rows, table has {n_rows}", node.span
        )
    columns = {k: copy_payload(v) for k, v in table.columns.items()}
    columns[node.field_name] = type(column)(items)
    env.define(node.name, Value(Table(columns), {
        k: v for k, v in current.attributes.items()
    }))
    return null_value()


# operators ------------------------------------------------------------


def _numeric_items(v: Value, span, what: str = "operand") -> list[float]:
    p = v.payload
    if isinstance(p, NumericVector):
        return p.items
    if isinstance(p, LogicalVector):
        return [1.0 if x else 0.0 for x in p.items]
    raise EvalError(f"{what} must be numeric, not {kind_name(p)}", span)


def _broadcast(a: list, b: list, span) -> list[tuple]:
    if len(a) == len(b):
        return list(zip(a, b))
    if len(a) == 1:
        return [(a[0], y) for y in b]
    if len(b) == 1:
        return [(x, b[0]) for x in a]
    raise EvalError(f"length mismatch: {len(a)} vs {len(b)}", span)


def _safe_div(x: float, y: float) -> float:
    if y == 0.0:
        if x == 0.0:
            return math.nan
        return math.inf if x > 0 else -math.inf
    return x / y


def _safe_pow(x: float, y: float) -> float:
    try:
        out = x ** y
    except (OverflowError, ZeroDivisionError):
        return math.inf
    if isinstance(out, complex):
        return math.nan
    return out


_ARITH = {
    "+": lambda x, y: x + y,
    "-": lambda x, y: x - y,
    "*": lambda x, y: x * y,
    "/": _safe_div,
    "^": _safe_pow,
}

_COMPARE = {
    "<": lambda x, y: x < y,
    ">": lambda x, y: x > y,
    "<=": lambda x, y: x <= y,
    ">=": lambda x, y: x >= y,
    "==": lambda x, y: x == y,
    "!=": lambda x, y: x != y,
}


def _binary_op(op: str, left: Value, right: Value, span) -> Value:
    if op in _ARITH:
        fn = _ARITH[op]
        pairs = _broadcast(
            _numeric_items(left, span), _numeric_items(right, span), span
        )
        return numeric([fn(x, y) for x, y in pairs])
    if op in _COMPARE:
        fn = _COMPARE[op]
        if isinstance(left.payload, StringVector) or isinstance(right.payload, StringVector):
            if not (
                isinstance(left.payload, StringVector)
                and isinstance(right.payload, StringVector)
            ):
                raise EvalError("cannot compare string with non-string", span)
            pairs = _broadcast(left.payload.items, right.payload.items, span)
        else:
            pairs = _broadcast(
                _numeric_items(left, span), _numeric_items(right, span), span
            )
        return logical([fn(x, y) for x, y in pairs])
    if op in ("&", "|"):
        for side in (left, right):
            if not isinstance(side.payload, LogicalVector):
                raise EvalError(
                    f"'{op}' needs logical operands, not {kind_name(side.payload)}", span
                )
        pairs = _broadcast(left.payload.items, right.payload.items, span)
        if op == "&":
            return logical([x and y for x, y in pairs])
        return logical([x or y for x, y in pairs])
    raise EvalError(f"unknown operator '{op}'", span)


def _unary_op(op: str, operand: Value, span) -> Value:
    if op == "-":
        return numeric([-x for x in _numeric_items(operand, span)])
    if op == "!":
        if not isinstance(operand.payload, LogicalVector):
            raise EvalError(
                f"'!' needs a logical operand, not {kind_name(operand.payload)}", span
            )
        return logical([not x for x in operand.payload.items])
    raise EvalError(f"unknown unary operator '{op}'", span)


def _positions(idx: Value, n: int, span) -> list[int]:
    """Resolve an index vector to 0-based positions."""
    p = idx.payload
    if isinstance(p, LogicalVector):
        if len(p.items) != n:
            raise EvalError(
                f"logical index of length {len(p.items)} on a vector of length {n}", span
            )
        return [i for i, keep in enumerate(p.items) if keep]
    if isinstance(p, NumericVector):
        out = []
        for x in p.items:
            if x != int(x):
                raise EvalError(f"index {format_num(x)} is not an integer", span)
            i = int(x)
            if not 1 <= i <= n:
                raise EvalError(f"index {i} out of bounds (length {n})", span)
            out.append(i - 1)
        return out
    raise EvalError(f"index must be numeric or logical, not {kind_name(p)}", span)


def _index_get(obj: Value, idx: Value, span) -> Value:
    p = obj.payload
    if not isinstance(p, (NumericVector, LogicalVector, StringVector)):
        raise EvalError(f"cannot index a {kind_name(p)}", span)
    picked = [p.items[i] for i in _positions(idx, len(p.items), span)]
    return Value(type(p)(picked))


def _index_assign(current: Value, idx: Value, replacement: Value, span) -> Value:
    p = current.payload
    if not isinstance(p, (NumericVector, LogicalVector, StringVector)):
        raise EvalError(f"cannot index a {kind_name(p)}", span)
    positions = _positions(idx, len(p.items), span)
    rp = replacement.payload
    items: list = list(p.items)
    kind = type(p)
    if isinstance(p, LogicalVector) and isinstance(rp, NumericVector):
        items = [1.0 if x else 0.0 for x in items]
        kind = NumericVector
        new_items = rp.items
    elif isinstance(p, NumericVector) and isinstance(rp, LogicalVector):
        new_items = [1.0 if x else 0.0 for x in rp.items]
    elif type(rp) is type(p):
        new_items = rp.items
    else:
        raise EvalError(
            f"cannot assign {kind_name(rp)} values into a {kind_name(p)} vector", span
        )
    if len(new_items) == 1:
        new_items = new_items * len(positions)
    if len(new_items) != len(positions):
        raise EvalError(
            f"{len(positions)} positions but {len(new_items)} replacement values", span
        )
    for pos, value in zip(positions, new_items):
        items[pos] = value
    return Value(kind(items), dict(current.attributes))


def _field_get(obj: Value, name: str, span) -> Value:
    p = obj.payload
    if isinstance(p, Table):
        if name not in p.columns:
            raise EvalError(f"no column '{name}' in table", span)
        return Value(copy_payload(p.columns[name]))
    if isinstance(p, Record):
        if name not in p.fields:
            raise EvalError(f"no field '{name}'", span)
        return p.fields[name]
    raise EvalError(f"cannot select a field from a {kind_name(p)}", span)


def _condition(v: Value, span) -> bool:
    p = v.payload
    if isinstance(p, LogicalVector) and len(p.items) == 1:
        return p.items[0]
    if isinstance(p, NumericVector) and len(p.items) == 1:
        return p.items[0] != 0.0
    raise EvalError("condition must be a length-1 logical", span)


def _concat(items: list[Value], span) -> Value:
    has_string = has_numeric = has_logical = False
    collected: list[tuple[str, list]] = []
    for v in items:
        p = v.payload
        if is_null(v):
            continue
        if isinstance(p, StringVector):
            has_string = True
        elif isinstance(p, NumericVector):
            has_numeric = True
        elif isinstance(p, LogicalVector):
            has_logical = True
        else:
            raise EvalError(f"cannot concatenate a {kind_name(p)}", span)
        collected.append((kind_name(p), p.items))
    if has_string:
        out: list = []
        for kind, xs in collected:
            if kind == "numeric":
                out.extend(format_num(x) for x in xs)
            elif kind == "logical":
                out.extend("TRUE" if x else "FALSE" for x in xs)
            else:
                out.extend(xs)
        return string(out)
    if has_numeric:
        out = []
        for kind, xs in collected:
            if kind == "logical":
                out.extend(1.0 if x else 0.0 for x in xs)
            else:
                out.extend(xs)
        return numeric(out)
    if has_logical:
        out = []
        for _, xs in collected:
            out.extend(xs)
        return logical(out)
    return null_value()


# core builtins --------------------------------------------------------


def _need_args(call: BuiltinCall, n: int, name: str):
    if len(call.args) != n or call.named:
        raise EvalError(f"{name}() expects exactly {n} argument(s)")


def _bi_c(call: BuiltinCall) -> Value:
    if call.named:
        raise EvalError("c() takes positional arguments only")
    return _concat(call.args, None)


def _bi_length(call: BuiltinCall) -> Value:
    _need_args(call, 1, "length")
    p = call.args[0].payload
    if isinstance(p, (NumericVector, LogicalVector, StringVector)):
        return numeric([len(p.items)])
    if isinstance(p, Table):
        return numeric([len(p.columns)])
    if is_null(call.args[0]):
        return numeric([0])
    return numeric([1])


def _gather_numeric(call: BuiltinCall, name: str) -> list[float]:
    if not call.args or call.named:
        raise EvalError(f"{name}() expects at least one argument")
    items: list[float] = []
    for v in call.args:
        items.extend(_numeric_items(v, None, f"{name}() argument"))
    return items


def _bi_sum(call: BuiltinCall) -> Value:
    items: list[float] = []
    for v in call.args:
        if not is_null(v):
            items.extend(_numeric_items(v, None, "sum() argument"))
    return numeric([math.fsum(items)])


def _bi_mean(call: BuiltinCall) -> Value:
    _need_args(call, 1, "mean")
    items = _numeric_items(call.args[0], None, "mean() argument")
    if not items:
        return numeric([math.nan])
    return numeric([math.fsum(items) / len(items)])


def _bi_median(call: BuiltinCall) -> Value:
    _need_args(call, 1, "median")
    items = sorted(_numeric_items(call.args[0], None, "median() argument"))
    if not items:
        raise EvalError("median() of an empty vector")
    mid = len(items) // 2
    if len(items) % 2 == 1:
        return numeric([items[mid]])
    return numeric([(items[mid - 1] + items[mid]) / 2.0])


def _bi_min(call: BuiltinCall) -> Value:
    return numeric([min(_gather_numeric(call, "min"))])


def _bi_max(call: BuiltinCall) -> Value:
    return numeric([max(_gather_numeric(call, "max"))])


def _unary_math(name: str, fn: Callable[[float], float]) -> Callable:
    def impl(call: BuiltinCall) -> Value:
        _need_args(call, 1, name)
        v = call.args[0]
        items = _numeric_items(v, None, f"{name}() argument")
        # unary math keeps the input's attributes on the output
        return Value(NumericVector([fn(x) for x in items]), dict(v.attributes))

    return impl


def _safe_sqrt(x: float) -> float:
    return math.nan if x < 0 else math.sqrt(x)


def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _logical_args(call: BuiltinCall, name: str) -> list[bool]:
    items: list[bool] = []
    for v in call.args:
        if is_null(v):
            continue
        if not isinstance(v.payload, LogicalVector):
            raise EvalError(f"{name}() expects logical arguments, not {kind_name(v.payload)}")
        items.extend(v.payload.items)
    if call.named:
        raise EvalError(f"{name}() takes positional arguments only")
    return items


def _bi_all(call: BuiltinCall) -> Value:
    return logical([all(_logical_args(call, "all"))])


def _bi_any(call: BuiltinCall) -> Value:
    return logical([any(_logical_args(call, "any"))])


def _bi_identity(call: BuiltinCall) -> Value:
    _need_args(call, 1, "identity")
    return call.args[0]


def _bi_exists(call: BuiltinCall) -> Value:
    _need_args(call, 1, "exists")
    p = call.args[0].payload
    if not (isinstance(p, StringVector) and len(p.items) == 1):
        raise EvalError("exists() expects a single name as a string")
    return logical([call.env.has(p.items[0])])


def _bi_print(call: BuiltinCall) -> Value:
    _need_args(call, 1, "print")
    call.ctx.output.write(format_value(call.args[0]) + "\n")
    return call.args[0]


def _bi_paste0(call: BuiltinCall) -> Value:
    if call.named:
        raise EvalError("paste0() takes positional arguments only")
    parts: list[list[str]] = []
    for v in call.args:
        p = v.payload
        if is_null(v):
            continue
        if isinstance(p, NumericVector):
            parts.append([format_num(x) for x in p.items])
        elif isinstance(p, LogicalVector):
            parts.append(["TRUE" if x else "FALSE" for x in p.items])
        elif isinstance(p, StringVector):
            parts.append(list(p.items))
        else:
            raise EvalError(f"paste0() cannot handle a {kind_name(p)}")
    if not parts:
        return string([])
    width = max(len(p) for p in parts)
    for p in parts:
        if len(p) not in (1, width):
            raise EvalError(f"length mismatch: {len(p)} vs {width}")
    out = []
    for i in range(width):
        out.append("".join(p[0] if len(p) == 1 else p[i] for p in parts))
    return string(out)


def _bi_table(call: BuiltinCall) -> Value:
    if call.args:
        raise EvalError("table() takes named vector arguments only")
    columns: dict[str, VectorPayload] = {}
    length: int | None = None
    for name, v in call.named.items():
        p = v.payload
        if not isinstance(p, (NumericVector, LogicalVector, StringVector)):
            raise EvalError(f"column '{name}' must be a vector, not {kind_name(p)}")
        if length is None:
            length = len(p.items)
        elif len(p.items) != length:
            raise EvalError(
                f"column '{name}' has length {len(p.items)}, expected {length}"
            )
        columns[name] = copy_payload(p)
    return Value(Table(columns))


def _bi_data(call: BuiltinCall) -> Value:
    # lazy: data(women) names the dataset without evaluating the symbol
    if len(call.arg_nodes) != 1 or call.named_nodes:
        raise EvalError("data() expects exactly one dataset name")
    node = call.arg_nodes[0]
    if isinstance(node, Ident):
        name = node.name
    elif isinstance(node, StringLit):
        name = node.value
    else:
        raise EvalError("data() expects a dataset name", node.span)
    call.env.define(name, load_dataset(name))
    return null_value()


def _bi_source(call: BuiltinCall) -> Value:
    _need_args(call, 1, "source")
    p = call.args[0].payload
    if not (isinstance(p, StringVector) and len(p.items) == 1):
        raise EvalError("source() expects a file path")
    path = p.items[0]
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as err:
        raise EvalError(f"cannot open '{path}': {err.strerror}")
    try:
        program = parse_program(text, path)
    except ParseError as err:
        raise EvalError(f"parse error in '{path}': {err.message} (line {err.line})")
    for node in program.exprs:
        eval_expr(node, call.env, call.ctx)
    return null_value()


def register_core_builtins(env: Environment) -> None:
    register_builtin(env, "c", _bi_c)
    register_builtin(env, "length", _bi_length)
    register_builtin(env, "sum", _bi_sum)
    register_builtin(env, "mean", _bi_mean)
    register_builtin(env, "median", _bi_median)
    register_builtin(env, "min", _bi_min)
    register_builtin(env, "max", _bi_max)
    register_builtin(env, "abs", _unary_math("abs", abs))
    register_builtin(env, "sqrt", _unary_math("sqrt", _safe_sqrt))
    register_builtin(env, "sin", _unary_math("sin", math.sin))
    register_builtin(env, "cos", _unary_math("cos", math.cos))
    register_builtin(env, "exp", _unary_math("exp", _safe_exp))
    register_builtin(env, "all", _bi_all)
    register_builtin(env, "any", _bi_any)
    register_builtin(env, "identity", _bi_identity)
    register_builtin(env, "exists", _bi_exists)
    register_builtin(env, "print", _bi_print)
    register_builtin(env, "paste0", _bi_paste0)
    register_builtin(env, "table", _bi_table)
    register_builtin(env, "data", _bi_data, lazy_args=True)
    register_builtin(env, "source", _bi_source)
    env.define("women", make_women())


def default_context(
    output: TextIO | None = None,
    messages: TextIO | None = None,
    clock=None,
    log_dir: str = ".",
) -> EvalContext:
    """Build a context with the full builtin environment installed."""
    import sys

    from . import loggers as loggers_mod
    from . import pipe as pipe_mod
    from . import testkit as testkit_mod

    env = Environment()
    register_core_builtins(env)
    pipe_mod.register_builtins(env)
    loggers_mod.register_builtins(env)
    testkit_mod.register_builtins(env)
    ctx = EvalContext(
        clock=clock if clock is not None else RealClock(),
        output=output if output is not None else sys.stdout,
        messages=messages if messages is not None else sys.stderr,
        builtin_env=env,
        log_dir=log_dir,
    )
    ctx.assertions = {name: env.bindings[name] for name in testkit_mod.BASE_ASSERTIONS}
    return ctx
