"""The |> operator: secondary state travels with the data.

A value being piped may carry reserved attributes: ".n" holds an
expression counter and ".loggers" holds attached change loggers.  The
operator bumps the counter before applying each stage, re-attaches
reserved attributes a stage dropped, and feeds before/after snapshots
to any attached loggers.  Stages that manage the reserved attributes
themselves (the start/stop control functions) are marked flow_control
and are exempt from re-attachment and logging.
"""

from __future__ import annotations

from .errors import EvalError
from .evaluator import BuiltinCall, Environment, EvalContext, call_function, register_builtin
from .values import (
    COUNTER_ATTR,
    LOGGERS_ATTR,
    Builtin,
    Closure,
    Value,
    kind_name,
    numeric,
    strip_reserved,
    with_attr,
    without_attr,
)


def counter_of(v: Value) -> float | None:
    attr = v.attributes.get(COUNTER_ATTR)
    if attr is None:
        return None
    return attr.payload.items[0]


def start_counting_value(data: Value) -> Value:
    """Attach a counter attribute, reset to zero."""
    return with_attr(data, COUNTER_ATTR, numeric([0.0]))


def end_counting_value(data: Value, ctx: EvalContext) -> Value:
    """Report the counter (minus the stop stage itself) and detach it."""
    n = counter_of(data)
    if n is None:
        raise EvalError("not counting: the value carries no counter")
    ctx.messages.write(f"Counted {int(n) - 1} expressions\n")
    return without_attr(data, COUNTER_ATTR)


def _stage(name: str, fn) -> Value:
    def impl(call: BuiltinCall) -> Value:
        if len(call.args) != 1 or call.named:
            raise EvalError(f"{name} expects exactly one argument")
        return fn(call.args[0], call.ctx)

    return Value(Builtin(name, impl, flow_control=True))


def counting_stage() -> Value:
    return _stage("start_counting", lambda v, ctx: start_counting_value(v))


def end_counting_stage() -> Value:
    return _stage("end_counting", end_counting_value)


def pipe_apply(lhs: Value, rhs_fn: Value, rhs_text: str, ctx: EvalContext) -> Value:
    payload = rhs_fn.payload
    if isinstance(payload, Closure):
        if len(payload.params) != 1:
            raise EvalError(
                f"the right-hand side of '|>' must take exactly one argument, "
                f"not {len(payload.params)}"
            )
    elif not isinstance(payload, Builtin):
        raise EvalError(
            f"the right-hand side of '|>' is not a function ({kind_name(payload)})"
        )

    current = lhs
    n = counter_of(lhs)
    if n is not None:
        current = with_attr(lhs, COUNTER_ATTR, numeric([n + 1]))
    control = isinstance(payload, Builtin) and payload.flow_control
    loggers = None if control else current.attributes.get(LOGGERS_ATTR)
    old_core = strip_reserved(current) if loggers else None

    out = call_function(rhs_fn, [current], {}, ctx)

    if not control:
        out = _reattach(out, current)
    if loggers:
        new_core = strip_reserved(out)
        when = ctx.clock.wall()
        for logger in loggers:
            logger.add(when, rhs_text, old_core, new_core)
    return out


def _reattach(out: Value, source: Value) -> Value:
    restored = out
    for key in (COUNTER_ATTR, LOGGERS_ATTR):
        if key in source.attributes and key not in restored.attributes:
            if restored is out:
                restored = Value(out.payload, dict(out.attributes))
            restored.attributes[key] = source.attributes[key]
    return restored


def _bi_start_counting(call: BuiltinCall) -> Value:
    if call.args or call.named:
        raise EvalError("start_counting() takes no arguments")
    return counting_stage()


def _bi_end_counting(call: BuiltinCall) -> Value:
    if call.args or call.named:
        raise EvalError("end_counting() takes no arguments")
    return end_counting_stage()


def register_builtins(env: Environment) -> None:
    register_builtin(env, "start_counting", _bi_start_counting)
    register_builtin(env, "end_counting", _bi_end_counting)
