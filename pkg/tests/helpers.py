"""Shared helpers for the test suite: context builders, script runners,
and seeded random generators for values and programs."""

from __future__ import annotations

import io
import random

import tapscript as ts
from tapscript.values import (
    LogicalVector,
    NumericVector,
    Record,
    StringVector,
    Table,
    Value,
)


def make_ctx(clock=None, log_dir=".", output=None, messages=None):
    return ts.default_context(
        output=output if output is not None else io.StringIO(),
        messages=messages if messages is not None else io.StringIO(),
        clock=clock if clock is not None else ts.FixedClock(),
        log_dir=log_dir,
    )


def eval_source(source: str, ctx=None):
    """Evaluate source in a fresh environment; return (env, last value, ctx)."""
    if ctx is None:
        ctx = make_ctx()
    program = ts.parse_program(source, "<test>")
    env = ts.Environment(ctx.builtin_env)
    value = ts.null_value()
    for node in program.exprs:
        value = ts.eval_expr(node, env, ctx)
    return env, value, ctx


def run_script(tmp_path, source, hooks=(), masks=None, ctx=None, name="script.ts",
               print_values=True):
    """Write source to a file under tmp_path and run it."""
    path = tmp_path / name
    path.write_text(source, encoding="utf-8")
    if ctx is None:
        ctx = make_ctx(log_dir=str(tmp_path))
    result = ts.run_file(
        str(path), list(hooks), masks if masks is not None else ts.MaskSet.standard(),
        ctx, print_values=print_values,
    )
    return result, ctx


def items(value):
    return list(value.payload.items)


def num_scalar(value) -> float:
    assert isinstance(value.payload, NumericVector) and len(value.payload.items) == 1
    return value.payload.items[0]


SCRIPT2 = (
    "start_log(women, simple$new())\n"
    "women$height <- women$height * 2.54/100\n"
    "women$weight <- women$weight * 0.453592\n"
    "women$bmi <- women$weight/(women$height)^2\n"
)

PIPE_LOG_SCRIPT = (
    "to_si <- function(d) {\n"
    "  d$height <- d$height * 2.54/100\n"
    "  d\n"
    "}\n"
    "out <- women |> start_log(simple$new()) |> to_si |> identity |> dump_log()\n"
)

BMI_TS = "# contents of bmi.ts\nbmi <- function(weight, height) weight/(height^2)\n"

TEST_SCRIPT_TS = (
    "# contents of test_script.ts\n"
    'source("bmi.ts")\n'
    "data(women)\n"
    "women$height <- women$height * 2.54/100\n"
    "women$weight <- women$weight * 0.453592\n"
    "BMI <- with(women, bmi(weight,height))\n"
    "expect_true(all(BMI >= 10))\n"
    "expect_true(all(BMI <= 30))\n"
)


# independent oracles ------------------------------------------------------


def oracle_cells(v: Value) -> int:
    """Traversal oracle: count interpreter cells by walking the
    structure, written from the metric's definition."""
    from tapscript.values import Closure

    p = v.payload
    if isinstance(p, (NumericVector, LogicalVector, StringVector)):
        n = len(p.items)
    elif isinstance(p, Table):
        n = sum(len(col.items) for col in p.columns.values())
    elif isinstance(p, Closure):
        n = 1
    elif isinstance(p, Record):
        n = sum(oracle_cells(f) for f in p.fields.values())
    else:
        n = 0
    for attr in v.attributes.values():
        if isinstance(attr, Value):
            n += oracle_cells(attr)
    return n


# random generators ------------------------------------------------------


def random_vector(rng: random.Random) -> Value:
    kind = rng.choice(("numeric", "logical", "string"))
    n = rng.randint(0, 6)
    if kind == "numeric":
        return ts.numeric([rng.uniform(-100, 100) for _ in range(n)])
    if kind == "logical":
        return ts.logical([rng.random() < 0.5 for _ in range(n)])
    return ts.string(["".join(rng.choices("abcxyz", k=3)) for _ in range(n)])


def random_value(rng: random.Random, depth: int = 0) -> Value:
    roll = rng.random()
    if roll < 0.15:
        v = ts.null_value()
    elif roll < 0.70 or depth > 1:
        v = random_vector(rng)
    else:
        n_rows = rng.randint(0, 5)
        columns = {}
        for i in range(rng.randint(1, 3)):
            columns[f"col{i}"] = NumericVector([rng.uniform(0, 9) for _ in range(n_rows)])
        v = Value(Table(columns))
    if rng.random() < 0.35:
        v.attributes["label"] = random_vector(rng)
    if rng.random() < 0.35:
        v.attributes[".n"] = ts.numeric([rng.randint(0, 5)])
    return v


def random_program(rng: random.Random, max_exprs: int = 20) -> tuple[str, int]:
    """A well-formed, error-free script of 1..max_exprs statements."""
    pool = ("x", "y", "z", "w")
    bound: list[str] = []
    lines: list[str] = []
    k = rng.randint(1, max_exprs)
    for _ in range(k):
        if not bound or rng.random() < 0.4:
            var = rng.choice(pool)
            lits = ", ".join(str(rng.randint(-9, 9)) for _ in range(rng.randint(1, 4)))
            lines.append(f"{var} <- c({lits})")
            if var not in bound:
                bound.append(var)
        else:
            var = rng.choice(bound)
            src = rng.choice(bound)
            form = rng.randrange(5)
            if form == 0:
                lines.append(f"{var} <- {src} * {rng.randint(1, 5)}")
            elif form == 1:
                lines.append(f"{var} <- {src} + {rng.randint(-3, 3)}")
            elif form == 2:
                lines.append(f"{var} <- sum({src})")
            elif form == 3:
                lines.append(f"{var} <- c({src}, {rng.randint(0, 9)})")
            else:
                lines.append(f"{src}[1] <- {rng.randint(-9, 9)}")
    return "\n".join(lines) + "\n", k


def random_tracking_script(rng: random.Random, tracked: str = "x") -> str:
    """A script that binds and repeatedly mutates (or not) one variable."""
    lits = ", ".join(str(rng.randint(-9, 9)) for _ in range(rng.randint(1, 4)))
    lines = [f"{tracked} <- c({lits})"]
    for _ in range(rng.randint(1, 12)):
        form = rng.randrange(6)
        if form == 0:
            lines.append(f"{tracked} <- {tracked} * 2")
        elif form == 1:
            lines.append(f"{tracked} <- {tracked}")  # deep-equal rebind
        elif form == 2:
            lines.append(f"{tracked}[1] <- {rng.randint(-9, 9)}")
        elif form == 3:
            lines.append(f"other <- c({rng.randint(0, 9)})")
        elif form == 4:
            lines.append(f"{tracked} <- c({tracked}, {rng.randint(0, 9)})")
        else:
            lines.append(f"{tracked} <- {tracked} + 0")  # no-op arithmetic
    return "\n".join(lines) + "\n"
