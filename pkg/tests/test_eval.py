"""Evaluation: scoping, operators, builtins, special forms."""

import math
import random

import pytest

import tapscript as ts
from tapscript.errors import EvalError
from tapscript.values import LogicalVector, NumericVector, Table

from helpers import eval_source, items, make_ctx, num_scalar, random_program


# --- environments -------------------------------------------------------


def test_root_environment_lookups_fail():
    root = ts.new_environment(None)
    assert root.lookup("anything") is None
    with pytest.raises(EvalError, match="not found"):
        eval_source_in(root, "missing")


def eval_source_in(env, source, ctx=None):
    ctx = ctx or make_ctx()
    program = ts.parse_program(source, "<test>")
    value = ts.null_value()
    for node in program.exprs:
        value = ts.eval_expr(node, env, ctx)
    return value


def test_child_of_builtin_env_resolves_builtins():
    ctx = make_ctx()
    # lookup-chain oracle: the name sits exactly one hop up
    child = ts.new_environment(ctx.builtin_env)
    assert "mean" not in child.bindings
    assert ctx.builtin_env.lookup("mean") is not None
    assert num_scalar(eval_source_in(child, "mean(c(1, 2, 3))", ctx)) == 2.0


def test_sibling_environments_are_isolated():
    ctx = make_ctx()
    a = ts.new_environment(ctx.builtin_env)
    b = ts.new_environment(ctx.builtin_env)
    eval_source_in(a, "x <- 1", ctx)
    assert b.lookup("x") is None


def test_shadowing_child_wins_over_ancestor():
    ctx = make_ctx()
    env, _, _ = eval_source("mean <- function(x) 42\nm <- mean(c(1, 2, 3))", ctx)
    assert num_scalar(env.bindings["m"]) == 42.0
    # the builtin itself is untouched
    fresh = ts.new_environment(ctx.builtin_env)
    assert num_scalar(eval_source_in(fresh, "mean(c(1, 2, 3))", ctx)) == 2.0


def test_assignment_is_local_never_walks_up():
    ctx = make_ctx()
    env, _, _ = eval_source("women$height <- women$height * 2", ctx)
    assert "women" in env.bindings
    original = ctx.builtin_env.lookup("women")
    assert original.payload.columns["height"].items[0] == 58.0


# --- evaluation basics ---------------------------------------------------


def test_binding_arithmetic():
    env, _, _ = eval_source("x <- 10\ny <- 2*x")
    assert items(env.bindings["x"]) == [10.0]
    assert items(env.bindings["y"]) == [20.0]


def test_assignment_returns_null():
    _, v, _ = eval_source("x <- 10")
    assert v.payload is ts.null_value().payload


def test_mask_index_assignment():
    # elementwise oracle, by hand: [-1,2,-3] with mask (x<0) -> [0,2,0]
    env, _, _ = eval_source("x <- c(-1, 2, -3)\nx[x < 0] <- 0")
    assert items(env.bindings["x"]) == [0.0, 2.0, 0.0]


def test_numeric_index_assignment_and_get():
    env, _, _ = eval_source("x <- c(10, 20, 30)\nx[2] <- 99\ny <- x[c(1, 3)]")
    assert items(env.bindings["x"]) == [10.0, 99.0, 30.0]
    assert items(env.bindings["y"]) == [10.0, 30.0]


def test_index_out_of_bounds_carries_span():
    with pytest.raises(EvalError) as exc:
        eval_source("x <- c(1, 2)\nx[5]")
    assert "out of bounds" in exc.value.message
    assert exc.value.span is not None and exc.value.span.start_line == 2


def test_length_mismatch_is_an_error():
    with pytest.raises(EvalError, match="length mismatch"):
        eval_source("c(1, 2) + c(1, 2, 3)")


def test_scalar_broadcasts_against_any_length():
    _, v, _ = eval_source("c(1, 2, 3) * 2")
    assert items(v) == [2.0, 4.0, 6.0]
    _, v, _ = eval_source("10 - c(1, 2)")
    assert items(v) == [9.0, 8.0]


def test_unbound_name_carries_span():
    with pytest.raises(EvalError) as exc:
        eval_source("qqq + 1")
    assert "object 'qqq' not found" in exc.value.message
    assert exc.value.span is not None


def test_call_of_non_function():
    with pytest.raises(EvalError, match="non-function"):
        eval_source("x <- 5\nx(1)")


def test_if_with_false_and_no_else_returns_null():
    _, v, _ = eval_source("if (FALSE) 1")
    assert ts.format_value(v) == "NULL"
    _, v, _ = eval_source("if (FALSE) 1 else 2")
    assert items(v) == [2.0]


def test_if_block_assigns_into_enclosing_env():
    env, _, _ = eval_source("x <- 5\nif (x > 0) {\n x <- 10\n y <- 2*x\n}")
    assert items(env.bindings["x"]) == [10.0]
    assert items(env.bindings["y"]) == [20.0]


def test_condition_must_be_scalar():
    with pytest.raises(EvalError, match="length-1"):
        eval_source("if (c(TRUE, TRUE)) 1")


def test_division_by_zero_follows_ieee():
    _, v, _ = eval_source("c(1, -1, 0) / 0")
    assert v.payload.items[0] == math.inf
    assert v.payload.items[1] == -math.inf
    assert math.isnan(v.payload.items[2])


def test_division_result_bmi_first_element():
    env, _, _ = eval_source(
        "women$height <- women$height * 2.54/100\n"
        "women$weight <- women$weight * 0.453592\n"
        "b <- with(women, weight/height^2)\n"
    )
    first = env.bindings["b"].payload.items[0]
    assert ts.values.format_num(first) == "24.03476"


# --- closures ------------------------------------------------------------


def test_identity_builtin():
    _, v, _ = eval_source("identity(5)")
    assert items(v) == [5.0]


def test_bmi_closure_over_women_columns():
    env, _, _ = eval_source(
        "bmi <- function(weight, height) weight/(height^2)\n"
        "women$height <- women$height * 2.54/100\n"
        "women$weight <- women$weight * 0.453592\n"
        "b <- with(women, bmi(weight, height))\n"
        "ok <- all(b >= 10) & all(b <= 30)\n"
    )
    assert items(env.bindings["ok"]) == [True]
    assert ts.values.format_num(env.bindings["b"].payload.items[0]) == "24.03476"


def test_closure_sees_definition_environment_not_caller():
    # lexical-scope oracle, by hand: the closure's x lives in the
    # factory frame (1); the caller's own x (99) is a different binding
    env, v, _ = eval_source(
        "make <- function() {\n"
        "  x <- 1\n"
        "  function() x\n"
        "}\n"
        "f <- make()\n"
        "x <- 99\n"
        "f()\n"
    )
    assert items(v) == [1.0]


def test_named_arguments_bind_by_name():
    _, v, _ = eval_source("f <- function(a, b) a - b\nf(b = 1, a = 10)")
    assert items(v) == [9.0]


def test_arity_errors():
    with pytest.raises(EvalError, match="missing"):
        eval_source("f <- function(a, b) a\nf(1)")
    with pytest.raises(EvalError, match="too many"):
        eval_source("f <- function(a) a\nf(1, 2)")
    with pytest.raises(EvalError, match="unknown named"):
        eval_source("f <- function(a) a\nf(zz = 1)")


def test_parameters_are_copies():
    env, _, _ = eval_source(
        "x <- c(1, 2, 3)\n"
        "f <- function(v) {\n"
        "  v[1] <- 99\n"
        "  v\n"
        "}\n"
        "y <- f(x)\n"
    )
    assert items(env.bindings["x"]) == [1.0, 2.0, 3.0]
    assert items(env.bindings["y"]) == [99.0, 2.0, 3.0]


# --- builtins ------------------------------------------------------------


def test_register_builtin_and_masking():
    ctx = make_ctx()
    ts.register_builtin(ctx.builtin_env, "double", lambda call: ts.numeric(
        [2 * x for x in call.args[0].payload.items]
    ))
    env = ts.new_environment(ctx.builtin_env)
    assert items(eval_source_in(env, "double(4)", ctx)) == [8.0]
    with pytest.raises(EvalError, match="already registered"):
        ts.register_builtin(ctx.builtin_env, "double", lambda call: call.args[0])
    # a runtime binding shadows the builtin (lookup-chain oracle)
    eval_source_in(env, "double <- function(x) x + 1", ctx)
    assert items(eval_source_in(env, "double(4)", ctx)) == [5.0]


def test_c_concatenation_and_promotion():
    _, v, _ = eval_source("c(TRUE, FALSE)")
    assert isinstance(v.payload, LogicalVector) and items(v) == [True, False]
    _, v, _ = eval_source("c(1, TRUE)")
    assert isinstance(v.payload, NumericVector) and items(v) == [1.0, 1.0]
    _, v, _ = eval_source('c(1.5, "a", TRUE)')
    assert items(v) == ["1.5", "a", "TRUE"]
    _, v, _ = eval_source("c(c(1, 2), NULL, 3)")
    assert items(v) == [1.0, 2.0, 3.0]
    _, v, _ = eval_source("c()")
    assert ts.format_value(v) == "NULL"


def test_aggregates():
    assert items(eval_source("length(c(4, 5, 6))")[1]) == [3.0]
    assert items(eval_source("sum(c(1, 2), 3)")[1]) == [6.0]
    assert items(eval_source("mean(c(1, 2, 3, 4))")[1]) == [2.5]
    assert items(eval_source("median(c(3, 1, 2))")[1]) == [2.0]
    assert items(eval_source("median(c(1, 2, 3, 4))")[1]) == [2.5]
    assert items(eval_source("min(c(4, 2), 9)")[1]) == [2.0]
    assert items(eval_source("max(c(4, 2), 9)")[1]) == [9.0]


def test_all_any():
    assert items(eval_source("all(c(TRUE, TRUE))")[1]) == [True]
    assert items(eval_source("all(c(TRUE, FALSE))")[1]) == [False]
    assert items(eval_source("any(c(FALSE, TRUE))")[1]) == [True]
    assert items(eval_source("all(c())")[1]) == [True]
    assert items(eval_source("any(c())")[1]) == [False]


def test_unary_math_preserves_attributes():
    ctx = make_ctx()
    carrying = ts.values.with_attr(ts.numeric([3]), ".n", ts.numeric([2]))
    carrying.attributes["label"] = ts.string(["tag"])
    for name in ("abs", "sqrt", "sin", "cos", "exp"):
        fn = ctx.builtin_env.lookup(name)
        out = ts.call_function(fn, [carrying], {}, ctx)
        assert set(out.attributes) == {".n", "label"}
        assert items(out.attributes[".n"]) == [2.0]


def test_sqrt_of_negative_is_nan():
    _, v, _ = eval_source("sqrt(-4)")
    assert math.isnan(v.payload.items[0])


def test_exists_walks_the_chain():
    env, v, ctx = eval_source('exists("women")')
    assert items(v) == [True]
    assert items(eval_source_in(env, 'exists("nope")', ctx)) == [False]
    eval_source_in(env, "nope <- 1", ctx)
    assert items(eval_source_in(env, 'exists("nope")', ctx)) == [True]


def test_print_writes_and_returns_argument():
    import io

    out = io.StringIO()
    ctx = make_ctx(output=out)
    _, v, _ = eval_source("print(c(1, 2))", ctx)
    assert out.getvalue() == "[1] 1 2\n"
    assert items(v) == [1.0, 2.0]


def test_paste0():
    assert items(eval_source('paste0("a", c(1, 2))')[1]) == ["a1", "a2"]


def test_table_builtin():
    env, _, _ = eval_source("t <- table(a = c(1, 2), b = c(3, 4))\nx <- t$b")
    assert isinstance(env.bindings["t"].payload, Table)
    assert items(env.bindings["x"]) == [3.0, 4.0]
    with pytest.raises(EvalError, match="length"):
        eval_source("table(a = c(1, 2), b = c(3))")


def test_field_assignment_creates_and_replaces_columns():
    env, _, _ = eval_source(
        "t <- table(a = c(1, 2))\nt$b <- c(5, 6)\nt$a <- 0"
    )
    t = env.bindings["t"].payload
    assert list(t.columns) == ["a", "b"]
    assert t.columns["b"].items == [5.0, 6.0]
    assert t.columns["a"].items == [0.0, 0.0]  # scalar broadcast
    with pytest.raises(EvalError, match="rows"):
        eval_source("t <- table(a = c(1, 2))\nt$b <- c(1, 2, 3)")


def test_missing_column_is_an_error():
    with pytest.raises(EvalError, match="no column"):
        eval_source("women$bmi")


def test_data_loads_a_fresh_copy_into_the_calling_env():
    ctx = make_ctx()
    env, _, _ = eval_source("data(women)\nwomen$height <- 0", ctx)
    assert env.bindings["women"].payload.columns["height"].items[0] == 0.0
    assert ctx.builtin_env.lookup("women").payload.columns["height"].items[0] == 58.0
    with pytest.raises(EvalError, match="no dataset"):
        eval_source("data(moon)")


def test_source_evaluates_in_calling_environment(tmp_path, monkeypatch):
    (tmp_path / "lib.ts").write_text("helper <- function(x) x * 3\n", encoding="utf-8")
    monkeypatch.chdir(tmp_path)
    env, v, _ = eval_source('source("lib.ts")\nhelper(2)')
    assert items(v) == [6.0]
    with pytest.raises(EvalError, match="cannot open"):
        eval_source('source("missing.ts")')


def test_with_builds_a_column_scope_parented_to_caller():
    env, v, _ = eval_source("scale <- 2\nwith(women, height[1] * scale)")
    assert items(v) == [116.0]
    # columns do not leak out of with()
    assert env.lookup("height") is None


def test_logical_operators():
    assert items(eval_source("TRUE & FALSE")[1]) == [False]
    assert items(eval_source("TRUE | FALSE")[1]) == [True]
    assert items(eval_source("!c(TRUE, FALSE)")[1]) == [False, True]
    with pytest.raises(EvalError, match="logical"):
        eval_source('"a" & TRUE')


def test_string_comparison():
    assert items(eval_source('"a" == "a"')[1]) == [True]
    assert items(eval_source('c("a", "b") < "b"')[1]) == [True, False]
    with pytest.raises(EvalError, match="string"):
        eval_source('"a" < 1')


def test_evaluating_twice_in_fresh_envs_is_deterministic():
    rng = random.Random(5)
    for _ in range(20):
        src, _ = random_program(rng, max_exprs=12)
        env1, _, _ = eval_source(src)
        env2, _, _ = eval_source(src)
        assert set(env1.bindings) == set(env2.bindings)
        for name in env1.bindings:
            assert ts.deep_equal(env1.bindings[name], env2.bindings[name])
