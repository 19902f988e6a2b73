"""tapscript: a small scripting language with a secondary data flow.

Scripts are plain sequences of expressions.  A file runner interleaves
hooks between them (counting, timing, memory, change tracking), locally
masks the user-facing control functions, and routes their output
through runner-private capture stores; a pipe operator carries the same
kind of state with the data as reserved attributes.  Two applications
ship with the core: CSV change loggers and a unit-test file runner.
"""

from .datasets import load_dataset, make_women
from .errors import EvalError, ParseError, TapError
from .evaluator import (
    Environment,
    EvalContext,
    FixedClock,
    RealClock,
    call_function,
    default_context,
    eval_expr,
    new_environment,
    register_builtin,
)
from .flow import (
    CaptureStore,
    Hook,
    HookReport,
    MaskSet,
    RunResult,
    change_hook,
    counting_hook,
    install_masks,
    make_capture,
    memory_hook,
    run_file,
    run_program,
    timing_hook,
)
from .loggers import CellwiseLogger, Logger, SimpleLogger, logger_add, logger_dump
from .pipe import end_counting_value, pipe_apply, start_counting_value
from .syntax import Program, SourceSpan, parse_program, source_slice
from .testkit import (
    TestResult,
    format_results,
    register_assertion,
    run_test_file,
    unregister_assertion,
)
from .values import (
    Value,
    cell_count,
    copy_value,
    deep_equal,
    format_value,
    logical,
    null_value,
    numeric,
    string,
)

__version__ = "0.1.0"

__all__ = [
    "CaptureStore",
    "CellwiseLogger",
    "Environment",
    "EvalContext",
    "EvalError",
    "FixedClock",
    "Hook",
    "HookReport",
    "Logger",
    "MaskSet",
    "ParseError",
    "Program",
    "RealClock",
    "RunResult",
    "SimpleLogger",
    "SourceSpan",
    "TapError",
    "TestResult",
    "Value",
    "call_function",
    "cell_count",
    "change_hook",
    "copy_value",
    "counting_hook",
    "deep_equal",
    "default_context",
    "end_counting_value",
    "eval_expr",
    "format_results",
    "format_value",
    "install_masks",
    "load_dataset",
    "logger_add",
    "logger_dump",
    "logical",
    "make_capture",
    "make_women",
    "memory_hook",
    "new_environment",
    "null_value",
    "numeric",
    "parse_program",
    "pipe_apply",
    "register_assertion",
    "register_builtin",
    "run_file",
    "run_program",
    "run_test_file",
    "source_slice",
    "start_counting_value",
    "string",
    "timing_hook",
    "unregister_assertion",
]
