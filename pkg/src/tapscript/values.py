"""Runtime value model: tagged payloads plus an attribute mapping.

Attribute names starting with "." are reserved for secondary-flow
state (the pipe counter, attached loggers, test outcomes).  Reserved
attributes are invisible to ordinary printing and ignored by equality,
but they do contribute to the heap-cell metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Callable, Union

if TYPE_CHECKING:
    from .evaluator import Environment
    from .loggers import Logger
    from .syntax import ExprNode

COUNTER_ATTR = ".n"
LOGGERS_ATTR = ".loggers"
ASSERTION_ATTR = ".assertion"
INFO_ATTR = ".info"

PRINT_WIDTH = 80


def is_reserved(name: str) -> bool:
    return name.startswith(".")


@dataclass
class NumericVector:
    items: list[float]


@dataclass
class LogicalVector:
    items: list[bool]


@dataclass
class StringVector:
    items: list[str]


@dataclass
class Closure:
    params: list[str]
    body: "ExprNode"
    env: "Environment"


@dataclass
class Builtin:
    name: str
    fn: Callable
    lazy_args: bool = False  # receives unevaluated argument syntax
    flow_control: bool = False  # pipe stage that manages reserved attributes itself


@dataclass
class Table:
    columns: dict[str, VectorPayload]

    def n_rows(self) -> int:
        for col in self.columns.values():
            return len(col.items)
        return 0


@dataclass
class Record:
    fields: dict[str, "Value"]


@dataclass
class LoggerRef:
    logger: "Logger"


class NullType:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NULL"


NULL = NullType()

VectorPayload = Union[NumericVector, LogicalVector, StringVector]
Payload = Union[VectorPayload, Closure, Builtin, Table, Record, LoggerRef, NullType]


@dataclass
class Value:
    payload: Payload
    attributes: dict[str, Any] = field(default_factory=dict)


def numeric(items) -> Value:
    return Value(NumericVector([float(x) for x in items]))


def logical(items) -> Value:
    return Value(LogicalVector([bool(x) for x in items]))


def string(items) -> Value:
    return Value(StringVector([str(x) for x in items]))


def null_value() -> Value:
    return Value(NULL)


def is_null(v: Value) -> bool:
    return v.payload is NULL


def is_true(v: Value) -> bool:
    return isinstance(v.payload, LogicalVector) and v.payload.items == [True]


def kind_name(payload: Payload) -> str:
    return {
        NumericVector: "numeric",
        LogicalVector: "logical",
        StringVector: "string",
        Closure: "closure",
        Builtin: "builtin",
        Table: "table",
        Record: "record",
        LoggerRef: "logger",
        NullType: "null",
    }[type(payload)]


# equality -------------------------------------------------------------


def _float_eq(a: float, b: float) -> bool:
    # identity semantics: NaN equals NaN, no tolerance otherwise
    if math.isnan(a) or math.isnan(b):
        return math.isnan(a) and math.isnan(b)
    return a == b


def _payload_equal(a: Payload, b: Payload) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, NumericVector):
        return len(a.items) == len(b.items) and all(
            _float_eq(x, y) for x, y in zip(a.items, b.items)
        )
    if isinstance(a, (LogicalVector, StringVector)):
        return a.items == b.items
    if isinstance(a, NullType):
        return True
    if isinstance(a, Closure):
        from .syntax import nodes_equal

        return a.params == b.params and nodes_equal(a.body, b.body)
    if isinstance(a, Builtin):
        return a.name == b.name and a.fn is b.fn
    if isinstance(a, Table):
        if list(a.columns) != list(b.columns):
            return False
        return all(_payload_equal(a.columns[k], b.columns[k]) for k in a.columns)
    if isinstance(a, Record):
        if list(a.fields) != list(b.fields):
            return False
        return all(deep_equal(a.fields[k], b.fields[k]) for k in a.fields)
    if isinstance(a, LoggerRef):
        return a.logger is b.logger
    raise TypeError(f"unknown payload {type(a)!r}")


def deep_equal(a: Value, b: Value) -> bool:
    """Structural equality of payloads and non-reserved attributes."""
    if not _payload_equal(a.payload, b.payload):
        return False
    pa = {k: v for k, v in a.attributes.items() if not is_reserved(k)}
    pb = {k: v for k, v in b.attributes.items() if not is_reserved(k)}
    if pa.keys() != pb.keys():
        return False
    return all(deep_equal(pa[k], pb[k]) for k in pa)


# heap-cell metric -----------------------------------------------------


def cell_count(v: Value) -> int:
    """Reachable interpreter cells: vector elements count 1 each, a
    table is the sum of its columns, a closure is 1, and attributes add
    their own cells (reserved ones included)."""
    total = _payload_cells(v.payload)
    for attr in v.attributes.values():
        if isinstance(attr, Value):
            total += cell_count(attr)
    return total


def _payload_cells(payload: Payload) -> int:
    if isinstance(payload, (NumericVector, LogicalVector, StringVector)):
        return len(payload.items)
    if isinstance(payload, Table):
        return sum(len(col.items) for col in payload.columns.values())
    if isinstance(payload, Closure):
        return 1
    if isinstance(payload, Record):
        return sum(cell_count(f) for f in payload.fields.values())
    return 0  # Null, Builtin, LoggerRef


# copying --------------------------------------------------------------


def copy_payload(payload: Payload) -> Payload:
    if isinstance(payload, NumericVector):
        return NumericVector(list(payload.items))
    if isinstance(payload, LogicalVector):
        return LogicalVector(list(payload.items))
    if isinstance(payload, StringVector):
        return StringVector(list(payload.items))
    if isinstance(payload, Table):
        return Table({k: copy_payload(col) for k, col in payload.columns.items()})
    if isinstance(payload, Record):
        return Record(dict(payload.fields))
    return payload  # closures, builtins, logger refs, NULL share by reference


def copy_value(v: Value) -> Value:
    """Copy a value.  Data payloads are duplicated; reference payloads
    (closures, builtins, attached loggers) are shared."""
    attrs: dict[str, Any] = {}
    for k, a in v.attributes.items():
        if isinstance(a, Value):
            attrs[k] = copy_value(a)
        elif isinstance(a, list):
            attrs[k] = list(a)
        else:
            attrs[k] = a
    return Value(copy_payload(v.payload), attrs)


def strip_reserved(v: Value) -> Value:
    """Copy of a value without any reserved attributes."""
    out = copy_value(v)
    out.attributes = {k: a for k, a in out.attributes.items() if not is_reserved(k)}
    return out


def with_attr(v: Value, name: str, attr: Value) -> Value:
    out = Value(v.payload, dict(v.attributes))
    out.attributes[name] = attr
    return out


def without_attr(v: Value, name: str) -> Value:
    out = Value(v.payload, dict(v.attributes))
    out.attributes.pop(name, None)
    return out


# formatting -----------------------------------------------------------


def format_num(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Inf" if x > 0 else "-Inf"
    if x == 0.0:
        return "0"
    return f"{x:.7g}"


def format_cell(payload: VectorPayload, i: int) -> str:
    item = payload.items[i]
    if isinstance(payload, NumericVector):
        return format_num(item)
    if isinstance(payload, LogicalVector):
        return "TRUE" if item else "FALSE"
    return str(item)


def vector_text(v: Value) -> str:
    """One-line, marker-free rendering of a vector (log file cells)."""
    p = v.payload
    if isinstance(p, (NumericVector, LogicalVector, StringVector)):
        return " ".join(format_cell(p, i) for i in range(len(p.items)))
    return format_value(v)


def _format_vector(payload: VectorPayload) -> str:
    n = len(payload.items)
    if n == 0:
        empty = {NumericVector: "numeric(0)", LogicalVector: "logical(0)"}
        return empty.get(type(payload), "character(0)")
    if isinstance(payload, StringVector):
        cells = [f'"{s}"' for s in payload.items]
    else:
        cells = [format_cell(payload, i) for i in range(n)]
    width = max(len(c) for c in cells)
    marker_width = len(f"[{n}]")
    lines = []
    i = 0
    while i < n:
        line = f"[{i + 1}]".rjust(marker_width)
        while i < n and len(line) + 1 + width <= PRINT_WIDTH:
            line += " " + cells[i].rjust(width)
            i += 1
        lines.append(line)
    return "\n".join(lines)


def _format_table(payload: Table) -> str:
    names = list(payload.columns)
    n_rows = payload.n_rows()
    cols = []
    for name in names:
        col = payload.columns[name]
        cells = [format_cell(col, i) for i in range(n_rows)]
        width = max([len(name)] + [len(c) for c in cells])
        cols.append((name.rjust(width), [c.rjust(width) for c in cells]))
    label_width = len(str(n_rows)) if n_rows else 1
    lines = [" " * label_width + " " + " ".join(h for h, _ in cols)]
    for i in range(n_rows):
        lines.append(str(i + 1).ljust(label_width) + " " + " ".join(c[i] for _, c in cols))
    return "\n".join(lines)


def format_value(v: Value) -> str:
    p = v.payload
    if isinstance(p, NullType):
        return "NULL"
    if isinstance(p, (NumericVector, LogicalVector, StringVector)):
        return _format_vector(p)
    if isinstance(p, Table):
        return _format_table(p)
    if isinstance(p, Closure):
        return f"function({', '.join(p.params)})"
    if isinstance(p, Builtin):
        return f"<builtin {p.name}>"
    if isinstance(p, Record):
        blocks = [f"${name}\n{format_value(val)}" for name, val in p.fields.items()]
        return "\n\n".join(blocks)
    if isinstance(p, LoggerRef):
        return f"<{p.logger.kind} logger>"
    raise TypeError(f"unknown payload {type(p)!r}")
