"""Error types shared across the interpreter."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .syntax import SourceSpan


class TapError(Exception):
    """Base class for every error a script can trigger."""


class ParseError(TapError):
    """Source text could not be parsed.  No partial result is available."""

    def __init__(self, file: str, line: int, column: int, message: str):
        self.file = file
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"{file}:{line}:{column}: {message}")


class EvalError(TapError):
    """Evaluation failed.  Carries the span of the offending expression."""

    def __init__(self, message: str, span: "SourceSpan | None" = None):
        self.message = message
        self.span = span
        super().__init__(message)

    def __str__(self) -> str:
        if self.span is not None:
            return f"{self.span.file}:{self.span.start_line}: {self.message}"
        return self.message
