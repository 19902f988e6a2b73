"""Tokenizer and parser for tapscript source.

Produces a list of top-level expressions, each carrying an exact source
span (1-based lines plus a half-open offset range into the original
text) so verbatim expression text can be recovered later for logs and
test reports.

Grammar summary (loosest to tightest binding):
    |>  then  |  then  &  then  !  then  < > <= >= == !=
    then  + -  then  * /  then unary -  then ^ (right assoc)
    then postfix call / [index] / $field
Statements are separated by newlines or ";".  Assignment uses "<-" and
is only valid as a statement; "=" is reserved for named call arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError, TapError

KEYWORDS = {"if", "else", "function", "TRUE", "FALSE", "NULL"}

_TWO_CHAR_OPS = ("<-", "<=", ">=", "==", "!=", "|>")
_ONE_CHAR_OPS = "+-*/^<>!&|()[]{},;$="


@dataclass
class SourceSpan:
    file: str
    start_line: int
    end_line: int
    start_byte: int
    end_byte: int


class ExprNode:
    """Base marker for parsed expression nodes."""

    __slots__ = ()


@dataclass
class NumberLit(ExprNode):
    value: float
    span: SourceSpan


@dataclass
class StringLit(ExprNode):
    value: str
    span: SourceSpan


@dataclass
class BoolLit(ExprNode):
    value: bool
    span: SourceSpan


@dataclass
class NullLit(ExprNode):
    span: SourceSpan


@dataclass
class Ident(ExprNode):
    name: str
    span: SourceSpan


@dataclass
class Assign(ExprNode):
    name: str
    value: ExprNode
    span: SourceSpan


@dataclass
class IndexAssign(ExprNode):
    name: str
    index: ExprNode
    value: ExprNode
    span: SourceSpan


@dataclass
class FieldAssign(ExprNode):
    name: str
    field_name: str
    value: ExprNode
    span: SourceSpan


@dataclass
class Binary(ExprNode):
    op: str
    left: ExprNode
    right: ExprNode
    span: SourceSpan


@dataclass
class Unary(ExprNode):
    op: str
    operand: ExprNode
    span: SourceSpan


@dataclass
class Index(ExprNode):
    obj: ExprNode
    index: ExprNode
    span: SourceSpan


@dataclass
class Field(ExprNode):
    obj: ExprNode
    field_name: str
    span: SourceSpan


@dataclass
class Call(ExprNode):
    callee: ExprNode
    args: list[ExprNode]
    named: list[tuple[str, ExprNode]]
    span: SourceSpan


@dataclass
class Block(ExprNode):
    exprs: list[ExprNode]
    span: SourceSpan


@dataclass
class If(ExprNode):
    cond: ExprNode
    then: ExprNode
    orelse: ExprNode | None
    span: SourceSpan


@dataclass
class FnDef(ExprNode):
    params: list[str]
    body: ExprNode
    span: SourceSpan


@dataclass
class Pipe(ExprNode):
    left: ExprNode
    right: ExprNode
    right_text: str  # verbatim source of the right-hand stage, for log rows
    span: SourceSpan


@dataclass
class VectorCtor(ExprNode):
    args: list[ExprNode]
    span: SourceSpan


@dataclass
class Program:
    exprs: list[ExprNode]
    source: str
    file: str


@dataclass
class Token:
    kind: str  # NUMBER, STRING, IDENT, NEWLINE, EOF, keyword, or operator text
    text: str
    line: int
    col: int
    start: int
    end: int
    end_line: int = 0

    def __post_init__(self):
        if self.end_line == 0:
            self.end_line = self.line


def tokenize(source: str, file: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(source)
    line = 1
    col = 1

    def err(msg: str, at_line: int, at_col: int):
        raise ParseError(file, at_line, at_col, msg)

    while i < n:
        ch = source[i]
        if ch in (" ", "\t"):
            i += 1
            col += 1
            continue
        if ch == "\r" or ch == "\n":
            start = i
            if ch == "\r" and i + 1 < n and source[i + 1] == "\n":
                i += 2
            else:
                i += 1
            tokens.append(Token("NEWLINE", source[start:i], line, col, start, i))
            line += 1
            col = 1
            continue
        if ch == "#":
            while i < n and source[i] not in ("\n", "\r"):
                i += 1
            continue
        if ch.isdigit():
            start, start_col = i, col
            while i < n and source[i].isdigit():
                i += 1
            if i < n and source[i] == "." and i + 1 < n and source[i + 1].isdigit():
                i += 1
                while i < n and source[i].isdigit():
                    i += 1
            elif i < n and source[i] == ".":
                i += 1
            if i < n and source[i] in ("e", "E"):
                j = i + 1
                if j < n and source[j] in ("+", "-"):
                    j += 1
                if j < n and source[j].isdigit():
                    i = j
                    while i < n and source[i].isdigit():
                        i += 1
            text = source[start:i]
            col += i - start
            tokens.append(Token("NUMBER", text, line, start_col, start, i))
            continue
        if ch.isalpha() or ch == "_":
            start, start_col = i, col
            while i < n and (source[i].isalnum() or source[i] in ("_", ".")):
                i += 1
            text = source[start:i]
            col += i - start
            kind = text if text in KEYWORDS else "IDENT"
            tokens.append(Token(kind, text, line, start_col, start, i))
            continue
        if ch == '"':
            start, start_line, start_col = i, line, col
            i += 1
            col += 1
            chars: list[str] = []
            closed = False
            while i < n:
                c = source[i]
                if c == "\\":
                    if i + 1 >= n or source[i + 1] not in ('"', "\\"):
                        err("unsupported escape in string literal", line, col)
                    chars.append(source[i + 1])
                    i += 2
                    col += 2
                    continue
                if c == '"':
                    i += 1
                    col += 1
                    closed = True
                    break
                if c == "\n" or c == "\r":
                    line += 1
                    col = 1
                else:
                    col += 1
                chars.append(c)
                i += 1
            if not closed:
                err("unterminated string literal", start_line, start_col)
            tokens.append(
                Token("STRING", "".join(chars), start_line, start_col, start, i, line)
            )
            continue
        two = source[i : i + 2]
        if two in _TWO_CHAR_OPS:
            tokens.append(Token(two, two, line, col, i, i + 2))
            i += 2
            col += 2
            continue
        if ch in _ONE_CHAR_OPS:
            kind = "SEMI" if ch == ";" else ch
            tokens.append(Token(kind, ch, line, col, i, i + 1))
            i += 1
            col += 1
            continue
        err(f"unexpected character {ch!r}", line, col)

    tokens.append(Token("EOF", "", line, col, n, n))
    return tokens


_COMPARISON_OPS = ("<", ">", "<=", ">=", "==", "!=")


class _Parser:
    def __init__(self, tokens: list[Token], source: str, file: str):
        self.tokens = tokens
        self.source = source
        self.file = file
        self.pos = 0
        self.last = tokens[0]

    def peek(self, offset: int = 0) -> Token:
        idx = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[idx]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        self.last = tok
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            self.fail(f"expected {kind!r}, found {self._describe(tok)}", tok)
        return self.advance()

    def fail(self, msg: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise ParseError(self.file, tok.line, tok.col, msg)

    @staticmethod
    def _describe(tok: Token) -> str:
        if tok.kind == "EOF":
            return "end of input"
        if tok.kind == "NEWLINE":
            return "end of line"
        return repr(tok.text)

    def skip_newlines(self):
        while self.peek().kind == "NEWLINE":
            self.advance()

    def skip_separators(self):
        while self.peek().kind in ("NEWLINE", "SEMI"):
            self.advance()

    def span_from(self, start: Token) -> SourceSpan:
        return SourceSpan(self.file, start.line, self.last.end_line, start.start, self.last.end)

    # statements -------------------------------------------------------

    def parse_program(self) -> list[ExprNode]:
        exprs = []
        self.skip_separators()
        while self.peek().kind != "EOF":
            exprs.append(self.parse_statement())
            self.end_statement()
        return exprs

    def end_statement(self):
        tok = self.peek()
        if tok.kind in ("NEWLINE", "SEMI", "EOF"):
            self.skip_separators()
        elif tok.kind == "}":
            pass  # block close terminates the statement
        else:
            self.fail(f"unexpected {self._describe(tok)} after expression", tok)

    def parse_statement(self) -> ExprNode:
        start = self.peek()
        expr = self.parse_pipe()
        if self.peek().kind != "<-":
            return expr
        self.advance()
        self.skip_newlines()
        value = self.parse_pipe()
        if self.peek().kind == "<-":
            self.fail("chained assignment is not supported")
        span = self.span_from(start)
        if isinstance(expr, Ident):
            return Assign(expr.name, value, span)
        if isinstance(expr, Index) and isinstance(expr.obj, Ident):
            return IndexAssign(expr.obj.name, expr.index, value, span)
        if isinstance(expr, Field) and isinstance(expr.obj, Ident):
            return FieldAssign(expr.obj.name, expr.field_name, value, span)
        self.fail("invalid assignment target", start)

    # expressions ------------------------------------------------------

    def parse_pipe(self) -> ExprNode:
        start = self.peek()
        node = self.parse_or()
        while self.peek().kind == "|>":
            self.advance()
            self.skip_newlines()
            right = self.parse_or()
            text = self.source[right.span.start_byte : right.span.end_byte].strip()
            node = Pipe(node, right, text, self.span_from(start))
        return node

    def parse_or(self) -> ExprNode:
        start = self.peek()
        node = self.parse_and()
        while self.peek().kind == "|":
            self.advance()
            self.skip_newlines()
            node = Binary("|", node, self.parse_and(), self.span_from(start))
        return node

    def parse_and(self) -> ExprNode:
        start = self.peek()
        node = self.parse_not()
        while self.peek().kind == "&":
            self.advance()
            self.skip_newlines()
            node = Binary("&", node, self.parse_not(), self.span_from(start))
        return node

    def parse_not(self) -> ExprNode:
        tok = self.peek()
        if tok.kind == "!":
            self.advance()
            self.skip_newlines()
            operand = self.parse_not()
            return Unary("!", operand, self.span_from(tok))
        return self.parse_comparison()

    def parse_comparison(self) -> ExprNode:
        start = self.peek()
        node = self.parse_additive()
        while self.peek().kind in _COMPARISON_OPS:
            op = self.advance().kind
            self.skip_newlines()
            node = Binary(op, node, self.parse_additive(), self.span_from(start))
        return node

    def parse_additive(self) -> ExprNode:
        start = self.peek()
        node = self.parse_multiplicative()
        while self.peek().kind in ("+", "-"):
            op = self.advance().kind
            self.skip_newlines()
            node = Binary(op, node, self.parse_multiplicative(), self.span_from(start))
        return node

    def parse_multiplicative(self) -> ExprNode:
        start = self.peek()
        node = self.parse_unary()
        while self.peek().kind in ("*", "/"):
            op = self.advance().kind
            self.skip_newlines()
            node = Binary(op, node, self.parse_unary(), self.span_from(start))
        return node

    def parse_unary(self) -> ExprNode:
        tok = self.peek()
        if tok.kind == "-":
            self.advance()
            self.skip_newlines()
            operand = self.parse_unary()
            return Unary("-", operand, self.span_from(tok))
        return self.parse_power()

    def parse_power(self) -> ExprNode:
        start = self.peek()
        node = self.parse_postfix()
        if self.peek().kind == "^":
            self.advance()
            self.skip_newlines()
            right = self.parse_unary()  # right-assoc, permits 2^-2
            node = Binary("^", node, right, self.span_from(start))
        return node

    def parse_postfix(self) -> ExprNode:
        start = self.peek()
        node = self.parse_primary()
        while True:
            kind = self.peek().kind
            if kind == "(":
                args, named = self.parse_call_args()
                if isinstance(node, Ident) and node.name == "c":
                    if named:
                        self.fail("c() takes positional arguments only", start)
                    node = VectorCtor(args, self.span_from(start))
                else:
                    node = Call(node, args, named, self.span_from(start))
            elif kind == "[":
                self.advance()
                self.skip_newlines()
                index = self.parse_pipe()
                self.skip_newlines()
                self.expect("]")
                node = Index(node, index, self.span_from(start))
            elif kind == "$":
                self.advance()
                self.skip_newlines()
                name = self.expect("IDENT").text
                node = Field(node, name, self.span_from(start))
            else:
                return node

    def parse_call_args(self) -> tuple[list[ExprNode], list[tuple[str, ExprNode]]]:
        self.expect("(")
        self.skip_newlines()
        args: list[ExprNode] = []
        named: list[tuple[str, ExprNode]] = []
        while self.peek().kind != ")":
            if self.peek().kind == "IDENT" and self.peek(1).kind == "=":
                name = self.advance().text
                self.advance()
                self.skip_newlines()
                named.append((name, self.parse_pipe()))
            else:
                args.append(self.parse_pipe())
            self.skip_newlines()
            if self.peek().kind == ",":
                self.advance()
                self.skip_newlines()
            elif self.peek().kind != ")":
                self.fail(f"expected ',' or ')', found {self._describe(self.peek())}")
        self.expect(")")
        return args, named

    def parse_primary(self) -> ExprNode:
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.advance()
            return NumberLit(float(tok.text), self.span_from(tok))
        if tok.kind == "STRING":
            self.advance()
            return StringLit(tok.text, self.span_from(tok))
        if tok.kind == "TRUE" or tok.kind == "FALSE":
            self.advance()
            return BoolLit(tok.kind == "TRUE", self.span_from(tok))
        if tok.kind == "NULL":
            self.advance()
            return NullLit(self.span_from(tok))
        if tok.kind == "IDENT":
            self.advance()
            return Ident(tok.text, self.span_from(tok))
        if tok.kind == "(":
            self.advance()
            self.skip_newlines()
            node = self.parse_pipe()
            self.skip_newlines()
            self.expect(")")
            node.span = self.span_from(tok)  # widen to include the parens
            return node
        if tok.kind == "{":
            return self.parse_block()
        if tok.kind == "if":
            return self.parse_if()
        if tok.kind == "function":
            return self.parse_fn_def()
        self.fail(f"unexpected {self._describe(tok)}", tok)

    def parse_block(self) -> ExprNode:
        start = self.expect("{")
        exprs = []
        self.skip_separators()
        while self.peek().kind != "}":
            if self.peek().kind == "EOF":
                self.fail("unterminated block", start)
            exprs.append(self.parse_statement())
            self.end_statement()
            self.skip_separators()
        self.expect("}")
        return Block(exprs, self.span_from(start))

    def parse_if(self) -> ExprNode:
        start = self.expect("if")
        self.expect("(")
        self.skip_newlines()
        cond = self.parse_pipe()
        self.skip_newlines()
        self.expect(")")
        self.skip_newlines()
        then = self.parse_statement()
        orelse = None
        # look past line breaks for a trailing "else"
        j = self.pos
        while self.tokens[j].kind == "NEWLINE":
            j += 1
        if self.tokens[j].kind == "else":
            self.pos = j
            self.advance()
            self.skip_newlines()
            orelse = self.parse_statement()
        return If(cond, then, orelse, self.span_from(start))

    def parse_fn_def(self) -> ExprNode:
        start = self.expect("function")
        self.expect("(")
        self.skip_newlines()
        params: list[str] = []
        while self.peek().kind != ")":
            params.append(self.expect("IDENT").text)
            self.skip_newlines()
            if self.peek().kind == ",":
                self.advance()
                self.skip_newlines()
            elif self.peek().kind != ")":
                self.fail(f"expected ',' or ')', found {self._describe(self.peek())}")
        self.expect(")")
        self.skip_newlines()
        body = self.parse_statement()
        return FnDef(params, body, self.span_from(start))


def parse_program(source: str, file_name: str = "<script>") -> Program:
    """Parse source text into its list of top-level expressions."""
    tokens = tokenize(source, file_name)
    parser = _Parser(tokens, source, file_name)
    return Program(parser.parse_program(), source, file_name)


def source_slice(program: Program, span: SourceSpan) -> str:
    """Return the verbatim source text for a span, whitespace-trimmed."""
    if not (0 <= span.start_byte < span.end_byte <= len(program.source)):
        raise TapError(f"span {span.start_byte}:{span.end_byte} out of range")
    return program.source[span.start_byte : span.end_byte].strip()


def nodes_equal(a: ExprNode, b: ExprNode) -> bool:
    """Structural equality of two parse trees, ignoring spans."""
    if type(a) is not type(b):
        return False
    for name in a.__dataclass_fields__:  # type: ignore[attr-defined]
        if name == "span":
            continue
        if not _fields_equal(getattr(a, name), getattr(b, name)):
            return False
    return True


def _fields_equal(va, vb) -> bool:
    if isinstance(va, ExprNode) or isinstance(vb, ExprNode):
        return isinstance(va, ExprNode) and isinstance(vb, ExprNode) and nodes_equal(va, vb)
    if isinstance(va, (list, tuple)):
        if not isinstance(vb, (list, tuple)) or len(va) != len(vb):
            return False
        return all(_fields_equal(x, y) for x, y in zip(va, vb))
    return va == vb
