"""Scalar expression language used for the endpoint functions of RIVFs.

Grammar (whitespace insignificant)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ('^' base)?
    base   := number | var | '(' expr ')' | func '(' args ')' | '-' base
    func   := ln | exp | abs | sqrt | min | max
    var    := x1 | x2 | ...

Note that unary minus binds tighter than ``^``: ``-x1^2`` is ``(-x1)^2``.
Write ``-(x1^2)`` for the negated square.

Parsed trees compile to plain Python callables taking a coordinate
sequence. Evaluation outside the mathematical domain (``ln`` of a
nonpositive number, division by zero, ...) raises :class:`ExprDomainError`.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Sequence

__all__ = [
    "ExprSyntaxError",
    "ExprDomainError",
    "Expr",
    "Num",
    "Var",
    "Neg",
    "Bin",
    "Call",
    "parse_expr",
    "FUNCTIONS",
]

FUNCTIONS = {"ln": 1, "exp": 1, "abs": 1, "sqrt": 1, "min": -1, "max": -1}


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        self.text = text
        self.pos = pos
        self.column = pos + 1
        super().__init__(f"{message} at column {pos + 1}: {text!r}")


class ExprDomainError(ArithmeticError):
    """Expression evaluated outside its domain of definition."""


class Expr:
    def to_source(self) -> str:
        raise NotImplementedError

    def _code(self) -> str:
        raise NotImplementedError

    def variables(self) -> set[int]:
        raise NotImplementedError

    @property
    def arity(self) -> int:
        """Largest variable index used (0 for constant expressions)."""
        vs = self.variables()
        return max(vs) if vs else 0

    def compile(self) -> Callable[[Sequence[float]], float]:
        fn = self.__dict__.get("_compiled")
        if fn is None:
            src = f"lambda x: _chk({self._code()})"
            fn = eval(src, dict(_RUNTIME))  # noqa: S307 - source built from our own AST
            object.__setattr__(self, "_compiled", fn)
        return fn

    def __call__(self, x: Sequence[float]) -> float:
        try:
            return self.compile()(x)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise ExprDomainError(f"{self.to_source()}: {exc}") from None

    def __str__(self) -> str:
        return self.to_source()

    # helpers for building expressions programmatically
    def __add__(self, other: "Expr") -> "Expr":
        return Bin("+", self, _lift(other))

    def __sub__(self, other: "Expr") -> "Expr":
        return Bin("-", self, _lift(other))

    def __mul__(self, other: "Expr") -> "Expr":
        return Bin("*", self, _lift(other))

    def __rmul__(self, other: float) -> "Expr":
        return Bin("*", _lift(other), self)

    def __neg__(self) -> "Expr":
        return Neg(self)


def _lift(e) -> Expr:
    return e if isinstance(e, Expr) else Num(float(e))


@dataclass(frozen=True, eq=True)
class Num(Expr):
    value: float

    def to_source(self):
        s = repr(float(self.value))
        return f"({s})" if self.value < 0 else s

    def _code(self):
        return f"({float(self.value)!r})"

    def variables(self):
        return set()


@dataclass(frozen=True, eq=True)
class Var(Expr):
    index: int  # 1-based

    def to_source(self):
        return f"x{self.index}"

    def _code(self):
        return f"x[{self.index - 1}]"

    def variables(self):
        return {self.index}


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr

    def to_source(self):
        return f"-({self.arg.to_source()})"

    def _code(self):
        return f"(-{self.arg._code()})"

    def variables(self):
        return self.arg.variables()


@dataclass(frozen=True, eq=True)
class Bin(Expr):
    op: str
    left: Expr
    right: Expr

    def to_source(self):
        return f"({self.left.to_source()} {self.op} {self.right.to_source()})"

    def _code(self):
        a, b = self.left._code(), self.right._code()
        if self.op == "/":
            return f"_div({a}, {b})"
        if self.op == "^":
            return f"_pow({a}, {b})"
        return f"({a} {self.op} {b})"

    def variables(self):
        return self.left.variables() | self.right.variables()


@dataclass(frozen=True, eq=True)
class Call(Expr):
    name: str
    args: tuple[Expr, ...]

    def to_source(self):
        return f"{self.name}(" + ", ".join(a.to_source() for a in self.args) + ")"

    def _code(self):
        return f"_{self.name}(" + ", ".join(a._code() for a in self.args) + ")"

    def variables(self):
        out: set[int] = set()
        for a in self.args:
            out |= a.variables()
        return out


def _ln(a):
    if a <= 0:
        raise ValueError(f"ln of nonpositive value {a}")
    return math.log(a)


def _sqrt(a):
    if a < 0:
        raise ValueError(f"sqrt of negative value {a}")
    return math.sqrt(a)


def _div(a, b):
    if b == 0:
        raise ZeroDivisionError("division by zero")
    return a / b


def _pow(a, b):
    return math.pow(a, b)


def _chk(v):
    if not math.isfinite(v):
        raise ValueError(f"non-finite result {v}")
    return v


_RUNTIME = {
    "__builtins__": {},
    "_ln": _ln,
    "_exp": math.exp,
    "_abs": abs,
    "_sqrt": _sqrt,
    "_min": min,
    "_max": max,
    "_div": _div,
    "_pow": _pow,
    "_chk": _chk,
}


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def advance(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        tok = self.advance()
        if tok[1] != value:
            what = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ExprSyntaxError(f"expected {value!r}, found {what}", self.text, tok[2])
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError(f"unexpected token {tok[1]!r}", self.text, tok[2])
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            e = Bin(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.advance()[1]
            e = Bin(op, e, self.factor())
        return e

    def factor(self) -> Expr:
        e = self.base()
        if self.peek()[1] == "^":
            self.advance()
            e = Bin("^", e, self.base())
        return e

    def base(self) -> Expr:
        kind, val, pos = self.advance()
        if kind == "num":
            return Num(float(val))
        if kind == "op" and val == "-":
            return Neg(self.base())
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "name":
            if val in FUNCTIONS:
                self.expect("(")
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.advance()
                    args.append(self.expr())
                self.expect(")")
                want = FUNCTIONS[val]
                if want > 0 and len(args) != want:
                    raise ExprSyntaxError(f"{val} takes {want} argument(s)", self.text, pos)
                if want < 0 and len(args) < 2:
                    raise ExprSyntaxError(f"{val} needs at least 2 arguments", self.text, pos)
                return Call(val, tuple(args))
            m = re.fullmatch(r"x([1-9]\d*)", val)
            if m:
                return Var(int(m.group(1)))
            raise ExprSyntaxError(f"unknown name {val!r}", self.text, pos)
        if kind == "end":
            raise ExprSyntaxError("unexpected end of input", self.text, pos)
        raise ExprSyntaxError(f"unexpected token {val!r}", self.text, pos)


def parse_expr(text: str) -> Expr:
    return _Parser(text).parse()
