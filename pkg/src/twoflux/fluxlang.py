"""Single-variable flux expressions: parsing, evaluation, exact derivatives.

Grammar (whitespace insignificant)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := ('-')? power
    power  := atom ('^' ('-')? number)?
    atom   := number | 'u' | ident '(' expr ')' | '(' expr ')'

``^`` accepts only a numeric literal exponent (an optional leading sign is
folded into the literal) so that the derivative stays total and exact.
Functions are limited to sqrt, exp, log, abs.  There is no implicit
multiplication: ``2u`` is a syntax error.

Parsed trees are immutable and safe for concurrent shared reads; evaluation
is a pure function of (tree, u) with a fixed recursion order, so repeated
calls are bit-identical.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "FluxExpr",
    "FluxError",
    "FluxSyntaxError",
    "FluxDomainError",
    "parse",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Pow",
    "Call",
]

_FUNCTIONS = ("sqrt", "exp", "log", "abs")


class FluxError(ValueError):
    """Base class for expression errors."""


class FluxSyntaxError(FluxError):
    """Malformed expression text.

    ``offset`` is the byte offset of the offending token in the source.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class FluxDomainError(FluxError):
    """Evaluation left the domain of a sub-expression (log of a non-positive
    value, division by zero, 0 raised to a negative power, overflow)."""

    def __init__(self, message: str, expr_text: str):
        super().__init__(f"{message} in '{expr_text}'")
        self.expr_text = expr_text


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    lhs: "Node"
    rhs: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: float  # literal only


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Pow, Call]

# Printing precedence levels; higher binds tighter.
_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC_ADD if node.op in "+-" else _PREC_MUL
    if isinstance(node, Neg):
        return _PREC_NEG
    if isinstance(node, Pow):
        return _PREC_POW
    return _PREC_ATOM


def _fmt_num(v: float) -> str:
    return repr(float(v))


def _render(node: Node) -> str:
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, Var):
        return "u"
    if isinstance(node, Call):
        return f"{node.func}({_render(node.arg)})"
    if isinstance(node, Neg):
        inner = _render(node.arg)
        if _prec(node.arg) < _PREC_POW:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Pow):
        base = _render(node.base)
        if _prec(node.base) < _PREC_ATOM:
            base = f"({base})"
        return f"{base}^{_fmt_num(node.exponent)}"
    if isinstance(node, BinOp):
        my = _prec(node)
        lhs = _render(node.lhs)
        if _prec(node.lhs) < my:
            lhs = f"({lhs})"
        rhs = _render(node.rhs)
        if _prec(node.rhs) <= my:  # left associativity
            rhs = f"({rhs})"
        return f"{lhs}{node.op}{rhs}"
    raise TypeError(f"not an expression node: {node!r}")


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            # only whitespace consumed or nothing matched
            at = pos + len(text[pos:]) - len(text[pos:].lstrip())
            if at >= n:
                break
            raise FluxSyntaxError(f"unexpected character {text[at]!r}", at)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> None:
        kind, text, off = self.peek()
        if kind != "op" or text != op:
            raise FluxSyntaxError(f"expected '{op}'", off)
        self.advance()

    def parse(self) -> Node:
        node = self.expr()
        kind, text, off = self.peek()
        if kind != "eof":
            raise FluxSyntaxError(f"unexpected trailing input {text!r}", off)
        return node

    def expr(self) -> Node:
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                node = BinOp(text, node, self.term())
            else:
                return node

    def term(self) -> Node:
        node = self.factor()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                node = BinOp(text, node, self.factor())
            else:
                return node

    def factor(self) -> Node:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(self.power())
        return self.power()

    def power(self) -> Node:
        node = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            sign = 1.0
            kind, text, off = self.peek()
            if kind == "op" and text == "-":
                sign = -1.0
                self.advance()
                kind, text, off = self.peek()
            if kind != "num":
                raise FluxSyntaxError("exponent must be a numeric literal", off)
            self.advance()
            return Pow(node, sign * float(text))
        return node

    def atom(self) -> Node:
        kind, text, off = self.advance()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            nkind, ntext, _ = self.peek()
            if nkind == "op" and ntext == "(":
                if text not in _FUNCTIONS:
                    raise FluxSyntaxError(f"unknown function {text!r}", off)
                self.advance()
                arg = self.expr()
                self.expect_op(")")
                return Call(text, arg)
            if text == "u":
                return Var()
            raise FluxSyntaxError(f"unknown identifier {text!r}", off)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise FluxSyntaxError(f"expected a value, got {text!r}" if text else "unexpected end of input", off)


def _is_integer(p: float) -> bool:
    return p == math.floor(p)


def _pow_value(base: float, p: float, node: Node) -> float:
    if base == 0.0 and p < 0.0:
        raise FluxDomainError("0 raised to a negative power", _render(node))
    if base < 0.0 and not _is_integer(p):
        raise FluxDomainError("negative base with non-integer exponent", _render(node))
    try:
        return base**p
    except OverflowError:
        raise FluxDomainError("overflow", _render(node)) from None


def _eval(node: Node, u: float) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return u
    if isinstance(node, Neg):
        return -_eval(node.arg, u)
    if isinstance(node, BinOp):
        a = _eval(node.lhs, u)
        b = _eval(node.rhs, u)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b == 0.0:
            raise FluxDomainError("division by zero", _render(node))
        return a / b
    if isinstance(node, Pow):
        return _pow_value(_eval(node.base, u), node.exponent, node)
    # Call
    a = _eval(node.arg, u)
    if node.func == "sqrt":
        if a < 0.0:
            raise FluxDomainError("sqrt of a negative value", _render(node))
        return math.sqrt(a)
    if node.func == "exp":
        try:
            return math.exp(a)
        except OverflowError:
            raise FluxDomainError("overflow in exp", _render(node)) from None
    if node.func == "log":
        if a <= 0.0:
            raise FluxDomainError("log of a non-positive value", _render(node))
        return math.log(a)
    return abs(a)


def _eval_d(node: Node, u: float) -> tuple[float, float]:
    if isinstance(node, Num):
        return node.value, 0.0
    if isinstance(node, Var):
        return u, 1.0
    if isinstance(node, Neg):
        v, d = _eval_d(node.arg, u)
        return -v, -d
    if isinstance(node, BinOp):
        a, da = _eval_d(node.lhs, u)
        b, db = _eval_d(node.rhs, u)
        if node.op == "+":
            return a + b, da + db
        if node.op == "-":
            return a - b, da - db
        if node.op == "*":
            return a * b, da * b + a * db
        if b == 0.0:
            raise FluxDomainError("division by zero", _render(node))
        return a / b, (da * b - a * db) / (b * b)
    if isinstance(node, Pow):
        b, db = _eval_d(node.base, u)
        p = node.exponent
        v = _pow_value(b, p, node)
        if p == 0.0:
            return v, 0.0
        return v, p * _pow_value(b, p - 1.0, node) * db
    a, da = _eval_d(node.arg, u)
    if node.func == "sqrt":
        if a < 0.0:
            raise FluxDomainError("sqrt of a negative value", _render(node))
        if a == 0.0:
            raise FluxDomainError("derivative of sqrt at zero", _render(node))
        v = math.sqrt(a)
        return v, da / (2.0 * v)
    if node.func == "exp":
        try:
            v = math.exp(a)
        except OverflowError:
            raise FluxDomainError("overflow in exp", _render(node)) from None
        return v, v * da
    if node.func == "log":
        if a <= 0.0:
            raise FluxDomainError("log of a non-positive value", _render(node))
        return math.log(a), da / a
    # abs'(0) is defined as 0 for determinism
    sign = 0.0 if a == 0.0 else math.copysign(1.0, a)
    return abs(a), sign * da


def _eval_array(node: Node, u: np.ndarray) -> np.ndarray:
    if isinstance(node, Num):
        return np.full_like(u, node.value)
    if isinstance(node, Var):
        return u
    if isinstance(node, Neg):
        return -_eval_array(node.arg, u)
    if isinstance(node, BinOp):
        a = _eval_array(node.lhs, u)
        b = _eval_array(node.rhs, u)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if np.any(b == 0.0):
            raise FluxDomainError("division by zero", _render(node))
        return a / b
    if isinstance(node, Pow):
        b = _eval_array(node.base, u)
        p = node.exponent
        if p < 0.0 and np.any(b == 0.0):
            raise FluxDomainError("0 raised to a negative power", _render(node))
        if not _is_integer(p) and np.any(b < 0.0):
            raise FluxDomainError("negative base with non-integer exponent", _render(node))
        return b**p
    a = _eval_array(node.arg, u)
    if node.func == "sqrt":
        if np.any(a < 0.0):
            raise FluxDomainError("sqrt of a negative value", _render(node))
        return np.sqrt(a)
    if node.func == "exp":
        return np.exp(a)
    if node.func == "log":
        if np.any(a <= 0.0):
            raise FluxDomainError("log of a non-positive value", _render(node))
        return np.log(a)
    return np.abs(a)


@dataclass(frozen=True)
class FluxExpr:
    """An immutable parsed flux expression f(u)."""

    root: Node

    def text(self) -> str:
        """Canonical printed form; re-parsing it reproduces this tree."""
        return _render(self.root)

    def __str__(self) -> str:
        return self.text()

    def eval(self, u: float) -> float:
        """Evaluate f(u) in IEEE double precision."""
        return _eval(self.root, float(u))

    def eval_d(self, u: float) -> tuple[float, float]:
        """Evaluate (f(u), f'(u)) by forward-mode dual arithmetic.

        The value component performs exactly the same float operations in
        the same order as eval, so the two agree bit-for-bit.
        """
        return _eval_d(self.root, float(u))

    def eval_array(self, u: np.ndarray) -> np.ndarray:
        """Vectorized evaluation over a float array (one tree walk).

        Domain checks are collective: any offending element raises.
        Overflow propagates as inf and is reported at the end.
        """
        with np.errstate(over="ignore", under="ignore"):
            out = _eval_array(self.root, np.asarray(u, dtype=float))
        if not np.all(np.isfinite(out)):
            raise FluxDomainError("overflow", self.text())
        return out


def parse(text: str) -> FluxExpr:
    """Parse flux expression text into a FluxExpr.

    Raises FluxSyntaxError (with a byte offset) on malformed input,
    unknown identifiers, or a non-literal exponent.
    """
    if not text or not text.strip():
        raise FluxSyntaxError("empty expression", 0)
    return FluxExpr(_Parser(text).parse())
