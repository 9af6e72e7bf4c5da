"""A tiny arithmetic expression language for coefficient and data fields.

Grammar (precedence low to high, binaries left-associative, ^ right-assoc):

    sum    := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | 'x' | 'y' | 'pi' | FUNC '(' sum ')' | '(' sum ')'

Functions: sin, cos, exp. Evaluation goes through numpy, so compiled
expressions accept scalars or arrays for x and y.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ExprSyntaxError

FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}
VARIABLES = ("x", "y")
CONSTANTS = {"pi": math.pi}

# precedence levels used by to_source()
_PREC_SUM, _PREC_TERM, _PREC_UNARY, _PREC_POWER, _PREC_ATOM = 1, 2, 3, 4, 5


@dataclass(frozen=True)
class Num:
    value: float

    def evaluate(self, x, y):
        return self.value

    def precedence(self):
        return _PREC_UNARY if self.value < 0 else _PREC_ATOM

    def to_source(self):
        if math.isfinite(self.value) and self.value == int(self.value):
            return str(int(self.value))
        return repr(self.value)


@dataclass(frozen=True)
class Name:
    ident: str

    def evaluate(self, x, y):
        if self.ident == "x":
            return x
        if self.ident == "y":
            return y
        return CONSTANTS[self.ident]

    def precedence(self):
        return _PREC_ATOM

    def to_source(self):
        return self.ident


@dataclass(frozen=True)
class Call:
    func: str
    arg: object

    def evaluate(self, x, y):
        return FUNCTIONS[self.func](self.arg.evaluate(x, y))

    def precedence(self):
        return _PREC_ATOM

    def to_source(self):
        return f"{self.func}({self.arg.to_source()})"


@dataclass(frozen=True)
class Neg:
    operand: object

    def evaluate(self, x, y):
        return -self.operand.evaluate(x, y)

    def precedence(self):
        return _PREC_UNARY

    def to_source(self):
        return "-" + _wrap(self.operand, _PREC_UNARY)


_BINOPS = {
    "+": (np.add, _PREC_SUM),
    "-": (np.subtract, _PREC_SUM),
    "*": (np.multiply, _PREC_TERM),
    "/": (np.true_divide, _PREC_TERM),
    "^": (np.power, _PREC_POWER),
}


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object

    def evaluate(self, x, y):
        fn = _BINOPS[self.op][0]
        return fn(self.left.evaluate(x, y), self.right.evaluate(x, y))

    def precedence(self):
        return _BINOPS[self.op][1]

    def to_source(self):
        prec = self.precedence()
        if self.op == "^":
            # right-associative: parenthesize a left operand of equal level
            left = _wrap(self.left, prec + 1)
            right = _wrap(self.right, _PREC_UNARY)
        else:
            left = _wrap(self.left, prec)
            right = _wrap(self.right, prec + 1)
        return f"{left} {self.op} {right}" if self.op in "+-" else f"{left}{self.op}{right}"


def _wrap(node, min_prec):
    src = node.to_source()
    return src if node.precedence() >= min_prec else f"({src})"


class Expr:
    """A parsed expression; callable on coordinate scalars or arrays."""

    def __init__(self, root, source):
        self.root = root
        self.source = source

    def __call__(self, x, y):
        return self.root.evaluate(x, y)

    def __eq__(self, other):
        return isinstance(other, Expr) and self.root == other.root

    def __repr__(self):
        return f"Expr({self.to_source()!r})"

    def to_source(self):
        return self.root.to_source()


class _Tokenizer:
    def __init__(self, src):
        self.src = src
        self.pos = 0

    def peek(self):
        self._skip_ws()
        if self.pos >= len(self.src):
            return ("end", "", self.pos)
        ch = self.src[self.pos]
        if ch in "+-*/^()":
            return ("op", ch, self.pos)
        if ch.isdigit() or (ch == "." and self._digit_at(self.pos + 1)):
            return self._number()
        if ch.isalpha() or ch == "_":
            return self._ident()
        raise ExprSyntaxError(f"unexpected character {ch!r}", self.pos)

    def advance(self):
        tok = self.peek()
        self.pos = tok[2] + len(tok[1])
        return tok

    def _skip_ws(self):
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def _digit_at(self, i):
        return i < len(self.src) and self.src[i].isdigit()

    def _number(self):
        start = i = self.pos
        src = self.src
        while i < len(src) and (src[i].isdigit() or src[i] == "."):
            i += 1
        if i < len(src) and src[i] in "eE" and (
            self._digit_at(i + 1)
            or (i + 1 < len(src) and src[i + 1] in "+-" and self._digit_at(i + 2))
        ):
            i += 2 if src[i + 1] in "+-" else 1
            while i < len(src) and src[i].isdigit():
                i += 1
        text = src[start:i]
        try:
            float(text)
        except ValueError:
            raise ExprSyntaxError(f"malformed number {text!r}", start) from None
        return ("num", text, start)

    def _ident(self):
        start = i = self.pos
        src = self.src
        while i < len(src) and (src[i].isalnum() or src[i] == "_"):
            i += 1
        return ("ident", src[start:i], start)


class _Parser:
    def __init__(self, src):
        self.tokens = _Tokenizer(src)

    def parse(self):
        node = self.sum()
        kind, text, pos = self.tokens.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected trailing input {text!r}", pos)
        return node

    def sum(self):
        node = self.term()
        while True:
            kind, text, _ = self.tokens.peek()
            if kind == "op" and text in "+-":
                self.tokens.advance()
                node = BinOp(text, node, self.term())
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, text, _ = self.tokens.peek()
            if kind == "op" and text in "*/":
                self.tokens.advance()
                node = BinOp(text, node, self.unary())
            else:
                return node

    def unary(self):
        kind, text, _ = self.tokens.peek()
        if kind == "op" and text == "-":
            self.tokens.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        kind, text, _ = self.tokens.peek()
        if kind == "op" and text == "^":
            self.tokens.advance()
            return BinOp("^", node, self.unary())
        return node

    def atom(self):
        kind, text, pos = self.tokens.advance()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            if text in FUNCTIONS:
                self._expect("(")
                arg = self.sum()
                self._expect(")")
                return Call(text, arg)
            if text in VARIABLES or text in CONSTANTS:
                return Name(text)
            raise ExprSyntaxError(f"unknown identifier {text!r}", pos)
        if kind == "op" and text == "(":
            node = self.sum()
            self._expect(")")
            return node
        raise ExprSyntaxError(f"expected a value, got {text!r}" if text else "unexpected end of input", pos)

    def _expect(self, symbol):
        kind, text, pos = self.tokens.peek()
        if kind != "op" or text != symbol:
            raise ExprSyntaxError(f"expected {symbol!r}", pos)
        self.tokens.advance()


def parse_expr(src):
    """Parse an expression string into a callable :class:`Expr`."""
    if not isinstance(src, str):
        raise ExprSyntaxError("expression source must be a string", 0)
    return Expr(_Parser(src).parse(), src)
