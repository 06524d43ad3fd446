"""Holomorphic expression language.

Grammar (EBNF)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | power ;
    power   = atom { "^" int } ;
    int     = [ "-" ] digits | "(" [ "-" ] digits ")" ;
    atom    = number | "i" | var | func "(" expr ")" | "(" expr ")" ;
    number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] [ "i" | "j" ] ;
    var     = prefix digits ;            (* z1 .. zn, 1-based *)
    func    = "exp" | "log" | "sin" | "cos" | "sqrt" ;

Precedence is ``^`` > unary minus > ``*``/``/`` > ``+``/``-``; binary
operators associate to the left.  Exponents are integers; general powers are
written ``exp(log(a)*b)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt")


class ExprError(ValueError):
    """Syntax or range error in an expression, with the byte offset."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)


class DomainError(ArithmeticError):
    """Evaluation hit a pole or a branch point."""


@dataclass(frozen=True)
class Num:
    value: complex


@dataclass(frozen=True)
class Var:
    index: int  # 0-based


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class Add:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Sub:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Mul:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Div:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call]


@dataclass(frozen=True)
class HoloExpr:
    """A parsed expression over ``n`` chart variables."""

    ast: Node
    n: int
    prefix: str = "z"

    def __str__(self) -> str:
        return to_string(self.ast, self.prefix)

    def max_index(self) -> int:
        return _max_var(self.ast)


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?[ij]?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(src: str):
    pos = 0
    out = []
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ExprError(f"unexpected character {src[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(src)))
    return out


class _Parser:
    def __init__(self, src: str, n: int, prefix: str):
        self.toks = _tokenize(src)
        self.i = 0
        self.n = n
        self.prefix = prefix

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text: str):
        kind, val, pos = self.take()
        if val != text:
            raise ExprError(f"expected {text!r}, got {val or 'end of input'!r}", pos)

    def parse(self) -> Node:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprError(f"unexpected token {val!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.unary()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def unary(self) -> Node:
        if self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        node = self.atom()
        while self.peek()[1] == "^":
            self.take()
            node = Pow(node, self.integer())
        return node

    def integer(self) -> int:
        paren = self.peek()[1] == "("
        if paren:
            self.take()
        sign = 1
        if self.peek()[1] == "-":
            self.take()
            sign = -1
        kind, val, pos = self.take()
        if kind != "num" or not val.isdigit():
            raise ExprError("exponent must be an integer literal", pos)
        if paren:
            self.expect(")")
        return sign * int(val)

    def atom(self) -> Node:
        kind, val, pos = self.take()
        if kind == "num":
            if val[-1] in "ij":
                return Num(complex(0.0, float(val[:-1])))
            return Num(complex(float(val)))
        if kind == "name":
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            if val in ("i", "j"):
                return Num(1j)
            m = re.fullmatch(re.escape(self.prefix) + r"(\d+)", val)
            if m is None:
                raise ExprError(f"unknown name {val!r}", pos)
            k = int(m.group(1))
            if k < 1 or k > self.n:
                raise ExprError(
                    f"variable {val} out of range for chart dimension {self.n}", pos
                )
            return Var(k - 1)
        if val == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExprError(f"unexpected token {val or 'end of input'!r}", pos)


def parse(src: str, n: int, prefix: str = "z") -> HoloExpr:
    """Parse ``src`` into a :class:`HoloExpr` over variables ``z1..zn``."""
    if n < 1:
        raise ValueError("chart dimension must be >= 1")
    if not src or not src.strip():
        raise ExprError("empty expression", 0)
    return HoloExpr(_Parser(src, n, prefix).parse(), n, prefix)


# -- printing -------------------------------------------------------------

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _fmt_real(x: float) -> str:
    s = repr(float(x))
    if s in ("inf", "-inf", "nan"):
        raise ExprError(f"cannot print non-finite literal {s}")
    return s


def _fmt_num(z: complex) -> str:
    if z.imag == 0.0:
        return _fmt_real(z.real)
    if z.real == 0.0:
        return _fmt_real(z.imag) + "i"
    sign = "+" if z.imag >= 0 else "-"
    return f"({_fmt_real(z.real)}{sign}{_fmt_real(abs(z.imag))}i)"


def to_string(node: Node, prefix: str = "z") -> str:
    """Print with the minimal parentheses needed to reparse to the same tree."""
    if isinstance(node, Num):
        s = _fmt_num(node.value)
        return f"({s})" if s.startswith("-") else s
    if isinstance(node, Var):
        return f"{prefix}{node.index + 1}"
    if isinstance(node, Call):
        return f"{node.func}({to_string(node.arg, prefix)})"
    if isinstance(node, Neg):
        inner = to_string(node.arg, prefix)
        if _prec(node.arg) < _PREC[Neg]:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Pow):
        base = to_string(node.base, prefix)
        if _prec(node.base) < _PREC[Pow] or isinstance(node.base, Pow):
            base = f"({base})"
        e = node.exponent
        return f"{base}^{e}" if e >= 0 else f"{base}^({e})"
    op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(node)]
    p = _PREC[type(node)]
    left = to_string(node.left, prefix)
    if _prec(node.left) < p:
        left = f"({left})"
    right = to_string(node.right, prefix)
    # left-associative: an equal-precedence right operand needs parentheses
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left} {op} {right}"


def _prec(node: Node) -> int:
    return _PREC.get(type(node), 5)


def _max_var(node: Node) -> int:
    if isinstance(node, Var):
        return node.index + 1
    if isinstance(node, Num):
        return 0
    if isinstance(node, (Neg, Call)):
        return _max_var(node.arg)
    if isinstance(node, Pow):
        return _max_var(node.base)
    return max(_max_var(node.left), _max_var(node.right))


# -- AST construction helpers (used to compose metrics) --------------------

def const(c: complex) -> Node:
    return Num(complex(c))


def scale(expr: HoloExpr, factor: Node) -> HoloExpr:
    """Return ``factor * expr`` sharing the chart of ``expr``."""
    return HoloExpr(Mul(factor, expr.ast), expr.n, expr.prefix)


# -- evaluation -----------------------------------------------------------

def evaluate(node: Node, inputs, algebra):
    """Evaluate ``node`` with variable values ``inputs`` in ``algebra``.

    ``algebra`` supplies ``const``, ``add``, ``sub``, ``mul``, ``div``,
    ``neg``, ``powi`` and one method per function name.  The same tree is
    evaluated on plain complex arrays and on nested dual numbers.
    """
    if isinstance(node, Num):
        return algebra.const(node.value)
    if isinstance(node, Var):
        return inputs[node.index]
    if isinstance(node, Neg):
        return algebra.neg(evaluate(node.arg, inputs, algebra))
    if isinstance(node, Pow):
        return algebra.powi(evaluate(node.base, inputs, algebra), node.exponent)
    if isinstance(node, Call):
        return getattr(algebra, node.func)(evaluate(node.arg, inputs, algebra))
    a = evaluate(node.left, inputs, algebra)
    b = evaluate(node.right, inputs, algebra)
    if isinstance(node, Add):
        return algebra.add(a, b)
    if isinstance(node, Sub):
        return algebra.sub(a, b)
    if isinstance(node, Mul):
        return algebra.mul(a, b)
    return algebra.div(a, b)
