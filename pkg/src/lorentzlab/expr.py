"""Component expressions: parsing, printing, and jet (value/gradient/Hessian) evaluation.

Grammar (infix, no implicit multiplication)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' integer)?
    atom   := number | symbol | 'pi' | func '(' expr ')' | 'pow' '(' expr ',' integer ')'
            | '(' expr ')'
    func   := exp | log | sin | cos | sinh | cosh | tanh | sqrt

``integer`` may carry a sign and may be parenthesised, e.g. ``x^-2`` or ``x^(-2)``.
Unary minus binds looser than ``^``, so ``-x^2`` is ``-(x^2)``.

Evaluation is forward mode over second-order jets and is vectorised: a point
array of shape ``(..., n)`` yields jets whose value has shape ``(...)``,
gradient ``(..., n)`` and Hessian ``(..., n, n)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ExprDomainError, ExprSyntaxError, UndeclaredSymbolError

FUNCTIONS = ("exp", "log", "sin", "cos", "sinh", "cosh", "tanh", "sqrt")
CONSTANTS = {"pi": math.pi}


class Expr:
    """Base class of expression nodes. Nodes are immutable and hashable."""

    def symbols(self) -> set[str]:
        out: set[str] = set()
        for node in walk(self):
            if isinstance(node, Sym):
                out.add(node.name)
        return out

    def __str__(self) -> str:
        return to_source(self)

    # Light operator sugar so model constructors can compose trees in Python.
    def __add__(self, other):
        return Add(self, as_expr(other))

    def __radd__(self, other):
        return Add(as_expr(other), self)

    def __sub__(self, other):
        return Sub(self, as_expr(other))

    def __rsub__(self, other):
        return Sub(as_expr(other), self)

    def __mul__(self, other):
        return Mul(self, as_expr(other))

    def __rmul__(self, other):
        return Mul(as_expr(other), self)

    def __truediv__(self, other):
        return Div(self, as_expr(other))

    def __rtruediv__(self, other):
        return Div(as_expr(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, k: int):
        return Pow(self, int(k))


@dataclass(frozen=True, eq=True)
class Num(Expr):
    value: float
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True, eq=True)
class Sym(Expr):
    name: str
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True, eq=True)
class Add(Expr):
    left: Expr
    right: Expr
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True, eq=True)
class Sub(Expr):
    left: Expr
    right: Expr
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True, eq=True)
class Mul(Expr):
    left: Expr
    right: Expr
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True, eq=True)
class Div(Expr):
    left: Expr
    right: Expr
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    exponent: int
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True, eq=True)
class Call(Expr):
    func: str
    arg: Expr
    pos: int = field(default=-1, compare=False)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float, np.floating, np.integer)):
        return Num(float(value))
    if isinstance(value, str):
        raise TypeError("use parse() for strings")
    raise TypeError(f"cannot convert {value!r} to Expr")


def walk(e: Expr) -> Iterable[Expr]:
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, (Add, Sub, Mul, Div)):
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, (Neg, Call)):
            stack.append(node.arg)
        elif isinstance(node, Pow):
            stack.append(node.base)


def is_zero(e: Expr) -> bool:
    return isinstance(e, Num) and e.value == 0.0


# ---------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(source: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i = 0
    while i < len(source):
        if source[i].isspace():
            i += 1
            continue
        m = _TOKEN.match(source, i)
        if m is None or m.end() == i:
            raise ExprSyntaxError(f"unexpected character {source[i]!r}", source, i)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), start))
        i = m.end()
    toks.append(_Tok("end", "", len(source)))
    return toks


class _Parser:
    def __init__(self, source: str, coords: Sequence[str]):
        self.source = source
        self.coords = set(coords)
        self.toks = _tokenize(source)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.take()
        if tok.text != text:
            found = tok.text or "end of input"
            raise ExprSyntaxError(f"expected {text!r}, found {found!r}", self.source, tok.pos)
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {tok.text!r}", self.source, tok.pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek().text in ("+", "-"):
            tok = self.take()
            rhs = self.term()
            e = Add(e, rhs, tok.pos) if tok.text == "+" else Sub(e, rhs, tok.pos)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek().text in ("*", "/"):
            tok = self.take()
            rhs = self.unary()
            e = Mul(e, rhs, tok.pos) if tok.text == "*" else Div(e, rhs, tok.pos)
        return e

    def unary(self) -> Expr:
        tok = self.peek()
        if tok.text == "-":
            self.take()
            arg = self.unary()
            if isinstance(arg, Num):
                return Num(-arg.value, tok.pos)
            return Neg(arg, tok.pos)
        if tok.text == "+":
            self.take()
            return self.unary()
        return self.power()

    def integer(self) -> int:
        tok = self.peek()
        sign = 1
        if tok.text == "(":
            self.take()
            k = self.integer()
            self.expect(")")
            return k
        if tok.text in ("-", "+"):
            self.take()
            sign = -1 if tok.text == "-" else 1
            tok = self.peek()
        if tok.kind != "num":
            raise ExprSyntaxError("exponent must be an integer literal", self.source, tok.pos)
        self.take()
        value = float(tok.text)
        if value != int(value):
            raise ExprSyntaxError(
                "non-integer exponent; write general powers via exp/log", self.source, tok.pos
            )
        return sign * int(value)

    def power(self) -> Expr:
        base = self.atom()
        if self.peek().text == "^":
            tok = self.take()
            return Pow(base, self.integer(), tok.pos)
        return base

    def atom(self) -> Expr:
        tok = self.take()
        if tok.kind == "num":
            return Num(float(tok.text), tok.pos)
        if tok.text == "(":
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "name":
            if self.peek().text == "(":
                return self.call(tok)
            if tok.text in self.coords:
                return Sym(tok.text, tok.pos)
            if tok.text in CONSTANTS:
                return Num(CONSTANTS[tok.text], tok.pos)
            if tok.text in FUNCTIONS or tok.text == "pow":
                raise ExprSyntaxError(f"function {tok.text!r} needs arguments", self.source, tok.pos)
            raise UndeclaredSymbolError(tok.text, self.source, tok.pos)
        found = tok.text or "end of input"
        raise ExprSyntaxError(f"unexpected {found!r}", self.source, tok.pos)

    def call(self, name: _Tok) -> Expr:
        self.expect("(")
        if name.text == "pow":
            base = self.expr()
            self.expect(",")
            k = self.integer()
            self.expect(")")
            return Pow(base, k, name.pos)
        if name.text not in FUNCTIONS:
            raise ExprSyntaxError(f"unknown function {name.text!r}", self.source, name.pos)
        arg = self.expr()
        self.expect(")")
        return Call(name.text, arg, name.pos)


def parse(source: str, coords: Sequence[str]) -> Expr:
    """Parse ``source`` into an expression tree over the coordinate names ``coords``."""
    if not isinstance(source, str):
        return as_expr(source)
    return _Parser(source, coords).parse()


# ---------------------------------------------------------------------------
# Printing

def to_source(e: Expr) -> str:
    """Fully parenthesised source text; ``parse(to_source(e))`` rebuilds ``e``."""
    if isinstance(e, Num):
        text = repr(float(e.value))
        return f"({text})" if e.value < 0 or text.startswith("-") else text
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_source(e.arg)})"
    if isinstance(e, Add):
        return f"({to_source(e.left)} + {to_source(e.right)})"
    if isinstance(e, Sub):
        return f"({to_source(e.left)} - {to_source(e.right)})"
    if isinstance(e, Mul):
        return f"({to_source(e.left)} * {to_source(e.right)})"
    if isinstance(e, Div):
        return f"({to_source(e.left)} / {to_source(e.right)})"
    if isinstance(e, Pow):
        return f"({to_source(e.base)}^({e.exponent}))"
    if isinstance(e, Call):
        return f"{e.func}({to_source(e.arg)})"
    raise TypeError(type(e))


# ---------------------------------------------------------------------------
# Tree rewriting (no simplification beyond what callers ask for)

def substitute(e: Expr, values: Mapping[str, "Expr | float"]) -> Expr:
    """Replace symbols by expressions or numbers."""
    repl = {k: as_expr(v) for k, v in values.items()}

    def go(node: Expr) -> Expr:
        if isinstance(node, Sym):
            return repl.get(node.name, node)
        if isinstance(node, Num):
            return node
        if isinstance(node, Neg):
            return Neg(go(node.arg), node.pos)
        if isinstance(node, Pow):
            return Pow(go(node.base), node.exponent, node.pos)
        if isinstance(node, Call):
            return Call(node.func, go(node.arg), node.pos)
        return type(node)(go(node.left), go(node.right), node.pos)

    return go(e)


def rename(e: Expr, mapping: Mapping[str, str]) -> Expr:
    return substitute(e, {k: Sym(v) for k, v in mapping.items()})


def scale(c: float, e: Expr) -> Expr:
    """``c * e`` with the trivial cases folded, so constant metrics stay constant."""
    if c == 1.0:
        return e
    if isinstance(e, Num):
        return Num(c * e.value)
    return Mul(Num(float(c)), e)


# ---------------------------------------------------------------------------
# Jets

@dataclass
class Jet:
    """Value, gradient and (optionally) Hessian of a scalar, batched over leading axes."""

    value: np.ndarray
    grad: np.ndarray
    hess: np.ndarray | None = None

    @property
    def order(self) -> int:
        return 1 if self.hess is None else 2


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., :, None] * b[..., None, :]


def _apply(u: Jet, f0, f1, f2) -> Jet:
    """Chain rule for a scalar function with value f0, first and second derivatives f1, f2."""
    grad = f1[..., None] * u.grad
    hess = None
    if u.hess is not None:
        hess = f1[..., None, None] * u.hess + f2[..., None, None] * _outer(u.grad, u.grad)
    return Jet(f0, grad, hess)


def _add(a: Jet, b: Jet, sign: float = 1.0) -> Jet:
    hess = None if a.hess is None else a.hess + sign * b.hess
    return Jet(a.value + sign * b.value, a.grad + sign * b.grad, hess)


def _mul(a: Jet, b: Jet) -> Jet:
    grad = a.grad * b.value[..., None] + b.grad * a.value[..., None]
    hess = None
    if a.hess is not None:
        cross = _outer(a.grad, b.grad)
        hess = (
            a.hess * b.value[..., None, None]
            + b.hess * a.value[..., None, None]
            + (cross + np.swapaxes(cross, -1, -2))
        )
    return Jet(a.value * b.value, grad, hess)


class _Evaluator:
    def __init__(self, index: Mapping[str, int], points: np.ndarray, order: int, source: str | None):
        self.index = index
        self.points = points
        self.order = order
        self.n = points.shape[-1]
        self.shape = points.shape[:-1]
        self.source = source
        self._eye = np.eye(self.n)

    def const(self, c: float) -> Jet:
        value = np.full(self.shape, c, dtype=float)
        grad = np.zeros(self.shape + (self.n,))
        hess = np.zeros(self.shape + (self.n, self.n)) if self.order >= 2 else None
        return Jet(value, grad, hess)

    def fail(self, node: Expr, what: str):
        raise ExprDomainError(what, to_source(node), getattr(node, "pos", -1), self.source)

    def eval(self, node: Expr) -> Jet:
        if isinstance(node, Num):
            return self.const(node.value)
        if isinstance(node, Sym):
            try:
                i = self.index[node.name]
            except KeyError:
                raise UndeclaredSymbolError(node.name, self.source or to_source(node), node.pos) from None
            value = np.array(self.points[..., i], dtype=float)
            grad = np.broadcast_to(self._eye[i], self.shape + (self.n,)).copy()
            hess = np.zeros(self.shape + (self.n, self.n)) if self.order >= 2 else None
            return Jet(value, grad, hess)
        if isinstance(node, Neg):
            u = self.eval(node.arg)
            return Jet(-u.value, -u.grad, None if u.hess is None else -u.hess)
        if isinstance(node, Add):
            return _add(self.eval(node.left), self.eval(node.right))
        if isinstance(node, Sub):
            return _add(self.eval(node.left), self.eval(node.right), -1.0)
        if isinstance(node, Mul):
            return _mul(self.eval(node.left), self.eval(node.right))
        if isinstance(node, Div):
            num = self.eval(node.left)
            den = self.eval(node.right)
            v = den.value
            if np.any(v == 0.0) or not np.all(np.isfinite(v)):
                self.fail(node, "division by zero")
            inv = 1.0 / v
            return _mul(num, _apply(den, inv, -inv * inv, 2.0 * inv * inv * inv))
        if isinstance(node, Pow):
            u = self.eval(node.base)
            k = node.exponent
            v = u.value
            if k < 0 and np.any(v == 0.0):
                self.fail(node, "division by zero (negative power of zero)")
            if k == 0:
                return self.const(1.0)
            f0 = v ** k
            f1 = k * v ** (k - 1) if k != 1 else np.ones_like(v)
            if k == 1:
                f2 = np.zeros_like(v)
            elif k == 2:
                f2 = np.full_like(v, 2.0)
            else:
                f2 = k * (k - 1) * v ** (k - 2)
            return _apply(u, f0, f1, f2)
        if isinstance(node, Call):
            return self.call(node)
        raise TypeError(type(node))

    def call(self, node: Call) -> Jet:
        u = self.eval(node.arg)
        v = u.value
        f = node.func
        if f == "exp":
            e = np.exp(v)
            return _apply(u, e, e, e)
        if f == "log":
            if np.any(v <= 0.0):
                self.fail(node, "log of nonpositive value")
            inv = 1.0 / v
            return _apply(u, np.log(v), inv, -inv * inv)
        if f == "sqrt":
            if np.any(v < 0.0):
                self.fail(node, "sqrt of negative value")
            if self.order >= 1 and np.any(v == 0.0):
                self.fail(node, "sqrt is not differentiable at zero")
            r = np.sqrt(v)
            return _apply(u, r, 0.5 / r, -0.25 / (r * v))
        if f == "sin":
            s, c = np.sin(v), np.cos(v)
            return _apply(u, s, c, -s)
        if f == "cos":
            s, c = np.sin(v), np.cos(v)
            return _apply(u, c, -s, -c)
        if f == "sinh":
            s, c = np.sinh(v), np.cosh(v)
            return _apply(u, s, c, s)
        if f == "cosh":
            s, c = np.sinh(v), np.cosh(v)
            return _apply(u, c, s, c)
        if f == "tanh":
            t = np.tanh(v)
            sech2 = 1.0 - t * t
            return _apply(u, t, sech2, -2.0 * t * sech2)
        raise TypeError(f)


def eval_jet(e: Expr, coords: Sequence[str], point, order: int = 2, source: str | None = None) -> Jet:
    """Evaluate ``e`` and its derivatives up to ``order`` (1 or 2) at ``point``.

    ``point`` may be a single point of length ``len(coords)`` or a batch ``(..., n)``.
    """
    pts = np.asarray(point, dtype=float)
    if pts.shape[-1] != len(coords):
        raise ValueError(f"point has {pts.shape[-1]} components, chart has {len(coords)}")
    index = {c: i for i, c in enumerate(coords)}
    return _Evaluator(index, pts, order, source).eval(e)


def eval_jet2(e: Expr, coords: Sequence[str], point) -> Jet:
    return eval_jet(e, coords, point, order=2)


def eval_value(e: Expr, coords: Sequence[str], point) -> np.ndarray:
    """Value only (no derivative bookkeeping)."""
    pts = np.asarray(point, dtype=float)
    index = {c: i for i, c in enumerate(coords)}
    return _value(e, index, pts)


def _value(node: Expr, index, pts) -> np.ndarray:
    if isinstance(node, Num):
        return np.full(pts.shape[:-1], node.value)
    if isinstance(node, Sym):
        try:
            return np.array(pts[..., index[node.name]], dtype=float)
        except KeyError:
            raise UndeclaredSymbolError(node.name, to_source(node), node.pos) from None
    if isinstance(node, Neg):
        return -_value(node.arg, index, pts)
    if isinstance(node, Add):
        return _value(node.left, index, pts) + _value(node.right, index, pts)
    if isinstance(node, Sub):
        return _value(node.left, index, pts) - _value(node.right, index, pts)
    if isinstance(node, Mul):
        return _value(node.left, index, pts) * _value(node.right, index, pts)
    if isinstance(node, Div):
        den = _value(node.right, index, pts)
        if np.any(den == 0.0):
            raise ExprDomainError("division by zero", to_source(node), node.pos)
        return _value(node.left, index, pts) / den
    if isinstance(node, Pow):
        base = _value(node.base, index, pts)
        if node.exponent < 0 and np.any(base == 0.0):
            raise ExprDomainError("division by zero (negative power of zero)", to_source(node), node.pos)
        return base ** float(node.exponent)
    if isinstance(node, Call):
        v = _value(node.arg, index, pts)
        if node.func == "log" and np.any(v <= 0.0):
            raise ExprDomainError("log of nonpositive value", to_source(node), node.pos)
        if node.func == "sqrt" and np.any(v < 0.0):
            raise ExprDomainError("sqrt of negative value", to_source(node), node.pos)
        return getattr(np, node.func)(v)
    raise TypeError(type(node))
