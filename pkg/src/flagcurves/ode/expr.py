"""Expressions f(x, y, y', ..., y^(k)): parsing, printing, differentiation, evaluation.

Grammar (whitespace is ignored)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          # right associative, binds tighter than unary minus
    atom    := number | variable | func '(' expr ')' | '(' expr ')'
    func    := sin | cos | exp | log | sqrt
    variable:= x | y | y' | y'' | ... | y0 | y1 | ... | yk

``y`` followed by n primes is the same variable as ``yn``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

FUNCS = ("sin", "cos", "exp", "log", "sqrt")
DIV_EPS = 1e-300


class ExprSyntaxError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


class DomainError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "x" or "y<i>"

    @property
    def index(self) -> int | None:
        return None if self.name == "x" else int(self.name[1:])


@dataclass(frozen=True)
class Unary:
    op: str  # neg or a function name
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / ^
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Var, Unary, Binary]


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_]\w*'*)|(?P<op>[-+*/^()]))")


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    toks, pos = [], 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", pos)
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(("end", "", len(src)))
    return toks


class _Parser:
    def __init__(self, src: str, k: int):
        self.toks = _tokenize(src)
        self.i = 0
        self.k = k

    def peek(self):
        return self.toks[self.i]

    def take(self, value: str | None = None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            raise ExprSyntaxError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {val!r}", pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            e = Binary(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            e = Binary(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.peek()[1] == "-" and self.peek()[0] == "op":
            self.take()
            arg = self.unary()
            return Const(-arg.value) if isinstance(arg, Const) else Unary("neg", arg)
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            return Binary("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            return Const(float(val))
        if kind == "id":
            if val in FUNCS:
                self.take("(")
                arg = self.expr()
                self.take(")")
                return Unary(val, arg)
            return self.variable(val, pos)
        if val == "(":
            e = self.expr()
            self.take(")")
            return e
        raise ExprSyntaxError(f"unexpected {'end of input' if kind == 'end' else repr(val)}", pos)

    def variable(self, name: str, pos: int) -> Var:
        if name == "x":
            return Var("x")
        m = re.fullmatch(r"y('*)|y(\d+)", name)
        if not m:
            raise ExprSyntaxError(f"unknown identifier {name!r}", pos)
        order = len(m.group(1)) if m.group(2) is None else int(m.group(2))
        if order > self.k:
            raise ExprSyntaxError(f"derivative order {order} beyond k = {self.k}", pos)
        return Var(f"y{order}")


def parse_expr(src: str, k: int) -> Expr:
    """Parse ``src`` with variables x, y0..yk (or y, y', y'', ...)."""
    return _Parser(src, k).parse()


def to_string(e: Expr) -> str:
    """Fully parenthesized text that re-parses to an equal tree."""
    if isinstance(e, Const):
        text = repr(float(e.value))
        return f"({text})" if e.value < 0 or text.startswith("-") else text
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        return f"(-{to_string(e.arg)})" if e.op == "neg" else f"{e.op}({to_string(e.arg)})"
    return f"({to_string(e.left)} {e.op} {to_string(e.right)})"


def variables(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Unary):
        return variables(e.arg)
    if isinstance(e, Binary):
        return variables(e.left) | variables(e.right)
    return set()


# ---------------------------------------------------------------------------
# smart constructors with constant folding
# ---------------------------------------------------------------------------

def _finite(v: float) -> bool:
    return math.isfinite(v)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Unary) and a.op == "neg":
        return a.arg
    return Unary("neg", a)


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if a == Const(0.0):
        return b
    if b == Const(0.0):
        return a
    return Binary("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if b == Const(0.0):
        return a
    if a == Const(0.0):
        return neg(b)
    return Binary("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if Const(0.0) in (a, b):
        return Const(0.0)
    if a == Const(1.0):
        return b
    if b == Const(1.0):
        return a
    return Binary("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0:
        return Const(a.value / b.value)
    if a == Const(0.0) and b != Const(0.0):
        return Const(0.0)
    if b == Const(1.0):
        return a
    return Binary("/", a, b)


def pow_(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        try:
            v = a.value ** b.value
            if isinstance(v, float) and _finite(v):
                return Const(v)
        except (OverflowError, ZeroDivisionError):
            pass
    if b == Const(0.0):
        return Const(1.0)
    if b == Const(1.0):
        return a
    return Binary("^", a, b)


def func(name: str, a: Expr) -> Expr:
    if isinstance(a, Const):
        try:
            v = float(_SCALAR[name](a.value))
            if _finite(v):
                return Const(v)
        except (ValueError, DomainError):
            pass
    return Unary(name, a)


def simplify(e: Expr) -> Expr:
    """Bottom-up constant folding."""
    if isinstance(e, Unary):
        a = simplify(e.arg)
        return neg(a) if e.op == "neg" else func(e.op, a)
    if isinstance(e, Binary):
        a, b = simplify(e.left), simplify(e.right)
        return {"+": add, "-": sub, "*": mul, "/": div, "^": pow_}[e.op](a, b)
    return e


# ---------------------------------------------------------------------------
# differentiation
# ---------------------------------------------------------------------------

def _var_name(var) -> str:
    if isinstance(var, int):
        return f"y{var}"
    return var


def differentiate(e: Expr, var) -> Expr:
    """Symbolic partial derivative with respect to ``"x"``, ``"y<i>"`` or index i."""
    v = _var_name(var)
    return _d(e, v)


def _d(e: Expr, v: str) -> Expr:
    if isinstance(e, Const):
        return Const(0.0)
    if isinstance(e, Var):
        return Const(1.0 if e.name == v else 0.0)
    if isinstance(e, Unary):
        a, da = e.arg, _d(e.arg, v)
        if da == Const(0.0):
            return Const(0.0)
        outer = {
            "neg": lambda: Const(-1.0),
            "sin": lambda: func("cos", a),
            "cos": lambda: neg(func("sin", a)),
            "exp": lambda: func("exp", a),
            "log": lambda: div(Const(1.0), a),
            "sqrt": lambda: div(Const(0.5), func("sqrt", a)),
        }[e.op]()
        return neg(da) if e.op == "neg" else mul(outer, da)
    a, b = e.left, e.right
    da, db = _d(a, v), _d(b, v)
    if e.op == "+":
        return add(da, db)
    if e.op == "-":
        return sub(da, db)
    if e.op == "*":
        return add(mul(da, b), mul(a, db))
    if e.op == "/":
        return div(sub(mul(da, b), mul(a, db)), pow_(b, Const(2.0)))
    # power
    if db == Const(0.0):
        return mul(mul(b, pow_(a, sub(b, Const(1.0)))), da)
    return mul(pow_(a, b), add(mul(db, func("log", a)), div(mul(b, da), a)))


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _log(a):
    if np.any(np.asarray(a) <= 0):
        raise DomainError("log of a non-positive number")
    return np.log(a)


def _sqrt(a):
    if np.any(np.asarray(a) < 0):
        raise DomainError("sqrt of a negative number")
    return np.sqrt(a)


_SCALAR = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "log": _log, "sqrt": _sqrt}


def _divide(a, b):
    if np.any(np.abs(np.asarray(b)) < DIV_EPS):
        raise DomainError("division by (nearly) zero")
    return a / b


def _power(a, b):
    a_arr, b_arr = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if np.any((a_arr < 0) & (b_arr != np.round(b_arr))):
        raise DomainError("negative base with non-integer exponent")
    if np.any((a_arr == 0) & (b_arr < 0)):
        raise DomainError("zero to a negative power")
    return np.power(a_arr, b_arr) if a_arr.ndim or b_arr.ndim else float(a_arr ** b_arr)


_BINARY = {"+": lambda a, b: a + b, "-": lambda a, b: a - b, "*": lambda a, b: a * b,
           "/": _divide, "^": _power}


def compile_expr(e: Expr) -> Callable[[object, object], object]:
    """Closure ``fn(x, ys)`` with ``ys[i]`` the value of y_i; works on scalars or arrays."""
    if isinstance(e, Const):
        c = e.value
        return lambda x, ys: c
    if isinstance(e, Var):
        i = e.index
        return (lambda x, ys: x) if i is None else (lambda x, ys: ys[i])
    if isinstance(e, Unary):
        f = compile_expr(e.arg)
        if e.op == "neg":
            return lambda x, ys: -f(x, ys)
        g = _SCALAR[e.op]
        return lambda x, ys: g(f(x, ys))
    l, r, op = compile_expr(e.left), compile_expr(e.right), _BINARY[e.op]
    return lambda x, ys: op(l(x, ys), r(x, ys))


def evaluate(e: Expr, env: dict):
    """Evaluate with ``env`` mapping "x" and "y0".."yk" to numbers or arrays."""
    needed = variables(e)
    missing = needed - set(env)
    if missing:
        raise KeyError(f"unbound variables {sorted(missing)}")
    k = max((int(n[1:]) for n in needed if n != "x"), default=-1)
    ys = [env.get(f"y{i}", 0.0) for i in range(k + 1)]
    with np.errstate(all="ignore"):
        return compile_expr(e)(env.get("x", 0.0), ys)
