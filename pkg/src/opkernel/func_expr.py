"""Small expression language for kernel factors, profiles and test functions.

Grammar (``*`` binds tighter than ``+``, ``^`` tighter than unary minus)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' INT)?
    atom   := NUMBER | 'pi' | VAR | FUNC '(' expr ')'
            | 'ind' '(' expr ',' expr (',' VAR)? ')' | '(' expr ')'

Variables are ``t`` and ``s``.  ``ind(lo, hi)`` is the closed indicator of
``[lo, hi]`` in ``t``; a third argument selects the variable.  Division is
accepted only by a constant divisor and is folded at parse time, so every
tree evaluates totally on the real line.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .domain_sets import LebesgueSet, OrderedPartition

__all__ = [
    "ParseError",
    "FuncExpr",
    "Const",
    "Var",
    "Indicator",
    "Func",
    "Pow",
    "Add",
    "Sub",
    "Mul",
    "Scale",
    "parse_expr",
    "evaluate",
    "eval_expr",
    "breakpoints",
    "to_text",
    "variables",
    "has_indicator",
    "is_simple",
    "SimpleFunction",
]

VARIABLES = ("t", "s")
FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}
BREAK_DEDUP = 1e-14


class ParseError(ValueError):
    """Syntax error carrying the 0-based character position."""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class FuncExpr:
    """Base class of expression nodes.  Nodes are frozen dataclasses."""

    def __call__(self, t, s=None):
        return evaluate(self, t, s)

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Const(FuncExpr):
    value: float


@dataclass(frozen=True)
class Var(FuncExpr):
    name: str = "t"


@dataclass(frozen=True)
class Indicator(FuncExpr):
    lo: float
    hi: float
    var: str = "t"

    @property
    def set(self) -> LebesgueSet:
        return LebesgueSet.interval(self.lo, self.hi)


@dataclass(frozen=True)
class Func(FuncExpr):
    name: str
    arg: FuncExpr


@dataclass(frozen=True)
class Pow(FuncExpr):
    base: FuncExpr
    n: int


@dataclass(frozen=True)
class Add(FuncExpr):
    left: FuncExpr
    right: FuncExpr


@dataclass(frozen=True)
class Sub(FuncExpr):
    left: FuncExpr
    right: FuncExpr


@dataclass(frozen=True)
class Mul(FuncExpr):
    left: FuncExpr
    right: FuncExpr


@dataclass(frozen=True)
class Scale(FuncExpr):
    c: float
    arg: FuncExpr


def Sin(arg):  # noqa: N802 - constructor-style helpers
    return Func("sin", arg)


def Cos(arg):  # noqa: N802
    return Func("cos", arg)


def Exp(arg):  # noqa: N802
    return Func("exp", arg)


# ---------------------------------------------------------------- smart builders

def _scale(c: float, e: FuncExpr) -> FuncExpr:
    if isinstance(e, Const):
        return Const(c * e.value)
    if isinstance(e, Scale):
        return Scale(c * e.c, e.arg)
    return Scale(c, e)


def _mul(a: FuncExpr, b: FuncExpr) -> FuncExpr:
    if isinstance(a, Const):
        return _scale(a.value, b)
    if isinstance(b, Const):
        return _scale(b.value, a)
    return Mul(a, b)


def _add(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return Add(a, b)


def _sub(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    return Sub(a, b)


def _neg(a):
    if isinstance(a, Const):
        return Const(-a.value)
    return _scale(-1.0, a)


def _pow(a, n):
    if isinstance(a, Const):
        return Const(a.value ** n)
    return Pow(a, n)


def _func(name, a):
    if isinstance(a, Const):
        return Const(float(FUNCTIONS[name](a.value)))
    return Func(name, a)


# ---------------------------------------------------------------- tokenizer

_TOKEN = re.compile(r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
                    r"|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))")


def _tokenize(text: str):
    pos = 0
    toks = []
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        toks.append((kind, m.group(kind), start))
        pos = m.end()
    toks.append(("end", "", n))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return ParseError(msg, tok[2], self.text)

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            shown = tok[1] or "end of input"
            raise ParseError(f"expected {value!r} but found {shown!r}", tok[2], self.text)
        return tok

    def parse(self):
        if self.peek()[0] == "end":
            raise self.error("empty expression")
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise self.error(f"unexpected token {tok[1]!r}")
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            r = self.term()
            e = _add(e, r) if op == "+" else _sub(e, r)
        return e

    def term(self):
        e = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            op_tok = self.take()
            r = self.unary()
            if op_tok[1] == "*":
                e = _mul(e, r)
            else:
                if not isinstance(r, Const):
                    raise ParseError("division is only allowed by a constant", op_tok[2],
                                     self.text)
                if r.value == 0.0:
                    raise ParseError("division by zero", op_tok[2], self.text)
                e = _scale(1.0 / r.value, e) if not isinstance(e, Const) else \
                    Const(e.value / r.value)
        return e

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return _neg(self.unary())
        if self.peek()[0] == "op" and self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "num" or not re.fullmatch(r"\d+", tok[1]):
                raise ParseError("exponent must be a non-negative integer literal", tok[2],
                                 self.text)
            return _pow(base, int(tok[1]))
        return base

    def atom(self):
        tok = self.take()
        kind, val, pos = tok
        if kind == "num":
            return Const(float(val))
        if kind == "id":
            if val == "pi":
                return Const(math.pi)
            if val in VARIABLES:
                return Var(val)
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return _func(val, arg)
            if val == "ind":
                return self.indicator(pos)
            raise ParseError(f"unknown identifier {val!r}", pos, self.text)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "end":
            raise ParseError("unexpected end of input", pos, self.text)
        raise ParseError(f"unexpected token {val!r}", pos, self.text)

    def indicator(self, pos):
        self.expect("(")
        lo_tok = self.peek()
        lo = self.expr()
        self.expect(",")
        hi_tok = self.peek()
        hi = self.expr()
        var = "t"
        if self.peek()[1] == ",":
            self.take()
            vt = self.take()
            if vt[0] != "id" or vt[1] not in VARIABLES:
                raise ParseError("indicator variable must be 't' or 's'", vt[2], self.text)
            var = vt[1]
        self.expect(")")
        if not isinstance(lo, Const):
            raise ParseError("indicator bounds must be constants", lo_tok[2], self.text)
        if not isinstance(hi, Const):
            raise ParseError("indicator bounds must be constants", hi_tok[2], self.text)
        if lo.value > hi.value:
            raise ParseError("indicator has lo > hi", pos, self.text)
        return Indicator(lo.value, hi.value, var)


def parse_expr(text: str) -> FuncExpr:
    """Parse ``text`` into an expression tree; raises :class:`ParseError`."""
    if not isinstance(text, str):
        raise TypeError("expression must be a string")
    return _Parser(text).parse()


# ---------------------------------------------------------------- evaluation

def _ev(e: FuncExpr, env: Mapping[str, np.ndarray], frozen):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise ValueError(f"no value bound for variable {e.name!r}") from None
    if isinstance(e, Indicator):
        src = frozen if frozen is not None else env
        x = src[e.var] if e.var in src else env[e.var]
        return ((x >= e.lo) & (x <= e.hi)).astype(float)
    if isinstance(e, Func):
        return FUNCTIONS[e.name](_ev(e.arg, env, frozen))
    if isinstance(e, Pow):
        return _ev(e.base, env, frozen) ** e.n
    if isinstance(e, Add):
        return _ev(e.left, env, frozen) + _ev(e.right, env, frozen)
    if isinstance(e, Sub):
        return _ev(e.left, env, frozen) - _ev(e.right, env, frozen)
    if isinstance(e, Mul):
        return _ev(e.left, env, frozen) * _ev(e.right, env, frozen)
    if isinstance(e, Scale):
        return e.c * _ev(e.arg, env, frozen)
    raise TypeError(f"not an expression node: {e!r}")


def evaluate(f: FuncExpr, t, s=None, *, frozen: Mapping[str, float] | None = None):
    """Vectorized evaluation.

    ``frozen`` maps variable names to reference values at which indicators
    are evaluated instead of the live arguments; the result is then the
    smooth continuation of the piece containing the reference point.
    """
    t_arr = np.asarray(t, dtype=float)
    env = {"t": t_arr}
    if s is not None:
        s_arr = np.asarray(s, dtype=float)
        env["s"] = s_arr
        shape = np.broadcast_shapes(t_arr.shape, s_arr.shape)
    else:
        shape = t_arr.shape
    fz = None
    if frozen is not None:
        fz = {k: np.asarray(v, dtype=float) for k, v in frozen.items()}
    out = np.broadcast_to(np.asarray(_ev(f, env, fz), dtype=float), shape)
    if out.ndim == 0:
        return float(out)
    return np.array(out)


def eval_expr(f: FuncExpr, t: float, s: float | None = None) -> float:
    """Scalar evaluation; indicators return 1 on their closed interval."""
    return float(evaluate(f, float(t), None if s is None else float(s)))


# ---------------------------------------------------------------- inspection

def _walk(e):
    yield e
    if isinstance(e, (Func, Scale)):
        yield from _walk(e.arg)
    elif isinstance(e, Pow):
        yield from _walk(e.base)
    elif isinstance(e, (Add, Sub, Mul)):
        yield from _walk(e.left)
        yield from _walk(e.right)


def variables(f: FuncExpr) -> set[str]:
    out = set()
    for n in _walk(f):
        if isinstance(n, Var):
            out.add(n.name)
        elif isinstance(n, Indicator):
            out.add(n.var)
    return out


def has_indicator(f: FuncExpr) -> bool:
    return any(isinstance(n, Indicator) for n in _walk(f))


def is_simple(f: FuncExpr) -> bool:
    """True when ``f`` is built only from constants and indicators."""
    allowed = (Const, Indicator, Add, Sub, Mul, Scale, Pow)
    return all(isinstance(n, allowed) for n in _walk(f))


def _dedup(points, tol=BREAK_DEDUP):
    pts = sorted(points)
    out = []
    for p in pts:
        if not out or p - out[-1] > tol:
            out.append(p)
    return out


def breakpoints(f: FuncExpr, window: Sequence[float], var: str = "t") -> list[float]:
    """Indicator endpoints of ``f`` in ``var`` inside ``window``, plus the window ends."""
    lo, hi = float(window[0]), float(window[1])
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("breakpoints need a finite window")
    pts = [lo, hi]
    for n in _walk(f):
        if isinstance(n, Indicator) and n.var == var:
            for p in (n.lo, n.hi):
                if lo <= p <= hi:
                    pts.append(p)
    return _dedup(pts)


def all_breakpoints(f: FuncExpr, var: str = "t") -> list[float]:
    """Every finite indicator endpoint of ``f`` in ``var``."""
    pts = []
    for n in _walk(f):
        if isinstance(n, Indicator) and n.var == var:
            pts.extend(p for p in (n.lo, n.hi) if math.isfinite(p))
    return _dedup(pts)


# ---------------------------------------------------------------- printing

def _fmt(v: float) -> str:
    if v == math.pi:
        return "pi"
    r = repr(float(v))
    return f"({r})" if v < 0 else r


def to_text(e: FuncExpr) -> str:
    """Canonical fully parenthesized form; parsing it returns an equal tree."""
    if isinstance(e, Const):
        return _fmt(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Indicator):
        extra = "" if e.var == "t" else f", {e.var}"
        return f"ind({_fmt(e.lo)}, {_fmt(e.hi)}{extra})"
    if isinstance(e, Func):
        return f"{e.name}({to_text(e.arg)})"
    if isinstance(e, Pow):
        return f"({to_text(e.base)})^{e.n}"
    if isinstance(e, Add):
        return f"({to_text(e.left)} + {to_text(e.right)})"
    if isinstance(e, Sub):
        return f"({to_text(e.left)} - {to_text(e.right)})"
    if isinstance(e, Mul):
        return f"({to_text(e.left)} * {to_text(e.right)})"
    if isinstance(e, Scale):
        return f"({_fmt(e.c)} * {to_text(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------- simple functions

MAX_CELLS = 64


class SimpleFunction:
    """Piecewise-constant function ``sum_k v_k I_{cell_k}`` on an ordered partition.

    Values on cell boundaries are immaterial; evaluation picks the first
    cell containing the point.
    """

    __slots__ = ("partition", "values")

    def __init__(self, partition: OrderedPartition, values: Sequence[float]):
        values = tuple(float(v) for v in values)
        if len(values) != len(partition.cells):
            raise ValueError("one value per cell is required")
        if len(values) > MAX_CELLS:
            raise ValueError(f"at most {MAX_CELLS} cells are supported")
        object.__setattr__(self, "partition", partition)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("SimpleFunction is immutable")

    @classmethod
    def from_expr(cls, f: FuncExpr, window: Sequence[float]) -> "SimpleFunction":
        if not is_simple(f):
            raise ValueError("expression is not built from indicators and constants")
        bps = breakpoints(f, window)
        if len(bps) - 1 > MAX_CELLS:
            raise ValueError(f"at most {MAX_CELLS} cells are supported")
        part = OrderedPartition.from_breakpoints(bps)
        mids = [0.5 * (a + b) for a, b in zip(bps[:-1], bps[1:])]
        vals = [eval_expr(f, m) for m in mids]
        return cls(part, vals)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        done = np.zeros(t.shape, dtype=bool)
        for cell, v in zip(self.partition.cells, self.values):
            m = cell.contains(t) & ~done
            out[m] = v
            done |= m
        return float(out) if out.ndim == 0 else out

    def to_expr(self) -> FuncExpr:
        terms = []
        for cell, v in zip(self.partition.cells, self.values):
            if v == 0.0:
                continue
            for lo, hi in cell.intervals:
                terms.append(_scale(v, Indicator(lo, hi)))
        if not terms:
            return Const(0.0)
        e = terms[0]
        for t in terms[1:]:
            e = Add(e, t)
        return e

    def __repr__(self):
        return f"SimpleFunction({self.partition!r}, {self.values!r})"
