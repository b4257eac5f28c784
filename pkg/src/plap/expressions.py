"""Small recursive-descent parser for coordinate-dependent coefficient fields.

Grammar (binding loosest to tightest):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Names cover the coordinate variables x, y, r, the constants pi and e,
and the functions sin, cos, exp, abs (one argument) and min, max (two
arguments).  Scenarios embed weights as these expression strings so a
configuration file stays self-contained.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

__all__ = ["ExpressionError", "Expression", "parse_expression", "evaluate_on_domain"]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[()+\-*/^,]))"
)

_CONSTANTS = {"pi": math.pi, "e": math.e}
_UNARY_FN = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "abs": np.abs}
_BINARY_FN = {"min": np.minimum, "max": np.maximum}
_VARIABLES = ("x", "y", "r")


class ExpressionError(ValueError):
    """Malformed expression; the message carries the offending position."""


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(src: str) -> list[_Tok]:
    out = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            if src[pos:].strip() == "":
                break
            raise ExpressionError(f"unexpected character {src[pos]!r} at position {pos}")
        if m.lastgroup is None:
            break
        out.append(_Tok(m.lastgroup, m.group(m.lastgroup), m.start(m.lastgroup)))
        pos = m.end()
    out.append(_Tok("end", "", len(src)))
    return out


class Expression:
    """A parsed expression: call with keyword arrays for its variables."""

    def __init__(self, src: str, fn, variables: frozenset):
        self.src = src
        self._fn = fn
        self.variables = variables

    def __call__(self, **env):
        missing = self.variables - env.keys()
        if missing:
            raise ExpressionError(f"missing variables {sorted(missing)} for {self.src!r}")
        return self._fn(env)

    def __repr__(self):
        return f"Expression({self.src!r})"


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0
        self.vars: set[str] = set()

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self, text: str | None = None) -> _Tok:
        t = self.toks[self.i]
        if text is not None and t.text != text:
            raise ExpressionError(f"expected {text!r} at position {t.pos} in {self.src!r}")
        self.i += 1
        return t

    def parse(self):
        fn = self.expr()
        t = self.peek()
        if t.kind != "end":
            raise ExpressionError(f"trailing input {t.text!r} at position {t.pos} in {self.src!r}")
        return fn

    def expr(self):
        fn = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            rhs = self.term()
            if op == "+":
                fn = (lambda a, b: lambda env: a(env) + b(env))(fn, rhs)
            else:
                fn = (lambda a, b: lambda env: a(env) - b(env))(fn, rhs)
        return fn

    def term(self):
        fn = self.unary()
        while self.peek().text in ("*", "/"):
            op = self.take().text
            rhs = self.unary()
            if op == "*":
                fn = (lambda a, b: lambda env: a(env) * b(env))(fn, rhs)
            else:
                fn = (lambda a, b: lambda env: a(env) / b(env))(fn, rhs)
        return fn

    def unary(self):
        if self.peek().text == "-":
            self.take()
            inner = self.unary()
            return lambda env: -inner(env)
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek().text == "^":
            self.take()
            expo = self.unary()
            return lambda env: base(env) ** expo(env)
        return base

    def atom(self):
        t = self.take()
        if t.kind == "num":
            val = float(t.text)
            return lambda env: val
        if t.kind == "name":
            name = t.text
            if self.peek().text == "(":
                self.take("(")
                args = [self.expr()]
                while self.peek().text == ",":
                    self.take(",")
                    args.append(self.expr())
                self.take(")")
                if name in _UNARY_FN:
                    if len(args) != 1:
                        raise ExpressionError(f"{name} takes one argument (position {t.pos})")
                    g = _UNARY_FN[name]
                    a0 = args[0]
                    return lambda env: g(a0(env))
                if name in _BINARY_FN:
                    if len(args) != 2:
                        raise ExpressionError(f"{name} takes two arguments (position {t.pos})")
                    g = _BINARY_FN[name]
                    a0, a1 = args
                    return lambda env: g(a0(env), a1(env))
                raise ExpressionError(f"unknown function {name!r} at position {t.pos}")
            if name in _CONSTANTS:
                val = _CONSTANTS[name]
                return lambda env: val
            if name in _VARIABLES:
                self.vars.add(name)
                return lambda env: env[name]
            raise ExpressionError(f"unknown name {name!r} at position {t.pos}")
        if t.text == "(":
            inner = self.expr()
            self.take(")")
            return inner
        raise ExpressionError(f"unexpected token {t.text!r} at position {t.pos} in {self.src!r}")


def parse_expression(src: str) -> Expression:
    if not isinstance(src, str) or not src.strip():
        raise ExpressionError("empty expression")
    p = _Parser(src)
    fn = p.parse()
    return Expression(src, fn, frozenset(p.vars))


def evaluate_on_domain(expr: Expression, dom) -> np.ndarray:
    """Sample an expression on the domain nodes.

    Interval domains expose x, rectangles x and y, balls the radius r.
    """
    if dom.kind == "rectangle":
        x, y = dom.coords()
        env = {"x": x, "y": y}
    elif dom.kind == "ball":
        env = {"r": dom.coords()[0]}
    else:
        env = {"x": dom.coords()[0]}
    bad = expr.variables - env.keys()
    if bad:
        raise ExpressionError(
            f"expression {expr.src!r} uses {sorted(bad)} unavailable on a {dom.kind} domain"
        )
    vals = expr(**{k: env[k] for k in expr.variables})
    return np.broadcast_to(np.asarray(vals, dtype=float), dom.shape).copy()
