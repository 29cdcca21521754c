"""Expression trees in one variable ``t``: parser, printer, evaluator and
symbolic differentiation.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := NUMBER | 't' | FUNC '(' expr ')' | '(' expr ')'

No simplification is performed anywhere; trees are evaluated as written.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ExpressionSyntaxError, UnknownIdentifier

FUNCTIONS = ("log", "sqrt", "exp", "sin", "cos", "asinh")

_NUMPY_FUNCS = {
    "log": np.log,
    "sqrt": np.sqrt,
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "asinh": np.arcsinh,
}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Div:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Func:
    name: str
    arg: "Expr"

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise UnknownIdentifier(self.name, -1)


Expr = Union[Num, Var, Neg, Add, Sub, Mul, Div, Pow, Func]
T = Var()

_BINARY = {"+": Add, "-": Sub, "*": Mul, "/": Div, "^": Pow}
_SYMBOL = {Add: "+", Sub: "-", Mul: "*", Div: "/", Pow: "^"}


# --------------------------------------------------------------------------- lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # 'number', 'ident', or the operator character, or 'end'
    text: str
    offset: int


def _tokenize(source: str) -> list[_Token]:
    data = source.encode("utf-8")
    text = source
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        byte_off = len(text[:pos].encode("utf-8"))
        if m is None:
            raise ExpressionSyntaxError(
                f"unexpected character {text[pos]!r}",
                byte_off,
                frozenset({"NUMBER", "t", "FUNC", "(", "-", "+", "*", "/", "^", ")"}),
            )
        kind = m.lastgroup
        if kind != "ws":
            tok_kind = m.group() if kind == "op" else kind
            tokens.append(_Token(tok_kind, m.group(), byte_off))
        pos = m.end()
    tokens.append(_Token("end", "", len(data)))
    return tokens


# --------------------------------------------------------------------------- parser

_ATOM_START = frozenset({"NUMBER", "t", "FUNC", "("})
_FACTOR_START = _ATOM_START | {"-"}


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def _fail(self, expected):
        tok = self.tok
        what = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExpressionSyntaxError(f"unexpected {what}", tok.offset, frozenset(expected))

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            self._fail({"+", "-", "*", "/", "^", "end"})
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.tok.kind in ("+", "-"):
            op = self.tok.kind
            self.i += 1
            left = _BINARY[op](left, self.term())
        return left

    def term(self) -> Expr:
        left = self.factor()
        while self.tok.kind in ("*", "/"):
            op = self.tok.kind
            self.i += 1
            left = _BINARY[op](left, self.factor())
        return left

    def factor(self) -> Expr:
        if self.tok.kind == "-":
            self.i += 1
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "^":
            self.i += 1
            return Pow(base, self.factor())
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "number":
            self.i += 1
            return Num(float(tok.text))
        if tok.kind == "ident":
            if tok.text == "t":
                self.i += 1
                return T
            if tok.text in FUNCTIONS:
                self.i += 1
                if self.tok.kind != "(":
                    self._fail({"("})
                self.i += 1
                arg = self.expr()
                if self.tok.kind != ")":
                    self._fail({")", "+", "-", "*", "/", "^"})
                self.i += 1
                return Func(tok.text, arg)
            raise UnknownIdentifier(tok.text, tok.offset)
        if tok.kind == "(":
            self.i += 1
            inner = self.expr()
            if self.tok.kind != ")":
                self._fail({")", "+", "-", "*", "/", "^"})
            self.i += 1
            return inner
        self._fail(_FACTOR_START)


def parse(source: str) -> Expr:
    """Parse ``source`` into an expression tree."""
    return _Parser(source).parse()


# --------------------------------------------------------------------------- printer

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}
_ATOM_PREC = 5


def _prec(e: Expr) -> int:
    return _PREC.get(type(e), _ATOM_PREC)


def _fmt_num(v: float) -> str:
    s = repr(float(v))
    return f"({s})" if v < 0 or s.startswith("-") else s


def to_string(e: Expr) -> str:
    """Print ``e`` so that ``parse(to_string(e)) == e``."""

    def wrap(sub: Expr, min_prec: int) -> str:
        s = to_string(sub)
        return s if _prec(sub) >= min_prec else f"({s})"

    match e:
        case Num(value=v):
            return _fmt_num(v)
        case Var():
            return "t"
        case Func(name=name, arg=arg):
            return f"{name}({to_string(arg)})"
        case Neg(arg=arg):
            return "-" + wrap(arg, 3)
        case Pow(left=l, right=r):
            return wrap(l, _ATOM_PREC) + "^" + wrap(r, 3)
        case Add() | Sub() | Mul() | Div():
            p = _PREC[type(e)]
            return wrap(e.left, p) + _SYMBOL[type(e)] + wrap(e.right, p + 1)
    raise TypeError(f"not an expression node: {e!r}")


# --------------------------------------------------------------------------- evaluation


def evaluate(e: Expr, t):
    """Evaluate ``e`` at ``t`` (scalar or array). Non-finite results propagate."""
    with np.errstate(all="ignore"):
        return _eval(e, np.asarray(t, dtype=float))


def _eval(e: Expr, t):
    match e:
        case Num(value=v):
            return np.full_like(t, v)
        case Var():
            return t
        case Neg(arg=a):
            return -_eval(a, t)
        case Add(left=l, right=r):
            return _eval(l, t) + _eval(r, t)
        case Sub(left=l, right=r):
            return _eval(l, t) - _eval(r, t)
        case Mul(left=l, right=r):
            return _eval(l, t) * _eval(r, t)
        case Div(left=l, right=r):
            return _eval(l, t) / _eval(r, t)
        case Pow(left=l, right=r):
            return np.power(_eval(l, t), _eval(r, t))
        case Func(name=name, arg=a):
            return _NUMPY_FUNCS[name](_eval(a, t))
    raise TypeError(f"not an expression node: {e!r}")


# --------------------------------------------------------------------------- calculus


def depends_on_t(e: Expr) -> bool:
    match e:
        case Num():
            return False
        case Var():
            return True
        case Neg(arg=a) | Func(arg=a):
            return depends_on_t(a)
        case _:
            return depends_on_t(e.left) or depends_on_t(e.right)


def differentiate(e: Expr) -> Expr:
    """Return d e / dt by the standard rules, without simplification."""
    match e:
        case Num():
            return Num(0.0)
        case Var():
            return Num(1.0)
        case Neg(arg=u):
            return Neg(differentiate(u))
        case Add(left=u, right=v):
            return Add(differentiate(u), differentiate(v))
        case Sub(left=u, right=v):
            return Sub(differentiate(u), differentiate(v))
        case Mul(left=u, right=v):
            return Add(Mul(differentiate(u), v), Mul(u, differentiate(v)))
        case Div(left=u, right=v):
            num = Sub(Mul(differentiate(u), v), Mul(u, differentiate(v)))
            return Div(num, Pow(v, Num(2.0)))
        case Pow(left=u, right=v):
            # constant exponents avoid log(u), which is undefined for u <= 0
            if not depends_on_t(v):
                return Mul(Mul(v, Pow(u, Sub(v, Num(1.0)))), differentiate(u))
            if not depends_on_t(u):
                return Mul(Mul(e, Func("log", u)), differentiate(v))
            inner = Add(
                Mul(differentiate(v), Func("log", u)),
                Div(Mul(v, differentiate(u)), u),
            )
            return Mul(e, inner)
        case Func(name=name, arg=u):
            du = differentiate(u)
            match name:
                case "log":
                    return Div(du, u)
                case "sqrt":
                    return Div(du, Mul(Num(2.0), e))
                case "exp":
                    return Mul(e, du)
                case "sin":
                    return Mul(Func("cos", u), du)
                case "cos":
                    return Neg(Mul(Func("sin", u), du))
                case "asinh":
                    return Div(du, Func("sqrt", Add(Num(1.0), Pow(u, Num(2.0)))))
    raise TypeError(f"not an expression node: {e!r}")
