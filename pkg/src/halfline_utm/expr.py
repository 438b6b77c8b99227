"""Scalar math expressions: parsing, evaluation, symbolic differentiation.

Coefficients and data (alpha, beta, ..., u0, g0, g1, g2, f) enter the solver
as strings in this little language.  The grammar is deliberately closed under
differentiation, so boundary-data derivatives like g0'(t) are exact rather
than finite-differenced.

Supported: numeric literals, identifiers, + - * / ^ (right-assoc), unary
minus, functions exp/sin/cos/sqrt/log/pow, constant pi.  Evaluation is real
(IEEE double) and broadcasts over NumPy arrays.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Expression", "Num", "Const", "Var", "Add", "Sub", "Mul", "Div", "Pow",
    "Neg", "Func", "ParseError", "EvalError", "parse", "evaluate",
    "differentiate", "substitute", "free_vars", "unparse", "simplify",
]


class ParseError(ValueError):
    """Syntax or vocabulary error, carrying the byte offset of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class EvalError(ValueError):
    """Unbound variable or domain violation, naming the subexpression."""


class Expression:
    """Base class for AST nodes.  Nodes are frozen and hence thread-safe."""

    __slots__ = ()

    def __call__(self, **bindings):
        return evaluate(self, bindings)

    def __str__(self):
        return unparse(self)


@dataclass(frozen=True)
class Num(Expression):
    value: float


@dataclass(frozen=True)
class Const(Expression):
    name: str  # only "pi"


@dataclass(frozen=True)
class Var(Expression):
    name: str


@dataclass(frozen=True)
class Add(Expression):
    a: Expression
    b: Expression


@dataclass(frozen=True)
class Sub(Expression):
    a: Expression
    b: Expression


@dataclass(frozen=True)
class Mul(Expression):
    a: Expression
    b: Expression


@dataclass(frozen=True)
class Div(Expression):
    a: Expression
    b: Expression


@dataclass(frozen=True)
class Pow(Expression):
    a: Expression
    b: Expression


@dataclass(frozen=True)
class Neg(Expression):
    a: Expression


@dataclass(frozen=True)
class Func(Expression):
    name: str  # exp, sin, cos, sqrt, log
    a: Expression


_FUNCTIONS = {"exp", "sin", "cos", "sqrt", "log"}
_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[a-zA-Z_][a-zA-Z0-9_]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", len(text) - len(stripped))
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "ident":
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val, off = self.next()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", off)

    def parse(self):
        e = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ParseError(f"expected end of input, found {val!r}", off)
        return e

    def expr(self):
        e = self.term()
        while True:
            kind, val, off = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                rhs = self.term()
                e = Add(e, rhs) if val == "+" else Sub(e, rhs)
            else:
                return e

    def term(self):
        e = self.factor()
        while True:
            kind, val, off = self.peek()
            if kind == "op" and val in "*/":
                self.next()
                rhs = self.factor()
                e = Mul(e, rhs) if val == "*" else Div(e, rhs)
            else:
                return e

    def factor(self):
        kind, val, off = self.peek()
        if kind == "op" and val == "-":
            self.next()
            return Neg(self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        kind, val, off = self.peek()
        if kind == "op" and val == "^":
            self.next()
            return Pow(base, self.factor())
        return base

    def atom(self):
        kind, val, off = self.next()
        if kind == "num":
            return Num(float(val))
        if kind == "ident":
            nkind, nval, _ = self.peek()
            if nkind == "op" and nval == "(":
                return self.call(val, off)
            if val == "pi":
                return Const("pi")
            return Var(val)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ParseError(f"expected a value, found {val!r}" if val else "unexpected end of input", off)

    def call(self, name, off):
        self.expect_op("(")
        args = [self.expr()]
        while True:
            kind, val, aoff = self.peek()
            if kind == "op" and val == ",":
                self.next()
                args.append(self.expr())
            else:
                break
        self.expect_op(")")
        if name == "pow":
            if len(args) != 2:
                raise ParseError("pow takes exactly 2 arguments", off)
            return Pow(args[0], args[1])
        if name not in _FUNCTIONS:
            raise ParseError(f"unknown function {name!r}", off)
        if len(args) != 1:
            raise ParseError(f"{name} takes exactly 1 argument", off)
        return Func(name, args[0])


def parse(text: str) -> Expression:
    """Parse ``text`` under standard precedence (^ > unary - > */ > +-)."""
    return _Parser(text).parse()


def _check_domain(name, arg_values, node):
    bad = None
    if name == "div":
        if np.any(arg_values == 0):
            bad = "division by zero"
    elif name == "sqrt":
        if np.any(arg_values < 0):
            bad = "sqrt of negative value"
    elif name == "log":
        if np.any(arg_values <= 0):
            bad = "log of non-positive value"
    if bad is not None:
        raise EvalError(f"{bad} in {unparse(node)!r}")


def evaluate(e: Expression, bindings=None):
    """Evaluate ``e`` at real bound values (scalars or NumPy arrays)."""
    b = bindings or {}
    return _eval(e, b)


def _eval(e, b):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Const):
        return math.pi
    if isinstance(e, Var):
        try:
            return b[e.name]
        except KeyError:
            raise EvalError(f"unbound variable {e.name!r}") from None
    if isinstance(e, Add):
        return _eval(e.a, b) + _eval(e.b, b)
    if isinstance(e, Sub):
        return _eval(e.a, b) - _eval(e.b, b)
    if isinstance(e, Mul):
        return _eval(e.a, b) * _eval(e.b, b)
    if isinstance(e, Div):
        den = _eval(e.b, b)
        _check_domain("div", np.asarray(den), e.b)
        return _eval(e.a, b) / den
    if isinstance(e, Pow):
        base = _eval(e.a, b)
        expo = _eval(e.b, b)
        with np.errstate(invalid="raise", divide="raise"):
            try:
                return np.power(base, expo) if isinstance(base, np.ndarray) or isinstance(expo, np.ndarray) else base ** expo
            except (FloatingPointError, ZeroDivisionError, ValueError):
                raise EvalError(f"domain error in {unparse(e)!r}") from None
    if isinstance(e, Neg):
        return -_eval(e.a, b)
    if isinstance(e, Func):
        val = _eval(e.a, b)
        if e.name == "exp":
            return np.exp(val)
        if e.name == "sin":
            return np.sin(val)
        if e.name == "cos":
            return np.cos(val)
        if e.name == "sqrt":
            _check_domain("sqrt", np.asarray(val), e)
            return np.sqrt(val)
        if e.name == "log":
            _check_domain("log", np.asarray(val), e)
            return np.log(val)
    raise TypeError(f"not an Expression node: {e!r}")


def _is_zero(e):
    return isinstance(e, Num) and e.value == 0


def _is_one(e):
    return isinstance(e, Num) and e.value == 1


def simplify(e: Expression) -> Expression:
    """Constant folding and unit/zero elimination (nothing fancier)."""
    if isinstance(e, (Num, Const, Var)):
        return e
    if isinstance(e, Neg):
        a = simplify(e.a)
        if isinstance(a, Num):
            return Num(-a.value)
        if isinstance(a, Neg):
            return a.a
        return Neg(a)
    if isinstance(e, Func):
        a = simplify(e.a)
        return Func(e.name, a)
    a, b = simplify(e.a), simplify(e.b)
    if isinstance(a, Num) and isinstance(b, Num):
        try:
            if isinstance(e, Add):
                return Num(a.value + b.value)
            if isinstance(e, Sub):
                return Num(a.value - b.value)
            if isinstance(e, Mul):
                return Num(a.value * b.value)
            if isinstance(e, Div) and b.value != 0:
                return Num(a.value / b.value)
            if isinstance(e, Pow):
                return Num(a.value ** b.value)
        except (OverflowError, ZeroDivisionError, ValueError):
            pass
    if isinstance(e, Add):
        if _is_zero(a):
            return b
        if _is_zero(b):
            return a
        return Add(a, b)
    if isinstance(e, Sub):
        if _is_zero(b):
            return a
        if _is_zero(a):
            return simplify(Neg(b))
        return Sub(a, b)
    if isinstance(e, Mul):
        if _is_zero(a) or _is_zero(b):
            return Num(0.0)
        if _is_one(a):
            return b
        if _is_one(b):
            return a
        if isinstance(a, Num) and a.value == -1:
            return simplify(Neg(b))
        if isinstance(b, Num) and b.value == -1:
            return simplify(Neg(a))
        return Mul(a, b)
    if isinstance(e, Div):
        if _is_zero(a):
            return Num(0.0)
        if _is_one(b):
            return a
        return Div(a, b)
    if isinstance(e, Pow):
        if _is_zero(b):
            return Num(1.0)
        if _is_one(b):
            return a
        return Pow(a, b)
    return type(e)(a, b)


def differentiate(e: Expression, var: str) -> Expression:
    """Exact derivative d e / d var, as a new Expression."""
    return simplify(_diff(e, var))


def _diff(e, var):
    if isinstance(e, (Num, Const)):
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0 if e.name == var else 0.0)
    if isinstance(e, Add):
        return Add(_diff(e.a, var), _diff(e.b, var))
    if isinstance(e, Sub):
        return Sub(_diff(e.a, var), _diff(e.b, var))
    if isinstance(e, Neg):
        return Neg(_diff(e.a, var))
    if isinstance(e, Mul):
        return Add(Mul(_diff(e.a, var), e.b), Mul(e.a, _diff(e.b, var)))
    if isinstance(e, Div):
        return Div(Sub(Mul(_diff(e.a, var), e.b), Mul(e.a, _diff(e.b, var))), Pow(e.b, Num(2.0)))
    if isinstance(e, Pow):
        db = simplify(_diff(e.b, var))
        da = _diff(e.a, var)
        if _is_zero(db):
            # constant exponent: power rule
            return Mul(Mul(e.b, Pow(e.a, simplify(Sub(e.b, Num(1.0))))), da)
        # general exponent: a^b * (b' log a + b a'/a)
        return Mul(e, Add(Mul(db, Func("log", e.a)), Mul(e.b, Div(da, e.a))))
    if isinstance(e, Func):
        da = _diff(e.a, var)
        if e.name == "exp":
            return Mul(e, da)
        if e.name == "sin":
            return Mul(Func("cos", e.a), da)
        if e.name == "cos":
            return Neg(Mul(Func("sin", e.a), da))
        if e.name == "sqrt":
            return Div(da, Mul(Num(2.0), e))
        if e.name == "log":
            return Div(da, e.a)
    raise TypeError(f"not an Expression node: {e!r}")


def substitute(e: Expression, var: str, replacement) -> Expression:
    """Replace every occurrence of ``var`` by an Expression or number."""
    rep = replacement if isinstance(replacement, Expression) else Num(float(replacement))
    return simplify(_subst(e, var, rep))


def _subst(e, var, rep):
    if isinstance(e, Var):
        return rep if e.name == var else e
    if isinstance(e, (Num, Const)):
        return e
    if isinstance(e, Neg):
        return Neg(_subst(e.a, var, rep))
    if isinstance(e, Func):
        return Func(e.name, _subst(e.a, var, rep))
    return type(e)(_subst(e.a, var, rep), _subst(e.b, var, rep))


def free_vars(e: Expression) -> frozenset:
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, (Num, Const)):
        return frozenset()
    if isinstance(e, (Neg, Func)):
        return free_vars(e.a)
    return free_vars(e.a) | free_vars(e.b)


_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def unparse(e: Expression) -> str:
    """Render to a string that reparses to an equivalent expression."""
    return _unparse(e, 0)


def _unparse(e, parent_prec):
    if isinstance(e, Num):
        v = e.value
        s = repr(v) if (v < 0 or v != int(v)) else str(int(v))
        return f"({s})" if v < 0 and parent_prec > 1 else s
    if isinstance(e, Const):
        return e.name
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({_unparse(e.a, 0)})"
    prec = _PREC[type(e)]
    if isinstance(e, Neg):
        s = "-" + _unparse(e.a, prec)
    elif isinstance(e, Add):
        s = f"{_unparse(e.a, prec)} + {_unparse(e.b, prec + 1)}"
    elif isinstance(e, Sub):
        s = f"{_unparse(e.a, prec)} - {_unparse(e.b, prec + 1)}"
    elif isinstance(e, Mul):
        s = f"{_unparse(e.a, prec)}*{_unparse(e.b, prec + 1)}"
    elif isinstance(e, Div):
        s = f"{_unparse(e.a, prec)}/{_unparse(e.b, prec + 1)}"
    else:  # Pow: right-associative
        s = f"{_unparse(e.a, prec + 1)}^{_unparse(e.b, prec)}"
    return f"({s})" if prec < parent_prec else s
