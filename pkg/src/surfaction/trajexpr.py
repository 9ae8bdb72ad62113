"""A small expression language for analytic trajectories x(t).

Grammar (whitespace insignificant)::

    expr     := term (("+" | "-") term)*
    term     := unary (("*" | "/") unary)*
    unary    := "-" unary | power
    power    := primary ("^" exponent)?
    exponent := "-" exponent | NUMBER ("^" exponent)? | "(" exponent ")"
    primary  := NUMBER | "t" | "c" | "pi" | FUNC "(" expr ")" | "(" expr ")"

``^`` binds tighter than unary minus and is right-associative; its exponent
may only contain numeric literals, which keeps differentiation total.
Implicit multiplication is not supported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, InputError

FUNCTIONS = ("sin", "cos", "exp", "sqrt", "tanh")
CONSTANTS = ("c", "pi")
VARIABLE = "t"


class ExprError(InputError):
    """Base class for expression errors; ``position`` is a 0-based offset."""

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)
        self.position = position


class ExprLexError(ExprError):
    def __init__(self, char, position):
        super().__init__(f"unexpected character {char!r}", position)
        self.char = char


class ExprSyntaxError(ExprError):
    def __init__(self, found, expected, position):
        exp = ", ".join(sorted(expected))
        super().__init__(f"syntax error: found {found}, expected one of {{{exp}}}", position)
        self.found = found
        self.expected = frozenset(expected)


class UnknownIdentifierError(ExprError):
    def __init__(self, name, position):
        super().__init__(f"unknown identifier {name!r}", position)
        self.name = name


class ExprDomainError(DomainError):
    """Evaluation hit an undefined operation (sqrt of negative, 1/0, ...)."""

    def __init__(self, node, t, detail=""):
        msg = f"domain error evaluating {to_string(node)!r} at t={t!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.node = node
        self.t = t


# ---------------------------------------------------------------------------
# AST

class Expr:
    __slots__ = ()

    def __str__(self):
        return to_string(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Const(Expr):
    name: str


@dataclass(frozen=True)
class Var(Expr):
    pass


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: Expr


@dataclass(frozen=True)
class Func(Expr):
    name: str
    arg: Expr


# ---------------------------------------------------------------------------
# lexing

_PUNCT = {"+", "-", "*", "/", "^", "(", ")"}


@dataclass(frozen=True)
class _Token:
    kind: str  # "num", "ident", one of _PUNCT, or "end"
    text: str
    pos: int
    value: float = 0.0


def _describe(tok):
    if tok.kind == "end":
        return "end of input"
    return repr(tok.text)


def tokenize(text):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _PUNCT:
            tokens.append(_Token(ch, ch, i))
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            start = i
            while i < n and text[i].isdigit():
                i += 1
            if i < n and text[i] == ".":
                i += 1
                while i < n and text[i].isdigit():
                    i += 1
            if i < n and text[i] in "eE":
                j = i + 1
                if j < n and text[j] in "+-":
                    j += 1
                if j < n and text[j].isdigit():
                    i = j
                    while i < n and text[i].isdigit():
                        i += 1
            lit = text[start:i]
            value = float(lit)
            if not math.isfinite(value):
                raise ExprError(f"numeric literal {lit!r} overflows", start)
            tokens.append(_Token("num", lit, start, value))
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            tokens.append(_Token("ident", text[start:i], start))
            continue
        raise ExprLexError(ch, i)
    tokens.append(_Token("end", "", n))
    return tokens


# ---------------------------------------------------------------------------
# parsing

_PRIMARY_START = frozenset({"number", "t", "c", "pi", "(", "-", *FUNCTIONS})


class _Parser:
    def __init__(self, text, bindings):
        self.tokens = tokenize(text)
        self.i = 0
        self.bindings = bindings

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind, expected=None):
        if self.tok.kind != kind:
            raise ExprSyntaxError(_describe(self.tok), expected or {kind}, self.tok.pos)
        return self.advance()

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(_describe(self.tok),
                                  {"+", "-", "*", "/", "^", "end of input"}, self.tok.pos)
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind in ("+", "-"):
            op = self.advance().kind
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind in ("*", "/"):
            op = self.advance().kind
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.tok.kind == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.primary()
        if self.tok.kind == "^":
            self.advance()
            return Pow(base, self.exponent())
        return base

    def exponent(self):
        tok = self.tok
        if tok.kind == "-":
            self.advance()
            return Neg(self.exponent())
        if tok.kind == "(":
            self.advance()
            node = self.exponent()
            self.expect(")")
            return node
        if tok.kind == "num":
            self.advance()
            node = Num(tok.value)
            if self.tok.kind == "^":
                self.advance()
                return Pow(node, self.exponent())
            return node
        raise ExprSyntaxError(_describe(tok), {"number", "-", "("}, tok.pos)

    def primary(self):
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Num(tok.value)
        if tok.kind == "(":
            self.advance()
            node = self.expr()
            self.expect(")", {")", "+", "-", "*", "/", "^"})
            return node
        if tok.kind == "ident":
            self.advance()
            name = tok.text
            if name == VARIABLE:
                return Var()
            if name in CONSTANTS:
                return Const(name)
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")", {")", "+", "-", "*", "/", "^"})
                return Func(name, arg)
            if name in self.bindings:
                return _num(float(self.bindings[name]))
            raise UnknownIdentifierError(name, tok.pos)
        raise ExprSyntaxError(_describe(tok), _PRIMARY_START, tok.pos)


def parse(text, bindings=None):
    """Parse ``text`` into an expression tree.

    ``bindings`` maps extra identifiers (family parameters such as ``a``)
    to numbers; they are substituted as literals.
    """
    if not isinstance(text, str):
        raise InputError(f"expression must be a string, got {type(text).__name__}")
    bindings = dict(bindings or {})
    reserved = set(FUNCTIONS) | set(CONSTANTS) | {VARIABLE}
    clash = reserved.intersection(bindings)
    if clash:
        raise InputError(f"cannot rebind reserved identifier(s): {sorted(clash)}")
    return _Parser(text, bindings).parse()


# ---------------------------------------------------------------------------
# printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_NEG_PREC = 3
_POW_PREC = 4
_ATOM_PREC = 5


def _prec(node):
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _NEG_PREC
    if isinstance(node, Pow):
        return _POW_PREC
    if isinstance(node, Num) and node.value < 0:
        return _NEG_PREC
    return _ATOM_PREC


def _fmt_num(value):
    if value == int(value) and abs(value) < 1e16:
        return str(int(value)) if value >= 0 else f"-{int(-value)}"
    return repr(value)


def to_string(node):
    """Print with minimal parentheses; the output re-parses to the same tree."""
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Var):
        return VARIABLE
    if isinstance(node, Func):
        return f"{node.name}({to_string(node.arg)})"
    if isinstance(node, Neg):
        inner = to_string(node.operand)
        if _prec(node.operand) < _NEG_PREC:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Pow):
        base = to_string(node.base)
        if _prec(node.base) <= _POW_PREC:
            base = f"({base})"
        return f"{base}^{_exponent_string(node.exponent)}"
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        left = to_string(node.left)
        if _prec(node.left) < p:
            left = f"({left})"
        right = to_string(node.right)
        if _prec(node.right) <= p:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an expression node: {node!r}")


def _exponent_string(node):
    if isinstance(node, Num):
        return _fmt_num(node.value) if node.value >= 0 else f"({_fmt_num(node.value)})"
    if isinstance(node, Neg):
        return "-" + _exponent_string(node.operand)
    if isinstance(node, Pow) and isinstance(node.base, Num) and node.base.value >= 0:
        return f"{_fmt_num(node.base.value)}^{_exponent_string(node.exponent)}"
    raise ValueError(f"exponent is not a literal constant: {node!r}")


# ---------------------------------------------------------------------------
# evaluation

def _constant_value(name, c):
    return c if name == "c" else math.pi


_FUNC_IMPL = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "sqrt": math.sqrt,
    "tanh": math.tanh,
}


def _eval(node, t, c):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return t
    if isinstance(node, Const):
        return _constant_value(node.name, c)
    if isinstance(node, Neg):
        return -_eval(node.operand, t, c)
    if isinstance(node, BinOp):
        a = _eval(node.left, t, c)
        b = _eval(node.right, t, c)
        if node.op == "+":
            out = a + b
        elif node.op == "-":
            out = a - b
        elif node.op == "*":
            out = a * b
        else:
            if b == 0.0:
                raise ExprDomainError(node, t, "division by zero")
            out = a / b
    elif isinstance(node, Pow):
        a = _eval(node.base, t, c)
        b = _eval(node.exponent, t, c)
        if a == 0.0 and b < 0:
            raise ExprDomainError(node, t, "zero raised to a negative power")
        if a < 0 and b != int(b):
            raise ExprDomainError(node, t, "negative base with fractional exponent")
        try:
            out = math.pow(a, b)
        except OverflowError:
            raise ExprDomainError(node, t, "overflow") from None
    elif isinstance(node, Func):
        x = _eval(node.arg, t, c)
        if node.name == "sqrt" and x < 0:
            raise ExprDomainError(node, t, "square root of a negative number")
        try:
            out = _FUNC_IMPL[node.name](x)
        except (OverflowError, ValueError) as exc:
            raise ExprDomainError(node, t, str(exc)) from None
    else:
        raise TypeError(f"not an expression node: {node!r}")
    if not math.isfinite(out):
        raise ExprDomainError(node, t, "non-finite result")
    return out


def evaluate(e, t, u=None):
    """Evaluate ``e`` at time ``t`` with ``c`` taken from the unit system."""
    c = 1.0 if u is None else u.c
    return _eval(e, float(t), c)


def _codegen(node):
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return "t"
    if isinstance(node, Const):
        return "c" if node.name == "c" else "pi"
    if isinstance(node, Neg):
        return f"(-{_codegen(node.operand)})"
    if isinstance(node, BinOp):
        return f"({_codegen(node.left)} {node.op} {_codegen(node.right)})"
    if isinstance(node, Pow):
        return f"pow({_codegen(node.base)}, {_codegen(node.exponent)})"
    if isinstance(node, Func):
        return f"{node.name}({_codegen(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def compile_expr(e, u=None):
    """Return a fast scalar callable ``f(t)`` equivalent to ``evaluate(e, t, u)``.

    On any arithmetic failure the slow tree walk is re-run so the raised
    ExprDomainError names the offending sub-expression.
    """
    c = 1.0 if u is None else u.c
    namespace = {"pi": math.pi, "c": c, "pow": math.pow, **_FUNC_IMPL}
    fast = eval(f"lambda t: {_codegen(e)}", namespace)  # noqa: S307 - generated from a checked AST
    isfinite = math.isfinite

    def f(t):
        try:
            out = fast(t)
        except (ArithmeticError, ValueError):
            out = math.nan
        if not isfinite(out):
            return _eval(e, float(t), c)
        return out

    return f


# ---------------------------------------------------------------------------
# differentiation

ZERO = Num(0.0)
ONE = Num(1.0)


def _num(value):
    return Num(value) if value >= 0 else Neg(Num(-value))


def _const_value(node):
    """Numeric value of a literal-only subtree, or None."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Neg):
        v = _const_value(node.operand)
        return None if v is None else -v
    if isinstance(node, Pow):
        a, b = _const_value(node.base), _const_value(node.exponent)
        if a is None or b is None:
            return None
        try:
            return math.pow(a, b)
        except (ValueError, OverflowError, ZeroDivisionError):
            return None
    if isinstance(node, BinOp):
        a, b = _const_value(node.left), _const_value(node.right)
        if a is None or b is None:
            return None
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        return a / b if b != 0 else None
    return None


def _is_zero(node):
    return isinstance(node, Num) and node.value == 0.0


def _is_one(node):
    return isinstance(node, Num) and node.value == 1.0


def _add(a, b):
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return _num(a.value + b.value)
    if isinstance(b, Neg):
        return _sub(a, b.operand)
    return BinOp("+", a, b)


def _sub(a, b):
    if _is_zero(b):
        return a
    if _is_zero(a):
        return _neg(b)
    if isinstance(a, Num) and isinstance(b, Num):
        return _num(a.value - b.value)
    if isinstance(b, Neg):
        return _add(a, b.operand)
    return BinOp("-", a, b)


def _neg(a):
    if _is_zero(a):
        return ZERO
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def _mul(a, b):
    if _is_zero(a) or _is_zero(b):
        return ZERO
    if _is_one(a):
        return b
    if _is_one(b):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return _num(a.value * b.value)
    if isinstance(a, Neg):
        return _neg(_mul(a.operand, b))
    if isinstance(b, Neg):
        return _neg(_mul(a, b.operand))
    return BinOp("*", a, b)


def _div(a, b):
    if _is_zero(a):
        return ZERO
    if _is_one(b):
        return a
    return BinOp("/", a, b)


def _is_constant(node):
    if isinstance(node, (Num, Const)):
        return True
    if isinstance(node, Var):
        return False
    if isinstance(node, Neg):
        return _is_constant(node.operand)
    if isinstance(node, BinOp):
        return _is_constant(node.left) and _is_constant(node.right)
    if isinstance(node, Pow):
        return _is_constant(node.base)
    if isinstance(node, Func):
        return _is_constant(node.arg)
    raise TypeError(f"not an expression node: {node!r}")


def differentiate(e):
    """Exact derivative of ``e`` with respect to t."""
    if _is_constant(e):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Neg):
        return _neg(differentiate(e.operand))
    if isinstance(e, BinOp):
        a, b = e.left, e.right
        da, db = differentiate(a), differentiate(b)
        if e.op == "+":
            return _add(da, db)
        if e.op == "-":
            return _sub(da, db)
        if e.op == "*":
            return _add(_mul(da, b), _mul(a, db))
        # (a/b)' = a'/b - a b'/b^2
        return _sub(_div(da, b), _div(_mul(a, db), Pow(b, Num(2.0))))
    if isinstance(e, Pow):
        n = _const_value(e.exponent)
        if n is None:
            raise ValueError(f"non-literal exponent in {to_string(e)!r}")
        du = differentiate(e.base)
        if n == 1.0:
            return du
        lowered = e.base if n - 1.0 == 1.0 else Pow(e.base, _num(n - 1.0))
        return _mul(_mul(_num(n), lowered), du)
    if isinstance(e, Func):
        u = e.arg
        du = differentiate(u)
        if e.name == "sin":
            outer = Func("cos", u)
        elif e.name == "cos":
            outer = Neg(Func("sin", u))
        elif e.name == "exp":
            outer = e
        elif e.name == "sqrt":
            return _div(du, _mul(Num(2.0), e))
        else:  # tanh
            outer = BinOp("-", ONE, Pow(e, Num(2.0)))
        return _mul(outer, du)
    raise TypeError(f"not an expression node: {e!r}")
