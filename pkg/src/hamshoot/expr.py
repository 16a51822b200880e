"""Scalar expression language for specifying Hamiltonians and couplings.

Systems are written as plain text, e.g. ``"0.5*(mu*pos(u)^2 + nu*neg(u)^2 + v^2)"``,
parsed once into an immutable AST and then evaluated with numeric bindings.
Evaluation accepts floats or numpy arrays transparently, and forward-mode dual
numbers provide exact derivatives for the gradient fields.

Grammar (EBNF), whitespace-insensitive::

    expression := term { ("+" | "-") term }
    term       := factor { ("*" | "/") factor }
    factor     := "-" factor | power
    power      := atom [ "^" factor ]          # right-associative
    atom       := NUMBER | NAME | NAME "(" expression {"," expression} ")"
                | "(" expression ")"

Precedence from tightest: ``^``, unary minus, ``* /``, ``+ -``, so
``-2^2 == -4`` and ``2^3^2 == 512``.  There is no implicit multiplication.

Functions: sin, cos, exp, ln, abs, sqrt, atan, pos, neg (one argument),
min, max (two arguments), with ``pos(s) = max(s, 0)`` and ``neg(s) = max(-s, 0)``.
At the kink of pos/neg/abs the derivative is fixed to 0 (a deterministic
subgradient choice); min/max follow the second argument's derivative on ties.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ExprSyntaxError, UnboundVariableError

__all__ = [
    "Expr", "Num", "Var", "Neg", "BinOp", "Call",
    "parse_expr", "eval_expr", "grad_expr", "unparse", "free_variables", "has_kinks", "Dual",
]


# --------------------------------------------------------------------------
# AST
# --------------------------------------------------------------------------

class Expr:
    """Base class for AST nodes. Nodes are frozen and shareable."""

    __slots__ = ()


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * / ^
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    args: tuple


FUNCTION_ARITY = {
    "sin": 1, "cos": 1, "exp": 1, "ln": 1, "abs": 1, "sqrt": 1, "atan": 1,
    "pos": 1, "neg": 1, "min": 2, "max": 2,
}


# --------------------------------------------------------------------------
# Tokenizer / parser
# --------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(src):
    tokens = []
    pos = 0
    n = len(src)
    while pos < n:
        m = _TOKEN_RE.match(src, pos)
        if m is None or m.end() == pos:
            # skip leading whitespace manually to report the true offset
            stripped = pos
            while stripped < n and src[stripped].isspace():
                stripped += 1
            if stripped >= n:
                break
            raise ExprSyntaxError(f"unexpected character {src[stripped]!r}", stripped)
        kind = m.lastgroup
        text = m.group(kind)
        tokens.append((kind, text, m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, src):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, text, off = self.peek()
        if kind != "op" or text != op:
            raise ExprSyntaxError(f"expected {op!r}, found {text or 'end of input'!r}", off)
        return self.advance()

    def parse(self):
        e = self.expression()
        kind, text, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected trailing token {text!r}", off)
        return e

    def expression(self):
        e = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                e = BinOp(text, e, self.term())
            else:
                return e

    def term(self):
        e = self.factor()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                e = BinOp(text, e, self.factor())
            else:
                return e

    def factor(self):
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            return BinOp("^", base, self.factor())
        return base

    def atom(self):
        kind, text, off = self.advance()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            nkind, ntext, _ = self.peek()
            if nkind == "op" and ntext == "(":
                if text not in FUNCTION_ARITY:
                    raise ExprSyntaxError(f"unknown function {text!r}", off)
                self.advance()
                args = [self.expression()]
                while True:
                    k2, t2, o2 = self.peek()
                    if k2 == "op" and t2 == ",":
                        self.advance()
                        args.append(self.expression())
                    else:
                        break
                self.expect_op(")")
                if len(args) != FUNCTION_ARITY[text]:
                    raise ExprSyntaxError(
                        f"{text} takes {FUNCTION_ARITY[text]} argument(s), got {len(args)}", off)
                return Call(text, tuple(args))
            return Var(text)
        if kind == "op" and text == "(":
            e = self.expression()
            self.expect_op(")")
            return e
        raise ExprSyntaxError(
            f"expected a number, name or '(', found {text or 'end of input'!r}", off)


def parse_expr(src):
    """Parse ``src`` into an :class:`Expr` AST.

    Raises :class:`ExprSyntaxError` (with a byte offset) on malformed input.
    """
    return _Parser(src).parse()


# --------------------------------------------------------------------------
# Dual numbers (forward mode)
# --------------------------------------------------------------------------

class Dual:
    """Value together with a vector of partial derivatives.

    ``der`` has shape ``(nvars,) + shape(val)`` so array-valued bindings
    differentiate in one pass.
    """

    __slots__ = ("val", "der")

    # make ndarray <op> Dual defer to the reflected Dual operators instead of
    # broadcasting Dual as an object scalar
    __array_ufunc__ = None

    def __init__(self, val, der):
        self.val = val
        self.der = der

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.der + other.der)
        return Dual(self.val + other, self.der)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.der - other.der)
        return Dual(self.val - other, self.der)

    def __rsub__(self, other):
        return Dual(other - self.val, -self.der)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val * other.val, self.der * other.val + self.val * other.der)
        return Dual(self.val * other, self.der * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            _check_nonzero_divisor(other.val)
            return Dual(self.val / other.val,
                        (self.der * other.val - self.val * other.der) / other.val ** 2)
        _check_nonzero_divisor(other)
        return Dual(self.val / other, self.der / other)

    def __rtruediv__(self, other):
        _check_nonzero_divisor(self.val)
        return Dual(other / self.val, -other * self.der / self.val ** 2)

    def __neg__(self):
        return Dual(-self.val, -self.der)


def _check_nonzero_divisor(x):
    if np.any(np.asarray(x) == 0.0):
        raise DomainError("division by zero")


def _pow(base, expo):
    """x^y with domain checking; handles Dual in either slot."""
    if isinstance(expo, Dual):
        bval = base.val if isinstance(base, Dual) else base
        if np.any(np.asarray(bval) <= 0.0):
            raise DomainError("x^y with variable exponent requires x > 0")
        ln_b = _fn_ln(base)
        return _fn_exp(expo * ln_b)
    # plain exponent
    e = float(expo)
    bval = base.val if isinstance(base, Dual) else base
    barr = np.asarray(bval, dtype=float)
    if e != np.round(e):
        if np.any(barr < 0.0):
            raise DomainError("negative base with non-integer exponent")
    if e < 0 and np.any(barr == 0.0):
        raise DomainError("zero base with negative exponent")
    if not isinstance(base, Dual):
        return np.power(bval, e)
    val = np.power(base.val, e)
    return Dual(val, e * np.power(base.val, e - 1.0) * base.der)


def _fn_exp(x):
    if isinstance(x, Dual):
        v = np.exp(x.val)
        return Dual(v, v * x.der)
    return np.exp(x)


def _fn_ln(x):
    xv = x.val if isinstance(x, Dual) else x
    if np.any(np.asarray(xv) <= 0.0):
        raise DomainError("ln of a nonpositive value")
    if isinstance(x, Dual):
        return Dual(np.log(x.val), x.der / x.val)
    return np.log(x)


def _fn_sqrt(x):
    xv = x.val if isinstance(x, Dual) else x
    if np.any(np.asarray(xv) < 0.0):
        raise DomainError("sqrt of a negative value")
    if isinstance(x, Dual):
        if np.any(np.asarray(x.val) == 0.0):
            raise DomainError("sqrt not differentiable at 0")
        v = np.sqrt(x.val)
        return Dual(v, 0.5 * x.der / v)
    return np.sqrt(x)


def _fn_abs(x):
    if isinstance(x, Dual):
        # subgradient 0 at the kink, matching pos/neg
        return Dual(np.abs(x.val), np.sign(x.val) * x.der)
    return np.abs(x)


def _fn_pos(x):
    if isinstance(x, Dual):
        return Dual(np.maximum(x.val, 0.0), np.where(x.val > 0.0, 1.0, 0.0) * x.der)
    return np.maximum(x, 0.0)


def _fn_neg(x):
    if isinstance(x, Dual):
        return Dual(np.maximum(-x.val, 0.0), np.where(x.val < 0.0, -1.0, 0.0) * x.der)
    return np.maximum(-x, 0.0)


def _fn_sin(x):
    if isinstance(x, Dual):
        return Dual(np.sin(x.val), np.cos(x.val) * x.der)
    return np.sin(x)


def _fn_cos(x):
    if isinstance(x, Dual):
        return Dual(np.cos(x.val), -np.sin(x.val) * x.der)
    return np.cos(x)


def _fn_atan(x):
    if isinstance(x, Dual):
        return Dual(np.arctan(x.val), x.der / (1.0 + x.val ** 2))
    return np.arctan(x)


def _fn_min(a, b):
    av = a.val if isinstance(a, Dual) else a
    bv = b.val if isinstance(b, Dual) else b
    if not (isinstance(a, Dual) or isinstance(b, Dual)):
        return np.minimum(av, bv)
    ad = a.der if isinstance(a, Dual) else 0.0
    bd = b.der if isinstance(b, Dual) else 0.0
    # ties follow the second argument
    take_a = av < bv
    return Dual(np.minimum(av, bv), np.where(take_a, ad, bd))


def _fn_max(a, b):
    av = a.val if isinstance(a, Dual) else a
    bv = b.val if isinstance(b, Dual) else b
    if not (isinstance(a, Dual) or isinstance(b, Dual)):
        return np.maximum(av, bv)
    ad = a.der if isinstance(a, Dual) else 0.0
    bd = b.der if isinstance(b, Dual) else 0.0
    take_a = av > bv
    return Dual(np.maximum(av, bv), np.where(take_a, ad, bd))


_FUNCTIONS = {
    "sin": _fn_sin, "cos": _fn_cos, "exp": _fn_exp, "ln": _fn_ln,
    "abs": _fn_abs, "sqrt": _fn_sqrt, "atan": _fn_atan,
    "pos": _fn_pos, "neg": _fn_neg, "min": _fn_min, "max": _fn_max,
}


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------

def _eval(e, binding):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return binding[e.name]
        except KeyError:
            raise UnboundVariableError(f"variable {e.name!r} is not bound") from None
    if isinstance(e, Neg):
        return -_eval(e.arg, binding)
    if isinstance(e, BinOp):
        a = _eval(e.lhs, binding)
        b = _eval(e.rhs, binding)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            if not isinstance(a, Dual) and not isinstance(b, Dual):
                _check_nonzero_divisor(b)
            return a / b
        if e.op == "^":
            return _pow(a, b)
        raise AssertionError(e.op)
    if isinstance(e, Call):
        args = [_eval(a, binding) for a in e.args]
        return _FUNCTIONS[e.fn](*args)
    raise TypeError(f"not an Expr node: {e!r}")


def eval_expr(e, binding):
    """Evaluate ``e`` with the given name->value binding.

    Values may be floats or numpy arrays (broadcast with numpy rules).
    Raises :class:`UnboundVariableError` or :class:`DomainError`.
    """
    out = _eval(e, binding)
    if isinstance(out, Dual):
        raise TypeError("binding contains Dual values; use grad_expr")
    return out


def grad_expr(e, var_names, binding):
    """Forward-mode gradient of ``e`` with respect to ``var_names`` at ``binding``.

    Returns an array of shape ``(len(var_names),) + shape(value)``.  Values of
    the differentiation variables may be floats or arrays; the remaining
    bindings stay passive.  pos/neg/abs use the fixed subgradient 0 at their
    kink, so the result is deterministic everywhere.
    """
    k = len(var_names)
    seeded = dict(binding)
    # seeds carry singleton trailing axes so they broadcast against any
    # array-valued binding (including passive ones like an array of times)
    ndim = max((np.ndim(val) for val in binding.values()), default=0)
    for i, v in enumerate(var_names):
        if v not in binding:
            raise UnboundVariableError(f"variable {v!r} is not bound")
        der = np.zeros((k,) + (1,) * ndim)
        der[i] = 1.0
        seeded[v] = Dual(np.asarray(binding[v], dtype=float), der)
    out = _eval(e, seeded)
    if not isinstance(out, Dual):
        return np.zeros((k,) + np.shape(np.asarray(out)))
    val = np.asarray(out.val)
    der = np.asarray(out.der)
    target = (k,) + val.shape
    if der.shape != target:
        if val.shape == ():
            der = der.reshape(k)
        else:
            der = np.array(np.broadcast_to(der, target))
    return der


def substitute(e, mapping):
    """Rename variables: ``mapping`` maps old names to new names."""
    if isinstance(e, Num):
        return e
    if isinstance(e, Var):
        return Var(mapping.get(e.name, e.name))
    if isinstance(e, Neg):
        return Neg(substitute(e.arg, mapping))
    if isinstance(e, BinOp):
        return BinOp(e.op, substitute(e.lhs, mapping), substitute(e.rhs, mapping))
    if isinstance(e, Call):
        return Call(e.fn, tuple(substitute(a, mapping) for a in e.args))
    raise TypeError(f"not an Expr node: {e!r}")


def has_kinks(e):
    """True if ``e`` contains a non-smooth node (pos, neg, abs, min, max)."""
    if isinstance(e, (Num, Var)):
        return False
    if isinstance(e, Neg):
        return has_kinks(e.arg)
    if isinstance(e, BinOp):
        return has_kinks(e.lhs) or has_kinks(e.rhs)
    if isinstance(e, Call):
        return e.fn in ("pos", "neg", "abs", "min", "max") or any(has_kinks(a) for a in e.args)
    raise TypeError(f"not an Expr node: {e!r}")


def free_variables(e):
    """Set of variable names appearing in ``e``."""
    if isinstance(e, Num):
        return set()
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Neg):
        return free_variables(e.arg)
    if isinstance(e, BinOp):
        return free_variables(e.lhs) | free_variables(e.rhs)
    if isinstance(e, Call):
        out = set()
        for a in e.args:
            out |= free_variables(a)
        return out
    raise TypeError(f"not an Expr node: {e!r}")


# --------------------------------------------------------------------------
# Unparsing
# --------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


def _unparse(e):
    """Return (text, precedence).  ``parse(unparse(parse(s)))`` is the same AST."""
    if isinstance(e, Num):
        if e.value < 0:  # never produced by the parser, but be safe
            return f"({e.value!r})", _PREC["atom"]
        return repr(e.value), _PREC["atom"]
    if isinstance(e, Var):
        return e.name, _PREC["atom"]
    if isinstance(e, Neg):
        txt, prec = _unparse(e.arg)
        if prec < _PREC["neg"]:
            txt = f"({txt})"
        return f"-{txt}", _PREC["neg"]
    if isinstance(e, Call):
        args = ", ".join(_unparse(a)[0] for a in e.args)
        return f"{e.fn}({args})", _PREC["atom"]
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        lt, lp = _unparse(e.lhs)
        rt, rp = _unparse(e.rhs)
        if e.op == "^":
            # right-associative; unary minus below ^ must be parenthesized on the left
            if lp < _PREC["atom"]:
                lt = f"({lt})"
            if rp < p:
                rt = f"({rt})"
        else:
            if lp < p:
                lt = f"({lt})"
            # + - * / are left-associative: a right operand at equal precedence
            # (possible via explicit parens in the source) must keep its parens
            if rp <= p:
                rt = f"({rt})"
        return f"{lt} {e.op} {rt}", p
    raise TypeError(f"not an Expr node: {e!r}")


def unparse(e):
    return _unparse(e)[0]
