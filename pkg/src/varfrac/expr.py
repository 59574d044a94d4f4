"""A small arithmetic language for user-supplied x(t), alpha(t, tau) and beta(t, tau).

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | atom ('^' factor)?
    atom   := NUMBER | IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')'

'^' is right-associative and binds tighter than unary minus, so -2^2 = -4.
Trees evaluate on numpy arrays and can be differentiated symbolically.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Optional, Union

import numpy as np

from .errors import ParseError, SpecError
from .specfun import digamma_fn, gamma_fn

VARIABLES = ("t", "tau", "x")
CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS: dict[str, tuple[int, Callable]] = {
    "exp": (1, np.exp),
    "ln": (1, np.log),
    "sin": (1, np.sin),
    "cos": (1, np.cos),
    "tan": (1, np.tan),
    "sqrt": (1, np.sqrt),
    "abs": (1, np.abs),
    "gamma": (1, gamma_fn),
    "digamma": (1, digamma_fn),
    "pow": (2, np.power),
}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Expr = Union[Num, Var, Neg, Bin, Call]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            bad = pos + len(src[pos:]) - len(src[pos:].lstrip())
            raise ParseError(f"unexpected character {src[bad]!r}", bad, src)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(src)))
    return out


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.take()
        if text != value or kind != "op":
            found = "end of input" if kind == "end" else repr(text)
            raise ParseError(f"expected {value!r}, found {found}", pos, self.src)

    def error(self, msg: str, pos: Optional[int] = None):
        raise ParseError(msg, self.peek()[2] if pos is None else pos, self.src)

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = Bin(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = Bin(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.factor())
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return Bin("^", base, self.factor())
        return base

    def atom(self) -> Expr:
        kind, text, pos = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "id":
            if self.peek()[:2] == ("op", "("):
                if text not in FUNCTIONS:
                    self.error(f"unknown function {text!r}", pos)
                self.take()
                args = [self.expr()]
                while self.peek()[:2] == ("op", ","):
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                arity = FUNCTIONS[text][0]
                if len(args) != arity:
                    self.error(f"{text} takes {arity} argument(s), got {len(args)}", pos)
                return Call(text, tuple(args))
            if text in VARIABLES or text in CONSTANTS:
                return Var(text)
            if text in FUNCTIONS:
                self.error(f"function {text!r} needs arguments", pos)
            self.error(f"unknown identifier {text!r}", pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        self.error(f"unexpected {found}", pos)


def parse_expr(src: str) -> Expr:
    if not src or not src.strip():
        raise ParseError("empty expression", 0, src or "")
    p = _Parser(src)
    node = p.expr()
    kind, text, pos = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected {text!r}", pos, src)
    return node


# --- printing ----------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(node: Expr) -> int:
    if isinstance(node, Bin):
        return 4 if node.op == "^" else _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    return 5


def _num(v: float) -> str:
    v = float(v)
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def pretty(node: Expr) -> str:
    """Source text that parses back to the same tree."""
    if isinstance(node, Num):
        return _num(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.name}({', '.join(pretty(a) for a in node.args)})"
    if isinstance(node, Neg):
        inner = pretty(node.operand)
        return "-" + (inner if _prec(node.operand) >= 3 else f"({inner})")
    left, right = pretty(node.left), pretty(node.right)
    if node.op == "^":
        left = left if _prec(node.left) == 5 else f"({left})"
        right = right if _prec(node.right) >= 3 else f"({right})"
        return f"{left}^{right}"
    p = _PREC[node.op]
    left = left if _prec(node.left) >= p else f"({left})"
    right = right if _prec(node.right) > p else f"({right})"
    return f"{left} {node.op} {right}"


# --- evaluation ----------------------------------------------------------------


def evaluate(node: Expr, env: Mapping[str, object]):
    """Evaluate with numpy broadcasting; ``env`` binds t, tau and x."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        if node.name in CONSTANTS:
            return CONSTANTS[node.name]
        if node.name not in env:
            raise SpecError(f"variable {node.name!r} is not bound here")
        return np.asarray(env[node.name], dtype=float)
    if isinstance(node, Neg):
        return -np.asarray(evaluate(node.operand, env), dtype=float)
    if isinstance(node, Call):
        args = [np.asarray(evaluate(a, env), dtype=float) for a in node.args]
        return FUNCTIONS[node.name][1](*args)
    a = np.asarray(evaluate(node.left, env), dtype=float)
    b = np.asarray(evaluate(node.right, env), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return a / b
        return np.power(a, b)


def variables(node: Expr) -> set:
    if isinstance(node, Var):
        return set() if node.name in CONSTANTS else {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, Neg):
        return variables(node.operand)
    if isinstance(node, Call):
        return set().union(*(variables(a) for a in node.args))
    return variables(node.left) | variables(node.right)


def substitute(node: Expr, name: str, value: Expr) -> Expr:
    if isinstance(node, Var):
        return value if node.name == name else node
    if isinstance(node, Num):
        return node
    if isinstance(node, Neg):
        return Neg(substitute(node.operand, name, value))
    if isinstance(node, Call):
        return Call(node.name, tuple(substitute(a, name, value) for a in node.args))
    return Bin(node.op, substitute(node.left, name, value), substitute(node.right, name, value))


# --- symbolic differentiation ----------------------------------------------------

ZERO, ONE = Num(0.0), Num(1.0)


def _add(a: Expr, b: Expr) -> Expr:
    if a == ZERO:
        return b
    if b == ZERO:
        return a
    return Bin("+", a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if b == ZERO:
        return a
    if a == ZERO:
        return Neg(b)
    return Bin("-", a, b)


def _mul(a: Expr, b: Expr) -> Expr:
    if a == ZERO or b == ZERO:
        return ZERO
    if a == ONE:
        return b
    if b == ONE:
        return a
    return Bin("*", a, b)


def _div(a: Expr, b: Expr) -> Expr:
    if a == ZERO:
        return ZERO
    if b == ONE:
        return a
    return Bin("/", a, b)


def diff(node: Expr, var: str) -> Expr:
    """d node / d var. Raises SpecError for digamma, whose derivative is not available."""
    if isinstance(node, Num):
        return ZERO
    if isinstance(node, Var):
        return ONE if node.name == var else ZERO
    if isinstance(node, Neg):
        d = diff(node.operand, var)
        return ZERO if d == ZERO else Neg(d)
    if isinstance(node, Call):
        if node.name == "pow":
            return diff(Bin("^", *node.args), var)
        (u,) = node.args
        du = diff(u, var)
        if du == ZERO:
            return ZERO
        if node.name == "exp":
            outer = node
        elif node.name == "ln":
            return _div(du, u)
        elif node.name == "sin":
            outer = Call("cos", (u,))
        elif node.name == "cos":
            outer = Neg(Call("sin", (u,)))
        elif node.name == "tan":
            outer = Bin("+", ONE, Bin("^", node, Num(2.0)))
        elif node.name == "sqrt":
            return _div(du, Bin("*", Num(2.0), node))
        elif node.name == "abs":
            outer = Bin("/", u, node)
        elif node.name == "gamma":
            outer = Bin("*", node, Call("digamma", (u,)))
        else:
            raise SpecError(f"no symbolic derivative for {node.name}")
        return _mul(outer, du)
    a, b = node.left, node.right
    da, db = diff(a, var), diff(b, var)
    if node.op == "+":
        return _add(da, db)
    if node.op == "-":
        return _sub(da, db)
    if node.op == "*":
        return _add(_mul(da, b), _mul(a, db))
    if node.op == "/":
        return _div(_sub(_mul(da, b), _mul(a, db)), Bin("^", b, Num(2.0)))
    # power
    if db == ZERO:
        if da == ZERO:
            return ZERO
        expo = Num(b.value - 1.0) if isinstance(b, Num) else Bin("-", b, ONE)
        return _mul(_mul(b, Bin("^", a, expo)), da)
    return _mul(node, _add(_mul(db, Call("ln", (a,))), _div(_mul(b, da), a)))


# --- conversion to the library's function types -------------------------------------


def to_scalar_fn(node: Expr, var: str = "t", derivs: int = 4):
    """A ScalarFn of ``var`` with symbolic derivatives where they exist."""
    from .functions import ScalarFn

    extra = variables(node) - {var}
    if extra:
        raise SpecError(f"x(t) may only use {var}; found {sorted(extra)}")
    fns = []
    cur = node
    for _ in range(derivs):
        try:
            cur = diff(cur, var)
        except SpecError:
            break
        fns.append(lambda s, e=cur: evaluate(e, {var: s}))
    f = lambda s: evaluate(node, {var: s})
    return ScalarFn(f, tuple(fns), max(len(fns), 2), name=pretty(node))


def to_order_fn(node: Expr, n: int = 1, univariate: bool = False):
    """OrderFn alpha(t, tau). With ``univariate`` the order is declared as abar(t) = alpha(t, t)."""
    from .functions import OrderFn

    extra = variables(node) - {"t", "tau"}
    if extra:
        raise SpecError(f"orders may only use t and tau; found {sorted(extra)}")
    ev = lambda t, tau: evaluate(node, {"t": t, "tau": tau})
    if not univariate:
        return OrderFn(ev, n - 1, n, None, None, pretty(node))
    diag = substitute(node, "tau", Var("t"))
    try:
        d = diff(diag, "t")
        deriv = lambda t, e=d: evaluate(e, {"t": t})
    except SpecError:
        deriv = None
    which = "second" if variables(node) == {"tau"} else "first"
    fn = lambda s: evaluate(diag, {"t": s})
    return replace(OrderFn.univariate(fn, deriv, which, n), name=pretty(node))
