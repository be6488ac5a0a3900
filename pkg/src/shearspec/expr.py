"""Small expression language for shear profiles.

Grammar (whitespace is ignored)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("+" | "-") unary | power
    power   := atom ["^" exponent]
    exponent:= ["+" | "-"] INTEGER | "(" ["+" | "-"] INTEGER ")"
    atom    := NUMBER | "x2" | FUNC "(" expr ")" | "(" expr ")"
    FUNC    := "tanh" | "exp" | "sin" | "cos"

Trees are immutable tuples of the form ``(tag, ...)``:

    ("const", value)   ("var",)   ("add", a, b)   ("sub", a, b)
    ("mul", a, b)      ("div", a, b)   ("neg", a)   ("pow", a, n)
    ("tanh", a)        ("exp", a)      ("sin", a)   ("cos", a)
"""

from __future__ import annotations

import cmath
import math
import re

import numpy as np

from .errors import ParseError

FUNCS = ("tanh", "exp", "sin", "cos")

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)

# opcodes shared with the compiled kernel
OP_CONST, OP_VAR, OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_NEG, OP_POW = range(8)
OP_TANH, OP_EXP, OP_SIN, OP_COS = range(8, 12)
_OPCODE = {"add": OP_ADD, "sub": OP_SUB, "mul": OP_MUL, "div": OP_DIV,
           "tanh": OP_TANH, "exp": OP_EXP, "sin": OP_SIN, "cos": OP_COS}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:].strip()[:1]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value:
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def parse(self):
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = ("add" if op == "+" else "sub", node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = ("mul" if op == "*" else "div", node, self.unary())
        return node

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val in ("+", "-"):
            self.take()
            inner = self.unary()
            if val == "+":
                return inner
            if inner[0] == "const":
                return ("const", -inner[1])
            return ("neg", inner)
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            base = ("pow", base, self.exponent())
        return base

    def exponent(self) -> int:
        paren = self.peek()[1] == "("
        if paren:
            self.take()
        sign = 1
        if self.peek()[1] in ("+", "-"):
            sign = -1 if self.take()[1] == "-" else 1
        kind, val, pos = self.take()
        if kind != "num" or not re.fullmatch(r"\d+", val):
            raise ParseError("exponent must be an integer literal", pos)
        if paren:
            self.expect(")")
        return sign * int(val)

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return ("const", float(val))
        if kind == "name":
            if val == "x2":
                return ("var",)
            if val in FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return (val, arg)
            raise ParseError(f"unknown identifier {val!r}", pos)
        if val == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos)


def parse(text: str):
    """Parse a formula in ``x2`` into an expression tree."""
    if not isinstance(text, str) or not text.strip():
        raise ParseError("empty expression")
    return _Parser(text).parse()


# ---------------------------------------------------------------- printing

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}


def to_string(node) -> str:
    """Print a tree so that ``parse(to_string(e))`` rebuilds ``e`` exactly."""
    tag = node[0]
    if tag == "const":
        v = node[1]
        s = repr(float(v))
        return s if v >= 0 else f"({s})"
    if tag == "var":
        return "x2"
    if tag in FUNCS:
        return f"{tag}({to_string(node[1])})"
    if tag == "neg":
        return f"-{_wrap(node[1], 3, strict=True)}"
    if tag == "pow":
        n = node[2]
        return f"{_wrap(node[1], 4, strict=True)}^{n if n >= 0 else f'({n})'}"
    op = {"add": "+", "sub": "-", "mul": "*", "div": "/"}[tag]
    p = _PREC[tag]
    return f"{_wrap(node[1], p)} {op} {_wrap(node[2], p, strict=True)}"


def _wrap(node, prec: int, strict: bool = False) -> str:
    inner = _PREC.get(node[0], 5)
    s = to_string(node)
    if inner < prec or (strict and inner == prec):
        return f"({s})"
    return s


# ---------------------------------------------------------- differentiation

def _is_const(node, value=None) -> bool:
    return node[0] == "const" and (value is None or node[1] == value)


def _add(a, b):
    if _is_const(a) and _is_const(b):
        return ("const", a[1] + b[1])
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return ("add", a, b)


def _sub(a, b):
    if _is_const(a) and _is_const(b):
        return ("const", a[1] - b[1])
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return _neg(b)
    return ("sub", a, b)


def _neg(a):
    if _is_const(a):
        return ("const", -a[1])
    if a[0] == "neg":
        return a[1]
    return ("neg", a)


def _mul(a, b):
    if _is_const(a) and _is_const(b):
        return ("const", a[1] * b[1])
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ("const", 0.0)
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return ("mul", a, b)


def _div(a, b):
    if _is_const(a) and _is_const(b) and b[1] != 0.0:
        return ("const", a[1] / b[1])
    if _is_const(a, 0.0):
        return ("const", 0.0)
    if _is_const(b, 1.0):
        return a
    return ("div", a, b)


def _pow(a, n: int):
    if n == 0:
        return ("const", 1.0)
    if n == 1:
        return a
    if _is_const(a) and (a[1] != 0.0 or n > 0):
        return ("const", a[1] ** n)
    return ("pow", a, n)


def diff(node):
    """Symbolic derivative with respect to x2."""
    tag = node[0]
    if tag == "const":
        return ("const", 0.0)
    if tag == "var":
        return ("const", 1.0)
    if tag == "add":
        return _add(diff(node[1]), diff(node[2]))
    if tag == "sub":
        return _sub(diff(node[1]), diff(node[2]))
    if tag == "neg":
        return _neg(diff(node[1]))
    if tag == "mul":
        a, b = node[1], node[2]
        return _add(_mul(diff(a), b), _mul(a, diff(b)))
    if tag == "div":
        a, b = node[1], node[2]
        return _div(_sub(_mul(diff(a), b), _mul(a, diff(b))), _pow(b, 2))
    if tag == "pow":
        a, n = node[1], node[2]
        return _mul(_mul(("const", float(n)), _pow(a, n - 1)), diff(a))
    a = node[1]
    da = diff(a)
    if tag == "exp":
        return _mul(node, da)
    if tag == "sin":
        return _mul(("cos", a), da)
    if tag == "cos":
        return _neg(_mul(("sin", a), da))
    if tag == "tanh":
        return _mul(_sub(("const", 1.0), _pow(node, 2)), da)
    raise ValueError(f"unknown node {tag!r}")


# --------------------------------------------------------------- evaluation

def evaluate(node, x):
    """Evaluate on scalars or arrays; complex input is supported."""
    tag = node[0]
    if tag == "const":
        return node[1] + 0.0 * x
    if tag == "var":
        return x
    if tag == "add":
        return evaluate(node[1], x) + evaluate(node[2], x)
    if tag == "sub":
        return evaluate(node[1], x) - evaluate(node[2], x)
    if tag == "mul":
        return evaluate(node[1], x) * evaluate(node[2], x)
    if tag == "div":
        return evaluate(node[1], x) / evaluate(node[2], x)
    if tag == "neg":
        return -evaluate(node[1], x)
    if tag == "pow":
        base = evaluate(node[1], x)
        n = node[2]
        return base ** n if n >= 0 else 1.0 / base ** (-n)
    return getattr(np, tag)(evaluate(node[1], x))


def taylor(node, x0: complex, n: int) -> np.ndarray:
    """Taylor coefficients ``t[j]`` of the expression about ``x0`` up to ``j = n``."""
    tag = node[0]
    out = np.zeros(n + 1, dtype=complex)
    if tag == "const":
        out[0] = node[1]
        return out
    if tag == "var":
        out[0] = x0
        if n >= 1:
            out[1] = 1.0
        return out
    if tag in ("add", "sub", "mul", "div"):
        a = taylor(node[1], x0, n)
        b = taylor(node[2], x0, n)
        if tag == "add":
            return a + b
        if tag == "sub":
            return a - b
        if tag == "mul":
            return np.convolve(a, b)[: n + 1]
        return _series_div(a, b)
    a = taylor(node[1], x0, n)
    if tag == "neg":
        return -a
    if tag == "pow":
        p = node[2]
        r = _series_powi(a, abs(p))
        if p < 0:
            one = np.zeros(n + 1, dtype=complex)
            one[0] = 1.0
            r = _series_div(one, r)
        return r
    j = np.arange(n + 1)
    ja = j * a
    if tag == "exp":
        out[0] = cmath.exp(a[0])
        for m in range(1, n + 1):
            out[m] = np.dot(ja[1: m + 1], out[m - 1:: -1][: m]) / m
        return out
    if tag in ("sin", "cos"):
        s = np.zeros(n + 1, dtype=complex)
        c = np.zeros(n + 1, dtype=complex)
        s[0], c[0] = cmath.sin(a[0]), cmath.cos(a[0])
        for m in range(1, n + 1):
            s[m] = np.dot(ja[1: m + 1], c[m - 1:: -1][: m]) / m
            c[m] = -np.dot(ja[1: m + 1], s[m - 1:: -1][: m]) / m
        return s if tag == "sin" else c
    if tag == "tanh":
        u = np.zeros(n + 1, dtype=complex)  # 1 - t^2
        out[0] = cmath.tanh(a[0])
        u[0] = 1.0 - out[0] ** 2
        for m in range(1, n + 1):
            out[m] = np.dot(ja[1: m + 1], u[m - 1:: -1][: m]) / m
            u[m] = -np.dot(out[: m + 1], out[m::-1])
        return out
    raise ValueError(f"unknown node {tag!r}")


def _series_div(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    q = np.zeros_like(a)
    for m in range(len(a)):
        q[m] = (a[m] - np.dot(b[1: m + 1], q[m - 1:: -1][:m])) / b[0]
    return q


def _series_powi(a: np.ndarray, p: int) -> np.ndarray:
    n = len(a)
    r = np.zeros(n, dtype=complex)
    r[0] = 1.0
    base = a
    while p:
        if p & 1:
            r = np.convolve(r, base)[:n]
        base = np.convolve(base, base)[:n]
        p >>= 1
    return r


# -------------------------------------------------------------- compilation

def compile_program(node) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Flatten a tree into a postfix program for the jet evaluator.

    Returns ``(ops, iargs, fargs, depth)`` where ``depth`` is the stack size
    needed to run it.
    """
    ops: list[int] = []
    iargs: list[int] = []
    fargs: list[float] = []

    def emit(nd) -> int:
        tag = nd[0]
        if tag == "const":
            ops.append(OP_CONST), iargs.append(0), fargs.append(nd[1])
            return 1
        if tag == "var":
            ops.append(OP_VAR), iargs.append(0), fargs.append(0.0)
            return 1
        if tag in ("add", "sub", "mul", "div"):
            d1 = emit(nd[1])
            d2 = emit(nd[2])
            ops.append(_OPCODE[tag]), iargs.append(0), fargs.append(0.0)
            return max(d1, d2 + 1)
        d = emit(nd[1])
        if tag == "neg":
            ops.append(OP_NEG), iargs.append(0), fargs.append(0.0)
        elif tag == "pow":
            ops.append(OP_POW), iargs.append(nd[2]), fargs.append(0.0)
        else:
            ops.append(_OPCODE[tag]), iargs.append(0), fargs.append(0.0)
        return d

    depth = emit(node)
    return (np.asarray(ops, dtype=np.int32), np.asarray(iargs, dtype=np.int32),
            np.asarray(fargs, dtype=np.float64), depth)


def run_program(ops, iargs, fargs, x: float) -> tuple[float, float]:
    """Reference jet evaluator: returns (U, U'') at x.

    Every stack slot holds the 2-jet (v, v', v'').  This mirrors the compiled
    kernel line by line.
    """
    stack: list[tuple[float, float, float]] = []
    for op, ia, fa in zip(ops, iargs, fargs):
        if op == OP_CONST:
            stack.append((fa, 0.0, 0.0))
        elif op == OP_VAR:
            stack.append((x, 1.0, 0.0))
        elif op <= OP_DIV:
            b0, b1, b2 = stack.pop()
            a0, a1, a2 = stack.pop()
            if op == OP_ADD:
                stack.append((a0 + b0, a1 + b1, a2 + b2))
            elif op == OP_SUB:
                stack.append((a0 - b0, a1 - b1, a2 - b2))
            elif op == OP_MUL:
                stack.append((a0 * b0, a1 * b0 + a0 * b1, a2 * b0 + 2.0 * a1 * b1 + a0 * b2))
            else:
                q0 = a0 / b0
                q1 = (a1 - q0 * b1) / b0
                stack.append((q0, q1, (a2 - 2.0 * q1 * b1 - q0 * b2) / b0))
        else:
            a0, a1, a2 = stack.pop()
            if op == OP_NEG:
                stack.append((-a0, -a1, -a2))
            elif op == OP_POW:
                stack.append(_jet_pow(a0, a1, a2, int(ia)))
            elif op == OP_TANH:
                t = math.tanh(a0)
                s = 1.0 - t * t
                stack.append((t, s * a1, s * a2 - 2.0 * t * s * a1 * a1))
            elif op == OP_EXP:
                e = math.exp(a0)
                stack.append((e, e * a1, e * (a2 + a1 * a1)))
            elif op == OP_SIN:
                s, c = math.sin(a0), math.cos(a0)
                stack.append((s, c * a1, c * a2 - s * a1 * a1))
            else:
                s, c = math.sin(a0), math.cos(a0)
                stack.append((c, -s * a1, -s * a2 - c * a1 * a1))
    v = stack.pop()
    return v[0], v[2]


def _jet_pow(a0: float, a1: float, a2: float, n: int) -> tuple[float, float, float]:
    if n == 0:
        return 1.0, 0.0, 0.0
    if n == 1:
        return a0, a1, a2
    if n > 0:
        pm2 = a0 ** (n - 2)
        pm1 = pm2 * a0
        return pm1 * a0, n * pm1 * a1, n * (n - 1) * pm2 * a1 * a1 + n * pm1 * a2
    # negative powers through the reciprocal
    pm1 = a0 ** (n - 1)
    return pm1 * a0, n * pm1 * a1, n * (n - 1) * (pm1 / a0) * a1 * a1 + n * pm1 * a2
