"""A small expression language over one complex or Lorentz variable ``z``.

Grammar (whitespace insignificant)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | factor
    factor := atom ('^' int)?
    atom   := number | 'z' | 'i' | 'tau' | func '(' expr ')' | '(' expr ')'
    func   := exp | sin | cos | sinh | cosh | ln

``^`` binds tighter than unary minus, so ``-z^2`` is ``-(z^2)``.  ``i`` is
only legal for complex expressions and ``tau`` only for Lorentz ones.

The same parser also reads real-valued expressions in named variables (the
ambient coordinates ``x1, x2, x3`` of implicit equations, or a curve
parameter ``t``); that mode additionally knows ``tan``, ``tanh`` and ``pi``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from . import kalgebra as ka
from .errors import ParseError
from .kalgebra import COMPLEX, LORENTZ, AlgebraTag, KScalar

K_FUNCS = ("exp", "sin", "cos", "sinh", "cosh", "ln")
REAL_FUNCS = K_FUNCS + ("tan", "tanh")
BINARY = ("add", "sub", "mul", "div")


@dataclass(frozen=True)
class Expr:
    """Immutable expression node.

    ``value`` holds the constant (a :class:`KScalar`, or a float for real
    expressions), the variable name, or the integer exponent of ``pow``.
    """

    op: str
    args: tuple = ()
    value: object = None

    def __str__(self):
        return to_source(self)


def const(value) -> Expr:
    return Expr("const", (), value)


def var(name: str = "z") -> Expr:
    return Expr("var", (), name)


def neg(a): return Expr("neg", (a,))
def add(a, b): return Expr("add", (a, b))
def sub(a, b): return Expr("sub", (a, b))
def mul(a, b): return Expr("mul", (a, b))
def div(a, b): return Expr("div", (a, b))
def power(a, n: int): return Expr("pow", (a,), int(n))
def func(name, a): return Expr(name, (a,))


# ---------------------------------------------------------------------------
# lexer / parser
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(src: str):
    pos = 0
    tokens = []
    n = len(src)
    while pos < n:
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if not m:
            start = pos + (len(src[pos:]) - len(src[pos:].lstrip()))
            raise ParseError(f"unexpected character {src[start]!r}", _byte_offset(src, start), src)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


def _byte_offset(src: str, index: int) -> int:
    return len(src[:index].encode("utf-8"))


class _Parser:
    def __init__(self, src, algebra, variables):
        self.src = src
        self.algebra = algebra
        self.variables = variables
        self.tokens = _tokenize(src)
        self.i = 0

    # helpers
    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        pos = min(tok[2], max(len(self.src) - 1, 0))
        raise ParseError(message, _byte_offset(self.src, pos), self.src)

    def expect(self, text):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != text:
            self.error(f"expected {text!r}, found {tok[1] or 'end of input'!r}")
        return self.take()

    def is_op(self, *texts):
        tok = self.peek()
        return tok[0] == "op" and tok[1] in texts

    # grammar
    def parse(self):
        if self.peek()[0] == "end":
            self.error("empty expression")
        e = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected token {self.peek()[1]!r}")
        return e

    def expr(self):
        e = self.term()
        while self.is_op("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self):
        e = self.unary()
        while self.is_op("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            e = mul(e, rhs) if op == "*" else div(e, rhs)
        return e

    def unary(self):
        if self.is_op("-"):
            self.take()
            return neg(self.unary())
        return self.factor()

    def factor(self):
        base = self.atom()
        if self.is_op("^"):
            self.take()
            sign = 1
            if self.is_op("-"):
                self.take()
                sign = -1
            tok = self.peek()
            if tok[0] != "num" or not tok[1].isdigit():
                self.error("exponent must be an integer literal")
            self.take()
            return power(base, sign * int(tok[1]))
        return base

    def _const(self, x: float, y: float = 0.0) -> Expr:
        if self.algebra is None:
            return const(float(x))
        return const(KScalar(self.algebra, float(x), float(y)))

    def atom(self):
        tok = self.peek()
        kind, text, _ = tok
        if kind == "num":
            self.take()
            return self._const(float(text))
        if kind == "op" and text == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        if kind == "name":
            self.take()
            funcs = K_FUNCS if self.algebra is not None else REAL_FUNCS
            if text in funcs:
                self.expect("(")
                e = self.expr()
                self.expect(")")
                return func(text, e)
            if text in self.variables:
                return var(text)
            if self.algebra is not None:
                if text == "i":
                    if self.algebra is LORENTZ:
                        self.error("i not valid in lorentz mode", tok)
                    return self._const(0.0, 1.0)
                if text == "tau":
                    if self.algebra is COMPLEX:
                        self.error("tau not valid in complex mode", tok)
                    return self._const(0.0, 1.0)
            elif text == "pi":
                return self._const(math.pi)
            self.error(f"unknown identifier {text!r}", tok)
        if kind == "end":
            self.error("unexpected end of input", tok)
        self.error(f"unexpected token {text!r}", tok)


def parse(src: str, algebra: AlgebraTag) -> Expr:
    """Parse a (para)complex expression in the variable ``z``."""
    if not isinstance(algebra, AlgebraTag):
        raise TypeError("algebra must be an AlgebraTag")
    return _Parser(src, algebra, ("z",)).parse()


def parse_real(src: str, variables: Iterable[str] = ("x1", "x2", "x3")) -> Expr:
    """Parse a real expression in the given variable names."""
    return _Parser(src, None, tuple(variables)).parse()


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if math.isfinite(x) and x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(float(x))


def _const_source(value) -> tuple[str, int]:
    if isinstance(value, KScalar):
        unit = value.algebra.unit_name
        if value.im == 0.0:
            s = _fmt_float(value.re)
            return s, (3 if value.re < 0 else 5)
        if value.re == 0.0 and value.im == 1.0:
            return unit, 5
        if value.re == 0.0:
            return f"({_fmt_float(value.im)}*{unit})", 5
        return f"({_fmt_float(value.re)}+{_fmt_float(value.im)}*{unit})", 5
    s = _fmt_float(value)
    return s, (3 if value < 0 else 5)


_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}
_SYM = {"add": "+", "sub": "-", "mul": "*", "div": "/"}


def _src(e: Expr) -> tuple[str, int]:
    op = e.op
    if op == "const":
        return _const_source(e.value)
    if op == "var":
        return e.value, 5
    if op in BINARY:
        p = _PREC[op]
        left = _wrap(e.args[0], p)
        right = _wrap(e.args[1], p + 1)
        return f"{left}{_SYM[op]}{right}", p
    if op == "neg":
        return "-" + _wrap(e.args[0], 3), 3
    if op == "pow":
        return f"{_wrap(e.args[0], 5)}^{e.value}", 4
    return f"{op}({_src(e.args[0])[0]})", 5


def _wrap(e: Expr, min_prec: int) -> str:
    s, p = _src(e)
    return s if p >= min_prec else f"({s})"


def to_source(e: Expr) -> str:
    """Render an expression in the grammar accepted by :func:`parse`."""
    return _src(e)[0]


# ---------------------------------------------------------------------------
# inspection
# ---------------------------------------------------------------------------

def walk(e: Expr):
    yield e
    for a in e.args:
        yield from walk(a)


def algebra_of(e: Expr) -> AlgebraTag | None:
    tags = {n.value.algebra for n in walk(e) if n.op == "const" and isinstance(n.value, KScalar)}
    if len(tags) > 1:
        raise ka.AlgebraMismatch("expression mixes complex and Lorentz constants")
    return tags.pop() if tags else None


def _is_const(e: Expr, x: float | None = None) -> bool:
    if e.op != "const":
        return False
    if x is None:
        return True
    v = e.value
    if isinstance(v, KScalar):
        return v.im == 0.0 and v.re == x
    return v == x


# ---------------------------------------------------------------------------
# simplification and differentiation
# ---------------------------------------------------------------------------

def _kconst(algebra, x):
    return const(KScalar(algebra, float(x), 0.0)) if algebra else const(float(x))


def simplify(e: Expr, algebra: AlgebraTag | None = None) -> Expr:
    """Constant folding plus the neutral-element rules; no CAS normal form."""
    if algebra is None:
        algebra = algebra_of(e)
    return _simp(e, algebra)


def _fold(e: Expr, algebra):
    try:
        if algebra is None:
            return const(eval_real(e, {}))
        return const(evaluate(e, KScalar(algebra, 0.0, 0.0)))
    except (ArithmeticError, ValueError):
        return e


def _simp(e: Expr, alg) -> Expr:
    if e.op in ("const", "var"):
        return e
    args = tuple(_simp(a, alg) for a in e.args)
    e = Expr(e.op, args, e.value)
    if all(a.op == "const" for a in args):
        return _fold(e, alg)
    op = e.op
    if op == "neg":
        (a,) = args
        if a.op == "neg":
            return a.args[0]
        return e
    if op == "add":
        a, b = args
        if _is_const(a, 0.0):
            return b
        if _is_const(b, 0.0):
            return a
        return e
    if op == "sub":
        a, b = args
        if _is_const(b, 0.0):
            return a
        if _is_const(a, 0.0):
            return _simp(neg(b), alg)
        return e
    if op == "mul":
        a, b = args
        if _is_const(a, 0.0) or _is_const(b, 0.0):
            return _kconst(alg, 0.0)
        if _is_const(a, 1.0):
            return b
        if _is_const(b, 1.0):
            return a
        if _is_const(a, -1.0):
            return _simp(neg(b), alg)
        if _is_const(b, -1.0):
            return _simp(neg(a), alg)
        if b.op == "const" and a.op != "const":
            a, b = b, a
            e = mul(a, b)
        if a.op == "const" and b.op == "mul" and b.args[0].op == "const":
            return _simp(mul(_fold(mul(a, b.args[0]), alg), b.args[1]), alg)
        return e
    if op == "div":
        a, b = args
        if _is_const(b, 1.0):
            return a
        if _is_const(a, 0.0):
            return _kconst(alg, 0.0)
        if b.op == "const" and a.op == "mul" and a.args[0].op == "const":
            return _simp(mul(_fold(div(a.args[0], b), alg), a.args[1]), alg)
        return e
    if op == "pow":
        if e.value == 0:
            return _kconst(alg, 1.0)
        if e.value == 1:
            return args[0]
        return e
    return e


def deriv(e: Expr, variable: str = "z") -> Expr:
    """Symbolic derivative, simplified."""
    alg = algebra_of(e)
    return _simp(_d(e, variable, alg), alg)


def _d(e: Expr, x: str, alg) -> Expr:
    op = e.op
    zero, one = _kconst(alg, 0.0), _kconst(alg, 1.0)
    if op == "const":
        return zero
    if op == "var":
        return one if e.value == x else zero
    if op == "neg":
        return neg(_d(e.args[0], x, alg))
    a = e.args[0]
    da = _d(a, x, alg)
    if op in ("add", "sub"):
        db = _d(e.args[1], x, alg)
        return Expr(op, (da, db))
    if op == "mul":
        b = e.args[1]
        return add(mul(da, b), mul(a, _d(b, x, alg)))
    if op == "div":
        b = e.args[1]
        if b.op == "const":
            return div(da, b)
        db = _d(b, x, alg)
        return div(sub(mul(da, b), mul(a, db)), power(b, 2))
    if op == "pow":
        n = e.value
        return mul(mul(_kconst(alg, n), power(a, n - 1)), da)
    inner = {
        "exp": lambda: func("exp", a),
        "sin": lambda: func("cos", a),
        "cos": lambda: neg(func("sin", a)),
        "sinh": lambda: func("cosh", a),
        "cosh": lambda: func("sinh", a),
        "tan": lambda: div(one, power(func("cos", a), 2)),
        "tanh": lambda: div(one, power(func("cosh", a), 2)),
    }
    if op == "ln":
        return div(da, a)
    return mul(inner[op](), da)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

_KFUNC = {
    "exp": ka.kexp,
    "sin": ka.ksin,
    "cos": ka.kcos,
    "sinh": ka.ksinh,
    "cosh": ka.kcosh,
    "ln": ka.kln,
}


def evaluate(e: Expr, z: KScalar) -> KScalar:
    """Evaluate bottom-up with :mod:`kalgebra` scalar arithmetic."""
    alg = algebra_of(e)
    if alg is not None and alg is not z.algebra:
        raise ka.AlgebraMismatch(
            f"{alg.value} expression evaluated at a {z.algebra.value} point"
        )
    return _ev(e, z)


def _ev(e: Expr, z: KScalar) -> KScalar:
    op = e.op
    if op == "const":
        v = e.value
        return v if isinstance(v, KScalar) else KScalar(z.algebra, float(v))
    if op == "var":
        return z
    if op == "neg":
        return -_ev(e.args[0], z)
    if op == "add":
        return _ev(e.args[0], z) + _ev(e.args[1], z)
    if op == "sub":
        return _ev(e.args[0], z) - _ev(e.args[1], z)
    if op == "mul":
        return _ev(e.args[0], z) * _ev(e.args[1], z)
    if op == "div":
        return _ev(e.args[0], z) * ka.inv(_ev(e.args[1], z), operation="div")
    if op == "pow":
        return ka.kpow(_ev(e.args[0], z), e.value)
    return _KFUNC[op](_ev(e.args[0], z))


_RFUNC = {
    "exp": math.exp,
    "sin": math.sin,
    "cos": math.cos,
    "sinh": math.sinh,
    "cosh": math.cosh,
    "ln": math.log,
    "tan": math.tan,
    "tanh": math.tanh,
}


def eval_real(e: Expr, env: Mapping[str, float]) -> float:
    op = e.op
    if op == "const":
        return e.value
    if op == "var":
        return env[e.value]
    if op == "neg":
        return -eval_real(e.args[0], env)
    if op in BINARY:
        a = eval_real(e.args[0], env)
        b = eval_real(e.args[1], env)
        if op == "add":
            return a + b
        if op == "sub":
            return a - b
        if op == "mul":
            return a * b
        return a / b
    if op == "pow":
        return eval_real(e.args[0], env) ** e.value
    return _RFUNC[op](eval_real(e.args[0], env))


@dataclass(frozen=True)
class _Dual:
    val: KScalar
    der: KScalar

    def __add__(self, o): return _Dual(self.val + o.val, self.der + o.der)
    def __sub__(self, o): return _Dual(self.val - o.val, self.der - o.der)
    def __neg__(self): return _Dual(-self.val, -self.der)

    def __mul__(self, o):
        return _Dual(self.val * o.val, self.der * o.val + self.val * o.der)

    def __truediv__(self, o):
        r = ka.inv(o.val, operation="div")
        q = self.val * r
        return _Dual(q, (self.der - q * o.der) * r)

    def chain(self, f, df):
        return _Dual(f(self.val), df(self.val) * self.der)


def eval_with_deriv(e: Expr, z: KScalar) -> tuple[KScalar, KScalar]:
    """Forward-mode evaluation returning ``(f(z), f'(z))``."""
    alg = algebra_of(e)
    if alg is not None and alg is not z.algebra:
        raise ka.AlgebraMismatch("expression and point use different algebras")
    d = _evd(e, _Dual(z, KScalar(z.algebra, 1.0, 0.0)))
    return d.val, d.der


def _evd(e: Expr, z: _Dual) -> _Dual:
    op = e.op
    zero = KScalar(z.val.algebra, 0.0, 0.0)
    if op == "const":
        return _Dual(e.value, zero)
    if op == "var":
        return z
    if op == "neg":
        return -_evd(e.args[0], z)
    if op in BINARY:
        a, b = _evd(e.args[0], z), _evd(e.args[1], z)
        return {"add": a.__add__, "sub": a.__sub__, "mul": a.__mul__, "div": a.__truediv__}[op](b)
    a = _evd(e.args[0], z)
    if op == "pow":
        n = e.value
        if n == 0:
            return _Dual(KScalar(zero.algebra, 1.0, 0.0), zero)
        return a.chain(lambda w: ka.kpow(w, n), lambda w: n * ka.kpow(w, n - 1))
    if op == "exp":
        return a.chain(ka.kexp, ka.kexp)
    if op == "sin":
        return a.chain(ka.ksin, ka.kcos)
    if op == "cos":
        return a.chain(ka.kcos, lambda w: -ka.ksin(w))
    if op == "sinh":
        return a.chain(ka.ksinh, ka.kcosh)
    if op == "cosh":
        return a.chain(ka.kcosh, ka.ksinh)
    if op == "ln":
        return a.chain(ka.kln, lambda w: ka.inv(w, operation="ln'"))
    raise ValueError(f"unsupported operation {op!r}")


# ---------------------------------------------------------------------------
# polynomial expansion over opaque atoms (used for exact identity checks)
# ---------------------------------------------------------------------------

def _poly_mul(p, q):
    out = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            powers = dict(m1)
            for atom, k in m2:
                powers[atom] = powers.get(atom, 0) + k
            key = tuple(sorted(powers.items()))
            out[key] = out.get(key, 0) + c1 * c2
    return out


def _poly_add(p, q, sign=1):
    out = dict(p)
    for m, c in q.items():
        out[m] = out.get(m, 0) + sign * c
    return out


def expand(e: Expr, algebra: AlgebraTag | None = None) -> dict:
    """Expand into ``{monomial: coefficient}``.

    Anything that is not a sum, product, integer power or division by a
    constant is an opaque atom, keyed by its source text.
    """
    alg = algebra if algebra is not None else algebra_of(e)
    one = KScalar(alg, 1.0, 0.0) if alg else 1.0
    return _expand(e, one)


def _atom(e, one):
    return {((to_source(e), 1),): one}


def _expand(e: Expr, one):
    op = e.op
    if op == "const":
        return {(): e.value}
    if op == "var":
        return _atom(e, one)
    if op == "neg":
        return {m: -c for m, c in _expand(e.args[0], one).items()}
    if op in ("add", "sub"):
        return _poly_add(_expand(e.args[0], one), _expand(e.args[1], one), 1 if op == "add" else -1)
    if op == "mul":
        return _poly_mul(_expand(e.args[0], one), _expand(e.args[1], one))
    if op == "div":
        num = _expand(e.args[0], one)
        den = e.args[1]
        if den.op == "const":
            return {m: c / den.value for m, c in num.items()}
        return _poly_mul(num, _atom(div(const(one), den), one))
    if op == "pow" and e.value >= 0:
        out = {(): one}
        base = _expand(e.args[0], one)
        for _ in range(e.value):
            out = _poly_mul(out, base)
        return out
    return _atom(e, one)


def is_identically_zero(e: Expr, tol: float = 1e-12) -> bool:
    for c in expand(e).values():
        mag = math.hypot(c.re, c.im) if isinstance(c, KScalar) else abs(c)
        if mag > tol:
            return False
    return True


# ---------------------------------------------------------------------------
# compilation to a flat postfix program for the batch kernels
# ---------------------------------------------------------------------------

OPCODES = {
    "const": 0, "var": 1, "neg": 2, "add": 3, "sub": 4, "mul": 5, "div": 6,
    "pow": 7, "exp": 8, "sin": 9, "cos": 10, "sinh": 11, "cosh": 12, "ln": 13,
}


@dataclass(frozen=True, eq=False)
class Program:
    """Postfix form of an expression, ready for :mod:`minsurf.kernel`."""

    algebra: AlgebraTag
    ops: np.ndarray
    ipar: np.ndarray
    cre: np.ndarray
    cim: np.ndarray
    depth: int
    source: str

    def __call__(self, zre, zim, **options):
        from .kernel import evaluate_program

        return evaluate_program(self, zre, zim, **options)


def compile_expr(e: Expr, algebra: AlgebraTag) -> Program:
    found = algebra_of(e)
    if found is not None and found is not algebra:
        raise ka.AlgebraMismatch("expression algebra does not match compile target")
    ops, ipar, cre, cim = [], [], [], []
    depth = 0
    max_depth = 0

    def emit(code, ip=0, re_=0.0, im_=0.0):
        ops.append(code)
        ipar.append(ip)
        cre.append(re_)
        cim.append(im_)

    def rec(n: Expr):
        nonlocal depth, max_depth
        op = n.op
        if op == "const":
            v = n.value
            emit(0, 0, *((v.re, v.im) if isinstance(v, KScalar) else (float(v), 0.0)))
            depth += 1
        elif op == "var":
            emit(1)
            depth += 1
        elif op in BINARY:
            rec(n.args[0])
            rec(n.args[1])
            emit(OPCODES[op])
            depth -= 1
        elif op == "pow":
            rec(n.args[0])
            emit(7, n.value)
        elif op in OPCODES:
            rec(n.args[0])
            emit(OPCODES[op])
        else:
            raise ValueError(f"operation {op!r} cannot be compiled")
        max_depth = max(max_depth, depth)

    rec(e)
    return Program(
        algebra,
        np.asarray(ops, dtype=np.int32),
        np.asarray(ipar, dtype=np.int32),
        np.asarray(cre, dtype=np.float64),
        np.asarray(cim, dtype=np.float64),
        max_depth,
        to_source(e),
    )
