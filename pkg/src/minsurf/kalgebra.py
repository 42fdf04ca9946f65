"""Arithmetic over the complex numbers and the Lorentz (paracomplex) numbers.

A :class:`KScalar` is ``re + e*im`` where the unit ``e`` is ``i`` (``i*i = -1``)
or ``tau`` (``tau*tau = +1``) depending on its :class:`AlgebraTag`.  Reals embed
with ``im = 0``; there is no separate real type and no implicit promotion
between the two algebras.

Lorentz numbers are isomorphic to R (+) R through the null coordinates
``phi_iso(a + tau*b) = (a + b, a - b)``.  Every elementary function with real
Taylor coefficients acts componentwise in those coordinates, which is how the
closed forms below can be checked independently.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import AlgebraMismatch, DivisionByZero, LnBranchError, ZeroDivisorError

#: Absolute threshold defining the numerically widened zero-divisor cone.
TOL_ZERO = 1e-12


class AlgebraTag(enum.Enum):
    COMPLEX = "complex"
    LORENTZ = "lorentz"

    @property
    def unit_square(self) -> int:
        return -1 if self is AlgebraTag.COMPLEX else 1

    @property
    def unit_name(self) -> str:
        return "i" if self is AlgebraTag.COMPLEX else "tau"


COMPLEX = AlgebraTag.COMPLEX
LORENTZ = AlgebraTag.LORENTZ


@dataclass(frozen=True)
class KScalar:
    algebra: AlgebraTag
    re: float
    im: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "re", float(self.re))
        object.__setattr__(self, "im", float(self.im))

    # -- construction helpers -------------------------------------------------

    @classmethod
    def unit(cls, algebra: AlgebraTag) -> "KScalar":
        return cls(algebra, 0.0, 1.0)

    @classmethod
    def real(cls, algebra: AlgebraTag, x: float) -> "KScalar":
        return cls(algebra, float(x), 0.0)

    def _coerce(self, other) -> "KScalar":
        if isinstance(other, KScalar):
            if other.algebra is not self.algebra:
                raise AlgebraMismatch(
                    f"cannot combine {self.algebra.value} and {other.algebra.value} scalars"
                )
            return other
        if isinstance(other, (int, float)) and not isinstance(other, bool):
            return KScalar(self.algebra, float(other), 0.0)
        return NotImplemented

    # -- ring operations --------------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return KScalar(self.algebra, self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return KScalar(self.algebra, self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __neg__(self):
        return KScalar(self.algebra, -self.re, -self.im)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        s = self.algebra.unit_square
        return KScalar(
            self.algebra,
            self.re * o.re + s * self.im * o.im,
            self.re * o.im + self.im * o.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * inv(o, operation="div")

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * inv(self, operation="div")

    def __pow__(self, n):
        return kpow(self, n)

    # -- conjugate structure ------------------------------------------------------

    def conj(self) -> "KScalar":
        return KScalar(self.algebra, self.re, -self.im)

    def norm2(self) -> float:
        """``z * conj(z)`` as a real number (may be negative for Lorentz numbers)."""
        return self.re * self.re - self.algebra.unit_square * self.im * self.im

    def __abs__(self) -> float:
        return modulus(self)

    def is_close(self, other, rel=1e-12, abs_tol=1e-12) -> bool:
        o = self._coerce(other)
        d = math.hypot(self.re - o.re, self.im - o.im)
        scale = max(math.hypot(self.re, self.im), math.hypot(o.re, o.im))
        return d <= max(abs_tol, rel * scale)

    def __repr__(self):
        sign = "+" if self.im >= 0 or math.isnan(self.im) else "-"
        return f"({self.re!r}{sign}{abs(self.im)!r}{self.algebra.unit_name})"


def _check(a: KScalar, b: KScalar) -> None:
    if a.algebra is not b.algebra:
        raise AlgebraMismatch(
            f"cannot combine {a.algebra.value} and {b.algebra.value} scalars"
        )


def add(a: KScalar, b: KScalar) -> KScalar:
    _check(a, b)
    return a + b


def sub(a: KScalar, b: KScalar) -> KScalar:
    _check(a, b)
    return a - b


def mul(a: KScalar, b: KScalar) -> KScalar:
    _check(a, b)
    return a * b


def conj(z: KScalar) -> KScalar:
    return z.conj()


def inner(z: KScalar, w: KScalar) -> float:
    """Real part of ``z * conj(w)``; the indefinite metric in the Lorentz case."""
    _check(z, w)
    return (z * w.conj()).re


def modulus(z: KScalar) -> float:
    return math.sqrt(abs(z.norm2()))


def inv(z: KScalar, operation: str = "inv") -> KScalar:
    n = z.norm2()
    if z.algebra is LORENTZ:
        if abs(n) < TOL_ZERO:
            raise ZeroDivisorError(z, operation)
    elif math.sqrt(n) < TOL_ZERO:
        raise DivisionByZero(z, operation)
    return KScalar(z.algebra, z.re / n, -z.im / n)


def kpow(z: KScalar, n: int) -> KScalar:
    if isinstance(n, bool) or not isinstance(n, int):
        raise TypeError("only integer exponents are supported")
    if n < 0:
        return inv(kpow(z, -n), operation="pow")
    result = KScalar(z.algebra, 1.0, 0.0)
    base = z
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


# -- elementary functions -----------------------------------------------------------


def kexp(z: KScalar) -> KScalar:
    u, v = z.re, z.im
    eu = math.exp(u)
    if z.algebra is LORENTZ:
        return KScalar(LORENTZ, eu * math.cosh(v), eu * math.sinh(v))
    return KScalar(COMPLEX, eu * math.cos(v), eu * math.sin(v))


def ksin(z: KScalar) -> KScalar:
    u, v = z.re, z.im
    if z.algebra is LORENTZ:
        return KScalar(LORENTZ, math.sin(u) * math.cos(v), math.cos(u) * math.sin(v))
    return KScalar(COMPLEX, math.sin(u) * math.cosh(v), math.cos(u) * math.sinh(v))


def kcos(z: KScalar) -> KScalar:
    u, v = z.re, z.im
    if z.algebra is LORENTZ:
        return KScalar(LORENTZ, math.cos(u) * math.cos(v), -math.sin(u) * math.sin(v))
    return KScalar(COMPLEX, math.cos(u) * math.cosh(v), -math.sin(u) * math.sinh(v))


def ksinh(z: KScalar) -> KScalar:
    u, v = z.re, z.im
    if z.algebra is LORENTZ:
        return KScalar(LORENTZ, math.sinh(u) * math.cosh(v), math.cosh(u) * math.sinh(v))
    return KScalar(COMPLEX, math.sinh(u) * math.cos(v), math.cosh(u) * math.sin(v))


def kcosh(z: KScalar) -> KScalar:
    u, v = z.re, z.im
    if z.algebra is LORENTZ:
        return KScalar(LORENTZ, math.cosh(u) * math.cosh(v), math.sinh(u) * math.sinh(v))
    return KScalar(COMPLEX, math.cosh(u) * math.cos(v), math.sinh(u) * math.sin(v))


def kln(z: KScalar) -> KScalar:
    """Principal logarithm.

    Complex: cut along the non-positive reals.  Lorentz: defined only where
    ``re > |im|``, as the componentwise real logarithm in null coordinates.
    """
    u, v = z.re, z.im
    if z.algebra is LORENTZ:
        if not u > abs(v):
            raise LnBranchError(f"ln: {z!r} lies outside the region re > |im|")
        a, b = math.log(u + v), math.log(u - v)
        return KScalar(LORENTZ, 0.5 * (a + b), 0.5 * (a - b))
    if v == 0.0 and u <= 0.0:
        raise LnBranchError(f"ln: {z!r} lies on the branch cut")
    return KScalar(COMPLEX, math.log(math.hypot(u, v)), math.atan2(v, u))


# -- the R (+) R isomorphism ----------------------------------------------------------


def phi_iso(z: KScalar) -> tuple[float, float]:
    if z.algebra is not LORENTZ:
        raise AlgebraMismatch("phi_iso is defined on Lorentz numbers only")
    return (z.re + z.im, z.re - z.im)


def phi_iso_inv(a: float, b: float) -> KScalar:
    return KScalar(LORENTZ, 0.5 * (a + b), 0.5 * (a - b))
