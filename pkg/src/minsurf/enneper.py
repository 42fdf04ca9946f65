"""Enneper data, the immersions they generate, and the operations between them.

A spacelike minimal immersion over a complex domain is written
``psi = (Re(L + conj P), Im(L + conj P), h)`` and a timelike one over a Lorentz
domain ``psi = (h, Re(L - conj P), Im(L - conj P))``.  The data carried around
are the derivatives ``(L_z, P_z, h_z)``; they must satisfy ``h_z^2 = L_z P_z``
and a nondegeneracy condition that depends on the causal character.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from . import expr as ex
from .errors import (
    AlgebraMismatch,
    BadFamilyIndex,
    ConditionViolation,
    DegenerateSample,
    EmptyDomain,
    MissingClosedForm,
    PathLeavesDomain,
    ScalarDegenerate,
)
from .expr import Expr
from .kalgebra import COMPLEX, LORENTZ, AlgebraTag, KScalar
from .quadrature import integrate_segments

TOL_MARGIN = 1e-8
TOL_CONDITION_A = 1e-10
DEFAULT_MARGIN = 1e-3
FD_STEP = 1e-5


class CausalCharacter(enum.Enum):
    SPACELIKE = "spacelike"
    TIMELIKE = "timelike"

    @property
    def epsilon(self) -> int:
        return 1 if self is CausalCharacter.SPACELIKE else -1

    @property
    def algebra(self) -> AlgebraTag:
        return COMPLEX if self is CausalCharacter.SPACELIKE else LORENTZ


SPACELIKE = CausalCharacter.SPACELIKE
TIMELIKE = CausalCharacter.TIMELIKE


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------

EXCLUSION_KINDS = ("unit-circle", "cone", "axis-u", "axis-v", "expr")


@dataclass(frozen=True)
class Exclusion:
    """A curve removed from the parameter domain.

    ``axis-u`` is the line ``u = c_u`` and ``axis-v`` the line ``v = c_v``;
    ``cone`` is the pair of lines ``|u - c_u| = |v - c_v|``; ``expr`` is the
    zero set (null set, for Lorentz numbers) of an expression in ``z``.
    """

    kind: str
    center: tuple[float, float] = (0.0, 0.0)
    expr: Expr | None = None

    def __post_init__(self):
        if self.kind not in EXCLUSION_KINDS:
            raise ValueError(f"unknown exclusion kind {self.kind!r}")
        if self.kind == "expr" and self.expr is None:
            raise ValueError("expr exclusion needs an expression")

    def distance(self, u, v, algebra: AlgebraTag):
        cu, cv = self.center
        du, dv = np.asarray(u) - cu, np.asarray(v) - cv
        if self.kind == "axis-u":
            return np.abs(du)
        if self.kind == "axis-v":
            return np.abs(dv)
        if self.kind == "cone":
            return np.minimum(np.abs(du - dv), np.abs(du + dv)) / math.sqrt(2.0)
        if self.kind == "unit-circle":
            if algebra is COMPLEX:
                return np.abs(np.hypot(du, dv) - 1.0)
            return np.abs(np.sqrt(np.abs(du * du - dv * dv)) - 1.0)
        prog = ex.compile_expr(self.expr, algebra)
        try:
            fr, fi = prog(u, v)
        except ArithmeticError:
            return np.zeros(np.shape(u))
        if algebra is COMPLEX:
            return np.hypot(fr, fi)
        return np.sqrt(np.abs(fr * fr - fi * fi))

    def to_text(self) -> str:
        if self.kind == "expr":
            return f"expr {ex.to_source(self.expr)}"
        if self.center == (0.0, 0.0):
            return self.kind
        return f"{self.kind} {_num(self.center[0])} {_num(self.center[1])}"


@dataclass(frozen=True)
class PolarChart:
    """Sampling chart ``z = exp(rho) * e^(i*theta)`` for annular domains."""

    rho_min: float
    rho_max: float
    theta_min: float
    theta_max: float


@dataclass(frozen=True)
class DomainSpec:
    rect: tuple[float, float, float, float]
    exclusions: tuple[Exclusion, ...] = ()
    basepoint: tuple[float, float] | None = None
    margin: float = DEFAULT_MARGIN
    chart: PolarChart | None = None

    def __post_init__(self):
        umin, umax, vmin, vmax = self.rect
        if not (umin < umax and vmin < vmax):
            raise EmptyDomain(f"degenerate rectangle {self.rect}")
        if self.basepoint is None:
            object.__setattr__(self, "basepoint", (0.5 * (umin + umax), 0.5 * (vmin + vmax)))
        object.__setattr__(self, "exclusions", tuple(self.exclusions))

    def exclusion_distance(self, u, v, algebra: AlgebraTag):
        d = np.full(np.shape(u), np.inf)
        for exc in self.exclusions:
            d = np.minimum(d, exc.distance(u, v, algebra))
        return d

    def contains(self, u, v, algebra: AlgebraTag, margin: float | None = None):
        margin = self.margin if margin is None else margin
        umin, umax, vmin, vmax = self.rect
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        tol = 1e-12
        inside = (u >= umin - tol) & (u <= umax + tol) & (v >= vmin - tol) & (v <= vmax + tol)
        if self.chart is not None:
            c = self.chart
            with np.errstate(divide="ignore"):
                rho = np.log(np.hypot(u, v))
            theta = np.arctan2(v, u)
            inside &= (rho >= c.rho_min - tol) & (rho <= c.rho_max + tol)
            inside &= (theta >= c.theta_min - tol) & (theta <= c.theta_max + tol)
        return inside & (self.exclusion_distance(u, v, algebra) >= margin)

    def chart_to_uv(self, a, b):
        """Map chart coordinates to ``(u, v)``; identity without a polar chart."""
        if self.chart is None:
            return np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        r = np.exp(a)
        return r * np.cos(b), r * np.sin(b)

    def chart_box(self) -> tuple[float, float, float, float]:
        if self.chart is None:
            return self.rect
        c = self.chart
        return (c.rho_min, c.rho_max, c.theta_min, c.theta_max)

    def check_basepoint(self, algebra: AlgebraTag) -> None:
        bu, bv = self.basepoint
        if not bool(self.contains(bu, bv, algebra)):
            raise EmptyDomain(f"basepoint {self.basepoint} is not inside the domain")

    def sample_points(self, algebra: AlgebraTag, grid: int = 20, n_random: int = 100, seed: int = 0):
        """Stratified ``grid x grid`` cell centres plus uniform random points.

        Sampling runs over the chart box (the rectangle itself, or the
        ``(ln r, theta)`` box of a polar chart), shrunk by the margin; points closer than the
        margin to an exclusion are dropped.
        """
        if grid < 1:
            raise ValueError("grid must be at least 1")
        umin, umax, vmin, vmax = self.chart_box()
        m = self.margin
        a, b, c, d = umin + m, umax - m, vmin + m, vmax - m
        if not (a < b and c < d):
            raise EmptyDomain(f"margin {m:g} leaves nothing of the sampling box")
        cu =a + (np.arange(grid) + 0.5) * (b - a) / grid
        cv = c + (np.arange(grid) + 0.5) * (d - c) / grid
        gu, gv = np.meshgrid(cu, cv, indexing="ij")
        rng = np.random.default_rng(seed)
        ru = rng.uniform(a, b, n_random)
        rv = rng.uniform(c, d, n_random)
        u, v = self.chart_to_uv(np.concatenate([gu.ravel(), ru]), np.concatenate([gv.ravel(), rv]))
        keep = self.contains(u, v, algebra)
        if not keep.any():
            raise EmptyDomain("no sample point survives the exclusions")
        return u[keep], v[keep]


def _num(x: float) -> str:
    return f"{x:.17g}" if x != int(x) else str(int(x))


# ---------------------------------------------------------------------------
# Enneper and Weierstrass data
# ---------------------------------------------------------------------------

def _as_expr(e, algebra: AlgebraTag) -> Expr:
    if isinstance(e, Expr):
        found = ex.algebra_of(e)
        if found is not None and found is not algebra:
            raise AlgebraMismatch("expression algebra does not match causal character")
        return e
    return ex.parse(e, algebra)


@dataclass(frozen=True)
class EnneperData:
    """Enneper data ``(L_z, P_z, h_z)`` with optional closed-form potentials.

    ``h`` is stored through a holomorphic antecedent ``H`` and a part selector:
    ``h = Re(H)`` or ``h = Im(H)``.
    """

    name: str
    character: CausalCharacter
    Lz: Expr
    Pz: Expr
    hz: Expr
    domain: DomainSpec
    L: Expr | None = None
    P: Expr | None = None
    H: Expr | None = None
    h_part: str | None = None

    def __post_init__(self):
        alg = self.character.algebra
        for name in ("Lz", "Pz", "hz", "L", "P", "H"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, _as_expr(val, alg))
        closed = (self.L, self.P, self.H)
        if any(c is not None for c in closed):
            if any(c is None for c in closed) or self.h_part not in ("re", "im"):
                raise ValueError("closed form needs L, P, H and h_part in {'re', 'im'}")

    @property
    def algebra(self) -> AlgebraTag:
        return self.character.algebra

    @property
    def has_closed_form(self) -> bool:
        return self.L is not None

    @cached_property
    def programs(self):
        alg = self.algebra
        return tuple(ex.compile_expr(e, alg) for e in (self.Lz, self.Pz, self.hz))

    @cached_property
    def closed_programs(self):
        if not self.has_closed_form:
            raise MissingClosedForm(self.name)
        alg = self.algebra
        return tuple(ex.compile_expr(e, alg) for e in (self.L, self.P, self.H))

    def evaluate_data(self, u, v):
        """Arrays ``(Lz, Pz, hz)`` as complex numbers packing ``re + 1j*im``."""
        return tuple(_pack(*p(u, v)) for p in self.programs)

    def sources(self) -> dict:
        out = {
            "Lz": ex.to_source(self.Lz),
            "Pz": ex.to_source(self.Pz),
            "hz": ex.to_source(self.hz),
        }
        if self.has_closed_form:
            out["L"] = ex.to_source(self.L)
            out["P"] = ex.to_source(self.P)
            out["h"] = f"{self.h_part} {ex.to_source(self.H)}"
        return out


def _pack(re, im):
    return np.asarray(re) + 1j * np.asarray(im)


def kmul(a, b, algebra: AlgebraTag):
    """Multiply packed arrays in the given algebra."""
    s = algebra.unit_square
    return (a.real * b.real + s * a.imag * b.imag) + 1j * (a.real * b.imag + a.imag * b.real)


def knorm2(a, algebra: AlgebraTag):
    """``a * conj(a)`` as a real array."""
    return a.real ** 2 - algebra.unit_square * a.imag ** 2


@dataclass(frozen=True)
class ValidationReport:
    name: str
    character: CausalCharacter
    n_points: int
    max_condition_a: float
    min_condition_b: float
    condition_b_range: tuple[float, float]
    failures: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_text(self) -> str:
        lines = [
            f"[validate {self.name}]",
            f"character = {self.character.value}",
            f"points = {self.n_points}",
            f"max_condition_a = {self.max_condition_a:.6g}",
            f"min_condition_b_margin = {self.min_condition_b:.6g}",
            f"condition_b_min = {self.condition_b_range[0]:.6g}",
            f"condition_b_max = {self.condition_b_range[1]:.6g}",
            f"verdict = {'pass' if self.passed else 'fail'}",
        ]
        lines += [f"failure = {f}" for f in self.failures]
        return "\n".join(lines) + "\n"


def condition_values(data: EnneperData, u, v):
    """Pointwise Condition A residual and signed Condition B value."""
    alg = data.algebra
    Lz, Pz, hz = data.evaluate_data(u, v)
    h2 = kmul(hz, hz, alg)
    lp = kmul(Lz, Pz, alg)
    res_a = np.abs(h2 - lp) / (1.0 + np.abs(h2) + np.abs(lp))
    if data.character is SPACELIKE:
        cond_b = np.abs(Lz) - np.abs(Pz)
    else:
        cond_b = 2.0 * knorm2(hz, alg) + knorm2(Lz, alg) + knorm2(Pz, alg)
    return res_a, cond_b


def validate(data: EnneperData, samples: int = 20, n_random: int = 100, seed: int = 0) -> ValidationReport:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    u, v = data.domain.sample_points(data.algebra, samples, n_random, seed)
    failures = []
    try:
        res_a, cond_b = condition_values(data, u, v)
    except ArithmeticError as err:
        return ValidationReport(data.name, data.character, len(u), math.inf, 0.0, (0.0, 0.0),
                                (f"evaluation: {err}",))
    max_a = float(np.max(res_a))
    margin = float(np.min(np.abs(cond_b)))
    if not max_a < TOL_CONDITION_A:
        failures.append(f"condition A residual {max_a:.3g} >= {TOL_CONDITION_A:g}")
    if not margin > TOL_MARGIN:
        failures.append(f"condition B margin {margin:.3g} <= {TOL_MARGIN:g}")
    if np.any(cond_b > 0) and np.any(cond_b < 0):
        failures.append("condition B changes sign on the domain")
    return ValidationReport(
        data.name, data.character, len(u), max_a, margin,
        (float(np.min(cond_b)), float(np.max(cond_b))), tuple(failures),
    )


# ---------------------------------------------------------------------------
# immersions
# ---------------------------------------------------------------------------

def _layout(character, Lv, Pv, hv):
    """Coordinates from (possibly relative) values of L, P and real h."""
    if character is SPACELIKE:
        return np.stack([Lv.real + Pv.real, Lv.imag - Pv.imag, hv], axis=-1)
    return np.stack([hv, Lv.real - Pv.real, Lv.imag + Pv.imag], axis=-1)


@dataclass(frozen=True)
class Immersion:
    """Evaluable map from the parameter domain to Lorentz-Minkowski space.

    ``backend`` is ``"closed"`` (potentials ``L, P, H``) or ``"integral"``
    (path integrals of the data from the basepoint, so ``psi(z0) = 0``).
    """

    data: EnneperData
    backend: str

    @property
    def character(self) -> CausalCharacter:
        return self.data.character

    @property
    def domain(self) -> DomainSpec:
        return self.data.domain

    @property
    def epsilon(self) -> int:
        return self.data.character.epsilon

    def evaluate(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        u, v = np.broadcast_arrays(u, v)
        if self.backend == "closed":
            return self._closed(u, v).reshape(u.shape + (3,))
        z0 = complex(*self.domain.basepoint)
        targets = (u + 1j * v).ravel()
        _check_segments(self.domain, self.data.algebra, np.full(targets.shape, z0), targets)
        out = self._integrate(np.full(targets.shape, z0), targets)
        return out.reshape(u.shape + (3,))

    def _closed_parts(self, u, v, extended=False):
        Lp, Pp, Hp = self.data.closed_programs
        return [p(u, v, extended=extended) for p in (Lp, Pp, Hp)]

    def _assemble(self, parts):
        (Lr, Li), (Pr, Pi), (Hr, Hi) = parts
        hv = Hr if self.data.h_part == "re" else Hi
        if self.character is SPACELIKE:
            return np.stack([Lr + Pr, Li - Pi, hv], axis=-1)
        return np.stack([hv, Lr - Pr, Li + Pi], axis=-1)

    def _closed(self, u, v):
        return self._assemble(self._closed_parts(u, v))

    def _integrate(self, starts, ends):
        alg = self.data.algebra
        re, im = integrate_segments(self.data.programs, alg, starts, ends)
        IL, IP, IH = (re[k] + 1j * im[k] for k in range(3))
        return _layout(self.character, IL, IP, 2.0 * IH.real)

    def differences(self, u, v, offsets):
        """``psi(p + o) - psi(p)`` for every point ``p`` and offset ``o``.

        Shape ``(npts, noffsets, 3)``.  The integral backend integrates the
        short segment from ``p`` to ``p + o`` directly, avoiding cancellation.
        """
        u = np.atleast_1d(np.asarray(u, dtype=float))
        v = np.atleast_1d(np.asarray(v, dtype=float))
        off = np.asarray(offsets, dtype=float)
        pu = u[:, None] + off[None, :, 0]
        pv = v[:, None] + off[None, :, 1]
        if self.backend == "closed":
            # extended precision keeps the 1e-4 second differences clear of roundoff
            ld = np.longdouble
            pu = u.astype(ld)[:, None] + off[None, :, 0].astype(ld)
            pv = v.astype(ld)[:, None] + off[None, :, 1].astype(ld)
            far = self._assemble(self._closed_parts(pu, pv, extended=True))
            near = self._assemble(self._closed_parts(u.astype(ld), v.astype(ld), extended=True))
            return (far - near[:, None, :]).astype(float)
        starts = np.repeat((u + 1j * v)[:, None], off.shape[0], axis=1).ravel()
        ends = (pu + 1j * pv).ravel()
        return self._integrate(starts, ends).reshape(pu.shape + (3,))


def immerse_closed(data: EnneperData) -> Immersion:
    if not data.has_closed_form:
        raise MissingClosedForm(f"{data.name} has no closed-form potentials")
    return Immersion(data, "closed")


def immerse_path(data: EnneperData) -> Immersion:
    """Immersion evaluated by straight-segment path integrals from the basepoint."""
    data.domain.check_basepoint(data.algebra)
    return Immersion(data, "integral")


def _check_segments(domain: DomainSpec, algebra, starts, ends, samples: int = 33):
    t = np.linspace(0.0, 1.0, samples)
    pts = starts[:, None] + t[None, :] * (ends - starts)[:, None]
    ok = domain.contains(pts.real, pts.imag, algebra)
    if not ok.all():
        bad = np.argwhere(~ok)[0]
        p = pts[bad[0], bad[1]]
        raise PathLeavesDomain(f"path leaves the domain near ({p.real:.6g}, {p.imag:.6g})")


def immerse_integral(data: EnneperData, z, path: Sequence | None = None, check_domain: bool = True):
    """``psi(z)`` by integrating the data along a polyline from the basepoint.

    ``z`` is a :class:`KScalar` or a ``(u, v)`` pair; ``path`` lists
    intermediate vertices (the basepoint and ``z`` are added).
    """
    if isinstance(z, KScalar):
        if z.algebra is not data.algebra:
            raise AlgebraMismatch("point algebra does not match data")
        target = complex(z.re, z.im)
    else:
        target = complex(z[0], z[1])
    z0 = complex(*data.domain.basepoint)
    verts = [z0] + [complex(p[0], p[1]) if not isinstance(p, complex) else p for p in (path or [])] + [target]
    starts = np.asarray(verts[:-1], dtype=complex)
    ends = np.asarray(verts[1:], dtype=complex)
    if check_domain:
        _check_segments(data.domain, data.algebra, starts, ends)
    psi = Immersion(data, "integral")
    return psi._integrate(starts, ends).sum(axis=0)


# ---------------------------------------------------------------------------
# Weierstrass data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeierstrassData:
    name: str
    character: CausalCharacter
    phi1: Expr
    phi2: Expr
    phi3: Expr
    domain: DomainSpec

    @cached_property
    def programs(self):
        alg = self.character.algebra
        return tuple(ex.compile_expr(e, alg) for e in (self.phi1, self.phi2, self.phi3))

    def evaluate(self, u, v):
        return tuple(_pack(*p(u, v)) for p in self.programs)


def _unit(algebra):
    return ex.const(KScalar(algebra, 0.0, 1.0))


def _two(algebra):
    return ex.const(KScalar(algebra, 2.0, 0.0))


def to_weierstrass(data: EnneperData) -> WeierstrassData:
    alg = data.algebra
    e, two = _unit(alg), _two(alg)
    Lz, Pz, hz = data.Lz, data.Pz, data.hz
    if data.character is SPACELIKE:
        phi = (ex.div(ex.add(Lz, Pz), two), ex.div(ex.mul(e, ex.sub(Pz, Lz)), two), hz)
    else:
        phi = (hz, ex.div(ex.sub(Lz, Pz), two), ex.div(ex.mul(e, ex.add(Lz, Pz)), two))
    return WeierstrassData(data.name, data.character, *phi, data.domain)


def weierstrass_residuals(w: WeierstrassData, u, v, step: float = FD_STEP):
    """Per-point residuals of the three Weierstrass conditions.

    Returns ``(cond_i, cond_ii, cond_iii)``: the signed real value
    ``phi1 conj(phi1) + phi2 conj(phi2) - phi3 conj(phi3)``, the relative
    residual of ``phi1^2 + phi2^2 - phi3^2 = 0``, and the largest finite
    difference estimate of ``d phi_j / d conj(z)``.
    """
    alg = w.character.algebra
    p = w.evaluate(u, v)
    cond_i = knorm2(p[0], alg) + knorm2(p[1], alg) - knorm2(p[2], alg)
    sq = [kmul(x, x, alg) for x in p]
    cond_ii = np.abs(sq[0] + sq[1] - sq[2]) / (1.0 + sum(np.abs(s) for s in sq))
    cond_iii = np.zeros(np.shape(u))
    for prog in w.programs:
        fu = (_pack(*prog(u + step, v)) - _pack(*prog(u - step, v))) / (2 * step)
        fv = (_pack(*prog(u, v + step)) - _pack(*prog(u, v - step))) / (2 * step)
        # d/d(conj z) = (d_u + i d_v)/2 for complex, (d_u - tau d_v)/2 for Lorentz
        e = 1j * fv if alg is COMPLEX else -kmul(np.full_like(fv, 1j), fv, alg)
        dbar = 0.5 * (fu + e)
        cond_iii = np.maximum(cond_iii, np.abs(dbar) / (1.0 + np.abs(fu)))
    return cond_i, cond_ii, cond_iii


def from_weierstrass(w: WeierstrassData, samples: int = 5, tol: float = 1e-10) -> EnneperData:
    """Inverse of :func:`to_weierstrass`.

    The null condition on ``phi`` is checked on sample points; the
    nondegeneracy condition is left to :func:`validate` on the result.
    """
    alg = w.character.algebra
    u, v = w.domain.sample_points(alg, samples, n_random=0)
    _, cond_ii, _ = weierstrass_residuals(w, u, v)
    if np.max(cond_ii) > tol:
        raise ConditionViolation(
            f"phi1^2 + phi2^2 - phi3^2 residual {np.max(cond_ii):.3g} exceeds {tol:g}"
        )
    e = _unit(alg)
    if w.character is SPACELIKE:
        Lz = ex.add(w.phi1, ex.mul(e, w.phi2))
        Pz = ex.sub(w.phi1, ex.mul(e, w.phi2))
        hz = w.phi3
    else:
        Lz = ex.add(w.phi2, ex.mul(e, w.phi3))
        Pz = ex.add(ex.neg(w.phi2), ex.mul(e, w.phi3))
        hz = w.phi1
    return EnneperData(w.name, w.character, Lz, Pz, hz, w.domain)


# ---------------------------------------------------------------------------
# recovery of data from an immersion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RecoveredData:
    """Numeric tables of recovered ``L_z, P_z, h_z`` (packed ``re + 1j*im``)."""

    character: CausalCharacter
    u: np.ndarray
    v: np.ndarray
    Lz: np.ndarray
    Pz: np.ndarray
    hz: np.ndarray

    def condition_a(self) -> np.ndarray:
        alg = self.character.algebra
        h2 = kmul(self.hz, self.hz, alg)
        lp = kmul(self.Lz, self.Pz, alg)
        return np.abs(h2 - lp) / (1.0 + np.abs(h2) + np.abs(lp))


def wirtinger_z(psi: Immersion, u, v, step: float = FD_STEP):
    """Central-difference ``d psi_j / dz`` for j = 1..3, packed, shape (npts, 3)."""
    h = step
    d = psi.differences(u, v, [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)])
    du = (d[:, 0] - d[:, 1]) / (2 * h)
    dv = (d[:, 2] - d[:, 3]) / (2 * h)
    if psi.character is SPACELIKE:
        return 0.5 * du - 0.5j * dv, du, dv
    return 0.5 * du + 0.5j * dv, du, dv


def recover(psi: Immersion, u, v, step: float = FD_STEP) -> RecoveredData:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    dz, du, dv = wirtinger_z(psi, u, v, step)
    cross = np.linalg.norm(np.cross(du, dv), axis=-1)
    scale = np.linalg.norm(du, axis=-1) * np.linalg.norm(dv, axis=-1)
    if np.any(cross <= 1e-10 * np.maximum(scale, 1e-300)):
        k = int(np.argmin(cross))
        raise DegenerateSample(f"metric rank < 2 at ({u[k]:.6g}, {v[k]:.6g})")
    alg = psi.data.algebra
    unit = np.full(u.shape, 1j)
    if psi.character is SPACELIKE:
        a, b, h = dz[:, 0], dz[:, 1], dz[:, 2]
        Lz = a + kmul(unit, b, alg)
        Pz = a - kmul(unit, b, alg)
    else:
        h, a, b = dz[:, 0], dz[:, 1], dz[:, 2]
        Lz = a + kmul(unit, b, alg)
        Pz = -(a - kmul(unit, b, alg))
    return RecoveredData(psi.character, u, v, Lz, Pz, h)


# ---------------------------------------------------------------------------
# new surfaces from old ones
# ---------------------------------------------------------------------------

def scale_transform(data: EnneperData, f, name: str | None = None,
                    samples: int = 20, n_random: int = 100) -> EnneperData:
    """Multiply the data by a 𝕂-holomorphic function ``f``.

    ``f conj(f)`` must stay away from zero on the domain.  Closed forms are
    dropped; the new immersion is available through the integral backend.
    """
    alg = data.algebra
    f = _as_expr(f, alg)
    u, v = data.domain.sample_points(alg, samples, n_random)
    try:
        fr, fi = ex.compile_expr(f, alg)(u, v)
    except ArithmeticError as err:
        raise ScalarDegenerate(f"f is singular on the domain: {err}") from err
    nn = np.abs(knorm2(fr + 1j * fi, alg))
    if not np.all(nn > TOL_MARGIN):
        k = int(np.argmin(nn))
        raise ScalarDegenerate(
            f"f*conj(f) = {nn[k]:.3g} at ({u[k]:.6g}, {v[k]:.6g}); f must avoid the null cone"
        )
    return EnneperData(
        name or f"{data.name}*({ex.to_source(f)})",
        data.character,
        ex.mul(f, data.Lz),
        ex.mul(f, data.Pz),
        ex.mul(f, data.hz),
        data.domain,
    )


def scale_identity_expr(data: EnneperData, f) -> Expr:
    """``(f h)^2 - (f L)(f P) - f^2 (h^2 - L P)``, which expands to zero."""
    f = _as_expr(f, data.algebra)
    Lz, Pz, hz = data.Lz, data.Pz, data.hz
    lhs = ex.sub(ex.power(ex.mul(f, hz), 2), ex.mul(ex.mul(f, Lz), ex.mul(f, Pz)))
    rhs = ex.mul(ex.power(f, 2), ex.sub(ex.power(hz, 2), ex.mul(Lz, Pz)))
    return ex.sub(lhs, rhs)


@dataclass(frozen=True)
class EpicycloidFamily:
    n: int
    data: EnneperData
    R: Fraction
    r: Fraction

    @property
    def immersion(self) -> Immersion:
        return immerse_closed(self.data)

    def psi(self, u, v):
        """The family's closed form written directly in ``(u, v)``."""
        n = self.n
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        a, b = n - 1, n + 1
        x1 = np.cos(a * u) * np.cos(a * v) / a - np.cos(b * u) * np.cos(b * v) / b
        x2 = np.cos(a * u) * np.sin(a * v) / a - np.cos(b * u) * np.sin(b * v) / b
        x3 = 2.0 * np.sin(u) * np.sin(v)
        return np.stack([x1, x2, x3], axis=-1)

    def alpha(self, t):
        """Boundary epicycloid, parametrized by ``t = (n - 1) v`` on ``u = 0``."""
        n = self.n
        t = np.asarray(t, dtype=float)
        k = (n + 1) / (n - 1)
        x1 = np.cos(t) / (n - 1) - np.cos(k * t) / (n + 1)
        x2 = np.sin(t) / (n - 1) - np.sin(k * t) / (n + 1)
        return np.stack([x1, x2, np.zeros_like(t)], axis=-1)


def epicycloid_family(n: int) -> EpicycloidFamily:
    if isinstance(n, bool) or not isinstance(n, int) or n <= 1:
        raise BadFamilyIndex(f"family index must be an integer > 1, got {n!r}")
    a, b = n - 1, n + 1
    sn = f"sin({n}*z)"

    def term(f, k):
        return f"{f}(z)" if k == 1 else f"{f}({k}*z)/{k}"

    q = math.pi / (4 * n)
    domain = DomainSpec((-q, q, q, 3 * q), basepoint=(0.0, 2 * q))
    data = EnneperData(
        name=f"epicycloid-{n}",
        character=TIMELIKE,
        Lz=f"sin(z)*(1+tau*{sn})",
        Pz=f"sin(z)*(1-tau*{sn})",
        hz=f"sin(z)*cos({n}*z)",
        domain=domain,
        L=f"-cos(z)+tau*({term('sin', a)}-{term('sin', b)})/2",
        P=f"-cos(z)-tau*({term('sin', a)}-{term('sin', b)})/2",
        H=f"{term('cos', a)}-{term('cos', b)}",
        h_part="re",
    )
    return EpicycloidFamily(n, data, Fraction(2, n * n - 1), Fraction(1, n + 1))


# ---------------------------------------------------------------------------
# text records
# ---------------------------------------------------------------------------

RECORD_KEYS = ("name", "character", "Lz", "Pz", "hz", "L", "P", "h", "rect",
               "basepoint", "margin", "exclude", "chart")


def to_record(data: EnneperData, extra: Sequence[tuple[str, str]] = ()) -> str:
    """Serialize ``data`` as ``key = value`` lines; ``extra`` pairs are appended."""
    dom = data.domain
    lines = [
        f"name = {data.name}",
        f"character = {data.character.value}",
    ]
    lines += [f"{k} = {v}" for k, v in data.sources().items()]
    lines.append("rect = " + " ".join(_num(x) for x in dom.rect))
    lines.append("basepoint = " + " ".join(_num(x) for x in dom.basepoint))
    lines.append(f"margin = {_num(dom.margin)}")
    lines += [f"exclude = {exc.to_text()}" for exc in dom.exclusions]
    if dom.chart is not None:
        c = dom.chart
        lines.append("chart = polar " + " ".join(
            _num(x) for x in (c.rho_min, c.rho_max, c.theta_min, c.theta_max)))
    lines += [f"{k} = {v}" for k, v in extra]
    return "\n".join(lines) + "\n"


def parse_record_fields(text: str) -> list[tuple[str, str]]:
    """Split a record into ``(key, value)`` pairs, keeping order and repeats."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        out.append((key.strip(), value.strip()))
    return out


def _floats(value: str, n: int, key: str) -> tuple[float, ...]:
    parts = value.replace(",", " ").split()
    if len(parts) != n:
        raise ValueError(f"{key}: expected {n} numbers, got {value!r}")
    out = []
    for p in parts:
        try:
            out.append(float(p))
        except ValueError:
            out.append(float(ex.eval_real(ex.parse_real(p, ()), {})))
    return tuple(out)


def _exclusion(value: str, algebra: AlgebraTag) -> Exclusion:
    kind, _, rest = value.partition(" ")
    rest = rest.strip()
    if kind == "expr":
        return Exclusion("expr", expr=ex.parse(rest, algebra))
    if rest:
        return Exclusion(kind, _floats(rest, 2, "exclude"))
    return Exclusion(kind)


def from_record(text: str) -> tuple[EnneperData, dict[str, str]]:
    """Inverse of :func:`to_record`; unknown keys come back in the second item."""
    fields = parse_record_fields(text)
    known: dict[str, str] = {}
    excludes: list[str] = []
    extra: dict[str, str] = {}
    for k, v in fields:
        if k == "exclude":
            excludes.append(v)
        elif k in RECORD_KEYS:
            if k in known:
                raise ValueError(f"duplicate key {k!r}")
            known[k] = v
        else:
            extra[k] = v
    for k in ("name", "character", "Lz", "Pz", "hz", "rect"):
        if k not in known:
            raise ValueError(f"record is missing {k!r}")
    character = CausalCharacter(known["character"])
    alg = character.algebra
    chart = None
    if "chart" in known:
        kind, _, rest = known["chart"].partition(" ")
        if kind != "polar":
            raise ValueError(f"unknown chart {kind!r}")
        chart = PolarChart(*_floats(rest, 4, "chart"))
    domain = DomainSpec(
        _floats(known["rect"], 4, "rect"),
        tuple(_exclusion(e, alg) for e in excludes),
        _floats(known["basepoint"], 2, "basepoint") if "basepoint" in known else None,
        float(known.get("margin", DEFAULT_MARGIN)),
        chart,
    )
    closed = {}
    if "h" in known:
        part, _, src = known["h"].partition(" ")
        closed = dict(L=known.get("L"), P=known.get("P"), H=src.strip(), h_part=part)
    data = EnneperData(known["name"], character, known["Lz"], known["Pz"], known["hz"],
                       domain, **closed)
    return data, extra
