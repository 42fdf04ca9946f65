"""Finite-difference certification of minimal immersions.

All derivatives are central differences of ``psi`` taken through
:meth:`Immersion.differences`, so path-integral immersions never subtract two
long integrals.  The ambient metric is ``g = dx1^2 + dx2^2 - dx3^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .enneper import SPACELIKE, CausalCharacter, Immersion
from .errors import DegenerateSample, NoImplicitEquation, NullNormal
from .expr import Expr

STEP_FIRST = 1e-5
STEP_SECOND = 1e-4

TOL_CONFORMAL = 1e-6
TOL_H = 1e-6
TOL_HARMONIC = 1e-5
TOL_NORMAL = 1e-9
TOL_IMPLICIT = 1e-9
TOL_DEGENERATE = 1e-12


def g(a, b):
    """Lorentzian inner product along the last axis."""
    a = np.asarray(a)
    b = np.asarray(b)
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] - a[..., 2] * b[..., 2]


def lorentz_cross(a, b):
    """``a x b`` with the third component negated, so ``g(a x b, c) = det(a, b, c)``."""
    c = np.cross(a, b)
    c[..., 2] *= -1.0
    return c


@dataclass(frozen=True)
class Jet:
    """First and second partial derivatives of ``psi`` at a batch of points."""

    u: np.ndarray
    v: np.ndarray
    psi_u: np.ndarray
    psi_v: np.ndarray
    psi_uu: np.ndarray
    psi_vv: np.ndarray


def jet(psi: Immersion, u, v, h1: float = STEP_FIRST, h2: float = STEP_SECOND) -> Jet:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    offsets = [(h1, 0.0), (-h1, 0.0), (0.0, h1), (0.0, -h1),
               (h2, 0.0), (-h2, 0.0), (0.0, h2), (0.0, -h2)]
    d = psi.differences(u, v, offsets)
    return Jet(
        u, v,
        (d[:, 0] - d[:, 1]) / (2 * h1),
        (d[:, 2] - d[:, 3]) / (2 * h1),
        (d[:, 4] + d[:, 5]) / (h2 * h2),
        (d[:, 6] + d[:, 7]) / (h2 * h2),
    )


# ---------------------------------------------------------------------------
# pointwise samples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricSample:
    point: tuple[float, float]
    E: float
    F: float
    G: float
    lam: float
    epsilon: int


@dataclass(frozen=True)
class CurvatureSample:
    point: tuple[float, float]
    H: float
    laplacian: np.ndarray
    normal: np.ndarray


def metric_at(psi: Immersion, p) -> MetricSample:
    j = jet(psi, p[0], p[1])
    E = float(g(j.psi_u, j.psi_u)[0])
    F = float(g(j.psi_u, j.psi_v)[0])
    G = float(g(j.psi_v, j.psi_v)[0])
    if abs(E) < TOL_DEGENERATE and abs(G) < TOL_DEGENERATE:
        raise DegenerateSample(f"metric vanishes at {tuple(p)}")
    eps = psi.epsilon
    return MetricSample((float(p[0]), float(p[1])), E, F, G, 0.5 * (E + eps * G), eps)


def _curvature(j: Jet, eps: int):
    E = g(j.psi_u, j.psi_u)
    G = g(j.psi_v, j.psi_v)
    lam = 0.5 * (E + eps * G)
    lap = (j.psi_uu + eps * j.psi_vv) / lam[:, None]
    n = lorentz_cross(j.psi_u, j.psi_v)
    nn = g(n, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        N = n / np.sqrt(np.abs(nn))[:, None]
        H = g(lap, N)
    return H, lap, N, nn


def mean_curvature_at(psi: Immersion, p) -> CurvatureSample:
    j = jet(psi, p[0], p[1])
    H, lap, N, nn = _curvature(j, psi.epsilon)
    if abs(nn[0]) < TOL_DEGENERATE:
        raise NullNormal(f"lightlike normal at {tuple(p)}")
    return CurvatureSample((float(p[0]), float(p[1])), float(H[0]), lap[0], N[0])


def harmonicity_residual(psi: Immersion, p) -> float:
    j = jet(psi, p[0], p[1])
    return float(np.max(np.abs(j.psi_uu + psi.epsilon * j.psi_vv)))


# ---------------------------------------------------------------------------
# implicit equations
# ---------------------------------------------------------------------------

_NPFUNC = {
    "exp": np.exp, "sin": np.sin, "cos": np.cos, "sinh": np.sinh,
    "cosh": np.cosh, "ln": np.log, "tan": np.tan, "tanh": np.tanh,
}


def eval_real_array(e: Expr, env):
    """Vectorized counterpart of :func:`expr.eval_real`."""
    op = e.op
    if op == "const":
        return e.value
    if op == "var":
        return env[e.value]
    if op == "neg":
        return -eval_real_array(e.args[0], env)
    if op in ex.BINARY:
        a = eval_real_array(e.args[0], env)
        b = eval_real_array(e.args[1], env)
        return {"add": np.add, "sub": np.subtract, "mul": np.multiply, "div": np.divide}[op](a, b)
    if op == "pow":
        return eval_real_array(e.args[0], env) ** e.value
    return _NPFUNC[op](eval_real_array(e.args[0], env))


@dataclass(frozen=True)
class ImplicitEquation:
    lhs: Expr
    rhs: Expr

    @classmethod
    def parse(cls, text: str) -> "ImplicitEquation":
        if text.count("=") != 1:
            raise ex.ParseError("implicit equation needs exactly one '='", 0, text)
        left, right = text.split("=")
        offset = len(left.encode()) + 1
        try:
            rhs = ex.parse_real(right)
        except ex.ParseError as err:
            raise ex.ParseError(err.message, err.position + offset, text) from None
        return cls(ex.parse_real(left), rhs)

    def to_text(self) -> str:
        return f"{ex.to_source(self.lhs)} = {ex.to_source(self.rhs)}"

    def residual(self, x):
        """``|lhs - rhs| / (1 + |lhs| + |rhs|)`` at points ``x`` of shape (..., 3)."""
        x = np.asarray(x, dtype=float)
        env = {"x1": x[..., 0], "x2": x[..., 1], "x3": x[..., 2]}
        with np.errstate(all="ignore"):
            a = eval_real_array(self.lhs, env) + np.zeros(x.shape[:-1])
            b = eval_real_array(self.rhs, env) + np.zeros(x.shape[:-1])
        return np.abs(a - b) / (1.0 + np.abs(a) + np.abs(b))


def implicit_residual(psi: Immersion, eq: ImplicitEquation | None, p) -> float:
    if eq is None:
        raise NoImplicitEquation("no implicit equation attached")
    return float(eq.residual(psi.evaluate(p[0], p[1])))


# ---------------------------------------------------------------------------
# batch verification
# ---------------------------------------------------------------------------

@dataclass
class VerificationReport:
    name: str
    character: CausalCharacter
    backend: str
    u: np.ndarray
    v: np.ndarray
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    lam: np.ndarray
    H: np.ndarray
    harmonicity: np.ndarray
    normal_residual: np.ndarray
    implicit: np.ndarray | None
    failures: list[str] = field(default_factory=list)
    anomalies: list[str] = field(default_factory=list)

    @property
    def n_points(self) -> int:
        return int(self.u.size)

    @property
    def conformality_F(self) -> np.ndarray:
        return np.abs(self.F) / (np.abs(self.E) + np.abs(self.G))

    @property
    def conformality_EG(self) -> np.ndarray:
        eps = self.character.epsilon
        return np.abs(self.E - eps * self.G) / (np.abs(self.E) + np.abs(self.G))

    @property
    def max_conformality(self) -> float:
        return float(max(self.conformality_F.max(), self.conformality_EG.max()))

    @property
    def max_H(self) -> float:
        return float(np.max(np.abs(self.H)))

    @property
    def max_harmonicity(self) -> float:
        return float(np.max(self.harmonicity))

    @property
    def max_normal(self) -> float:
        return float(np.max(self.normal_residual))

    @property
    def max_implicit(self) -> float | None:
        return None if self.implicit is None else float(np.max(self.implicit))

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_text(self) -> str:
        def f(x):
            return "%.12g" % x

        def status(ok):
            return "pass" if ok else "fail"

        blocks = [
            [f"[surface {self.name}]",
             f"character = {self.character.value}",
             f"epsilon = {self.character.epsilon}",
             f"backend = {self.backend}",
             f"points = {self.n_points}"],
            ["[conformality]",
             f"max_F_ratio = {f(self.conformality_F.max())}",
             f"max_E_eps_G_ratio = {f(self.conformality_EG.max())}",
             f"tolerance = {f(TOL_CONFORMAL)}",
             f"status = {status(self.max_conformality < TOL_CONFORMAL)}"],
            ["[causal_character]",
             f"min_lambda = {f(np.min(self.lam))}",
             f"max_lambda = {f(np.max(self.lam))}",
             f"anomalies = {len(self.anomalies)}"]
            + [f"anomaly = {a}" for a in self.anomalies],
            ["[mean_curvature]",
             f"max_abs_H = {f(self.max_H)}",
             f"tolerance = {f(TOL_H)}",
             f"status = {status(self.max_H < TOL_H)}"],
            ["[harmonicity]",
             f"max_residual = {f(self.max_harmonicity)}",
             f"tolerance = {f(TOL_HARMONIC)}",
             f"status = {status(self.max_harmonicity < TOL_HARMONIC)}"],
            ["[normal]",
             f"max_residual = {f(self.max_normal)}",
             f"tolerance = {f(TOL_NORMAL)}",
             f"status = {status(self.max_normal < TOL_NORMAL)}"],
        ]
        if self.implicit is not None:
            blocks.append(["[implicit_equation]",
                           f"max_residual = {f(self.max_implicit)}",
                           f"tolerance = {f(TOL_IMPLICIT)}",
                           f"status = {status(self.max_implicit < TOL_IMPLICIT)}"])
        blocks.append(["[verdict]", f"status = {status(self.passed)}"]
                      + [f"failure = {x}" for x in self.failures])
        return "\n\n".join("\n".join(b) for b in blocks) + "\n"


def verify_immersion(psi: Immersion, implicit: ImplicitEquation | None = None,
                     name: str | None = None, grid: int = 20, n_random: int = 100,
                     seed: int = 0, points=None) -> VerificationReport:
    """Run every check on the stratified sample of the immersion's domain."""
    if points is None:
        u, v = psi.domain.sample_points(psi.data.algebra, grid, n_random, seed)
    else:
        u, v = (np.atleast_1d(np.asarray(c, dtype=float)) for c in points)
    eps = psi.epsilon
    j = jet(psi, u, v)
    E = g(j.psi_u, j.psi_u)
    F = g(j.psi_u, j.psi_v)
    G = g(j.psi_v, j.psi_v)
    H, _, N, nn = _curvature(j, eps)
    lam = 0.5 * (E + eps * G)
    harm = np.max(np.abs(j.psi_uu + eps * j.psi_vv), axis=1)
    scale_u = np.linalg.norm(j.psi_u, axis=1)
    scale_v = np.linalg.norm(j.psi_v, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ortho = np.maximum(np.abs(g(N, j.psi_u)) / scale_u, np.abs(g(N, j.psi_v)) / scale_v)
    normal = np.maximum(np.abs(g(N, N) + eps), ortho)
    report = VerificationReport(
        name or psi.data.name, psi.character, psi.backend, u, v, E, F, G, lam, H, harm,
        normal, None if implicit is None else implicit.residual(psi.evaluate(u, v)),
    )

    fail = report.failures
    degenerate = (np.abs(E) < TOL_DEGENERATE) & (np.abs(G) < TOL_DEGENERATE)
    if degenerate.any():
        fail.append(f"degenerate metric at {int(degenerate.sum())} points")
    if np.any(np.abs(nn) < TOL_DEGENERATE):
        fail.append("lightlike normal")
    if not report.max_conformality < TOL_CONFORMAL:
        fail.append(f"conformality residual {report.max_conformality:.3g}")
    if psi.character is SPACELIKE:
        if not (np.all(E > 0) and np.all(G > 0)):
            fail.append("induced metric is not Riemannian")
    else:
        if not np.all(E * G < 0):
            fail.append("induced metric is not Lorentzian")
        elif np.any(E < 0):
            report.anomalies.append(
                f"E < 0 at {int(np.sum(E < 0))} points (negative conformal factor)")
    if not report.max_H < TOL_H:
        fail.append(f"mean curvature {report.max_H:.3g}")
    if not report.max_harmonicity < TOL_HARMONIC:
        fail.append(f"harmonicity residual {report.max_harmonicity:.3g}")
    if not report.max_normal < TOL_NORMAL:
        fail.append(f"normal residual {report.max_normal:.3g}")
    if implicit is not None and not report.max_implicit < TOL_IMPLICIT:
        fail.append(f"implicit equation residual {report.max_implicit:.3g}")
    return report
