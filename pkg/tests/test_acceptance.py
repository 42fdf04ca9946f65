"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The summary at the end of a pytest run lists every criterion again.
"""

import cmath
import math
import os
import shutil
import subprocess
import sys
from fractions import Fraction

import numpy as np

from minsurf import catalog
from minsurf import expr as ex
from minsurf import kalgebra as ka
from minsurf.enneper import (
    SPACELIKE,
    condition_values,
    epicycloid_family,
    from_weierstrass,
    immerse_closed,
    immerse_integral,
    immerse_path,
    recover,
    scale_transform,
    to_weierstrass,
    validate,
    weierstrass_residuals,
)
from minsurf.errors import PathLeavesDomain
from minsurf.kalgebra import COMPLEX, LORENTZ, KScalar

N_ALGEBRA = 10_000


def _size(z: KScalar) -> float:
    return math.hypot(z.re, z.im)


def _rel(a: KScalar, b: KScalar) -> float:
    return _size(a - b) / max(1.0, _size(a), _size(b))


# -- 1 ----------------------------------------------------------------------------------


def _oracle(fn, z):
    """Elementary functions from cmath (complex) or real math in null coordinates (Lorentz)."""
    if z.algebra is COMPLEX:
        c = getattr(cmath, fn)(complex(z.re, z.im))
        return KScalar(COMPLEX, c.real, c.imag)
    f = getattr(math, fn)
    a, b = f(z.re + z.im), f(z.re - z.im)
    return KScalar(LORENTZ, 0.5 * (a + b), 0.5 * (a - b))


def _algebra_errors(alg, rng):
    pts = rng.uniform(-2.0, 2.0, size=(N_ALGEBRA, 3, 2))
    worst = 0.0
    one = KScalar(alg, 1.0)
    unit = KScalar(alg, 0.0, 1.0)
    for row in pts:
        x, y, w = (KScalar(alg, a, b) for a, b in row)
        errs = [
            _rel((x * y) * w, x * (y * w)),
            _rel(x * (y + w), x * y + x * w),
            _rel(x * y, y * x),
            _rel(ka.kexp(x + y), ka.kexp(x) * ka.kexp(y)),
            _rel(ka.kcosh(x) ** 2 - ka.ksinh(x) ** 2, one) / max(1.0, _size(ka.kcosh(x)) ** 2),
            _rel(ka.ksin(x) ** 2 + ka.kcos(x) ** 2, one) / max(1.0, _size(ka.kcos(x)) ** 2),
            _rel(ka.kcosh(x), (ka.kexp(x) + ka.kexp(-x)) * 0.5),
            _rel(ka.ksinh(x), (ka.kexp(x) - ka.kexp(-x)) * 0.5),
            _rel(ka.ksin(x + y), ka.ksin(x) * ka.kcos(y) + ka.kcos(x) * ka.ksin(y)),
        ]
        errs += [_rel(getattr(ka, "k" + fn)(x), _oracle(fn, x)) for fn in ("exp", "sin", "cos", "sinh", "cosh")]
        if abs(x.norm2()) > 1e-3:
            errs.append(_rel(x * ka.inv(x), one))
        if alg is LORENTZ:
            px, py = ka.phi_iso(x), ka.phi_iso(y)
            pm, ps = ka.phi_iso(x * y), ka.phi_iso(x + y)
            scale = max(1.0, abs(px[0] * py[0]), abs(px[1] * py[1]))
            errs.append(max(abs(pm[0] - px[0] * py[0]), abs(pm[1] - px[1] * py[1])) / scale)
            errs.append(max(abs(ps[0] - px[0] - py[0]), abs(ps[1] - px[1] - py[1])) / max(1.0, abs(ps[0])))
            errs.append(_rel(ka.phi_iso_inv(*px), x))
            errs.append(_rel(ka.kexp(unit * x.im), KScalar(LORENTZ, math.cosh(x.im), math.sinh(x.im))))
        else:
            errs.append(_rel(ka.kexp(unit * x.im), KScalar(COMPLEX, math.cos(x.im), math.sin(x.im))))
        worst = max(worst, *errs)
    return worst


def test_criterion_01_algebra(criterion):
    rng = np.random.default_rng(2024)
    errs = {alg.value: _algebra_errors(alg, rng) for alg in (COMPLEX, LORENTZ)}
    worst = max(errs.values())
    ok = worst < 1e-10
    detail = ", ".join(f"{k} {v:.2e}" for k, v in errs.items())
    criterion(1, "algebra identities on 10^4 points per algebra",
              ok, f"max rel err {detail} (< 1e-10)")
    assert ok


# -- 2 ----------------------------------------------------------------------------------


def _catalog_expressions(e):
    d = e.data
    out = [d.Lz, d.Pz, d.hz]
    if d.has_closed_form:
        out += [d.L, d.P, d.H]
    return out


def test_criterion_02_derivatives(criterion):
    h = 1e-5
    worst_fd = worst_cr = 0.0
    n_expr = 0
    for e in catalog.entries():
        d = e.data
        u, v = d.domain.sample_points(d.algebra, grid=1, n_random=40, seed=17)
        u, v = u[:20], v[:20]
        assert len(u) == 20
        for expr in _catalog_expressions(e):
            n_expr += 1
            dexpr = ex.deriv(expr)

            def f(a, b, expr=expr, alg=d.algebra):
                w = ex.evaluate(expr, KScalar(alg, a, b))
                return complex(w.re, w.im)

            for a, b in zip(u, v):
                w = ex.evaluate(dexpr, KScalar(d.algebra, a, b))
                sym = complex(w.re, w.im)
                fd = (f(a + h, b) - f(a - h, b)) / (2 * h)
                worst_fd = max(worst_fd, abs(sym - fd) / (1 + abs(sym)))
                if d.algebra is LORENTZ:
                    fu = fd
                    fv = (f(a, b + h) - f(a, b - h)) / (2 * h)
                    scale = 1 + abs(fu)
                    worst_cr = max(worst_cr, abs(fu.real - fv.imag) / scale, abs(fv.real - fu.imag) / scale)
    ok = worst_fd < 1e-6 and worst_cr < 1e-6
    criterion(2, "symbolic derivatives and para-Cauchy-Riemann", ok,
              f"{n_expr} expressions x 20 points, deriv err {worst_fd:.2e}, CR residual {worst_cr:.2e} (< 1e-6)")
    assert ok


# -- 3 ----------------------------------------------------------------------------------


def test_criterion_03_conditions(criterion):
    entries = catalog.entries()
    reports = [validate(e.data, samples=20, n_random=100) for e in entries]
    max_a = max(r.max_condition_a for r in reports)
    min_b = min(r.min_condition_b for r in reports)
    failed = [r.name for r in reports if not r.passed]
    ok = len(entries) >= 20 and not failed and max_a < 1e-10 and min_b > 1e-8
    criterion(3, "Enneper conditions on every entry", ok,
              f"{len(entries)} entries, max condition A {max_a:.2e} (< 1e-10), "
              f"min condition B margin {min_b:.2e} (> 1e-8), failed {failed}")
    assert ok


# -- 4 ----------------------------------------------------------------------------------


def test_criterion_04_minimality(criterion):
    reports = [catalog.verify_entry(e) for e in catalog.entries()]
    h = max(r.max_H for r in reports)
    conf = max(r.max_conformality for r in reports)
    harm = max(r.max_harmonicity for r in reports)
    failed = [r.name for r in reports if not r.passed]
    ok = h < 1e-6 and conf < 1e-6 and harm < 1e-5 and not failed
    criterion(4, "minimality, conformality, harmonicity", ok,
              f"max |H| {h:.2e} (< 1e-6), conformality {conf:.2e} (< 1e-6), "
              f"harmonicity {harm:.2e} (< 1e-5), failed {failed}")
    assert ok


# -- 5 ----------------------------------------------------------------------------------

CATENOIDS_AND_HELICOIDS = [
    "elliptic-catenoid", "spacelike-hyperbolic-catenoid-a", "spacelike-hyperbolic-catenoid-b",
    "spacelike-parabolic-catenoid",
    "spacelike-helicoid-1st", "spacelike-helicoid-2nd", "spacelike-parabolic-helicoid",
    "lorentzian-elliptic-catenoid", "lorentzian-hyperbolic-catenoid-1st",
    "lorentzian-hyperbolic-catenoid-2nd", "lorentzian-parabolic-catenoid",
    "timelike-helicoid-1st", "timelike-helicoid-2nd-a", "timelike-helicoid-2nd-b",
    "timelike-helicoid-3rd-a", "timelike-helicoid-3rd-b", "timelike-parabolic-helicoid",
]


def test_criterion_05_implicit_equations(criterion):
    worst = 0.0
    missing = []
    for name in CATENOIDS_AND_HELICOIDS:
        e = catalog.get(name)
        if e.implicit is None:
            missing.append(name)
            continue
        d = e.data
        u, v = d.domain.sample_points(d.algebra, grid=20, n_random=100)
        res = e.implicit.residual(immerse_closed(d).evaluate(u, v))
        worst = max(worst, float(np.max(res)) if np.all(np.isfinite(res)) else math.inf)
    ok = not missing and worst < 1e-9
    criterion(5, "implicit equations of catenoids and helicoids", ok,
              f"{len(CATENOIDS_AND_HELICOIDS)} entries, max residual {worst:.2e} (< 1e-9), missing {missing}")
    assert ok


# -- 6 ----------------------------------------------------------------------------------


def _detour(domain, algebra, z0, z, frac):
    """A one-vertex polyline from z0 to z, bent sideways by ``frac`` of its length."""
    mid = 0.5 * (z0 + z)
    normal = 1j * (z - z0)
    for s in (frac, -frac, frac / 2, -frac / 2, frac / 4, -frac / 4):
        p = mid + s * normal
        t = np.linspace(0, 1, 65)
        pts = np.concatenate([z0 + t * (p - z0), p + t * (z - p)])
        if np.all(domain.contains(pts.real, pts.imag, algebra)):
            return [(p.real, p.imag)]
    return None


def test_criterion_06_representations(criterion):
    worst_closed = worst_path = 0.0
    n_closed = n_path = 0
    for e in catalog.entries():
        d = e.data
        u, v = d.domain.sample_points(d.algebra, grid=1, n_random=40, seed=23)
        u, v = u[:20], v[:20]
        closed = immerse_closed(d)
        integral = immerse_path(d)
        base = closed.evaluate(*d.domain.basepoint)
        z0 = complex(*d.domain.basepoint)
        for a, b in zip(u, v):
            try:
                got = integral.evaluate(a, b)
            except PathLeavesDomain:
                continue
            worst_closed = max(worst_closed, float(np.max(np.abs(got - (closed.evaluate(a, b) - base)))))
            n_closed += 1
            bend = _detour(d.domain, d.algebra, z0, complex(a, b), 0.3)
            if bend is not None and abs(complex(a, b) - z0) > 1e-3:
                other = immerse_integral(d, (a, b), path=bend)
                worst_path = max(worst_path, float(np.max(np.abs(other - got))))
                n_path += 1
    n_entries = len(catalog.entries())
    ok = worst_closed < 1e-8 and worst_path < 1e-8 and n_closed >= 15 * n_entries and n_path >= 10 * n_entries
    criterion(6, "integral vs closed form, path independence", ok,
              f"{n_closed} points: max diff {worst_closed:.2e} (< 1e-8); "
              f"{n_path} path pairs: max diff {worst_path:.2e} (< 1e-8)")
    assert ok


# -- 7 ----------------------------------------------------------------------------------


def test_criterion_07_weierstrass(criterion):
    worst_data = worst_null = 0.0
    for e in catalog.entries():
        d = e.data
        w = to_weierstrass(d)
        back = from_weierstrass(w)
        u, v = d.domain.sample_points(d.algebra, grid=20, n_random=100)
        for a, b in zip(back.evaluate_data(u, v), d.evaluate_data(u, v)):
            worst_data = max(worst_data, float(np.max(np.abs(a - b) / (1 + np.abs(b)))))
        _, null, _ = weierstrass_residuals(w, u, v)
        worst_null = max(worst_null, float(np.max(null)))
    ok = worst_data < 1e-12 and worst_null < 1e-12
    criterion(7, "Weierstrass round trip", ok,
              f"data err {worst_data:.2e} (< 1e-12), phi1^2+phi2^2-phi3^2 residual {worst_null:.2e} (< 1e-12)")
    assert ok


# -- 8 ----------------------------------------------------------------------------------


def _catalan_closed_form(u, v):
    return np.stack([-np.cos(2 * u) * np.cos(2 * v) / 2,
                     v - np.cos(2 * u) * np.sin(2 * v) / 2,
                     2 * np.sin(u) * np.sin(v)], axis=-1)


def test_criterion_08_new_surfaces(criterion):
    helicoid = catalog.get("timelike-helicoid-1st").data
    catalan = scale_transform(helicoid, "2*sin(z)")
    u, v = helicoid.domain.sample_points(LORENTZ, grid=5, n_random=20)
    psi = immerse_path(catalan).evaluate(u, v)
    want = _catalan_closed_form(u, v) - _catalan_closed_form(*np.array(helicoid.domain.basepoint))
    err_catalan = float(np.max(np.abs(psi - want)))

    cat = catalog.get("elliptic-catenoid").data
    heli = catalog.get("spacelike-helicoid-1st").data
    conj = scale_transform(cat, "i")
    u, v = cat.domain.sample_points(SPACELIKE.algebra, grid=20, n_random=100)
    err_conj = max(float(np.max(np.abs(a - b))) for a, b in zip(conj.evaluate_data(u, v), heli.evaluate_data(u, v)))

    radii_ok = True
    for n in range(2, 9):
        fam = epicycloid_family(n)
        radii_ok &= fam.R == Fraction(2, n * n - 1) and fam.r == Fraction(1, n + 1)
    f2, f3 = epicycloid_family(2), epicycloid_family(3)
    radii_ok &= f2.R == 2 * f2.r and f3.R == f3.r

    ok = err_catalan < 1e-8 and err_conj < 1e-12 and radii_ok
    criterion(8, "scaled data and the epicycloid family", ok,
              f"Catalan immersion err {err_catalan:.2e} (< 1e-8), i*catenoid vs helicoid {err_conj:.2e} (< 1e-12), "
              f"radii R=2/(n^2-1), r=1/(n+1), R(2)=2r(2), R(3)=r(3): {'exact' if radii_ok else 'wrong'}")
    assert ok


# -- 9 ----------------------------------------------------------------------------------


def test_criterion_09_recovery(criterion):
    worst = 0.0
    for name in ("elliptic-catenoid", "lorentzian-catenoid", "enneper-1st-kind"):
        d = catalog.get(name).data
        u, v = d.domain.sample_points(d.algebra, grid=20, n_random=100)
        rec = recover(immerse_closed(d), u, v)
        for got, want in zip((rec.Lz, rec.Pz, rec.hz), d.evaluate_data(u, v)):
            worst = max(worst, float(np.max(np.abs(got - want) / (1 + np.abs(want)))))
        worst = max(worst, float(np.max(rec.condition_a())))
    ok = worst < 1e-6
    criterion(9, "recovery of Enneper data from immersions", ok,
              f"max pointwise err {worst:.2e} (< 1e-6)")
    assert ok


# -- 10 ---------------------------------------------------------------------------------


def _cli():
    exe = shutil.which("surfaces")
    return [exe] if exe else [sys.executable, "-m", "minsurf.cli"]


def test_criterion_10_cli(criterion, tmp_path):
    cmd = _cli()
    env = {k: v for k, v in os.environ.items() if k != catalog.ENV_VAR}
    same = True
    for fmt in ("obj", "csv"):
        outs = []
        for k in range(2):
            path = tmp_path / f"run{k}.{fmt}"
            res = subprocess.run(cmd + ["sample", "elliptic-catenoid", "--grid", "32x24",
                                        "--format", fmt, "--out", str(path)], env=env)
            same &= res.returncode == 0
            outs.append(path.read_bytes())
        same &= outs[0] == outs[1] and len(outs[0]) > 0
    res = subprocess.run(cmd + ["verify", "--all", "--out", str(tmp_path / "report.txt")], env=env)
    ok = same and res.returncode == 0
    criterion(10, "CLI determinism and full verification", ok,
              f"sample byte-identical: {same}, verify --all exit code {res.returncode}")
    assert ok
