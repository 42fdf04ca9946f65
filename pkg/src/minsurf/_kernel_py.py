"""Pure-Python (numpy-vectorized) batch evaluator for compiled programs.

Same contract as the compiled ``_kernel`` module: evaluate a postfix program
at many points, write into ``out_re``/``out_im`` and return ``(code, index)``
where ``code`` is 0 on success, 1 for division by a zero divisor (or by zero)
and 2 for a logarithm outside its principal region.

Unlike the compiled kernel it also runs in ``np.longdouble``, which the
finite-difference stencils use to keep second differences above roundoff.
"""

import numpy as np

TOL_ZERO = 1e-12


def _inv(re, im, lorentz):
    if lorentz:
        n = re * re - im * im
        bad = np.abs(n) < TOL_ZERO
    else:
        n = re * re + im * im
        bad = np.sqrt(n) < TOL_ZERO
    if bad.any():
        return None, None, int(np.flatnonzero(bad)[0])
    return re / n, -im / n, -1


def _mul(a, b, c, d, lorentz):
    if lorentz:
        return a * c + b * d, a * d + b * c
    return a * c - b * d, a * d + b * c


def _pow(re, im, n, lorentz):
    if n < 0:
        pr, pi, err = _pow(re, im, -n, lorentz)
        if err >= 0:
            return pr, pi, err
        return _inv(pr, pi, lorentz)
    rr = np.ones_like(re)
    ri = np.zeros_like(im)
    br, bi = re, im
    while n:
        if n & 1:
            rr, ri = _mul(rr, ri, br, bi, lorentz)
        n >>= 1
        if n:
            br, bi = _mul(br, bi, br, bi, lorentz)
    return rr, ri, -1


def eval_program(ops, ipar, cre, cim, lorentz, zre, zim, out_re, out_im, depth,
                 dtype=np.float64):
    zre = np.asarray(zre, dtype=dtype)
    zim = np.asarray(zim, dtype=dtype)
    stack = []
    for k in range(len(ops)):
        op = ops[k]
        if op == 0:
            stack.append((np.full_like(zre, cre[k]), np.full_like(zre, cim[k])))
        elif op == 1:
            stack.append((zre, zim))
        elif op == 2:
            a, b = stack.pop()
            stack.append((-a, -b))
        elif 3 <= op <= 6:
            c, d = stack.pop()
            a, b = stack.pop()
            if op == 3:
                stack.append((a + c, b + d))
            elif op == 4:
                stack.append((a - c, b - d))
            elif op == 5:
                stack.append(_mul(a, b, c, d, lorentz))
            else:
                ir, ii, err = _inv(c, d, lorentz)
                if err >= 0:
                    return 1, err
                stack.append(_mul(a, b, ir, ii, lorentz))
        elif op == 7:
            a, b = stack.pop()
            pr, pi, err = _pow(a, b, int(ipar[k]), lorentz)
            if err >= 0:
                return 1, err
            stack.append((pr, pi))
        else:
            u, v = stack.pop()
            if lorentz:
                if op == 8:
                    e = np.exp(u)
                    r = (e * np.cosh(v), e * np.sinh(v))
                elif op == 9:
                    r = (np.sin(u) * np.cos(v), np.cos(u) * np.sin(v))
                elif op == 10:
                    r = (np.cos(u) * np.cos(v), -np.sin(u) * np.sin(v))
                elif op == 11:
                    r = (np.sinh(u) * np.cosh(v), np.cosh(u) * np.sinh(v))
                elif op == 12:
                    r = (np.cosh(u) * np.cosh(v), np.sinh(u) * np.sinh(v))
                else:
                    bad = ~(u > np.abs(v))
                    if bad.any():
                        return 2, int(np.flatnonzero(bad)[0])
                    la, lb = np.log(u + v), np.log(u - v)
                    r = (0.5 * (la + lb), 0.5 * (la - lb))
            else:
                if op == 8:
                    e = np.exp(u)
                    r = (e * np.cos(v), e * np.sin(v))
                elif op == 9:
                    r = (np.sin(u) * np.cosh(v), np.cos(u) * np.sinh(v))
                elif op == 10:
                    r = (np.cos(u) * np.cosh(v), -np.sin(u) * np.sinh(v))
                elif op == 11:
                    r = (np.sinh(u) * np.cos(v), np.cosh(u) * np.sin(v))
                elif op == 12:
                    r = (np.cosh(u) * np.cos(v), np.sinh(u) * np.sin(v))
                else:
                    bad = (v == 0.0) & (u <= 0.0)
                    if bad.any():
                        return 2, int(np.flatnonzero(bad)[0])
                    r = (np.log(np.hypot(u, v)), np.arctan2(v, u))
            stack.append(r)
    a, b = stack.pop()
    out_re[:] = a
    out_im[:] = b
    return 0, -1
