# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch evaluator: one stack machine run per point."""

from libc.math cimport exp, sin, cos, sinh, cosh, log, sqrt, fabs, atan2, hypot

cdef enum:
    MAX_STACK = 64

cdef double TOL_ZERO = 1e-12


cdef inline int _inv(double a, double b, bint lorentz, double* r, double* i) noexcept nogil:
    cdef double n
    if lorentz:
        n = a * a - b * b
        if fabs(n) < TOL_ZERO:
            return 1
    else:
        n = a * a + b * b
        if sqrt(n) < TOL_ZERO:
            return 1
    r[0] = a / n
    i[0] = -b / n
    return 0


cdef inline void _mul(double a, double b, double c, double d, bint lorentz,
                      double* r, double* i) noexcept nogil:
    if lorentz:
        r[0] = a * c + b * d
    else:
        r[0] = a * c - b * d
    i[0] = a * d + b * c


cdef inline int _pow(double a, double b, int n, bint lorentz, double* r, double* i) noexcept nogil:
    cdef double rr = 1.0, ri = 0.0, br = a, bi = b, t0, t1
    cdef int m = n if n >= 0 else -n
    while m:
        if m & 1:
            _mul(rr, ri, br, bi, lorentz, &t0, &t1)
            rr = t0
            ri = t1
        m >>= 1
        if m:
            _mul(br, bi, br, bi, lorentz, &t0, &t1)
            br = t0
            bi = t1
    if n < 0:
        return _inv(rr, ri, lorentz, r, i)
    r[0] = rr
    i[0] = ri
    return 0


def eval_program(const int[::1] ops, const int[::1] ipar, const double[::1] cre,
                 const double[::1] cim, bint lorentz,
                 const double[::1] zre, const double[::1] zim,
                 double[::1] out_re, double[::1] out_im, int depth):
    cdef Py_ssize_t npts = zre.shape[0]
    cdef Py_ssize_t nops = ops.shape[0]
    cdef Py_ssize_t p, k
    cdef double sr[MAX_STACK]
    cdef double si[MAX_STACK]
    cdef int sp, op, err = 0
    cdef double a, b, c, d, u, v, t0, t1, e
    if depth > MAX_STACK:
        raise ValueError("expression too deep for the compiled kernel")
    with nogil:
        for p in range(npts):
            sp = 0
            for k in range(nops):
                op = ops[k]
                if op == 0:
                    sr[sp] = cre[k]
                    si[sp] = cim[k]
                    sp += 1
                elif op == 1:
                    sr[sp] = zre[p]
                    si[sp] = zim[p]
                    sp += 1
                elif op == 2:
                    sr[sp - 1] = -sr[sp - 1]
                    si[sp - 1] = -si[sp - 1]
                elif op >= 3 and op <= 6:
                    sp -= 1
                    c = sr[sp]
                    d = si[sp]
                    a = sr[sp - 1]
                    b = si[sp - 1]
                    if op == 3:
                        sr[sp - 1] = a + c
                        si[sp - 1] = b + d
                    elif op == 4:
                        sr[sp - 1] = a - c
                        si[sp - 1] = b - d
                    elif op == 5:
                        _mul(a, b, c, d, lorentz, &sr[sp - 1], &si[sp - 1])
                    else:
                        if _inv(c, d, lorentz, &t0, &t1):
                            err = 1
                            break
                        _mul(a, b, t0, t1, lorentz, &sr[sp - 1], &si[sp - 1])
                elif op == 7:
                    if _pow(sr[sp - 1], si[sp - 1], ipar[k], lorentz, &t0, &t1):
                        err = 1
                        break
                    sr[sp - 1] = t0
                    si[sp - 1] = t1
                else:
                    u = sr[sp - 1]
                    v = si[sp - 1]
                    if lorentz:
                        if op == 8:
                            e = exp(u)
                            t0 = e * cosh(v)
                            t1 = e * sinh(v)
                        elif op == 9:
                            t0 = sin(u) * cos(v)
                            t1 = cos(u) * sin(v)
                        elif op == 10:
                            t0 = cos(u) * cos(v)
                            t1 = -sin(u) * sin(v)
                        elif op == 11:
                            t0 = sinh(u) * cosh(v)
                            t1 = cosh(u) * sinh(v)
                        elif op == 12:
                            t0 = cosh(u) * cosh(v)
                            t1 = sinh(u) * sinh(v)
                        else:
                            if not (u > fabs(v)):
                                err = 2
                                break
                            a = log(u + v)
                            b = log(u - v)
                            t0 = 0.5 * (a + b)
                            t1 = 0.5 * (a - b)
                    else:
                        if op == 8:
                            e = exp(u)
                            t0 = e * cos(v)
                            t1 = e * sin(v)
                        elif op == 9:
                            t0 = sin(u) * cosh(v)
                            t1 = cos(u) * sinh(v)
                        elif op == 10:
                            t0 = cos(u) * cosh(v)
                            t1 = -sin(u) * sinh(v)
                        elif op == 11:
                            t0 = sinh(u) * cos(v)
                            t1 = cosh(u) * sin(v)
                        elif op == 12:
                            t0 = cosh(u) * cos(v)
                            t1 = sinh(u) * sin(v)
                        else:
                            if v == 0.0 and u <= 0.0:
                                err = 2
                                break
                            t0 = log(hypot(u, v))
                            t1 = atan2(v, u)
                    sr[sp - 1] = t0
                    si[sp - 1] = t1
            if err:
                break
            out_re[p] = sr[0]
            out_im[p] = si[0]
    if err:
        return err, p
    return 0, -1
