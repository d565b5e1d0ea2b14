# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled radial kernel integrals; same panel layout as ``_core_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sqrt, ceil, pow, INFINITY, isinf

from .quad.rules import gauss_legendre

cdef double LOG_PANEL = log(4.0)
cdef double LIN_PANEL = 2.0
cdef double CAP_EXPONENT = 46.0
cdef double HEAD = 1e-10


cdef inline double _smooth(double u) nogil:
    if u <= 0.0:
        return 0.0
    if u >= 1.0:
        return 1.0
    return u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)


cdef inline double _eta(double r, double d) nogil:
    if r <= d:
        return 1.0
    if r < 2.0 * d:
        return 1.0 - _smooth((r - d) / d)
    if r <= 2.0 / d:
        return 0.0
    if r < 4.0 / d:
        return _smooth((r - 2.0 / d) / (2.0 / d))
    return 1.0


cdef inline double _f(double r, double c0, double b, double alpha, double s,
                      double n, double p, int kmode, double delta) nogil:
    cdef double k
    if kmode == 0:
        k = pow(r, p - 1.0 - s)
    elif kmode == 1:
        k = (1.0 - _eta(r, delta)) * pow(r, p - 1.0 - s)
    else:
        k = pow(r, n - 1.0 + p) / (pow(r, n + s) + delta)
    if alpha != 0.0:
        k *= exp(-0.25 * alpha * (c0 + 2.0 * r * b + r * r))
    return k


cdef inline double _add_tail(double r, double n, double s, double delta) nogil:
    return pow(r, -s) / s - delta * pow(r, -n - 2.0 * s) / (n + 2.0 * s)


cdef double _segment(double u, double v, double c0, double b, double alpha,
                     double s, double n, double p, int kmode, double delta,
                     double[::1] x, double[::1] w) nogil:
    cdef int order = x.shape[0]
    cdef bint geo = (v <= 1.0) or (alpha == 0.0)
    cdef int m, k, j
    cdef double acc = 0.0, panel, a, half, t, r, la
    if geo:
        m = <int>ceil(log(v / u) / LOG_PANEL)
    else:
        m = <int>ceil((v - u) * sqrt(alpha) / LIN_PANEL)
    if m < 1:
        m = 1
    if geo:
        la = log(u)
        half = 0.5 * (log(v) - la) / m
        for k in range(m):
            a = la + k * 2.0 * half
            panel = 0.0
            for j in range(order):
                t = a + half * (x[j] + 1.0)
                r = exp(t)
                panel += w[j] * _f(r, c0, b, alpha, s, n, p, kmode, delta) * r * half
            acc += panel
    else:
        half = 0.5 * (v - u) / m
        for k in range(m):
            a = u + k * 2.0 * half
            panel = 0.0
            for j in range(order):
                r = a + half * (x[j] + 1.0)
                panel += w[j] * _f(r, c0, b, alpha, s, n, p, kmode, delta) * half
            acc += panel
    return acc


def radial_integrate(lo, hi, c0, b, double alpha, double s, int n, int p,
                     int kmode, double delta, int order):
    cdef double[::1] LO = np.array(lo, dtype=np.float64).ravel()
    cdef double[::1] HI = np.array(hi, dtype=np.float64).ravel()
    cdef Py_ssize_t R = LO.shape[0]
    cdef double[::1] C0 = np.array(np.broadcast_to(np.asarray(c0, dtype=np.float64), (R,)))
    cdef double[::1] B = np.array(np.broadcast_to(np.asarray(b, dtype=np.float64), (R,)))
    out_arr = np.zeros(R)
    cdef double[::1] out = out_arr
    xg, wg = gauss_legendre(order)
    cdef double[::1] x = np.array(xg)
    cdef double[::1] w = np.array(wg)
    cdef double dn = n, dp = p
    cdef Py_ssize_t i
    cdef int q, nb, j
    cdef double l, h, disc, root, acc, rc, g0, h0, e, tmp
    cdef double pts[5]

    if alpha == 0.0 and kmode == 0:
        e = dp - s
        for i in range(R):
            l = LO[i]
            h = HI[i]
            if not h > l:
                continue
            if isinf(h):
                tmp = 0.0 if e < 0 else INFINITY
            else:
                tmp = pow(h, e)
            out[i] = (tmp - pow(l, e)) / e
        return out_arr

    if kmode == 2 and alpha == 0.0 and p != 0:
        raise ValueError("additive Euclidean kernel with p != 0 diverges at infinity")
    rc = 64.0 * max(1.0, pow(delta, 1.0 / (dn + s))) if kmode == 2 else 0.0

    with nogil:
        for i in range(R):
            l = LO[i]
            h = HI[i]
            if not h > l:
                continue
            acc = 0.0
            if alpha != 0.0:
                disc = B[i] * B[i] - C0[i] + 4.0 * CAP_EXPONENT / alpha
                if disc <= 0.0:
                    continue
                root = sqrt(disc)
                if -B[i] + root < h:
                    h = -B[i] + root
                if -B[i] - root > l:
                    l = -B[i] - root
            if kmode == 1:
                if h > 4.0 / delta:
                    h = 4.0 / delta
                if l < delta:
                    l = delta
            if alpha == 0.0 and kmode == 2 and h > rc:
                if isinf(h):
                    acc += _add_tail(rc, dn, s, delta)
                else:
                    acc += _add_tail(rc, dn, s, delta) - _add_tail(h, dn, s, delta)
                h = rc
            if not h > l:
                out[i] = acc
                continue
            if l <= 0.0:
                h0 = HEAD if HEAD < h else h
                g0 = exp(-0.25 * alpha * C0[i])
                if kmode == 0:
                    acc += g0 * pow(h0, dp - s) / (dp - s)
                elif kmode == 2:
                    acc += g0 * pow(h0, dn + dp) / (delta * (dn + dp))
                l = h0
                if not h > l:
                    out[i] = acc
                    continue
            pts[0] = l
            pts[1] = 1.0
            nb = 2
            if kmode == 1:
                pts[2] = 2.0 * delta
                pts[3] = 2.0 / delta
                nb = 4
            for q in range(1, nb):
                if pts[q] < l:
                    pts[q] = l
                if pts[q] > h:
                    pts[q] = h
            pts[nb] = h
            # insertion sort, at most five entries
            for q in range(1, nb + 1):
                tmp = pts[q]
                j = q - 1
                while j >= 0 and pts[j] > tmp:
                    pts[j + 1] = pts[j]
                    j -= 1
                pts[j + 1] = tmp
            for q in range(nb):
                if pts[q + 1] > pts[q]:
                    acc += _segment(pts[q], pts[q + 1], C0[i], B[i], alpha, s,
                                    dn, dp, kmode, delta, x, w)
            out[i] = acc
    return out_arr
