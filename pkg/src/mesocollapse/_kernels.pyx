# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; semantics mirror ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, exp

cnp.import_array()


def iterated_sums(dW, double diag_weight):
    cdef double[:, ::1] w = np.ascontiguousarray(dW, dtype=np.float64)
    cdef Py_ssize_t ns = w.shape[0], n = w.shape[1], s, i
    out = np.empty((ns, 4), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double x, c1, c2, c3, p1, p2, p3, s1, s2, s3, s4
    with nogil:
        for s in range(ns):
            c1 = 0.0
            c2 = 0.0
            c3 = 0.0
            s1 = 0.0
            s2 = 0.0
            s3 = 0.0
            s4 = 0.0
            for i in range(n):
                x = w[s, i]
                # partial sums strictly below index i, plus the coincident term
                p1 = c1 + diag_weight * x
                p2 = c2 + diag_weight * x * p1
                p3 = c3 + diag_weight * x * p2
                s1 += x
                s2 += x * p1
                s3 += x * p2
                s4 += x * p3
                c1 += x
                c2 += x * p1
                c3 += x * p2
            o[s, 0] = s1
            o[s, 1] = s2
            o[s, 2] = s3
            o[s, 3] = s4
    return out


cdef inline void _cmul(double *re, double *im, double ar, double ai) noexcept nogil:
    cdef double r = re[0] * ar - im[0] * ai
    im[0] = re[0] * ai + im[0] * ar
    re[0] = r


def evolve_diagonal(psi0, a, b, incr, double dt, Py_ssize_t record_every, int scheme):
    cdef double complex[::1] p0 = np.ascontiguousarray(psi0, dtype=np.complex128)
    cdef double complex[::1] av = np.ascontiguousarray(a, dtype=np.complex128)
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef double[:, ::1] dw = np.ascontiguousarray(incr, dtype=np.float64)
    cdef Py_ssize_t nt = dw.shape[0], n = dw.shape[1]
    cdef Py_ssize_t nrec = n // record_every + 1
    if scheme < 0 or scheme > 2:
        raise ValueError(f"unknown scheme code {scheme}")
    out = np.empty((nt, nrec, 2), dtype=np.complex128)
    cdef double complex[:, :, ::1] o = out
    cdef Py_ssize_t tr, st, mu
    cdef double re, im, zr, zi, mag, mr, mi, hr, hi, hmag
    cdef double dr[2]
    cdef double di[2]
    for mu in range(2):
        dr[mu] = av[mu].real * dt
        di[mu] = av[mu].imag * dt
    with nogil:
        for tr in range(nt):
            for mu in range(2):
                re = p0[mu].real
                im = p0[mu].imag
                o[tr, 0, mu] = re + 1j * im
                hmag = exp(0.5 * dr[mu])
                hr = hmag * cos(0.5 * di[mu])
                hi = hmag * sin(0.5 * di[mu])
                for st in range(n):
                    zr = dr[mu]
                    zi = di[mu] + bv[mu] * dw[tr, st]
                    if scheme == 0:
                        mag = exp(zr)
                        _cmul(&re, &im, mag * cos(zi), mag * sin(zi))
                    elif scheme == 1:
                        mr = 1.0 + zr + 0.5 * (zr * zr - zi * zi)
                        mi = zi + zr * zi
                        _cmul(&re, &im, mr, mi)
                    else:
                        zi = bv[mu] * dw[tr, st]
                        _cmul(&re, &im, hr, hi)
                        _cmul(&re, &im, cos(zi), sin(zi))
                        _cmul(&re, &im, hr, hi)
                    if (st + 1) % record_every == 0:
                        o[tr, (st + 1) // record_every, mu] = re + 1j * im
    return out
