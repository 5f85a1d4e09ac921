# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled 2D hot kernels; see gcell._kernels_py for the reference versions.

The per-node arithmetic order matches the numpy implementation exactly so the
two backends agree bitwise (no fused multiply-adds at default x86-64 codegen).
"""

from libc.math cimport sqrt

import numpy as np


def explicit_rhs(double[:, ::1] w, double[:, ::1] v1, double[:, ::1] v2,
                 double p1, double p2, double sl, double d, double h,
                 double[:, ::1] out):
    cdef Py_ssize_t n0 = w.shape[0], n1 = w.shape[1]
    cdef Py_ssize_t i, j, im, ip, jm, jp
    cdef double inv_h = 1.0 / h, inv_h2 = 1.0 / (h * h)
    cdef double wc, dxm, dxp, dym, dyp, gx, gy, a, b, t, adv, lap
    for i in range(n0):
        im = n0 - 1 if i == 0 else i - 1
        ip = 0 if i == n0 - 1 else i + 1
        for j in range(n1):
            jm = n1 - 1 if j == 0 else j - 1
            jp = 0 if j == n1 - 1 else j + 1
            wc = w[i, j]
            dxm = (wc - w[im, j]) * inv_h + p1
            dxp = (w[ip, j] - wc) * inv_h + p1
            dym = (wc - w[i, jm]) * inv_h + p2
            dyp = (w[i, jp] - wc) * inv_h + p2
            a = dxm if dxm > 0.0 else 0.0
            b = dxp if dxp < 0.0 else 0.0
            gx = a * a if a * a > b * b else b * b
            a = dym if dym > 0.0 else 0.0
            b = dyp if dyp < 0.0 else 0.0
            gy = a * a if a * a > b * b else b * b
            t = v1[i, j]
            adv = (dxm if t > 0.0 else dxp) * t
            t = v2[i, j]
            adv = adv + (dym if t > 0.0 else dyp) * t
            lap = (w[ip, j] + w[im, j] + w[i, jp] + w[i, jm] - 4.0 * wc) * inv_h2
            out[i, j] = d * lap - sl * sqrt(gx + gy) - adv


def godunov_offset(double[:, ::1] w, double p1, double p2, double h,
                   double[:, ::1] out):
    cdef Py_ssize_t n0 = w.shape[0], n1 = w.shape[1]
    cdef Py_ssize_t i, j, im, ip, jm, jp
    cdef double inv_h = 1.0 / h
    cdef double wc, dxm, dxp, dym, dyp, gx, gy, a, b
    for i in range(n0):
        im = n0 - 1 if i == 0 else i - 1
        ip = 0 if i == n0 - 1 else i + 1
        for j in range(n1):
            jm = n1 - 1 if j == 0 else j - 1
            jp = 0 if j == n1 - 1 else j + 1
            wc = w[i, j]
            dxm = (wc - w[im, j]) * inv_h + p1
            dxp = (w[ip, j] - wc) * inv_h + p1
            dym = (wc - w[i, jm]) * inv_h + p2
            dyp = (w[i, jp] - wc) * inv_h + p2
            a = dxm if dxm > 0.0 else 0.0
            b = dxp if dxp < 0.0 else 0.0
            gx = a * a if a * a > b * b else b * b
            a = dym if dym > 0.0 else 0.0
            b = dyp if dyp < 0.0 else 0.0
            gy = a * a if a * a > b * b else b * b
            out[i, j] = sqrt(gx + gy)
