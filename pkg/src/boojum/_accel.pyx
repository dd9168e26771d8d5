# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled assembly kernels: per-triangle energy and first-variation loops."""

import numpy as np

cimport numpy as cnp


def bulk_energy(cnp.int32_t[:, ::1] tri, double[::1] area,
                double[:, ::1] gx, double[:, ::1] gy,
                double[:, ::1] u, double inv_eps2):
    cdef Py_ssize_t nt = tri.shape[0]
    cdef Py_ssize_t t
    cdef Py_ssize_t i0, i1, i2
    cdef double u0x, u0y, u1x, u1y, u2x, u2y
    cdef double dxx, dyx, dxy, dyy
    cdef double a, third, mx, my, s
    cdef double dirichlet = 0.0, potential = 0.0

    for t in range(nt):
        i0 = tri[t, 0]; i1 = tri[t, 1]; i2 = tri[t, 2]
        u0x = u[i0, 0]; u0y = u[i0, 1]
        u1x = u[i1, 0]; u1y = u[i1, 1]
        u2x = u[i2, 0]; u2y = u[i2, 1]
        a = area[t]
        dxx = gx[t, 0] * u0x + gx[t, 1] * u1x + gx[t, 2] * u2x
        dyx = gy[t, 0] * u0x + gy[t, 1] * u1x + gy[t, 2] * u2x
        dxy = gx[t, 0] * u0y + gx[t, 1] * u1y + gx[t, 2] * u2y
        dyy = gy[t, 0] * u0y + gy[t, 1] * u1y + gy[t, 2] * u2y
        dirichlet += 0.5 * a * (dxx * dxx + dyx * dyx + dxy * dxy + dyy * dyy)
        third = a / 3.0
        mx = 0.5 * (u0x + u1x); my = 0.5 * (u0y + u1y)
        s = 1.0 - (mx * mx + my * my); potential += third * s * s
        mx = 0.5 * (u1x + u2x); my = 0.5 * (u1y + u2y)
        s = 1.0 - (mx * mx + my * my); potential += third * s * s
        mx = 0.5 * (u2x + u0x); my = 0.5 * (u2y + u0y)
        s = 1.0 - (mx * mx + my * my); potential += third * s * s
    return dirichlet, 0.25 * inv_eps2 * potential


def bulk_gradient(cnp.int32_t[:, ::1] tri, double[::1] area,
                  double[:, ::1] gx, double[:, ::1] gy,
                  double[:, ::1] u, double inv_eps2, double[:, ::1] grad):
    cdef Py_ssize_t nt = tri.shape[0]
    cdef Py_ssize_t t
    cdef Py_ssize_t i0, i1, i2
    cdef double u0x, u0y, u1x, u1y, u2x, u2y
    cdef double dxx, dyx, dxy, dyy
    cdef double a, third, mx, my, s, q
    cdef double dirichlet = 0.0, potential = 0.0

    for t in range(nt):
        i0 = tri[t, 0]; i1 = tri[t, 1]; i2 = tri[t, 2]
        u0x = u[i0, 0]; u0y = u[i0, 1]
        u1x = u[i1, 0]; u1y = u[i1, 1]
        u2x = u[i2, 0]; u2y = u[i2, 1]
        a = area[t]
        dxx = gx[t, 0] * u0x + gx[t, 1] * u1x + gx[t, 2] * u2x
        dyx = gy[t, 0] * u0x + gy[t, 1] * u1x + gy[t, 2] * u2x
        dxy = gx[t, 0] * u0y + gx[t, 1] * u1y + gx[t, 2] * u2y
        dyy = gy[t, 0] * u0y + gy[t, 1] * u1y + gy[t, 2] * u2y
        dirichlet += 0.5 * a * (dxx * dxx + dyx * dyx + dxy * dxy + dyy * dyy)

        grad[i0, 0] += a * (gx[t, 0] * dxx + gy[t, 0] * dyx)
        grad[i0, 1] += a * (gx[t, 0] * dxy + gy[t, 0] * dyy)
        grad[i1, 0] += a * (gx[t, 1] * dxx + gy[t, 1] * dyx)
        grad[i1, 1] += a * (gx[t, 1] * dxy + gy[t, 1] * dyy)
        grad[i2, 0] += a * (gx[t, 2] * dxx + gy[t, 2] * dyx)
        grad[i2, 1] += a * (gx[t, 2] * dxy + gy[t, 2] * dyy)

        third = a / 3.0
        mx = 0.5 * (u0x + u1x); my = 0.5 * (u0y + u1y)
        s = 1.0 - (mx * mx + my * my); potential += third * s * s
        q = a * inv_eps2 / 6.0 * s
        grad[i0, 0] -= q * mx; grad[i0, 1] -= q * my
        grad[i1, 0] -= q * mx; grad[i1, 1] -= q * my
        mx = 0.5 * (u1x + u2x); my = 0.5 * (u1y + u2y)
        s = 1.0 - (mx * mx + my * my); potential += third * s * s
        q = a * inv_eps2 / 6.0 * s
        grad[i1, 0] -= q * mx; grad[i1, 1] -= q * my
        grad[i2, 0] -= q * mx; grad[i2, 1] -= q * my
        mx = 0.5 * (u2x + u0x); my = 0.5 * (u2y + u0y)
        s = 1.0 - (mx * mx + my * my); potential += third * s * s
        q = a * inv_eps2 / 6.0 * s
        grad[i2, 0] -= q * mx; grad[i2, 1] -= q * my
        grad[i0, 0] -= q * mx; grad[i0, 1] -= q * my
    return dirichlet, 0.25 * inv_eps2 * potential
