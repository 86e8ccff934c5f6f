# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython build of the pairwise kernel evaluations (see _kernels_py)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt, cos, sin, exp, M_PI

cnp.import_array()

ctypedef cnp.float64_t f8
ctypedef cnp.complex128_t c16


cdef inline double complex cexp_i(double a, double b) noexcept nogil:
    # exp(i*(a + i b)) = exp(-b) * (cos a + i sin a)
    cdef double m = exp(-b)
    return m * cos(a) + 1j * m * sin(a)


def green(double complex z, f8[:, ::1] targets, f8[:, ::1] sources,
          bint same_points=False):
    cdef Py_ssize_t m = targets.shape[0], n = sources.shape[0], i, j
    out_arr = np.empty((m, n), dtype=np.complex128)
    cdef c16[:, ::1] out = out_arr
    cdef double dx, dy, dz_, r
    cdef double zr = z.real, zi = z.imag
    with nogil:
        for i in range(m):
            for j in range(n):
                if same_points and i == j:
                    out[i, j] = 0.0
                    continue
                dx = targets[i, 0] - sources[j, 0]
                dy = targets[i, 1] - sources[j, 1]
                dz_ = targets[i, 2] - sources[j, 2]
                r = sqrt(dx * dx + dy * dy + dz_ * dz_)
                out[i, j] = cexp_i(zr * r, zi * r) / (4.0 * M_PI * r)
    return out_arr


def green_dz(double complex z, f8[:, ::1] targets, f8[:, ::1] sources,
             bint same_points=False):
    cdef Py_ssize_t m = targets.shape[0], n = sources.shape[0], i, j
    out_arr = np.empty((m, n), dtype=np.complex128)
    cdef c16[:, ::1] out = out_arr
    cdef double dx, dy, dz_, r
    cdef double zr = z.real, zi = z.imag
    with nogil:
        for i in range(m):
            for j in range(n):
                if same_points and i == j:
                    out[i, j] = 0.0
                    continue
                dx = targets[i, 0] - sources[j, 0]
                dy = targets[i, 1] - sources[j, 1]
                dz_ = targets[i, 2] - sources[j, 2]
                r = sqrt(dx * dx + dy * dy + dz_ * dz_)
                out[i, j] = 1j * cexp_i(zr * r, zi * r) / (4.0 * M_PI)
    return out_arr


def green_dn(double complex z, f8[:, ::1] targets, f8[:, ::1] sources,
             f8[:, ::1] normals, bint at_target=True, bint same_points=False):
    cdef Py_ssize_t m = targets.shape[0], n = sources.shape[0], i, j
    out_arr = np.empty((m, n), dtype=np.complex128)
    cdef c16[:, ::1] out = out_arr
    cdef double dx, dy, dz_, r, nd, sign = 1.0 if at_target else -1.0
    cdef double zr = z.real, zi = z.imag
    with nogil:
        for i in range(m):
            for j in range(n):
                if same_points and i == j:
                    out[i, j] = 0.0
                    continue
                dx = targets[i, 0] - sources[j, 0]
                dy = targets[i, 1] - sources[j, 1]
                dz_ = targets[i, 2] - sources[j, 2]
                r = sqrt(dx * dx + dy * dy + dz_ * dz_)
                if at_target:
                    nd = normals[i, 0] * dx + normals[i, 1] * dy + normals[i, 2] * dz_
                else:
                    nd = normals[j, 0] * dx + normals[j, 1] * dy + normals[j, 2] * dz_
                out[i, j] = (sign * (1j * (zr + 1j * zi) - 1.0 / r)
                             * cexp_i(zr * r, zi * r) / (4.0 * M_PI * r) * (nd / r))
    return out_arr


def green_dn_dz(double complex z, f8[:, ::1] targets, f8[:, ::1] sources,
                f8[:, ::1] normals, bint at_target=True, bint same_points=False):
    cdef Py_ssize_t m = targets.shape[0], n = sources.shape[0], i, j
    out_arr = np.empty((m, n), dtype=np.complex128)
    cdef c16[:, ::1] out = out_arr
    cdef double dx, dy, dz_, r, nd, sign = 1.0 if at_target else -1.0
    cdef double zr = z.real, zi = z.imag
    with nogil:
        for i in range(m):
            for j in range(n):
                if same_points and i == j:
                    out[i, j] = 0.0
                    continue
                dx = targets[i, 0] - sources[j, 0]
                dy = targets[i, 1] - sources[j, 1]
                dz_ = targets[i, 2] - sources[j, 2]
                r = sqrt(dx * dx + dy * dy + dz_ * dz_)
                if at_target:
                    nd = normals[i, 0] * dx + normals[i, 1] * dy + normals[i, 2] * dz_
                else:
                    nd = normals[j, 0] * dx + normals[j, 1] * dy + normals[j, 2] * dz_
                out[i, j] = (-sign * (zr + 1j * zi) / (4.0 * M_PI)
                             * cexp_i(zr * r, zi * r) * (nd / r))
    return out_arr
