# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled stencil kernels; same signatures and results as ``_kernels_py``."""

import numpy as np

cdef int NEUMANN = 0
cdef int DIRICHLET = 1
cdef int PERIODIC = 2


cdef inline double ghost_lo(const double[:, :] f, int axis, int k, int kind, double value) nogil:
    # ghost value below index 0 along ``axis`` at transverse index ``k``
    cdef Py_ssize_t n = f.shape[axis]
    if axis == 0:
        if kind == PERIODIC:
            return f[n - 1, k]
        if kind == DIRICHLET:
            return 2.0 * value - f[0, k]
        return f[0, k]
    if kind == PERIODIC:
        return f[k, n - 1]
    if kind == DIRICHLET:
        return 2.0 * value - f[k, 0]
    return f[k, 0]


cdef inline double ghost_hi(const double[:, :] f, int axis, int k, int kind, double value) nogil:
    cdef Py_ssize_t n = f.shape[axis]
    if axis == 0:
        if kind == PERIODIC:
            return f[0, k]
        if kind == DIRICHLET:
            return 2.0 * value - f[n - 1, k]
        return f[n - 1, k]
    if kind == PERIODIC:
        return f[k, 0]
    if kind == DIRICHLET:
        return 2.0 * value - f[k, n - 1]
    return f[k, n - 1]


def gradient(f_in, double hx, double hy, kinds_in, values_in):
    cdef const double[:, :] f = np.ascontiguousarray(f_in, dtype=np.float64)
    cdef const long[:] kinds = np.ascontiguousarray(kinds_in, dtype=np.dtype("l"))
    cdef const double[:] values = np.ascontiguousarray(values_in, dtype=np.float64)
    cdef Py_ssize_t nx = f.shape[0], ny = f.shape[1], i, j
    gx_arr = np.empty((nx + 1, ny))
    gy_arr = np.empty((nx, ny + 1))
    cdef double[:, :] gx = gx_arr
    cdef double[:, :] gy = gy_arr
    with nogil:
        for j in range(ny):
            gx[0, j] = (f[0, j] - ghost_lo(f, 0, j, kinds[0], values[0])) / hx
            for i in range(1, nx):
                gx[i, j] = (f[i, j] - f[i - 1, j]) / hx
            gx[nx, j] = (ghost_hi(f, 0, j, kinds[1], values[1]) - f[nx - 1, j]) / hx
        for i in range(nx):
            gy[i, 0] = (f[i, 0] - ghost_lo(f, 1, i, kinds[2], values[2])) / hy
            for j in range(1, ny):
                gy[i, j] = (f[i, j] - f[i, j - 1]) / hy
            gy[i, ny] = (ghost_hi(f, 1, i, kinds[3], values[3]) - f[i, ny - 1]) / hy
    return gx_arr, gy_arr


def divergence(u_in, v_in, double hx, double hy):
    cdef const double[:, :] u = np.ascontiguousarray(u_in, dtype=np.float64)
    cdef const double[:, :] v = np.ascontiguousarray(v_in, dtype=np.float64)
    cdef Py_ssize_t nx = v.shape[0], ny = u.shape[1], i, j
    out_arr = np.empty((nx, ny))
    cdef double[:, :] out = out_arr
    with nogil:
        for i in range(nx):
            for j in range(ny):
                out[i, j] = (u[i + 1, j] - u[i, j]) / hx + (v[i, j + 1] - v[i, j]) / hy
    return out_arr


def laplacian(f_in, double hx, double hy, kinds_in, values_in):
    gx, gy = gradient(f_in, hx, hy, kinds_in, values_in)
    return divergence(gx, gy, hx, hy)


def face_average(f_in, kinds_in, values_in):
    cdef const double[:, :] f = np.ascontiguousarray(f_in, dtype=np.float64)
    cdef const long[:] kinds = np.ascontiguousarray(kinds_in, dtype=np.dtype("l"))
    cdef const double[:] values = np.ascontiguousarray(values_in, dtype=np.float64)
    cdef Py_ssize_t nx = f.shape[0], ny = f.shape[1], i, j
    ax_arr = np.empty((nx + 1, ny))
    ay_arr = np.empty((nx, ny + 1))
    cdef double[:, :] ax = ax_arr
    cdef double[:, :] ay = ay_arr
    with nogil:
        for j in range(ny):
            ax[0, j] = 0.5 * (f[0, j] + ghost_lo(f, 0, j, kinds[0], values[0]))
            for i in range(1, nx):
                ax[i, j] = 0.5 * (f[i, j] + f[i - 1, j])
            ax[nx, j] = 0.5 * (ghost_hi(f, 0, j, kinds[1], values[1]) + f[nx - 1, j])
        for i in range(nx):
            ay[i, 0] = 0.5 * (f[i, 0] + ghost_lo(f, 1, i, kinds[2], values[2]))
            for j in range(1, ny):
                ay[i, j] = 0.5 * (f[i, j] + f[i, j - 1])
            ay[i, ny] = 0.5 * (ghost_hi(f, 1, i, kinds[3], values[3]) + f[i, ny - 1])
    return ax_arr, ay_arr


def advect(u_in, v_in, f_in, double hx, double hy, kinds_in, values_in):
    cdef const double[:, :] u = np.ascontiguousarray(u_in, dtype=np.float64)
    cdef const double[:, :] v = np.ascontiguousarray(v_in, dtype=np.float64)
    ax_arr, ay_arr = face_average(f_in, kinds_in, values_in)
    cdef const double[:, :] ax = ax_arr
    cdef const double[:, :] ay = ay_arr
    cdef Py_ssize_t nx = v.shape[0], ny = u.shape[1], i, j
    out_arr = np.empty((nx, ny))
    cdef double[:, :] out = out_arr
    with nogil:
        for i in range(nx):
            for j in range(ny):
                out[i, j] = ((u[i + 1, j] * ax[i + 1, j] - u[i, j] * ax[i, j]) / hx
                             + (v[i, j + 1] * ay[i, j + 1] - v[i, j] * ay[i, j]) / hy)
    return out_arr
