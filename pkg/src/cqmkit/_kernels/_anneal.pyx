# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled annealing kernels; see ``_anneal_py.py`` for the reference."""

from libc.math cimport exp, floor


cdef inline double _penalty(signed char mode, double v, double scale, double rng) noexcept nogil:
    cdef double t
    if mode == 0:
        return v * v
    t = floor(-v * scale + 0.5)
    if t < 0.0:
        t = 0.0
    elif t > rng:
        t = rng
    v = v + t / scale
    return v * v


def anneal_collapsed(
    signed char[::1] x, const double[::1] betas, const double[:, ::1] uniforms,
    const double[::1] obj_lin, const long long[::1] obj_ptr,
    const long long[::1] obj_nbr, const double[::1] obj_val,
    const long long[::1] var_ptr, const long long[::1] var_con,
    const double[::1] var_coef,
    double[::1] activity, const signed char[::1] con_mode,
    const double[::1] con_weight, const double[::1] con_scale,
    const double[::1] con_range,
):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t sweeps = betas.shape[0]
    cdef Py_ssize_t sweep, i, c
    cdef long long k
    cdef double beta, s, field, d, v
    cdef signed char m
    with nogil:
        for sweep in range(sweeps):
            beta = betas[sweep]
            for i in range(n):
                s = 1.0 - 2.0 * x[i]
                field = obj_lin[i]
                for k in range(obj_ptr[i], obj_ptr[i + 1]):
                    if x[obj_nbr[k]]:
                        field += obj_val[k]
                d = s * field
                for k in range(var_ptr[i], var_ptr[i + 1]):
                    c = var_con[k]
                    m = con_mode[c]
                    if m == 2:
                        continue
                    v = activity[c]
                    d += con_weight[c] * (
                        _penalty(m, v + s * var_coef[k], con_scale[c], con_range[c])
                        - _penalty(m, v, con_scale[c], con_range[c])
                    )
                if d <= 0.0 or uniforms[sweep, i] < exp(-beta * d):
                    x[i] = 1 - x[i]
                    for k in range(var_ptr[i], var_ptr[i + 1]):
                        activity[var_con[k]] += s * var_coef[k]


def anneal_flip(
    signed char[::1] x, const double[::1] betas, const double[:, ::1] uniforms,
    const double[::1] lin, const long long[::1] ptr,
    const long long[::1] nbr, const double[::1] val,
):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t sweeps = betas.shape[0]
    cdef Py_ssize_t sweep, i
    cdef long long k
    cdef double beta, field, d
    with nogil:
        for sweep in range(sweeps):
            beta = betas[sweep]
            for i in range(n):
                field = lin[i]
                for k in range(ptr[i], ptr[i + 1]):
                    if x[nbr[k]]:
                        field += val[k]
                d = (1.0 - 2.0 * x[i]) * field
                if d <= 0.0 or uniforms[sweep, i] < exp(-beta * d):
                    x[i] = 1 - x[i]
