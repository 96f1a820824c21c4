# cython: language_level=3
"""Compiled hot kernels; same contracts and operation order as ``_kernels_py``."""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, exp, floor, log, sqrt

cnp.import_array()

from latqrs._kernels_py import LOG_CUTOFF as _LOG_CUTOFF, SupportSizeError

cdef double LOG_CUTOFF = _LOG_CUTOFF
cdef double PI = 3.141592653589793


cdef inline double _halfwidth(double s, double d0) nogil:
    cdef double h = sqrt(d0 * d0 + LOG_CUTOFF * s * s / PI)
    cdef double cap = 12.0 * s if 12.0 * s > 12.0 else 12.0
    return h if h < cap else cap


cdef double _lognorm_sample(double mu, double s, double u, bint draw, long long *out) nogil:
    cdef double s2 = s * s
    cdef double k0 = floor(mu + 0.5)
    cdef double d0 = k0 - mu
    cdef double h = _halfwidth(s, d0)
    cdef double lo = ceil(mu - h)
    cdef double hi = floor(mu + h)
    cdef double emax = -(PI * (d0 * d0)) / s2
    cdef double total = 0.0
    cdef double k = lo
    cdef double t, e, target, cum
    while k <= hi:
        t = k - mu
        e = -(PI * (t * t)) / s2
        total = total + exp(e - emax)
        k += 1.0
    if draw:
        target = u * total
        cum = 0.0
        k = lo
        out[0] = <long long>hi
        while k <= hi:
            t = k - mu
            e = -(PI * (t * t)) / s2
            cum = cum + exp(e - emax)
            if cum > target:
                out[0] = <long long>k
                break
            k += 1.0
    return emax + log(total)


def klein_batch(R, cprime, s_i, U):
    cdef double[:, ::1] Rv = np.ascontiguousarray(R, dtype=np.float64)
    cdef double[::1] cp = np.ascontiguousarray(cprime, dtype=np.float64)
    cdef double[::1] sv = np.ascontiguousarray(s_i, dtype=np.float64)
    cdef double[:, ::1] Uv = np.ascontiguousarray(U, dtype=np.float64)
    cdef Py_ssize_t count = Uv.shape[0]
    cdef Py_ssize_t n = Uv.shape[1]
    X = np.empty((count, n), dtype=np.int64)
    log_rho = np.empty(count)
    log_norm = np.empty(count)
    cdef long long[:, ::1] Xv = X
    cdef double[::1] lrv = log_rho
    cdef double[::1] lnv = log_norm
    cdef Py_ssize_t r, i, j
    cdef double acc, mu, t, lr, ln
    cdef long long k
    with nogil:
        for r in range(count):
            lr = 0.0
            ln = 0.0
            for i in range(n - 1, -1, -1):
                acc = cp[i]
                for j in range(i + 1, n):
                    acc = acc - Rv[i, j] * <double>Xv[r, j]
                mu = acc / Rv[i, i]
                ln = ln + _lognorm_sample(mu, sv[i], Uv[r, i], True, &k)
                Xv[r, i] = k
                t = <double>k - mu
                lr = lr + (-(PI * (t * t)) / (sv[i] * sv[i]))
            lrv[r] = lr
            lnv[r] = ln
    return X, log_rho, log_norm


def support_logs(R, cprime, s_i, X):
    cdef double[:, ::1] Rv = np.ascontiguousarray(R, dtype=np.float64)
    cdef double[::1] cp = np.ascontiguousarray(cprime, dtype=np.float64)
    cdef double[::1] sv = np.ascontiguousarray(s_i, dtype=np.float64)
    cdef long long[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.int64)
    cdef Py_ssize_t count = Xv.shape[0]
    cdef Py_ssize_t n = Xv.shape[1]
    log_rho = np.empty(count)
    log_norm = np.empty(count)
    cdef double[::1] lrv = log_rho
    cdef double[::1] lnv = log_norm
    cdef Py_ssize_t r, i, j
    cdef double acc, mu, t, lr, ln
    cdef long long dummy
    with nogil:
        for r in range(count):
            lr = 0.0
            ln = 0.0
            for i in range(n - 1, -1, -1):
                acc = cp[i]
                for j in range(i + 1, n):
                    acc = acc - Rv[i, j] * <double>Xv[r, j]
                mu = acc / Rv[i, i]
                ln = ln + _lognorm_sample(mu, sv[i], 0.0, False, &dummy)
                t = <double>Xv[r, i] - mu
                lr = lr + (-(PI * (t * t)) / (sv[i] * sv[i]))
            lrv[r] = lr
            lnv[r] = ln
    return log_rho, log_norm


def enumerate_ball(R, cprime, double radius2, Py_ssize_t max_points):
    cdef double[:, ::1] Rv = np.ascontiguousarray(R, dtype=np.float64)
    cdef double[::1] cp = np.ascontiguousarray(cprime, dtype=np.float64)
    cdef Py_ssize_t n = Rv.shape[0]
    cdef double bound2 = radius2 * (1.0 + 1e-12) + 1e-300
    cdef Py_ssize_t cap = 1024 if max_points > 1024 else max_points + 1
    out = np.empty((cap, n), dtype=np.int64)
    cdef long long[:, ::1] ov = out
    cdef long long[::1] x = np.zeros(n, dtype=np.int64)
    cdef long long[::1] hi = np.zeros(n, dtype=np.int64)
    cdef double[::1] mu = np.zeros(n)
    cdef double[::1] partial = np.zeros(n + 1)
    cdef Py_ssize_t count = 0
    cdef Py_ssize_t i, j
    cdef double acc, rem, rad, t, p
    cdef bint descend = True

    i = n - 1
    while True:
        if descend:
            acc = cp[i]
            for j in range(i + 1, n):
                acc = acc - Rv[i, j] * <double>x[j]
            mu[i] = acc / Rv[i, i]
            rem = (bound2 - partial[i + 1]) / (Rv[i, i] * Rv[i, i])
            if rem < 0:
                x[i] = 1
                hi[i] = 0
            else:
                rad = sqrt(rem)
                x[i] = <long long>ceil(mu[i] - rad)
                hi[i] = <long long>floor(mu[i] + rad)
            descend = False
        if x[i] > hi[i]:
            i += 1
            if i == n:
                break
            x[i] += 1
            continue
        t = <double>x[i] - mu[i]
        p = partial[i + 1] + (Rv[i, i] * Rv[i, i]) * (t * t)
        if p > bound2:
            x[i] += 1
            continue
        partial[i] = p
        if i == 0:
            if count >= max_points:
                raise SupportSizeError(count + 1, max_points)
            if count == cap:
                cap *= 2
                out = np.resize(out, (cap, n))
                ov = out
            for j in range(n):
                ov[count, j] = x[j]
            count += 1
            x[0] += 1
            continue
        i -= 1
        descend = True
    return np.array(out[:count])
