"""Pure-Python (numpy) implementations of the hot kernels.

Every routine here has a compiled twin in ``_kernels.pyx`` with the same
signature and the same floating-point operation order, so both backends
produce the same samples from the same uniforms.  The twin loops over
samples one at a time; this module vectorizes over samples and loops over
coordinates.

Conventions shared by both backends
-----------------------------------
``R`` is the upper-triangular factor of a basis (positive diagonal),
``cprime`` the projected center ``Q^T c``, ``s_i`` the per-coordinate widths
``s / r_ii``.  Coordinate ``i`` is processed from ``n - 1`` down to ``0`` and
its conditional center is ``(cprime[i] - sum_{j>i} R[i, j] x[j]) / R[i, i]``.
One-dimensional sums run over the window ``|k - mu| <= h`` where ``h`` keeps
every term within ``exp(-LOG_CUTOFF)`` of the peak term.
"""

import math

import numpy as np

# ln(1e17): terms below 1e-17 of the peak cannot move a float64 sum
LOG_CUTOFF = 39.14394658089878
_BATCH = 1 << 16


class SupportSizeError(RuntimeError):
    """Enumeration exceeded its point cap."""

    def __init__(self, count, cap):
        super().__init__(f"ball enumeration exceeded cap of {cap} points (reached {count})")
        self.count = count
        self.cap = cap


def window_halfwidth(s, d0):
    """Half-width of the summation window around ``mu`` for width ``s``."""
    return min(math.sqrt(d0 * d0 + LOG_CUTOFF * s * s / math.pi), max(12.0 * s, 12.0))


def _coordinate_block(mu, s, u=None):
    """Log-normalizer (and optional inverse-CDF sample) for a vector of centers."""
    s2 = s * s
    k0 = np.floor(mu + 0.5)
    d0 = k0 - mu
    h = np.minimum(np.sqrt(d0 * d0 + LOG_CUTOFF * s2 / math.pi), max(12.0 * s, 12.0))
    lo = np.ceil(mu - h)
    hi = np.floor(mu + h)
    wmax = int(math.ceil(math.sqrt(0.25 + LOG_CUTOFF * s2 / math.pi))) + 1
    offs = np.arange(-wmax, wmax + 1, dtype=np.float64)
    k = k0[:, None] + offs[None, :]
    t = k - mu[:, None]
    e = -(math.pi * (t * t)) / s2
    emax = -(math.pi * (d0 * d0)) / s2
    inside = (k >= lo[:, None]) & (k <= hi[:, None])
    w = np.where(inside, np.exp(e - emax[:, None]), 0.0)
    cum = np.cumsum(w, axis=1)
    total = cum[:, -1]
    lognorm = emax + np.log(total)
    if u is None:
        return lognorm, None
    target = u * total
    hit = cum > target[:, None]
    idx = np.where(hit.any(axis=1), hit.argmax(axis=1), -1)
    # rounding guard: a target equal to the total maps to the last window point
    last = (inside * np.arange(offs.size)).max(axis=1)
    idx = np.where(idx < 0, last, idx)
    sample = (k0 + offs[idx]).astype(np.int64)
    return lognorm, sample


def klein_batch(R, cprime, s_i, U):
    """Klein samples for each row of uniforms ``U`` (shape ``(count, n)``).

    Returns ``(X, log_rho, log_norm)`` where ``log_rho`` is
    ``-pi ||R x - cprime||^2 / s^2`` and ``log_norm`` is
    ``sum_i log rho_{s_i, mu_i}(Z)``.
    """
    R = np.ascontiguousarray(R, dtype=np.float64)
    cprime = np.asarray(cprime, dtype=np.float64)
    s_i = np.asarray(s_i, dtype=np.float64)
    U = np.ascontiguousarray(U, dtype=np.float64)
    count, n = U.shape
    X = np.empty((count, n), dtype=np.int64)
    log_rho = np.empty(count)
    log_norm = np.empty(count)
    for start in range(0, count, _BATCH):
        stop = min(start + _BATCH, count)
        m = stop - start
        xf = np.zeros((m, n))
        lr = np.zeros(m)
        ln = np.zeros(m)
        for i in range(n - 1, -1, -1):
            acc = np.full(m, cprime[i])
            for j in range(i + 1, n):
                acc = acc - R[i, j] * xf[:, j]
            mu = acc / R[i, i]
            lognorm, k = _coordinate_block(mu, s_i[i], U[start:stop, i])
            xf[:, i] = k
            t = k - mu
            lr = lr + (-(math.pi * (t * t)) / (s_i[i] * s_i[i]))
            ln = ln + lognorm
        X[start:stop] = xf.astype(np.int64)
        log_rho[start:stop] = lr
        log_norm[start:stop] = ln
    return X, log_rho, log_norm


def support_logs(R, cprime, s_i, X):
    """``(log_rho, log_norm)`` for given coefficient vectors (rows of ``X``)."""
    R = np.ascontiguousarray(R, dtype=np.float64)
    cprime = np.asarray(cprime, dtype=np.float64)
    s_i = np.asarray(s_i, dtype=np.float64)
    X = np.ascontiguousarray(X, dtype=np.int64)
    count, n = X.shape
    log_rho = np.empty(count)
    log_norm = np.empty(count)
    for start in range(0, count, _BATCH):
        stop = min(start + _BATCH, count)
        xf = X[start:stop].astype(np.float64)
        m = stop - start
        lr = np.zeros(m)
        ln = np.zeros(m)
        for i in range(n - 1, -1, -1):
            acc = np.full(m, cprime[i])
            for j in range(i + 1, n):
                acc = acc - R[i, j] * xf[:, j]
            mu = acc / R[i, i]
            lognorm, _ = _coordinate_block(mu, s_i[i])
            t = xf[:, i] - mu
            lr = lr + (-(math.pi * (t * t)) / (s_i[i] * s_i[i]))
            ln = ln + lognorm
        log_rho[start:stop] = lr
        log_norm[start:stop] = ln
    return log_rho, log_norm


def enumerate_ball(R, cprime, radius2, max_points):
    """All ``x`` with ``||R x - cprime||^2 <= radius2`` (unsorted).

    Breadth-first over coordinates ``n-1 .. 0``; each level expands every
    surviving prefix to its admissible integer interval.
    """
    R = np.ascontiguousarray(R, dtype=np.float64)
    cprime = np.asarray(cprime, dtype=np.float64)
    n = R.shape[0]
    bound2 = radius2 * (1.0 + 1e-12) + 1e-300
    guard = 16 * max_points
    prefix = np.zeros((1, 0), dtype=np.int64)
    partial = np.zeros(1)
    for i in range(n - 1, -1, -1):
        acc = np.full(prefix.shape[0], cprime[i])
        for j in range(i + 1, n):
            acc = acc - R[i, j] * prefix[:, j - i - 1]
        mu = acc / R[i, i]
        rem = (bound2 - partial) / (R[i, i] * R[i, i])
        rad = np.sqrt(np.maximum(rem, 0.0))
        lo = np.ceil(mu - rad).astype(np.int64)
        hi = np.floor(mu + rad).astype(np.int64)
        cnt = np.where(rem >= 0, np.maximum(hi - lo + 1, 0), 0)
        total = int(cnt.sum())
        if total > guard:
            raise SupportSizeError(total, max_points)
        parent = np.repeat(np.arange(prefix.shape[0]), cnt)
        first = np.repeat(np.cumsum(cnt) - cnt, cnt)
        xi = lo[parent] + (np.arange(total) - first)
        t = xi - mu[parent]
        part = partial[parent] + (R[i, i] * R[i, i]) * (t * t)
        keep = part <= bound2
        prefix = np.concatenate([xi[keep, None], prefix[parent[keep]]], axis=1)
        partial = part[keep]
    if prefix.shape[0] > max_points:
        raise SupportSizeError(prefix.shape[0], max_points)
    return prefix
