"""Klein's sampler, the ball-truncated proposal/target pair, classical
rejection sampling and the independent Metropolis-Hastings-Klein chain.

The target everywhere is the lattice Gaussian ``pi(x) ~ rho_{s,c}(B x)`` on
coefficient vectors ``x``.  A center with a component outside the span of
``B`` only contributes a constant factor to ``rho_{s,c}(B x)``; it is dropped
by working with the projected center ``c' = Q^T c``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from latqrs._backend import SupportSizeError, kernels
from latqrs.gaussian import GaussianParams, log_rho_z, tail_radius
from latqrs.lattice import MAX_ENUM_POINTS, Basis, QRFactorization, enumerate_ball, qr_decompose

__all__ = [
    "KleinContext",
    "TruncatedSupport",
    "RejectionStats",
    "IMHKChain",
    "klein_context",
    "klein_sample",
    "klein_batch",
    "klein_pmf",
    "log_klein_pmf",
    "acceptance_prob",
    "lattice_log_mass",
    "build_truncated_support",
    "classical_rejection_sample",
    "rejection_batch",
    "rejection_stream",
    "imhk_sample",
    "imhk_kernel",
    "delta",
]

_TAIL_EPS = 1e-16


def _logsumexp(v: np.ndarray) -> float:
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        return -math.inf
    top = float(v.max())
    return top + math.log(float(np.exp(v - top).sum()))


@dataclass(frozen=True)
class KleinContext:
    """Everything Klein's algorithm needs, precomputed once per (basis, s, c)."""

    basis: Basis
    qr: QRFactorization
    params: GaussianParams
    c_prime: np.ndarray
    s_i: np.ndarray
    log_rho_si: np.ndarray  # log rho_{s_i}(Z), the centered 1-D masses

    @property
    def n(self) -> int:
        return self.basis.n

    @property
    def s(self) -> float:
        return self.params.s

    def center_in_span(self) -> np.ndarray:
        return self.qr.Q @ self.c_prime

    def log_target(self, X) -> np.ndarray:
        """``log rho_{s,c}(B x)`` for rows of ``X`` (projected center)."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        d = X @ self.qr.R.T - self.c_prime
        return -math.pi * np.einsum("ij,ij->i", d, d) / (self.s * self.s)


def klein_context(B, s: float, c=None) -> KleinContext:
    basis = B if isinstance(B, Basis) else Basis(np.asarray(B))
    qr = qr_decompose(basis)
    c = np.zeros(basis.m) if c is None else np.asarray(c, dtype=np.float64)
    if c.shape != (basis.m,):
        raise ValueError(f"center has shape {c.shape}, expected ({basis.m},)")
    params = GaussianParams(s, c)
    r = np.diag(qr.R)
    s_i = s / r
    log_rho_si = np.array([log_rho_z(float(si), 0.0) for si in s_i])
    return KleinContext(basis, qr, params, qr.Q.T @ c, s_i, log_rho_si)


# --- Klein's algorithm -------------------------------------------------------


def klein_batch(ctx: KleinContext, rng: np.random.Generator, count: int):
    """``count`` Klein samples.  Returns ``(X, log_rho, log_norm)``.

    ``log_rho - log_norm`` is the log Klein probability of each row.
    """
    U = rng.random((count, ctx.n))
    return kernels.klein_batch(ctx.qr.R, ctx.c_prime, ctx.s_i, U)


def klein_sample(ctx: KleinContext, rng: np.random.Generator):
    """One Klein sample: ``(x, B x)``."""
    X, _, _ = klein_batch(ctx, rng, 1)
    x = X[0]
    return x, np.asarray(ctx.basis.matrix) @ x


def _conditional_centers(ctx: KleinContext, x) -> np.ndarray:
    R = ctx.qr.R
    n = ctx.n
    x = np.asarray(x, dtype=np.float64)
    mu = np.empty(n)
    for i in range(n - 1, -1, -1):
        mu[i] = (ctx.c_prime[i] - R[i, i + 1 :] @ x[i + 1 :]) / R[i, i]
    return mu


def klein_pmf(ctx: KleinContext, x, form: str = "product") -> float:
    """Klein probability of coefficient vector ``x``.

    ``form="product"`` multiplies the 1-D conditional probabilities;
    ``form="ratio"`` divides the full Gaussian weight by the product of the
    conditional normalizers.
    """
    x = np.asarray(x, dtype=np.float64)
    mu = _conditional_centers(ctx, x)
    norms = np.array([log_rho_z(float(si), float(m)) for si, m in zip(ctx.s_i, mu)])
    if form == "product":
        terms = -math.pi * (x - mu) ** 2 / ctx.s_i**2 - norms
        return math.exp(float(terms.sum()))
    if form == "ratio":
        return math.exp(float(ctx.log_target(x)[0]) - float(norms.sum()))
    raise ValueError(f"unknown form {form!r}")


def log_klein_pmf(ctx: KleinContext, X) -> np.ndarray:
    """Vectorized log Klein probability for the rows of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=np.int64))
    lr, ln = kernels.support_logs(ctx.qr.R, ctx.c_prime, ctx.s_i, X)
    return lr - ln


def acceptance_prob(ctx: KleinContext, x) -> float:
    """``prod_i rho_{s_i, mu_i}(Z) / rho_{s_i}(Z)``, the rejection acceptance of ``x``."""
    mu = _conditional_centers(ctx, x)
    log_a = sum(log_rho_z(float(si), float(m)) for si, m in zip(ctx.s_i, mu)) - float(ctx.log_rho_si.sum())
    return math.exp(min(log_a, 0.0))


def lattice_log_mass(ctx: KleinContext, radius: float | None = None, max_points: int = MAX_ENUM_POINTS) -> float:
    """``log rho_{s,c}(L)`` by summing over all lattice points within ``radius`` of ``c``.

    The default radius leaves less than 1e-16 of the mass outside.
    """
    if radius is None:
        radius = tail_radius(ctx.n, ctx.s, _TAIL_EPS)
    X = enumerate_ball(ctx.qr.R, ctx.c_prime, radius, max_points=max_points, max_dim=ctx.n)
    return _logsumexp(ctx.log_target(X))


def delta(ctx: KleinContext, max_points: int = MAX_ENUM_POINTS):
    """``Delta = rho_{s,c}(L) / prod_i rho_{s_i}(Z)`` by brute force.

    Returns ``(delta_value, log2_inv_delta)``.
    """
    if ctx.n > 6:
        raise ValueError("exact Delta limited to n <= 6")
    log_d = lattice_log_mass(ctx, max_points=max_points) - float(ctx.log_rho_si.sum())
    log_d = min(log_d, 0.0)
    return math.exp(log_d), -log_d / math.log(2)


# --- truncated support -------------------------------------------------------


@dataclass(frozen=True)
class TruncatedSupport:
    """The ball-truncated proposal ``Q_R`` and target ``pi_R`` on ``X_R``.

    ``points`` are in lexicographic order; every per-point array follows it.
    """

    points: np.ndarray
    vectors: np.ndarray
    q_mass: np.ndarray
    q_r: np.ndarray
    pi_r: np.ndarray
    accept: np.ndarray
    delta_r: float
    q_xr: float
    p_r: float
    radius: float
    alpha_r: float | None = None
    log_delta_r: float = field(default=0.0, repr=False)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def log_delta(self) -> float | None:
        """``log Delta`` implied by the identity ``Delta_R = alpha_R Delta``."""
        if self.alpha_r is None:
            return None
        return self.log_delta_r - math.log(self.alpha_r)

    def index_of(self, X) -> np.ndarray:
        """Row index of each coefficient vector in ``points``; -1 when absent."""
        X = np.atleast_2d(np.asarray(X, dtype=np.int64))
        lo = self.points.min(axis=0)
        span = self.points.max(axis=0) - lo + 1
        strides = np.ones_like(span)
        for i in range(span.size - 2, -1, -1):
            strides[i] = strides[i + 1] * span[i + 1]
        keys = (self.points - lo) @ strides
        off = X - lo
        inbox = np.all((off >= 0) & (off < span), axis=1)
        k = np.where(inbox, off @ strides, -1)
        pos = np.clip(np.searchsorted(keys, k), 0, keys.size - 1)
        return np.where(inbox & (keys[pos] == k), pos, -1)

    def to_dict(self) -> dict:
        return {
            "points": self.points.tolist(),
            "q_mass": self.q_mass.tolist(),
            "q_r": self.q_r.tolist(),
            "pi_r": self.pi_r.tolist(),
            "accept": self.accept.tolist(),
            "delta_r": self.delta_r,
            "q_xr": self.q_xr,
            "p_r": self.p_r,
            "alpha_r": self.alpha_r,
            "radius": self.radius,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def build_truncated_support(
    ctx: KleinContext,
    radius: float,
    with_alpha: bool = True,
    max_points: int = MAX_ENUM_POINTS,
) -> TruncatedSupport:
    """Enumerate ``X_R`` and tabulate ``Q``, ``Q_R``, ``pi_R``, ``a`` and the constants.

    ``alpha_R`` (retained target mass) is computed when the full lattice
    mass can be brute-forced over radius ``max(4R, tail radius)``; otherwise
    it is left as None.
    """
    X = enumerate_ball(ctx.qr.R, ctx.c_prime, radius, max_points=max_points)
    if X.shape[0] == 0:
        raise ValueError(f"no lattice points within radius {radius} of the center")
    log_rho, log_norm = kernels.support_logs(ctx.qr.R, ctx.c_prime, ctx.s_i, X)
    log_q = log_rho - log_norm
    log_a = np.minimum(log_norm - float(ctx.log_rho_si.sum()), 0.0)

    q_mass = np.exp(log_q)
    log_q_xr = _logsumexp(log_q)
    log_target_r = _logsumexp(log_rho)
    log_delta_r = log_target_r - float(ctx.log_rho_si.sum())
    q_r = np.exp(log_q - log_q_xr)
    pi_r = np.exp(log_rho - log_target_r)
    p_r = min(math.exp(log_delta_r - log_q_xr), 1.0)

    alpha_r = None
    if with_alpha:
        full_radius = max(4.0 * radius, tail_radius(ctx.n, ctx.s, _TAIL_EPS))
        try:
            log_full = lattice_log_mass(ctx, full_radius, max_points=max_points)
            alpha_r = min(math.exp(log_target_r - log_full), 1.0)
        except SupportSizeError:
            alpha_r = None

    return TruncatedSupport(
        points=X,
        vectors=X @ np.asarray(ctx.basis.matrix).T,
        q_mass=q_mass,
        q_r=q_r,
        pi_r=pi_r,
        accept=np.exp(log_a),
        delta_r=math.exp(log_delta_r),
        q_xr=math.exp(log_q_xr),
        p_r=p_r,
        radius=float(radius),
        alpha_r=alpha_r,
        log_delta_r=log_delta_r,
    )


# --- classical rejection -----------------------------------------------------


@dataclass(frozen=True)
class RejectionStats:
    """Accepted samples with per-sample counts.

    ``trials`` counts in-ball proposals (accept/reject decisions) and
    ``redraws`` counts Klein draws that fell outside the ball.  ``indices``
    locate the samples in a support's point list when one was used.
    """

    points: np.ndarray
    trials: np.ndarray
    redraws: np.ndarray
    indices: np.ndarray | None = None

    @property
    def mean_trials(self) -> float:
        return float(self.trials.mean())


def _rejection_core(ctx: KleinContext, rng: np.random.Generator, count: int, block: int, classify):
    # classify(X, log_norm) -> (tag, accept): tag >= 0 marks in-ball rows
    if count < 1:
        raise ValueError("count must be positive")
    points = np.empty((count, ctx.n), dtype=np.int64)
    tags = np.empty(count, dtype=np.int64)
    trials = np.empty(count, dtype=np.int64)
    redraws = np.empty(count, dtype=np.int64)
    done = 0
    carry_in = 0
    carry_out = 0
    while done < count:
        X, _, log_norm = klein_batch(ctx, rng, block)
        u = rng.random(block)
        tag, accept = classify(X, log_norm)
        inball = tag >= 0
        acc = inball & (u < accept)
        pos = np.flatnonzero(acc)
        cin = np.cumsum(inball)
        cout = np.cumsum(~inball)
        if pos.size:
            take = pos[: count - done]
            tin = cin[take]
            tout = cout[take]
            t = np.diff(tin, prepend=0)
            r = np.diff(tout, prepend=0)
            t[0] += carry_in
            r[0] += carry_out
            k = take.size
            points[done : done + k] = X[take]
            tags[done : done + k] = tag[take]
            trials[done : done + k] = t
            redraws[done : done + k] = r
            done += k
            carry_in = int(cin[-1] - tin[-1])
            carry_out = int(cout[-1] - tout[-1])
        else:
            carry_in += int(cin[-1])
            carry_out += int(cout[-1])
    return points, tags, trials, redraws


def rejection_batch(
    support: TruncatedSupport,
    ctx: KleinContext,
    rng: np.random.Generator,
    count: int,
    block: int = 1 << 16,
) -> RejectionStats:
    """``count`` independent rejection-sampling runs, drawn in vectorized blocks.

    The event stream is exactly that of running the single-sample loop
    ``count`` times in sequence: Klein proposals outside ``X_R`` are redrawn,
    in-ball proposals are accepted with probability ``a(x)``.
    """

    def classify(X, _log_norm):
        idx = support.index_of(X)
        return idx, support.accept[np.maximum(idx, 0)]

    points, idx, trials, redraws = _rejection_core(ctx, rng, count, block, classify)
    return RejectionStats(points, trials, redraws, idx)


def rejection_stream(
    ctx: KleinContext,
    radius: float,
    rng: np.random.Generator,
    count: int,
    block: int = 1 << 14,
) -> RejectionStats:
    """Rejection sampling from the ball-truncated Gaussian without enumerating the ball.

    Ball membership is a norm test and ``a(x)`` comes from the normalizers
    accumulated along each Klein path, so this works in any dimension.
    """
    r2 = radius * radius * (1.0 + 1e-12)
    block = min(block, 2 * count + 256)
    base = float(ctx.log_rho_si.sum())

    def classify(X, log_norm):
        d = X @ ctx.qr.R.T - ctx.c_prime
        inside = np.einsum("ij,ij->i", d, d) <= r2
        return np.where(inside, 0, -1), np.exp(np.minimum(log_norm - base, 0.0))

    points, _, trials, redraws = _rejection_core(ctx, rng, count, block, classify)
    return RejectionStats(points, trials, redraws)


def classical_rejection_sample(support: TruncatedSupport, ctx: KleinContext, rng: np.random.Generator):
    """One exact sample from ``pi_R``: ``(x, trials, redraws)``."""
    trials = 0
    redraws = 0
    while True:
        x, _ = klein_sample(ctx, rng)
        i = int(support.index_of(x)[0])
        if i < 0:
            redraws += 1
            continue
        trials += 1
        if rng.random() < support.accept[i]:
            return support.points[i].copy(), trials, redraws


# --- IMHK --------------------------------------------------------------------


@dataclass(frozen=True)
class IMHKChain:
    states: np.ndarray
    accepted: int

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / max(1, self.states.shape[0])


def imhk_sample(ctx: KleinContext, steps: int, rng: np.random.Generator, x0=None, burn_in: int = 0) -> IMHKChain:
    """Independent Metropolis-Hastings chain with Klein proposals.

    A move ``x -> y`` is accepted with probability
    ``min(1, pi(y) Q(x) / (pi(x) Q(y)))``, which reduces to the ratio of
    the conditional normalizers along the two Klein paths.  The chain starts
    from ``x0`` or a Klein sample; the first ``burn_in`` states are dropped.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    total = steps + burn_in
    Y, _, log_norm_y = klein_batch(ctx, rng, total)
    u = rng.random(total)
    if x0 is None:
        X0, _, ln0 = klein_batch(ctx, rng, 1)
        x_cur, ln_cur = X0[0], float(ln0[0])
    else:
        x_cur = np.asarray(x0, dtype=np.int64)
        _, ln = kernels.support_logs(ctx.qr.R, ctx.c_prime, ctx.s_i, x_cur[None, :])
        ln_cur = float(ln[0])
    log_u = np.log(u)
    pick = np.empty(total, dtype=np.int64)
    cur = -1
    accepted = 0
    for t in range(total):
        if log_u[t] < log_norm_y[t] - ln_cur:
            cur = t
            ln_cur = float(log_norm_y[t])
            if t >= burn_in:
                accepted += 1
        pick[t] = cur
    states = np.where((pick >= 0)[:, None], Y[np.maximum(pick, 0)], x_cur[None, :])
    return IMHKChain(states[burn_in:], accepted)


def imhk_kernel(support: TruncatedSupport) -> np.ndarray:
    """Exact transition matrix of the independence chain on ``X_R``.

    Proposal ``Q_R``, target ``pi_R``; ``P[x, y] = Q_R(y) min(1, w(y)/w(x))``
    off the diagonal with importance weight ``w = pi_R / Q_R``.
    """
    w = support.pi_r / support.q_r
    ratio = np.minimum(1.0, w[None, :] / w[:, None])
    P = support.q_r[None, :] * ratio
    np.fill_diagonal(P, 0.0)
    P[np.diag_indices_from(P)] = 1.0 - P.sum(axis=1)
    return P
