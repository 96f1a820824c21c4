"""Toy-scale dual attack on LWE: instance generation, the guess/dual split,
short dual-vector sampling, the cosine score and the exhaustive guess loop,
plus the score-separation precondition and the success-probability bound.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from latqrs.gaussian import sample_dgauss_z, tail_radius
from latqrs.lattice import lll_reduce, qary_dual_basis, qary_primal_basis, shortest_vector
from latqrs.qrs import run_qrs
from latqrs.samplers import (
    KleinContext,
    TruncatedSupport,
    build_truncated_support,
    imhk_sample,
    klein_batch,
    klein_context,
    rejection_batch,
    rejection_stream,
)

__all__ = [
    "ErrorLaw",
    "LweInstance",
    "AttackSplit",
    "SampleList",
    "AttackResult",
    "SeparationReport",
    "DualSampler",
    "is_prime_power",
    "gen_lwe",
    "dual_sampler",
    "sample_dual_list",
    "score",
    "run_attack",
    "sum_lattice_lambda1",
    "separation_check",
    "success_bound",
    "GUESS_SPACE_CAP",
    "TOY_FIXTURE",
    "SMALL_FIXTURE",
]

GUESS_SPACE_CAP = 10**6

# Calibrated toy attack: at the typical error norm the separation
# precondition holds with delta = 0.2, and recovery succeeds reliably.
TOY_FIXTURE = {"q": 17, "m": 20, "n": 4, "n_guess": 2, "N": 2000, "s": 0.3, "chi_width": 1.0, "delta": 0.2}

# Smaller instance whose truncation ball can be enumerated, so that all
# four samplers (including the statevector QRS) run on the same support.
SMALL_FIXTURE = {"q": 13, "m": 6, "n": 2, "n_guess": 1, "N": 300, "s": 0.2, "chi_width": 0.6, "delta": 0.2}

SAMPLE_METHODS = ("klein", "rejection", "imhk", "qrs")


def is_prime_power(q: int) -> bool:
    q = int(q)
    if q < 2:
        return False
    p = 2
    while p * p <= q:
        if q % p == 0:
            while q % p == 0:
                q //= p
            return q == 1
        p += 1
    return True


@dataclass(frozen=True)
class ErrorLaw:
    """Error distribution: ``gaussian`` (D_{Z,width}), ``uniform`` on [-width, width], or ``zero``."""

    kind: str = "gaussian"
    width: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform", "zero"):
            raise ValueError(f"unknown error law {self.kind!r}")
        if self.kind != "zero" and not self.width > 0:
            raise ValueError("error width must be positive")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "zero":
            return np.zeros(size, dtype=np.int64)
        if self.kind == "uniform":
            w = int(self.width)
            return rng.integers(-w, w + 1, size=size).astype(np.int64)
        return sample_dgauss_z(self.width, 0.0, rng, size=size)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "width": self.width}


@dataclass(frozen=True)
class LweInstance:
    A: np.ndarray
    b: np.ndarray
    s: np.ndarray
    e: np.ndarray
    q: int
    chi: ErrorLaw

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "A": self.A.tolist(),
            "b": self.b.tolist(),
            "s": self.s.tolist(),
            "e": self.e.tolist(),
            "chi": self.chi.to_dict(),
        }


def gen_lwe(m: int, n: int, q: int, chi: ErrorLaw, rng: np.random.Generator) -> LweInstance:
    """Uniform ``A`` and ``s``, error ``e ~ chi^m`` and ``b = A s + e mod q``."""
    if not is_prime_power(q):
        raise ValueError(f"q must be a prime power >= 2, got {q}")
    if m < 1 or n < 1:
        raise ValueError("need m, n >= 1")
    A = rng.integers(0, q, size=(m, n), dtype=np.int64)
    s = rng.integers(0, q, size=n, dtype=np.int64)
    e = chi.sample(rng, m)
    b = (A @ s + e) % q
    return LweInstance(A, b, s, e, int(q), chi)


@dataclass(frozen=True)
class AttackSplit:
    """Guess the first ``n_guess`` secret coordinates (after ``permutation``)."""

    n_guess: int
    n_dual: int
    permutation: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.n_guess < 0 or self.n_dual < 1:
            raise ValueError("need n_guess >= 0 and n_dual >= 1")
        if self.permutation is not None and sorted(self.permutation) != list(range(self.n)):
            raise ValueError("permutation must reorder range(n_guess + n_dual)")

    @property
    def n(self) -> int:
        return self.n_guess + self.n_dual

    def order(self) -> np.ndarray:
        return np.arange(self.n) if self.permutation is None else np.asarray(self.permutation)

    def apply(self, instance: LweInstance):
        """``(A_guess, A_dual, s_guess, s_dual)`` for this split."""
        if instance.n != self.n:
            raise ValueError(f"split covers {self.n} columns, instance has {instance.n}")
        cols = self.order()
        A = instance.A[:, cols]
        s = instance.s[cols]
        g = self.n_guess
        return A[:, :g], A[:, g:], s[:g], s[g:]


@dataclass(frozen=True)
class SampleList:
    """Short vectors of ``L_q^perp(A_dual)``, one per row of ``W``."""

    W: np.ndarray
    q: int
    method: str = "klein"
    stats: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.W.shape[0]

    def check(self, A_dual) -> bool:
        return bool(np.all((self.W @ np.asarray(A_dual, dtype=np.int64)) % self.q == 0))


# --- sampling ----------------------------------------------------------------


@dataclass(frozen=True)
class DualSampler:
    """Klein context on a reduced basis of ``L_q^perp(A_dual)`` at width ``q s``."""

    ctx: KleinContext
    q: int
    radius: float
    support: TruncatedSupport | None = None


def dual_sampler(A_dual, q: int, s: float, N: int, eps_tail: float = 0.01, enumerate_support: bool = False) -> DualSampler:
    """Reduce a basis of ``L_q^perp(A_dual)`` and set the truncation radius.

    The radius is the tail radius at width ``q s`` with budget ``eps_tail / N``
    so that all ``N`` samples stay inside with probability ``1 - eps_tail``.
    With ``enumerate_support`` the ball is enumerated (needed for QRS).
    """
    A_dual = np.asarray(A_dual, dtype=np.int64)
    m = A_dual.shape[0]
    basis = lll_reduce(qary_dual_basis(A_dual, q))
    width = q * s
    ctx = klein_context(basis, width)
    radius = tail_radius(m, width, eps_tail / N)
    support = build_truncated_support(ctx, radius, with_alpha=False) if enumerate_support else None
    return DualSampler(ctx, int(q), radius, support)


def sample_dual_list(sampler: DualSampler, N: int, rng: np.random.Generator, method: str = "rejection") -> SampleList:
    """Draw ``N`` dual vectors with the chosen sampler.

    ``klein`` returns raw Klein samples; ``rejection``, ``imhk`` and ``qrs``
    target the lattice Gaussian (ball-truncated for rejection and QRS).
    """
    ctx = sampler.ctx
    B = np.asarray(ctx.basis.matrix, dtype=np.int64)
    stats: dict = {}
    if method == "klein":
        X, _, _ = klein_batch(ctx, rng, N)
    elif method == "rejection":
        if sampler.support is not None:
            res = rejection_batch(sampler.support, ctx, rng, N)
        else:
            res = rejection_stream(ctx, sampler.radius, rng, N)
        X = res.points
        stats = {"mean_trials": res.mean_trials, "redraws": int(res.redraws.sum())}
    elif method == "imhk":
        chain = imhk_sample(ctx, N, rng, burn_in=100)
        X = chain.states
        stats = {"acceptance_rate": chain.acceptance_rate}
    elif method == "qrs":
        if sampler.support is None:
            raise ValueError("qrs sampling needs an enumerated support (enumerate_support=True)")
        res = run_qrs(sampler.support, rng, "optimal", N)
        X = sampler.support.points[res.indices]
        stats = {"iterations": res.iterations, "mean_oracle_calls": float(res.oracle_calls.mean())}
    else:
        raise ValueError(f"unknown sampling method {method!r}; choose from {SAMPLE_METHODS}")
    W = X @ B.T
    return SampleList(W, sampler.q, method, stats)


# --- scoring and the guess loop ---------------------------------------------


def score(W, y, q: int) -> float:
    """``(1/N) sum_j cos(2 pi <w_j, y> / q)``."""
    W = np.asarray(W, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if W.shape[1] != y.shape[0]:
        raise ValueError(f"dimension mismatch: W has {W.shape[1]} columns, y has {y.shape[0]}")
    phase = (W @ y) % q
    return float(np.cos(2 * np.pi * phase / q).mean())


@dataclass(frozen=True)
class AttackResult:
    guess: np.ndarray | None
    best_score: float
    scores: np.ndarray
    candidates: np.ndarray

    def to_dict(self) -> dict:
        return {
            "guess": None if self.guess is None else self.guess.tolist(),
            "best_score": self.best_score,
            "scores": self.scores.tolist(),
        }


def _candidate_scores(T, M, C, q):
    # rows of C are candidates; cos matrix is (candidates, N), summed along N
    phase = (T[None, :] - C @ M.T) % q
    return np.cos(2 * np.pi * phase / q).sum(axis=1)


def run_attack(instance: LweInstance, split: AttackSplit, W: SampleList, jobs: int = 1, chunk: int = 4096) -> AttackResult:
    """Exhaustive guess loop over ``Z_q^{n_guess}`` in lexicographic order.

    Each candidate gets ``F = sum_j cos(2 pi <w_j, b - A_guess s~> / q)``.
    A candidate replaces the incumbent when ``F >= F_max`` (``F_max``
    starts at 0), so the last maximal candidate wins and ``guess`` is None
    when every score is negative.  ``jobs > 1`` scores chunks in threads;
    each score is computed identically either way.
    """
    q = instance.q
    A_guess, A_dual, _, _ = split.apply(instance)
    if W.W.shape[1] != instance.m:
        raise ValueError(f"dual vectors have dimension {W.W.shape[1]}, instance has m = {instance.m}")
    total = q**split.n_guess
    if total > GUESS_SPACE_CAP:
        raise OverflowError(f"guess space q^n_guess = {total} exceeds cap {GUESS_SPACE_CAP}")
    C = np.array(list(itertools.product(range(q), repeat=split.n_guess)), dtype=np.int64).reshape(total, split.n_guess)
    Wm = np.asarray(W.W, dtype=np.int64)
    T = (Wm @ instance.b) % q
    M = (Wm @ A_guess) % q
    blocks = [C[i : i + chunk] for i in range(0, total, chunk)]
    if jobs > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda blk: _candidate_scores(T, M, blk, q), blocks))
    else:
        parts = [_candidate_scores(T, M, blk, q) for blk in blocks]
    F = np.concatenate(parts)
    best = float(F.max())
    if best < 0:
        return AttackResult(None, best, F, C)
    winner = int(np.flatnonzero(F == best)[-1])
    return AttackResult(C[winner].copy(), best, F, C)


# --- analysis ----------------------------------------------------------------


def sum_lattice_lambda1(A, q: int) -> float:
    """``lambda_1(L_q(A))``, the lattice that wrong-guess shifts live in."""
    _, norm = shortest_vector(qary_primal_basis(A, q))
    return norm


@dataclass(frozen=True)
class SeparationReport:
    ok: bool
    margin: float
    tau: float
    lambda1: float
    e_norm: float
    rho_e: float
    rho_far: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def separation_check(lambda1: float, e_norm: float, s: float, m: int, delta: float, eta: float = 0.0) -> SeparationReport:
    """Score-separation precondition for the cosine distinguisher.

    With ``tau = sqrt(m / 2 pi) / s`` it needs ``lambda1 >= tau + ||e||`` and
    ``rho_{1/s}(e) - rho_{1/s}(lambda1 - ||e|| - tau) > 2 delta + eta``, where
    ``rho_{1/s}(t) = exp(-pi s^2 t^2)``.  ``margin`` is the left side minus
    the right side of the second condition.
    """
    if not s > 0 or m < 1:
        raise ValueError("need s > 0 and m >= 1")
    tau = math.sqrt(m / (2 * math.pi)) / s
    rho_e = math.exp(-math.pi * s * s * e_norm * e_norm)
    gap = lambda1 - e_norm - tau
    rho_far = math.exp(-math.pi * s * s * gap * gap)
    margin = rho_e - rho_far - (2 * delta + eta)
    ok = gap >= 0 and margin > 0
    return SeparationReport(ok, margin, tau, lambda1, e_norm, rho_e, rho_far)


def success_bound(N: float, delta: float, q: int, m: int, eps_tail: float, c_exp: float = 2.0) -> float:
    """``1 - q^m 2^{-c_exp N delta^2} - eps_tail``, clamped to [0, 1]."""
    log2_fail = m * math.log2(q) - c_exp * N * delta * delta
    fail = 2.0**log2_fail if log2_fail < 1024 else math.inf
    return min(1.0, max(0.0, 1.0 - fail - eps_tail))
