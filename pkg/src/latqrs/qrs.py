"""Dense statevector simulation of quantum rejection sampling on a truncated
lattice-Gaussian support.

The register is ``(support index, coin)``; amplitudes are stored as a
``(|X_R|, 2)`` complex array.  The proposal oracle is modelled as a
Householder reflection sending ``|0>`` to ``sum_x sqrt(Q_R(x)) |x>`` (any
unitary with that first column would do).  The rotation ``R_a`` acts on the
coin of each point with angle ``asin(sqrt(a(x)))``, so after ``A = R_a O``
the coin-1 branch is proportional to ``sum_x sqrt(pi_R(x)) |x>|1>`` with
squared norm ``p_R``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from latqrs.samplers import TruncatedSupport

__all__ = [
    "StateVector",
    "QueryStats",
    "QRSResult",
    "MAX_AMPLITUDES",
    "prepare_proposal",
    "apply_oracle",
    "apply_rotation",
    "apply_reflection_zero",
    "apply_reflection_target",
    "apply_A",
    "apply_A_inverse",
    "aa_iterate",
    "amplified_state",
    "fixed_point_phases",
    "fixed_point_state",
    "fixed_point_success",
    "optimal_iterations",
    "min_cost_iterations",
    "fixed_point_iterations",
    "run_qrs",
    "qubit_count",
]

MAX_AMPLITUDES = 1 << 21


class StateVector:
    """Amplitudes over ``(support index, coin)`` pairs, mutated in place."""

    def __init__(self, support: TruncatedSupport, amplitudes: np.ndarray | None = None):
        size = support.size
        if 2 * size > MAX_AMPLITUDES:
            raise ValueError(f"statevector of {2 * size} amplitudes exceeds cap {MAX_AMPLITUDES}")
        self.support = support
        if amplitudes is None:
            amplitudes = np.zeros((size, 2), dtype=np.complex128)
            amplitudes[0, 0] = 1.0
        self.amplitudes = np.asarray(amplitudes, dtype=np.complex128).reshape(size, 2)
        # cached oracle / rotation data
        self._sqrt_q = np.sqrt(support.q_r)
        self._sa = np.sqrt(support.accept)
        self._ca = np.sqrt(np.clip(1.0 - support.accept, 0.0, 1.0))

    def copy(self) -> "StateVector":
        return StateVector(self.support, self.amplitudes.copy())

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def success_prob(self) -> float:
        """Probability that measuring the coin gives 1."""
        return float(np.sum(np.abs(self.amplitudes[:, 1]) ** 2))

    def conditional_distribution(self) -> np.ndarray:
        """Support-register distribution given coin = 1."""
        w = np.abs(self.amplitudes[:, 1]) ** 2
        return w / w.sum()


@dataclass(frozen=True)
class QueryStats:
    oracle_calls: int
    rotation_calls: int
    iterations: int
    success_prob: float
    attempts: int = 1

    def to_dict(self) -> dict:
        return asdict(self)


def prepare_proposal(support: TruncatedSupport) -> StateVector:
    """``|Q_R>|0>``: amplitude ``sqrt(Q_R(x))`` on coin 0."""
    state = StateVector(support)
    state.amplitudes[:, 0] = state._sqrt_q
    state.amplitudes[:, 1] = 0.0
    return state


def apply_oracle(state: StateVector) -> StateVector:
    """Householder oracle ``I - 2|u><u|``, ``u ~ |0> - |sqrt(Q_R)>``, on both coin values.

    It is self-inverse, so it also serves as its own adjoint.
    """
    u = -state._sqrt_q.astype(np.complex128)
    u[0] += 1.0
    nu = np.linalg.norm(u)
    if nu < 1e-15:
        return state
    u /= nu
    amp = state.amplitudes
    amp -= 2.0 * np.outer(u, u.conj() @ amp)
    return state


def apply_rotation(state: StateVector, direction: str = "forward") -> StateVector:
    """Coin rotation ``R_a`` (``forward``) or its transpose (``inverse``)."""
    a0 = state.amplitudes[:, 0].copy()
    a1 = state.amplitudes[:, 1].copy()
    ca, sa = state._ca, state._sa
    if direction == "forward":
        state.amplitudes[:, 0] = ca * a0 - sa * a1
        state.amplitudes[:, 1] = sa * a0 + ca * a1
    elif direction == "inverse":
        state.amplitudes[:, 0] = ca * a0 + sa * a1
        state.amplitudes[:, 1] = -sa * a0 + ca * a1
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return state


def apply_reflection_zero(state: StateVector, phase: float = math.pi) -> StateVector:
    """``I - (1 - e^{i phase}) |0><0|`` on the all-zero basis state; ``phase=pi`` is ``S_0``."""
    state.amplitudes[0, 0] *= np.exp(1j * phase) if phase != math.pi else -1.0
    return state


def apply_reflection_target(state: StateVector, phase: float = math.pi) -> StateVector:
    """``I - (1 - e^{i phase}) Pi`` with ``Pi`` the coin-1 projector; ``phase=pi`` is ``S_Pi``."""
    state.amplitudes[:, 1] *= np.exp(1j * phase) if phase != math.pi else -1.0
    return state


def apply_A(state: StateVector) -> StateVector:
    return apply_rotation(apply_oracle(state), "forward")


def apply_A_inverse(state: StateVector) -> StateVector:
    return apply_oracle(apply_rotation(state, "inverse"))


def aa_iterate(state: StateVector) -> StateVector:
    """One amplitude-amplification step ``-A S_0 A^dagger S_Pi``."""
    apply_reflection_target(state)
    apply_A_inverse(state)
    apply_reflection_zero(state)
    apply_A(state)
    state.amplitudes *= -1.0
    return state


def amplified_state(support: TruncatedSupport, k: int) -> StateVector:
    """``U^k A |0>`` with the oracle, rotation and iterates applied literally."""
    state = apply_A(StateVector(support))
    for _ in range(k):
        aa_iterate(state)
    return state


# --- schedules ---------------------------------------------------------------


def _check_p(p: float):
    if not 0 < p <= 1:
        raise ValueError(f"success probability must lie in (0, 1], got {p}")


def optimal_iterations(p: float) -> int:
    """Iterate count maximizing ``sin^2((2k+1) asin(sqrt p))``.

    Picks the better of the two integers around ``pi/(4 theta) - 1/2``
    (the smaller one on ties), which guarantees success at least ``1 - p``.
    """
    _check_p(p)
    theta = math.asin(math.sqrt(p))
    x = math.pi / (4 * theta) - 0.5
    lo = max(0, math.floor(x))
    hi = max(0, math.ceil(x))
    s_lo = math.sin((2 * lo + 1) * theta) ** 2
    s_hi = math.sin((2 * hi + 1) * theta) ** 2
    return hi if s_hi > s_lo + 1e-12 else lo


def min_cost_iterations(p: float) -> int:
    """Iterate count minimizing expected oracle calls ``(2k+1) / sin^2((2k+1) theta)``.

    With measure-and-retry the cost per accepted sample is what matters, and
    near ``p = 1/2`` the success-maximizing count costs more than ``k = 0``.
    Searches ``0..optimal_iterations(p)``.
    """
    theta = math.asin(math.sqrt(p))
    k_max = optimal_iterations(p)
    ks = np.arange(k_max + 1)
    cost = (2 * ks + 1) / np.sin((2 * ks + 1) * theta) ** 2
    return int(np.argmin(cost))


def fixed_point_iterations(p_min: float, eps: float) -> int:
    """``ceil(ln(2/eps) / sqrt(p_min))`` oracle-sequence length for fixed-point amplification."""
    _check_p(p_min)
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return math.ceil(math.log(2.0 / eps) / math.sqrt(p_min))


def _chebyshev(L: float, x: float) -> float:
    """``T_L(x)`` for real degree ``L``, valid for any real ``x``."""
    if abs(x) <= 1:
        return math.cos(L * math.acos(x))
    if x > 1:
        return math.cosh(L * math.acosh(x))
    return (-1) ** int(L) * math.cosh(L * math.acosh(-x))


def fixed_point_phases(length: int, eps: float):
    """Phase pairs ``(alpha_j, beta_j)``, ``j = 1..l``, for a length ``L = 2l + 1`` sequence."""
    if length < 1 or length % 2 == 0:
        raise ValueError("sequence length must be a positive odd integer")
    l = (length - 1) // 2
    gamma = 1.0 / _chebyshev(1.0 / length, 1.0 / eps)
    root = math.sqrt(max(0.0, 1.0 - gamma * gamma))
    alpha = np.empty(l)
    for j in range(1, l + 1):
        t = math.tan(2 * math.pi * j / length) * root
        alpha[j - 1] = 2.0 * math.atan2(1.0, t)  # 2 arccot(t), branch in (0, 2 pi)
    beta = -alpha[::-1]
    return alpha, beta


def fixed_point_success(p: float, length: int, eps: float) -> float:
    """Closed-form success probability ``1 - eps^2 T_L(T_{1/L}(1/eps) sqrt(1-p))^2``."""
    x = _chebyshev(1.0 / length, 1.0 / eps) * math.sqrt(max(0.0, 1.0 - p))
    return 1.0 - eps * eps * _chebyshev(length, x) ** 2


def fixed_point_state(support: TruncatedSupport, length: int, eps: float) -> StateVector:
    """Fixed-point amplitude amplification with generalized-phase reflections.

    Step ``j`` applies ``-A S_0(alpha_j) A^dagger S_Pi(beta_j)`` to ``A|0>``.
    """
    alpha, beta = fixed_point_phases(length, eps)
    state = apply_A(StateVector(support))
    for a, b in zip(alpha, beta):
        apply_reflection_target(state, b)
        apply_A_inverse(state)
        apply_reflection_zero(state, -a)
        apply_A(state)
        state.amplitudes *= -1.0
    return state


# --- full sampler ------------------------------------------------------------


@dataclass(frozen=True)
class QRSResult:
    """Accepted sample indices with the per-sample query accounting."""

    indices: np.ndarray
    attempts: np.ndarray
    iterations: int
    calls_per_attempt: int
    success_prob: float

    @property
    def oracle_calls(self) -> np.ndarray:
        return self.attempts * self.calls_per_attempt

    def stats(self, i: int) -> QueryStats:
        calls = int(self.oracle_calls[i])
        return QueryStats(calls, calls, self.iterations, self.success_prob, int(self.attempts[i]))


def run_qrs(
    support: TruncatedSupport,
    rng: np.random.Generator,
    mode: str = "optimal",
    count: int = 1,
    eps: float = 1e-6,
) -> QRSResult:
    """Prepare, rotate, amplify, measure coin then support; retry on coin 0.

    The amplified state depends only on the support, so it is simulated
    once and every run measures a fresh copy of it.  Each attempt costs
    ``1 + 2k`` oracle and rotation calls; ``mode="optimal"`` picks ``k`` by
    :func:`min_cost_iterations`.  ``mode="fixed_point"`` uses a
    phase sequence of odd length at least ``fixed_point_iterations(p_R, eps)``.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if mode == "optimal":
        k = min_cost_iterations(support.p_r)
        state = amplified_state(support, k)
    elif mode == "fixed_point":
        length = fixed_point_iterations(support.p_r, eps)
        length += 1 - length % 2
        k = (length - 1) // 2
        state = fixed_point_state(support, length, eps)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    success = min(state.success_prob, 1.0)
    attempts = rng.geometric(success, size=count).astype(np.int64)
    cond = state.conditional_distribution()
    cdf = np.cumsum(cond)
    idx = np.searchsorted(cdf, rng.random(count) * cdf[-1], side="right")
    idx = np.minimum(idx, support.size - 1)
    return QRSResult(idx.astype(np.int64), attempts, k, 1 + 2 * k, success)


def qubit_count(support_size: int) -> int:
    """``ceil(log2 |X_R|) + 1``: the index register plus one coin qubit."""
    if support_size < 1:
        raise ValueError("support must contain at least one point")
    return (support_size - 1).bit_length() + 1
