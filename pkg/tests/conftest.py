import itertools
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def box_points(n: int, half: int):
    """All integer vectors in ``[-half, half]^n`` as an array."""
    rng = range(-half, half + 1)
    return np.array(list(itertools.product(rng, repeat=n)), dtype=np.int64)


def brute_rho(B, s, c, X):
    """``rho_{s,c}(B x)`` for rows of X, straight from the definition."""
    V = X @ np.asarray(B, dtype=float).T
    d = V - np.asarray(c, dtype=float)
    return np.exp(-math.pi * np.sum(d * d, axis=1) / (s * s))


def brute_rho_z(s, mu, half=60):
    k = np.arange(math.floor(mu) - half, math.floor(mu) + half + 1)
    return float(np.exp(-math.pi * (k - mu) ** 2 / s**2).sum())


def coeff_box_half(B, radius):
    inv = np.linalg.pinv(np.asarray(B, dtype=float))
    return int(math.ceil(radius * np.linalg.norm(inv, 2))) + 1


def random_instance(rng, n):
    while True:
        B = rng.integers(-3, 4, size=(n, n))
        # well-conditioned keeps the brute-force coefficient box small
        if abs(np.linalg.det(B)) >= 1 and np.linalg.cond(B) < 8:
            break
    r = np.abs(np.diag(np.linalg.qr(B.astype(float))[1]))
    s = float(rng.uniform(0.6, 2.0) * r.max())
    c = rng.uniform(-2, 2, size=n)
    R = float(rng.uniform(0.8, 1.6) * s)
    return B, s, c, R


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(20261015))


SKEW = np.array([[2.0, 1.0], [0.0, 1.0]])  # columns (2,0) and (1,1)


SWEEP_BASIS = np.diag([1.0, 3.0])
SWEEP_CENTER = np.array([0.0, 1.5])


def sweep_support(p_target: float):
    """Support from the diag(1, 3) family whose ``p_R`` equals ``p_target``.

    The center sits halfway between lattice layers, so ``p_R`` falls with
    the width; the width is found by bisection on ``log p_R``.
    """
    from scipy.optimize import brentq

    from latqrs.samplers import build_truncated_support, klein_context

    def build(s):
        ctx = klein_context(SWEEP_BASIS, s, SWEEP_CENTER)
        return ctx, build_truncated_support(ctx, 2.0 * s, with_alpha=False)

    s = brentq(lambda s: math.log(build(s)[1].p_r) - math.log(p_target), 0.8, 6.0, xtol=1e-12)
    return build(s)
