"""Gaussian mass functions, theta sums, 1-D discrete Gaussian sampling.

All widths follow the ``rho_{s,c}(x) = exp(-pi ||x - c||^2 / s^2)``
convention (``s = sqrt(2 pi) sigma``).  Logarithms are natural unless a
name says otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Mapping

import numpy as np


__all__ = [
    "GaussianParams",
    "ThetaConfig",
    "rho",
    "log_rho",
    "rho_z",
    "log_rho_z",
    "jacobi_theta3",
    "log_jacobi_theta3",
    "dgauss_z_pmf",
    "sample_dgauss_z",
    "tail_radius",
    "tv_distance",
]


@dataclass(frozen=True)
class GaussianParams:
    """Width ``s`` and center ``c`` of ``rho_{s,c}``."""

    s: float
    c: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError(f"Gaussian width must be positive, got {self.s}")
        object.__setattr__(self, "c", np.asarray(self.c, dtype=np.float64).reshape(-1))

    @classmethod
    def centered(cls, s: float, dim: int) -> "GaussianParams":
        return cls(s, np.zeros(dim))


@dataclass(frozen=True)
class ThetaConfig:
    """Truncation control for one-dimensional theta series.

    Terms smaller than ``relative_cutoff`` times the peak term are dropped.
    """

    relative_cutoff: float = 1e-17

    def __post_init__(self):
        if not 0 < self.relative_cutoff <= 1e-12:
            raise ValueError("relative_cutoff must lie in (0, 1e-12]")

    @property
    def log_cutoff(self) -> float:
        return -math.log(self.relative_cutoff)


DEFAULT_THETA = ThetaConfig()


def log_rho(x, s: float, c=None) -> float:
    x = np.asarray(x, dtype=np.float64)
    c = np.zeros_like(x) if c is None else np.asarray(c, dtype=np.float64)
    if x.shape != c.shape:
        raise ValueError(f"dimension mismatch: x{x.shape} vs c{c.shape}")
    if not s > 0:
        raise ValueError(f"Gaussian width must be positive, got {s}")
    d = x - c
    return -math.pi * float(d @ d) / (s * s)


def rho(x, s: float, c=None) -> float:
    """``exp(-pi ||x - c||^2 / s^2)``."""
    return math.exp(log_rho(x, s, c))


def _window(s: float, mu: float, config: ThetaConfig):
    k0 = math.floor(mu + 0.5)
    d0 = k0 - mu
    h = min(math.sqrt(d0 * d0 + config.log_cutoff * s * s / math.pi), max(12.0 * s, 12.0))
    k = np.arange(math.ceil(mu - h), math.floor(mu + h) + 1, dtype=np.float64)
    t = k - mu
    e = -(math.pi * (t * t)) / (s * s)
    emax = -(math.pi * (d0 * d0)) / (s * s)
    return k, e, emax


def log_rho_z(s: float, mu: float = 0.0, config: ThetaConfig = DEFAULT_THETA) -> float:
    """``log sum_{k in Z} exp(-pi (k - mu)^2 / s^2)``, stable for tiny ``s``."""
    if not s > 0:
        raise ValueError(f"Gaussian width must be positive, got {s}")
    _, e, emax = _window(s, float(mu), config)
    return emax + math.log(float(np.exp(e - emax).sum()))


def rho_z(s: float, mu: float = 0.0, config: ThetaConfig = DEFAULT_THETA) -> float:
    """Mass ``rho_{s,mu}(Z)`` of the integers under a width-``s`` Gaussian."""
    return math.exp(log_rho_z(s, mu, config))


def log_jacobi_theta3(tau: float) -> float:
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    return log_rho_z(1.0 / math.sqrt(tau), 0.0)


def jacobi_theta3(tau: float) -> float:
    """``sum_k exp(-pi tau k^2)``."""
    return math.exp(log_jacobi_theta3(tau))


def _sampler_window(s: float, mu: float):
    # the sampler's window: |k - mu| <= max(12 s, 12)
    h = max(12.0 * s, 12.0)
    k = np.arange(math.ceil(mu - h), math.floor(mu + h) + 1, dtype=np.float64)
    t = k - mu
    e = -(math.pi * (t * t)) / (s * s)
    return k, np.exp(e - e.max())


def dgauss_z_pmf(s: float, mu: float = 0.0) -> dict[int, float]:
    """Probability table of ``D_{Z,s,mu}`` on the sampler window (nonzero entries)."""
    k, w = _sampler_window(s, mu)
    p = w / w.sum()
    return {int(ki): float(pi) for ki, pi in zip(k, p) if pi > 0}


def sample_dgauss_z(s: float, mu: float, rng: np.random.Generator, size=None):
    """Exact inverse-CDF sampler for ``D_{Z,s,mu}`` over ``|k - mu| <= max(12s, 12)``.

    The window drops less than 1e-30 of the mass.  Returns an ``int`` when
    ``size`` is None, otherwise an int64 array of that shape.
    """
    if not s > 0:
        raise ValueError(f"Gaussian width must be positive, got {s}")
    k, w = _sampler_window(s, float(mu))
    cdf = np.cumsum(w)
    u = rng.random(size)
    idx = np.searchsorted(cdf, u * cdf[-1], side="right")
    idx = np.minimum(idx, k.size - 1)
    out = k[idx].astype(np.int64)
    return int(out) if size is None else out


def tail_radius(m: int, s: float, eps_tail: float) -> float:
    """Radius beyond which a width-``s`` lattice Gaussian in dimension ``m`` keeps at most ``eps_tail`` of its mass.

    ``R = s (sqrt(m / 2 pi) + sqrt(ln(1 / eps_tail) / pi))`` (natural log).
    Pass ``eps_tail / N`` when ``N`` independent samples must all stay inside.
    """
    if not 0 < eps_tail < 1:
        raise ValueError(f"eps_tail must lie in (0, 1), got {eps_tail}")
    if m < 1 or not s > 0:
        raise ValueError("need m >= 1 and s > 0")
    return s * (math.sqrt(m / (2 * math.pi)) + math.sqrt(math.log(1 / eps_tail) / math.pi))


def tv_distance(p: Mapping[Hashable, float], q: Mapping[Hashable, float]) -> float:
    """Total variation distance between two pmfs given as mappings (missing keys are 0)."""
    total = 0.0
    for key in set(p) | set(q):
        a = p.get(key, 0.0)
        b = q.get(key, 0.0)
        if a < 0 or b < 0:
            raise ValueError(f"negative mass at {key!r}")
        total += abs(a - b)
    return 0.5 * total
