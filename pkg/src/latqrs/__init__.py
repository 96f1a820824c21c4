"""Lattice discrete-Gaussian sampling: Klein, IMHK, classical and quantum
rejection sampling (statevector simulation), a toy dual attack on LWE, and
bit-cost estimators."""

from latqrs._backend import BACKEND, SupportSizeError
from latqrs.gaussian import GaussianParams, jacobi_theta3, rho, rho_z, sample_dgauss_z, tail_radius, tv_distance
from latqrs.lattice import Basis, enumerate_ball, lll_reduce, qr_decompose, qary_dual_basis, qary_primal_basis, shortest_vector
from latqrs.samplers import build_truncated_support, klein_context, klein_pmf, klein_sample

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "SupportSizeError",
    "GaussianParams",
    "Basis",
    "rho",
    "rho_z",
    "jacobi_theta3",
    "sample_dgauss_z",
    "tail_radius",
    "tv_distance",
    "qr_decompose",
    "qary_primal_basis",
    "qary_dual_basis",
    "lll_reduce",
    "enumerate_ball",
    "shortest_vector",
    "klein_context",
    "klein_sample",
    "klein_pmf",
    "build_truncated_support",
]
