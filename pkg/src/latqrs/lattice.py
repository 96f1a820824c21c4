"""Lattice bases: QR / Gram-Schmidt, Hermite normal form, q-ary lattices,
LLL reduction, Fincke-Pohst ball enumeration and brute-force shortest vectors.

Bases are stored column-wise: the lattice generated by an ``m x n`` matrix
``B`` is ``{B x : x in Z^n}``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from latqrs._backend import SupportSizeError, kernels

__all__ = [
    "Basis",
    "QRFactorization",
    "SupportSizeError",
    "as_matrix",
    "qr_decompose",
    "gram_schmidt_norms",
    "GramSchmidtProfile",
    "hnf",
    "qary_primal_basis",
    "qary_dual_basis",
    "in_qary_dual",
    "lll_reduce",
    "is_lll_reduced",
    "enumerate_ball",
    "shortest_vector",
]

RANK_TOL = 1e-9
MAX_ENUM_POINTS = 1 << 20


@dataclass(frozen=True)
class Basis:
    """Column basis of a lattice; ``matrix`` is ``m x n`` with ``m >= n``."""

    matrix: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.matrix)
        if B.ndim != 2:
            raise ValueError("basis must be a 2-D matrix")
        if B.shape[0] < B.shape[1]:
            raise ValueError(f"need m >= n, got shape {B.shape}")
        if np.issubdtype(B.dtype, np.integer) or np.all(np.asarray(B, dtype=float) == np.round(B)):
            B = np.asarray(np.round(B), dtype=np.int64) if _fits_int64(B) else B
        object.__setattr__(self, "matrix", B)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[float]]) -> "Basis":
        return cls(np.array(columns).T)

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    @property
    def integral(self) -> bool:
        return np.issubdtype(self.matrix.dtype, np.integer)

    def to_dict(self) -> dict:
        cols = self.matrix.T.tolist()
        return {"m": self.m, "n": self.n, "columns": cols}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "Basis":
        B = cls.from_columns(data["columns"])
        if B.m != data.get("m", B.m) or B.n != data.get("n", B.n):
            raise ValueError("declared m, n do not match the columns")
        return B

    @classmethod
    def from_json(cls, text: str) -> "Basis":
        return cls.from_dict(json.loads(text))


def _fits_int64(B) -> bool:
    a = np.abs(np.asarray(B, dtype=float))
    return a.size == 0 or float(a.max()) < 2**62


def as_matrix(B) -> np.ndarray:
    return B.matrix if isinstance(B, Basis) else np.asarray(B)


@dataclass(frozen=True)
class QRFactorization:
    Q: np.ndarray
    R: np.ndarray

    @property
    def gs_norms(self) -> np.ndarray:
        return np.diag(self.R).copy()


def qr_decompose(B) -> QRFactorization:
    """Reduced QR with ``r_ii > 0``.

    Raises ``ValueError`` when some ``r_ii`` is at most ``1e-9``, or at most the
    rounding noise of the factorization for very large entries, i.e. the
    columns are dependent.
    """
    M = np.asarray(as_matrix(B), dtype=np.float64)
    if M.shape[0] < M.shape[1]:
        raise ValueError(f"need m >= n, got shape {M.shape}")
    Q, R = np.linalg.qr(M, mode="reduced")
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    Q = Q * signs[None, :]
    R = R * signs[:, None]
    noise = 64 * np.finfo(float).eps * M.shape[0] * float(np.abs(M).max(initial=0.0))
    if np.any(np.diag(R) <= max(RANK_TOL, noise)):
        raise ValueError("basis is rank-deficient")
    return QRFactorization(Q, R)


def gram_schmidt_norms(B) -> np.ndarray:
    """Lengths of the Gram-Schmidt vectors, which equal the ``r_ii``."""
    return qr_decompose(B).gs_norms


@dataclass(frozen=True)
class GramSchmidtProfile:
    """Gram-Schmidt norms ``||b*_i||`` of a basis, measured or modelled."""

    norms: np.ndarray

    def __post_init__(self):
        norms = np.asarray(self.norms, dtype=np.float64)
        if norms.ndim != 1 or norms.size == 0 or np.any(norms <= 0):
            raise ValueError("profile needs a nonempty vector of positive norms")
        object.__setattr__(self, "norms", norms)

    @classmethod
    def from_basis(cls, B) -> "GramSchmidtProfile":
        return cls(gram_schmidt_norms(B))

    @property
    def dim(self) -> int:
        return self.norms.size

    @property
    def b_max(self) -> float:
        return float(self.norms.max())

    @property
    def log_volume(self) -> float:
        return float(np.log(self.norms).sum())


# --- exact integer machinery -------------------------------------------------


def hnf(G) -> np.ndarray:
    """Column-style Hermite normal form of an integer generating matrix.

    Returns the lower-triangular ``m x r`` basis (``r`` = rank) with positive
    diagonal and entries left of each pivot reduced into ``[0, pivot)``.
    Works with Python integers throughout.
    """
    G = np.asarray(G)
    m, k = G.shape
    cols = [[int(v) for v in G[:, j]] for j in range(k)]
    out: list[list[int]] = []
    row = 0
    while row < m and cols:
        while True:
            nz = [c for c in cols if c[row] != 0]
            if len(nz) <= 1:
                break
            piv = min(nz, key=lambda c: abs(c[row]))
            for c in nz:
                if c is piv:
                    continue
                f = c[row] // piv[row]
                if f:
                    for r in range(row, m):
                        c[r] -= f * piv[r]
        nz = [c for c in cols if c[row] != 0]
        if nz:
            piv = nz[0]
            cols = [c for c in cols if c is not piv]
            if piv[row] < 0:
                piv = [-v for v in piv]
            for prev in out:
                f = prev[row] // piv[row]
                if f:
                    for r in range(row, m):
                        prev[r] -= f * piv[r]
            out.append(piv)
        cols = [c for c in cols if any(c)]
        row += 1
    if not out:
        return np.zeros((m, 0), dtype=object)
    H = np.array([[c[r] for c in out] for r in range(m)], dtype=object)
    return _maybe_int64(H)


def _maybe_int64(H):
    if all(abs(int(v)) < 2**62 for v in np.asarray(H).ravel()):
        return np.asarray(H, dtype=np.int64)
    return H


def _check_q(q: int):
    if int(q) < 2:
        raise ValueError(f"modulus must be at least 2, got {q}")
    if int(q) >= 2**31:
        raise ValueError("modulus capped at 2^31 for exact 64-bit arithmetic")


def qary_primal_basis(A, q: int) -> Basis:
    """Basis of ``L_q(A) = {z in Z^m : z = A x mod q}`` via the HNF of ``[A | q I]``."""
    _check_q(q)
    A = np.asarray(A, dtype=np.int64) % q
    m = A.shape[0]
    gens = np.concatenate([A, q * np.eye(m, dtype=np.int64)], axis=1)
    return Basis(hnf(gens))


def qary_dual_basis(A, q: int) -> Basis:
    """Basis of ``L_q^perp(A) = {z in Z^m : A^T z = 0 mod q}``.

    Uses ``L_q^perp(A) = q * L_q(A)^*``: with ``H`` the HNF basis of
    ``L_q(A)``, the columns of ``q H^{-T}`` form a basis.  Computed exactly and
    returned in Hermite normal form.
    """
    _check_q(q)
    H = np.asarray(qary_primal_basis(A, q).matrix, dtype=object)
    m = H.shape[0]
    # solve H^T X = q I by back substitution (H^T is upper triangular)
    Ht = [[Fraction(int(H[j, i])) for j in range(m)] for i in range(m)]
    X = [[Fraction(0)] * m for _ in range(m)]
    for col in range(m):
        for i in range(m - 1, -1, -1):
            acc = Fraction(q if i == col else 0)
            for j in range(i + 1, m):
                acc -= Ht[i][j] * X[j][col]
            X[i][col] = acc / Ht[i][i]
    if any(v.denominator != 1 for r in X for v in r):
        raise ArithmeticError("q H^{-T} is not integral; HNF construction failed")
    D = np.array([[int(v) for v in r] for r in X], dtype=object)
    return Basis(hnf(D))


def in_qary_dual(A, q: int, z) -> bool:
    A = np.asarray(A, dtype=np.int64)
    z = np.asarray(z, dtype=np.int64)
    return bool(np.all((A.T @ z) % q == 0))


# --- LLL ---------------------------------------------------------------------


def _gso(B: np.ndarray):
    n = B.shape[1]
    Bs = np.zeros_like(B, dtype=np.float64)
    mu = np.eye(n)
    norms2 = np.zeros(n)
    for i in range(n):
        v = B[:, i].astype(np.float64)
        for j in range(i):
            mu[i, j] = float(B[:, i].astype(np.float64) @ Bs[:, j]) / norms2[j]
            v = v - mu[i, j] * Bs[:, j]
        Bs[:, i] = v
        norms2[i] = float(v @ v)
    return mu, norms2


def lll_reduce(B, delta: float = 0.99, return_transform: bool = False):
    """LLL-reduce a column basis (textbook algorithm, float Gram-Schmidt).

    Integer bases keep exact integer entries.  With ``return_transform`` the
    unimodular ``U`` with ``B_out = B_in U`` is returned as well.
    """
    if not 0.25 < delta < 1:
        raise ValueError("delta must lie in (0.25, 1)")
    src = as_matrix(B)
    integral = np.issubdtype(np.asarray(src).dtype, np.integer)
    M = np.array(src, dtype=np.int64 if integral else np.float64)
    n = M.shape[1]
    qr_decompose(M)
    U = np.eye(n, dtype=np.int64)
    mu, norms2 = _gso(M)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            r = round(mu[k, j])
            if r:
                M[:, k] -= r * M[:, j]
                U[:, k] -= r * U[:, j]
                mu[k, : j + 1] -= r * mu[j, : j + 1]
        if norms2[k] >= (delta - mu[k, k - 1] ** 2) * norms2[k - 1]:
            k += 1
        else:
            M[:, [k - 1, k]] = M[:, [k, k - 1]]
            U[:, [k - 1, k]] = U[:, [k, k - 1]]
            mu, norms2 = _gso(M)
            k = max(k - 1, 1)
    out = Basis(M)
    return (out, U) if return_transform else out


def is_lll_reduced(B, delta: float = 0.99, eta: float = 0.5 + 1e-9) -> bool:
    """Size-reduction and Lovasz conditions, checked directly."""
    M = as_matrix(B)
    mu, norms2 = _gso(np.asarray(M))
    n = M.shape[1]
    for i in range(n):
        for j in range(i):
            if abs(mu[i, j]) > eta:
                return False
    return all(norms2[k] >= (delta - mu[k, k - 1] ** 2) * norms2[k - 1] * (1 - 1e-12) for k in range(1, n))


# --- enumeration -------------------------------------------------------------


def enumerate_ball(B, c=None, R: float = 1.0, max_points: int = MAX_ENUM_POINTS, max_dim: int = 8) -> np.ndarray:
    """Coefficient vectors ``x`` with ``||B x - c|| <= R``, sorted lexicographically.

    Depth-first Fincke-Pohst enumeration over coordinates ``n..1`` on the R
    factor.  Raises :class:`SupportSizeError` when more than ``max_points``
    points qualify.
    """
    M = np.asarray(as_matrix(B), dtype=np.float64)
    m, n = M.shape
    if n > max_dim:
        raise ValueError(f"enumeration limited to n <= {max_dim}, got {n}")
    if not R > 0:
        raise ValueError("radius must be positive")
    qr = qr_decompose(M)
    c = np.zeros(m) if c is None else np.asarray(c, dtype=np.float64)
    cp = qr.Q.T @ c
    off = c - qr.Q @ cp
    radius2 = R * R - float(off @ off)
    if radius2 < 0:
        return np.zeros((0, n), dtype=np.int64)
    X = kernels.enumerate_ball(qr.R, cp, radius2, int(max_points))
    if X.shape[0] == 0:
        return X.reshape(0, n)
    order = np.lexsort(X.T[::-1])
    return np.ascontiguousarray(X[order])


def shortest_vector(B, max_dim: int = 24, max_points: int = MAX_ENUM_POINTS):
    """Nonzero lattice vector of minimal Euclidean norm, by exhaustive enumeration.

    The basis is LLL-reduced first and the ball radius is the shortest
    reduced column, so every candidate is examined.  Returns ``(vector, norm)``.
    """
    M = as_matrix(B)
    n = M.shape[1]
    if n > max_dim:
        raise ValueError(f"shortest_vector limited to n <= {max_dim}, got {n}")
    red = lll_reduce(M).matrix
    colnorms = np.linalg.norm(np.asarray(red, dtype=np.float64), axis=0)
    R0 = float(colnorms.min()) * (1 + 1e-9)
    X = enumerate_ball(red, None, R0, max_points=max_points, max_dim=max_dim)
    X = X[np.any(X != 0, axis=1)]
    V = X @ np.asarray(red).T
    sq = np.einsum("ij,ij->i", V.astype(np.float64), V.astype(np.float64))
    best = int(np.argmin(sq))
    return V[best], math.sqrt(float(sq[best]))
