import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from conftest import box_points
from latqrs.lattice import (
    Basis,
    GramSchmidtProfile,
    SupportSizeError,
    enumerate_ball,
    gram_schmidt_norms,
    hnf,
    in_qary_dual,
    is_lll_reduced,
    lll_reduce,
    qary_dual_basis,
    qary_primal_basis,
    qr_decompose,
    shortest_vector,
)


def classical_gram_schmidt(B):
    B = np.asarray(B, dtype=float)
    out = []
    for i in range(B.shape[1]):
        v = B[:, i].copy()
        for u in out:
            v -= (v @ u) / (u @ u) * u
        out.append(v)
    return np.array([np.linalg.norm(v) for v in out])


def random_basis(rng, n, m=None, lo=-9, hi=10):
    m = n if m is None else m
    while True:
        B = rng.integers(lo, hi, size=(m, n))
        if np.linalg.matrix_rank(B) == n:
            return B


# --- Basis / QR ---------------------------------------------------------------


def test_basis_json_round_trip():
    B = Basis(np.array([[2, 1], [0, 1], [5, -3]]))
    again = Basis.from_json(B.to_json())
    assert again.integral and np.array_equal(again.matrix, B.matrix)
    assert B.to_dict() == {"m": 3, "n": 2, "columns": [[2, 0, 5], [1, 1, -3]]}


def test_basis_rejects_wide():
    with pytest.raises(ValueError):
        Basis(np.ones((2, 3)))


def test_qr_identity_and_skew():
    qr = qr_decompose(np.eye(3))
    assert np.allclose(qr.Q, np.eye(3)) and np.allclose(qr.R, np.eye(3))
    qr = qr_decompose(np.array([[2, 1], [0, 1]]))
    assert qr.R[0, 0] == pytest.approx(2.0) and qr.R[1, 1] == pytest.approx(1.0)


def test_qr_rank_deficient():
    with pytest.raises(ValueError):
        qr_decompose(np.array([[1, 2], [2, 4]]))


def test_qr_invariants_random(rng):
    for _ in range(100):
        n = int(rng.integers(1, 7))
        B = random_basis(rng, n, n + int(rng.integers(0, 3)))
        qr = qr_decompose(B)
        assert np.abs(qr.Q.T @ qr.Q - np.eye(n)).max() < 1e-10
        assert np.abs(B - qr.Q @ qr.R).max() < 1e-9 * np.abs(B).max()
        assert np.all(np.diag(qr.R) > 0)
        assert np.allclose(np.triu(qr.R), qr.R)
        np.testing.assert_allclose(gram_schmidt_norms(B), classical_gram_schmidt(B), rtol=1e-9)


def test_profile_type():
    prof = GramSchmidtProfile.from_basis(np.array([[2, 1], [0, 1]]))
    assert prof.b_max == pytest.approx(2.0)
    assert prof.log_volume == pytest.approx(math.log(2.0))


# --- HNF / q-ary --------------------------------------------------------------


def test_hnf_shape_and_lattice():
    G = np.array([[4, 6, 2], [2, 3, 8]])
    H = hnf(G)
    assert H.shape == (2, 2)
    assert H[0, 1] == 0 and H[0, 0] > 0 and H[1, 1] > 0
    assert 0 <= H[1, 0] < H[1, 1]
    # every generator is an integer combination of H's columns
    sol = np.linalg.solve(H.astype(float), G.astype(float))
    assert np.allclose(sol, np.round(sol))


def test_qary_dual_zero_matrix():
    B = qary_dual_basis(np.zeros((3, 2), dtype=int), 7)
    assert np.array_equal(B.matrix, np.eye(3, dtype=int))


def test_qary_small_example():
    A = np.array([[1], [2]])
    D = qary_dual_basis(A, 5)
    assert abs(round(np.linalg.det(D.matrix.astype(float)))) == 5
    for col in D.matrix.T:
        assert (col[0] + 2 * col[1]) % 5 == 0
    # residue enumeration: exactly 5 of 25 residues mod 5 lie in the lattice
    count = sum((a + 2 * b) % 5 == 0 for a in range(5) for b in range(5))
    assert count == 5
    P = qary_primal_basis(A, 5)
    for v in ([1, 2], [5, 0]):
        coef = np.linalg.solve(P.matrix.astype(float), np.array(v, dtype=float))
        assert np.allclose(coef, np.round(coef))


def test_qary_rejects_small_q():
    with pytest.raises(ValueError):
        qary_dual_basis(np.ones((2, 1), dtype=int), 1)


def test_qary_primal_full_rank_identity():
    P = qary_primal_basis(np.eye(3, dtype=int), 11)
    assert abs(round(np.linalg.det(P.matrix.astype(float)))) == 1


@given(
    st.integers(2, 5).flatmap(
        lambda m: st.tuples(
            st.just(m),
            st.integers(1, m),
            st.sampled_from([2, 3, 5, 7, 8, 9, 11, 13]),
            st.integers(0, 2**32 - 1),
        )
    )
)
def test_qary_duality(args):
    m, n, q, seed = args
    A = np.random.default_rng(seed).integers(0, q, size=(m, n))
    D = qary_dual_basis(A, q).matrix.astype(np.int64)
    P = qary_primal_basis(A, q).matrix.astype(np.int64)
    # membership of every dual basis vector and of q e_i
    assert all(in_qary_dual(A, q, col) for col in D.T)
    assert all(in_qary_dual(A, q, q * e) for e in np.eye(m, dtype=int))
    # <primal, dual> / q is integral on all basis pairs
    assert np.all((P.T @ D) % q == 0)
    # determinants: det(P) det(D) = q^m
    dp = abs(round(np.linalg.det(P.astype(float))))
    dd = abs(round(np.linalg.det(D.astype(float))))
    assert dp * dd == q**m


def test_qary_dual_determinant_prime():
    rng = np.random.default_rng(3)
    for _ in range(20):
        A = rng.integers(0, 7, size=(5, 2))
        # rank over GF(7) by brute force on 2x2 minors
        rank = 2 if any(
            (A[i, 0] * A[j, 1] - A[i, 1] * A[j, 0]) % 7 for i, j in itertools.combinations(range(5), 2)
        ) else (1 if np.any(A % 7) else 0)
        D = qary_dual_basis(A, 7).matrix.astype(float)
        assert abs(round(np.linalg.det(D))) == 7**rank


# --- LLL ----------------------------------------------------------------------


def test_lll_orthogonal_unchanged():
    B = np.diag([1, 2, 3])
    out = lll_reduce(B).matrix
    assert np.array_equal(np.abs(out), B)


def test_lll_skewed():
    B = np.array([[1, 0], [10**6, 1]])
    out, U = lll_reduce(B, return_transform=True)
    assert is_lll_reduced(out.matrix)
    assert np.array_equal(B @ U, out.matrix)
    assert abs(round(np.linalg.det(U.astype(float)))) == 1


def test_lll_delta_range():
    with pytest.raises(ValueError):
        lll_reduce(np.eye(2), delta=0.2)


def test_lll_same_lattice_random(rng):
    for _ in range(30):
        n = int(rng.integers(2, 6))
        B = random_basis(rng, n, lo=-50, hi=51)
        out, U = lll_reduce(B, return_transform=True)
        assert is_lll_reduced(out.matrix)
        assert np.array_equal(hnf(B), hnf(out.matrix))
        assert np.array_equal(B @ U, out.matrix)


# --- enumeration --------------------------------------------------------------


def test_enumerate_identity():
    X = enumerate_ball(np.eye(2), np.zeros(2), 1.5)
    assert X.shape == (9, 2)
    assert {tuple(x) for x in X} == {(a, b) for a in (-1, 0, 1) for b in (-1, 0, 1)}
    assert [tuple(x) for x in X] == sorted(tuple(x) for x in X)


def test_enumerate_empty():
    assert enumerate_ball(np.eye(2), np.array([0.5, 0.5]), 0.5).shape == (0, 2)


def test_enumerate_cap():
    with pytest.raises(SupportSizeError) as err:
        enumerate_ball(np.eye(3), None, 10.0, max_points=100)
    assert err.value.cap == 100


def test_enumerate_dimension_guard():
    with pytest.raises(ValueError):
        enumerate_ball(np.eye(9), None, 1.0)


def test_enumerate_off_span_center():
    # center has a component orthogonal to the lattice plane
    B = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    c = np.array([0.0, 0.0, 1.0])
    X = enumerate_ball(B, c, math.sqrt(2.0))
    assert {tuple(x) for x in X} == {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}


@given(
    st.integers(1, 3).flatmap(
        lambda n: st.tuples(
            hnp.arrays(np.int64, (n, n), elements=st.integers(-4, 4)),
            hnp.arrays(np.float64, (n,), elements=st.floats(-3, 3)),
            st.floats(0.3, 6.0),
        )
    )
)
def test_enumerate_matches_box(args):
    B, c, R = args
    if abs(np.linalg.det(B.astype(float))) < 0.5:
        return
    X = enumerate_ball(B, c, R)
    n = B.shape[1]
    # box large enough: |x_i| <= (R + |c|) * ||B^{-1}||
    half = int(math.ceil((R + np.linalg.norm(c)) * np.linalg.norm(np.linalg.inv(B.astype(float)), 2))) + 1
    Y = box_points(n, half)
    d = np.linalg.norm(Y @ B.T - c, axis=1)
    # strictly inside / outside points must agree; boundary ties within 1e-9 are ambiguous
    inside = {tuple(y) for y in Y[d <= R - 1e-9]}
    maybe = {tuple(y) for y in Y[np.abs(d - R) < 1e-9]}
    got = {tuple(x) for x in X}
    assert len(got) == X.shape[0]
    assert inside <= got <= inside | maybe
    assert np.all(np.linalg.norm(X @ B.T - c, axis=1) <= R + 1e-12)


# --- shortest vector ----------------------------------------------------------


def test_shortest_vector_simple():
    assert shortest_vector(np.eye(2))[1] == pytest.approx(1.0)
    assert shortest_vector(2 * np.eye(2))[1] == pytest.approx(2.0)


def test_shortest_vector_qary_toy():
    D = qary_dual_basis(np.array([[1], [2]]), 5)
    v, norm = shortest_vector(D)
    assert (v[0] + 2 * v[1]) % 5 == 0 and np.any(v != 0)
    best = min(
        math.hypot(a, b)
        for a in range(-5, 6)
        for b in range(-5, 6)
        if (a, b) != (0, 0) and (a + 2 * b) % 5 == 0
    )
    assert norm == pytest.approx(best)


def test_shortest_vector_random_vs_box(rng):
    for _ in range(20):
        n = int(rng.integers(2, 4))
        B = random_basis(rng, n, lo=-6, hi=7)
        v, norm = shortest_vector(B)
        Y = box_points(n, 12)
        Y = Y[np.any(Y != 0, axis=1)]
        assert norm == pytest.approx(np.linalg.norm(Y @ B.T, axis=1).min(), rel=1e-12)


def test_shortest_vector_dimension_cap():
    with pytest.raises(ValueError):
        shortest_vector(np.eye(30))
