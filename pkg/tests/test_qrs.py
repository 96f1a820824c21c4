import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import SKEW, random_instance, sweep_support
from latqrs.qrs import (
    MAX_AMPLITUDES,
    StateVector,
    aa_iterate,
    amplified_state,
    apply_A,
    apply_A_inverse,
    apply_oracle,
    apply_reflection_target,
    apply_reflection_zero,
    apply_rotation,
    fixed_point_iterations,
    fixed_point_phases,
    fixed_point_state,
    fixed_point_success,
    min_cost_iterations,
    optimal_iterations,
    prepare_proposal,
    qubit_count,
    run_qrs,
)
from latqrs.samplers import build_truncated_support, klein_context


def small_support(seed, max_size=256):
    rng = np.random.Generator(np.random.Philox(seed))
    while True:
        n = int(rng.integers(1, 4))
        B, s, c, R = random_instance(rng, n)
        sup = build_truncated_support(klein_context(B, s, c), R, with_alpha=False)
        if sup.size <= max_size:
            return sup


@pytest.fixture(scope="module")
def skew_support():
    return build_truncated_support(klein_context(SKEW, 2.0, [0.3, -0.7]), 6.0)


def random_state(sup, rng):
    amp = rng.normal(size=(sup.size, 2)) + 1j * rng.normal(size=(sup.size, 2))
    return StateVector(sup, amp / np.linalg.norm(amp))


# --- state preparation and gates ------------------------------------------------


def test_default_state_is_zero(skew_support):
    s = StateVector(skew_support)
    assert s.amplitudes[0, 0] == 1 and s.norm == 1.0


def test_prepare_single_point():
    sup = build_truncated_support(klein_context(np.eye(1), 1.0), 0.5)
    assert sup.size == 1
    st_ = prepare_proposal(sup)
    assert abs(st_.amplitudes[0, 0]) == pytest.approx(1.0)


def test_prepare_matches_q_r():
    sup = build_truncated_support(klein_context(np.eye(2), 1.2), 2.0)
    st_ = prepare_proposal(sup)
    np.testing.assert_allclose(np.abs(st_.amplitudes[:, 0]) ** 2, sup.q_r, atol=1e-12)
    assert np.all(st_.amplitudes[:, 1] == 0)
    assert st_.norm == pytest.approx(1.0, abs=1e-12)


def test_oracle_maps_zero_to_proposal(skew_support):
    st_ = apply_oracle(StateVector(skew_support))
    np.testing.assert_allclose(st_.amplitudes[:, 0].real, np.sqrt(skew_support.q_r), atol=1e-12)
    # self-inverse
    apply_oracle(st_)
    assert abs(st_.amplitudes[0, 0] - 1) < 1e-12


def test_rotation_edge_cases():
    sup = build_truncated_support(klein_context([[1]], 1.0), 2.0)  # a = 1 everywhere
    st_ = prepare_proposal(sup)
    apply_rotation(st_)
    np.testing.assert_allclose(st_.amplitudes[:, 0], 0, atol=1e-12)
    np.testing.assert_allclose(np.abs(st_.amplitudes[:, 1]) ** 2, sup.q_r, atol=1e-12)


def test_rotation_zero_acceptance_is_identity(skew_support):
    from dataclasses import replace

    sup = replace(skew_support, accept=np.zeros(skew_support.size))
    st_ = prepare_proposal(sup)
    before = st_.amplitudes.copy()
    apply_rotation(st_)
    np.testing.assert_allclose(st_.amplitudes, before, atol=1e-15)


def test_rotation_direction_and_inverse(skew_support, rng):
    st_ = random_state(skew_support, rng)
    before = st_.amplitudes.copy()
    apply_rotation(apply_rotation(st_, "forward"), "inverse")
    np.testing.assert_allclose(st_.amplitudes, before, atol=1e-12)
    with pytest.raises(ValueError):
        apply_rotation(st_, "sideways")


def test_rotation_block_entries(skew_support):
    st_ = StateVector(skew_support, np.zeros((skew_support.size, 2)))
    st_.amplitudes[3, 0] = 1.0
    apply_rotation(st_)
    a = skew_support.accept[3]
    assert st_.amplitudes[3, 0] == pytest.approx(math.sqrt(1 - a))
    assert st_.amplitudes[3, 1] == pytest.approx(math.sqrt(a))
    st_ = StateVector(skew_support, np.zeros((skew_support.size, 2)))
    st_.amplitudes[3, 1] = 1.0
    apply_rotation(st_)
    assert st_.amplitudes[3, 0] == pytest.approx(-math.sqrt(a))
    assert st_.amplitudes[3, 1] == pytest.approx(math.sqrt(1 - a))


def test_accepted_branch_norm_is_p_r(skew_support):
    st_ = apply_A(StateVector(skew_support))
    assert st_.success_prob == pytest.approx(skew_support.p_r, abs=1e-12)
    assert st_.success_prob == pytest.approx(float(np.sum(skew_support.q_r * skew_support.accept)), abs=1e-12)


def test_reflection_zero(skew_support, rng):
    z = StateVector(skew_support)
    apply_reflection_zero(z)
    assert z.amplitudes[0, 0] == -1
    st_ = random_state(skew_support, rng)
    st_.amplitudes[0, 0] = 0
    before = st_.amplitudes.copy()
    apply_reflection_zero(st_)
    np.testing.assert_array_equal(st_.amplitudes, before)
    st_ = random_state(skew_support, rng)
    before = st_.amplitudes.copy()
    apply_reflection_zero(apply_reflection_zero(st_))
    np.testing.assert_array_equal(st_.amplitudes, before)


def test_reflection_target(skew_support, rng):
    st_ = random_state(skew_support, rng)
    before = st_.amplitudes.copy()
    apply_reflection_target(st_)
    np.testing.assert_array_equal(st_.amplitudes[:, 1], -before[:, 1])
    np.testing.assert_array_equal(st_.amplitudes[:, 0], before[:, 0])
    apply_reflection_target(st_)
    np.testing.assert_array_equal(st_.amplitudes, before)
    good = StateVector(skew_support, np.zeros((skew_support.size, 2)))
    good.amplitudes[2, 1] = 1.0
    assert apply_reflection_target(good).amplitudes[2, 1] == -1
    bad = StateVector(skew_support, np.zeros((skew_support.size, 2)))
    bad.amplitudes[2, 0] = 1.0
    assert apply_reflection_target(bad).amplitudes[2, 0] == 1


def test_unitarity_random_sequences(skew_support, rng):
    gates = [
        apply_oracle,
        lambda s: apply_rotation(s, "forward"),
        lambda s: apply_rotation(s, "inverse"),
        apply_reflection_zero,
        apply_reflection_target,
        lambda s: apply_reflection_zero(s, 0.7),
        lambda s: apply_reflection_target(s, -1.3),
        aa_iterate,
    ]
    for _ in range(1000):
        st_ = random_state(skew_support, rng)
        for g in rng.integers(0, len(gates), size=5):
            gates[g](st_)
            assert abs(st_.norm - 1) < 1e-10


def test_a_inverse_undoes_a(skew_support, rng):
    st_ = random_state(skew_support, rng)
    before = st_.amplitudes.copy()
    apply_A_inverse(apply_A(st_))
    np.testing.assert_allclose(st_.amplitudes, before, atol=1e-12)


def test_statevector_cap():
    class Big:
        size = MAX_AMPLITUDES

    with pytest.raises(ValueError):
        StateVector(Big())


# --- amplitude amplification ----------------------------------------------------


def test_grover_p_one():
    sup = build_truncated_support(klein_context([[1]], 1.0), 2.0)
    assert sup.p_r == pytest.approx(1.0)
    st_ = amplified_state(sup, 1)
    assert st_.success_prob == pytest.approx(1.0, abs=1e-12)


def test_grover_quarter():
    ctx, sup = sweep_support(0.25)
    assert amplified_state(sup, 1).success_prob == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("seed", range(20))
def test_grover_law_and_shape(seed):
    sup = small_support(seed)
    theta = math.asin(math.sqrt(sup.p_r))
    st_ = apply_A(StateVector(sup))
    for k in range(6):
        if k:
            aa_iterate(st_)
        assert st_.success_prob == pytest.approx(math.sin((2 * k + 1) * theta) ** 2, abs=1e-10)
        good = st_.amplitudes[:, 1]
        # coin-1 vector proportional to sqrt(pi_R), with a real common factor
        scale = np.vdot(np.sqrt(sup.pi_r), good)
        assert np.abs(good - scale * np.sqrt(sup.pi_r)).max() < 1e-10
        assert np.abs(st_.conditional_distribution() - sup.pi_r).max() < 1e-9


def test_optimal_iterations_examples():
    assert optimal_iterations(1.0) == 0
    assert optimal_iterations(0.25) == 1
    k = optimal_iterations(1e-4)
    assert k == 78
    assert 2 * k + 1 <= math.pi / (2 * math.sqrt(1e-4)) + 1
    for bad in (0.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            optimal_iterations(bad)


@given(st.floats(1e-8, 1.0))
def test_optimal_iterations_guarantee(p):
    k = optimal_iterations(p)
    theta = math.asin(math.sqrt(p))
    assert math.sin((2 * k + 1) * theta) ** 2 >= 1 - p - 1e-12
    assert k == max(0, round(math.pi / (4 * theta) - 0.5)) or abs(math.pi / (4 * theta) - 0.5 - k) <= 1


def test_fixed_point_iterations_examples():
    assert fixed_point_iterations(1.0, 0.5) == 2
    assert fixed_point_iterations(1e-4, 1e-9) == math.ceil(math.log(2e9) / 0.01)
    with pytest.raises(ValueError):
        fixed_point_iterations(0.0, 0.1)
    with pytest.raises(ValueError):
        fixed_point_iterations(0.5, 1.0)


@given(st.floats(1e-6, 0.25), st.floats(1e-9, 0.5))
def test_fixed_point_iterations_monotone(p, eps):
    base = fixed_point_iterations(p, eps)
    assert fixed_point_iterations(min(1.0, 2 * p), eps) <= base
    assert fixed_point_iterations(p, eps / 2) >= base
    assert abs(fixed_point_iterations(4 * p, eps) - math.ceil(base / 2)) <= 1


def test_fixed_point_phases_validation():
    with pytest.raises(ValueError):
        fixed_point_phases(4, 0.1)
    alpha, beta = fixed_point_phases(7, 0.1)
    assert alpha.size == 3 and np.allclose(beta, -alpha[::-1])


@pytest.mark.parametrize("target", [0.5, 0.1, 0.02])
def test_fixed_point_state_matches_closed_form(target):
    _, sup = sweep_support(target)
    eps = 0.05
    length = fixed_point_iterations(sup.p_r, eps)
    length += 1 - length % 2
    st_ = fixed_point_state(sup, length, eps)
    assert st_.success_prob == pytest.approx(fixed_point_success(sup.p_r, length, eps), abs=1e-10)
    assert st_.success_prob >= 1 - eps**2 - 1e-10
    assert np.abs(st_.conditional_distribution() - sup.pi_r).max() < 1e-10
    # never overshoots for larger p either
    for p in (0.3, 0.9):
        assert fixed_point_success(p, length, eps) >= 1 - eps**2 - 1e-12


# --- full sampler -------------------------------------------------------------


def test_run_qrs_trivial(rng):
    sup = build_truncated_support(klein_context([[1]], 1.0), 2.0)
    res = run_qrs(sup, rng, count=1000)
    assert res.iterations == 0 and np.all(res.attempts == 1)
    emp = np.bincount(res.indices, minlength=sup.size) / 1000
    assert 0.5 * np.abs(emp - sup.pi_r).sum() < 0.06


def test_run_qrs_law(rng, skew_support):
    res = run_qrs(skew_support, rng, count=10**5)
    emp = np.bincount(res.indices, minlength=skew_support.size) / 10**5
    assert 0.5 * np.abs(emp - skew_support.pi_r).sum() < 0.02
    assert res.calls_per_attempt == 1 + 2 * res.iterations
    stats = res.stats(0)
    assert stats.oracle_calls == stats.rotation_calls == stats.attempts * (1 + 2 * stats.iterations)
    assert set(stats.to_dict()) == {"oracle_calls", "rotation_calls", "iterations", "success_prob", "attempts"}


def test_run_qrs_fixed_point(rng, skew_support):
    res = run_qrs(skew_support, rng, mode="fixed_point", count=20000, eps=0.01)
    assert res.success_prob >= 1 - 1e-4 - 1e-10
    emp = np.bincount(res.indices, minlength=skew_support.size) / 20000
    assert 0.5 * np.abs(emp - skew_support.pi_r).sum() < 0.04


def test_run_qrs_validation(rng, skew_support):
    with pytest.raises(ValueError):
        run_qrs(skew_support, rng, mode="other")
    with pytest.raises(ValueError):
        run_qrs(skew_support, rng, count=0)


@pytest.mark.parametrize("target", [1.0, 0.3, 0.05, 1e-2, 1e-3, 1e-4])
def test_expected_calls_bound(target):
    if target == 1.0:
        sup = build_truncated_support(klein_context([[1]], 1.0), 2.0)
    else:
        _, sup = sweep_support(target)
    k = min_cost_iterations(sup.p_r)
    success = amplified_state(sup, k).success_prob
    assert (1 + 2 * k) / success <= 4 / math.sqrt(sup.p_r)


@given(st.floats(1e-4, 1.0))
def test_min_cost_schedule_bound(p):
    theta = math.asin(math.sqrt(p))
    k = min_cost_iterations(p)
    assert k <= optimal_iterations(p)
    cost = (2 * k + 1) / math.sin((2 * k + 1) * theta) ** 2
    assert cost <= 4 / math.sqrt(p)
    assert cost <= 1 / p + 1e-12  # never worse than not amplifying


def test_min_cost_near_half():
    # success-maximizing k = 1 costs about 6 calls just below p = 1/2; k = 0 costs 2
    assert optimal_iterations(0.499) == 1
    assert min_cost_iterations(0.499) == 0
    assert optimal_iterations(0.5 - 1e-15) == 0


def test_qubit_count():
    assert qubit_count(5) == 4
    assert qubit_count(1) == 1
    assert qubit_count(1024) == 11
    assert qubit_count(1025) == 12
    with pytest.raises(ValueError):
        qubit_count(0)
