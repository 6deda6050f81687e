import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothverify.policy import (
    cap_count,
    compute_optimal_smooth_strategy,
    is_epsilon_optimal,
    optimal_smooth_value_oracle,
    remainder_mass,
    strategy_value,
)


def test_sigma_one_selects_best_arm():
    res = compute_optimal_smooth_strategy(3, 1.0, [0.2, 0.9, 0.5])
    assert np.allclose(res.strategy, [0.0, 1.0, 0.0])
    assert res.value == 0.9


def test_sigma_reciprocal_n_forces_uniform():
    for u in ([0.1, 0.8, 0.6, 0.3], [1.0, 1.0, 1.0, 1.0]):
        res = compute_optimal_smooth_strategy(4, 0.25, u)
        assert np.allclose(res.strategy, 0.25)


def test_remainder_case_matches_enumeration():
    res = compute_optimal_smooth_strategy(4, 0.4, [0.1, 0.8, 0.6, 0.3])
    assert np.allclose(res.strategy, [0.0, 0.4, 0.4, 0.2])
    assert abs(res.value - 0.62) < 1e-12
    assert abs(optimal_smooth_value_oracle(4, 0.4, [0.1, 0.8, 0.6, 0.3]) - 0.62) < 1e-12


def test_strategy_value_examples():
    assert strategy_value([0.5, 0.5], [0.2, 0.6]) == 0.4
    assert strategy_value([0.0, 1.0, 0.0], [0.2, 0.9, 0.5]) == 0.9
    assert abs(strategy_value(np.full(4, 0.25), [0.1, 0.8, 0.6, 0.3]) - 0.45) < 1e-15
    with pytest.raises(ValueError):
        strategy_value([0.5, 0.5], [1.0])


def test_oracle_boundary_cases():
    u = [0.3, 0.9, 0.1, 0.5]
    assert abs(optimal_smooth_value_oracle(4, 0.25, u) - np.mean(u)) < 1e-12
    assert optimal_smooth_value_oracle(4, 1.0, u) == max(u)
    with pytest.raises(ValueError):
        optimal_smooth_value_oracle(11, 0.5, np.zeros(11))


def test_cap_count_and_remainder():
    assert cap_count(1.0) == 1
    assert cap_count(0.5) == 2
    assert cap_count(0.3) == 3
    assert cap_count(1.0 / 7.0) == 7
    assert remainder_mass(0.5) == 0.0
    assert abs(remainder_mass(0.3) - 0.1) < 1e-12
    # the leftover never exceeds the cap itself
    for sigma in (0.3, 0.4, 0.7, 0.9, 1 / 3, 1 / 6):
        assert remainder_mass(sigma) <= sigma + 1e-12


def test_output_is_smooth_and_normalized():
    gen = np.random.default_rng(0)
    for _ in range(200):
        n = int(gen.integers(1, 12))
        sigma = float(gen.uniform(1.0 / n, 1.0))
        res = compute_optimal_smooth_strategy(n, sigma, gen.random(n))
        assert res.strategy.max() <= sigma + 1e-12
        assert abs(res.strategy.sum() - 1.0) <= 1e-12
        assert res.strategy.min() >= 0.0


@settings(max_examples=150, deadline=None)
@given(
    st.integers(min_value=1, max_value=8),
    st.data(),
)
def test_value_matches_oracle_on_grid(n, data):
    sigmas = [s for s in (1.0 / n, 0.3, 0.4, 0.5, 1.0) if s >= 1.0 / n - 1e-12]
    sigma = data.draw(st.sampled_from(sigmas))
    u = np.array(data.draw(st.lists(
        st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0]), min_size=n, max_size=n)))
    got = compute_optimal_smooth_strategy(n, sigma, u).value
    want = optimal_smooth_value_oracle(n, sigma, u)
    assert abs(got - want) <= 1e-12


def test_tie_permutation_invariance_of_value():
    u = np.array([0.5, 0.9, 0.5, 0.9, 0.1])
    gen = np.random.default_rng(2)
    base = compute_optimal_smooth_strategy(5, 0.4, u).value
    for _ in range(20):
        perm = gen.permutation(5)
        assert compute_optimal_smooth_strategy(5, 0.4, u[perm]).value == base


def test_is_epsilon_optimal():
    u = [0.1, 0.8, 0.6, 0.3]
    opt = compute_optimal_smooth_strategy(4, 0.4, u)
    assert is_epsilon_optimal(opt.strategy, u, 0.4, 0.0)
    # non-smooth strategies fail regardless of value
    assert not is_epsilon_optimal([0.0, 1.0, 0.0, 0.0], u, 0.4, 1.0)
    # uniform has value 0.45, gap 0.17 > 0.1
    assert not is_epsilon_optimal(np.full(4, 0.25), u, 0.4, 0.1)
    assert is_epsilon_optimal(np.full(4, 0.25), u, 0.4, 0.2)


def test_closeness_transfer_spot():
    gen = np.random.default_rng(5)
    for _ in range(300):
        n = int(gen.integers(1, 10))
        sigma = float(gen.uniform(1.0 / n, 1.0))
        eps = float(gen.uniform(0.05, 0.8))
        u = gen.random(n)
        v = np.clip(u + gen.uniform(-eps / 2, eps / 2, n), 0.0, 1.0)
        pi = compute_optimal_smooth_strategy(n, sigma, u).strategy
        assert is_epsilon_optimal(pi, v, sigma, eps)


def test_sigma_out_of_range_rejected():
    with pytest.raises(ValueError):
        compute_optimal_smooth_strategy(3, 0.2, [0.1, 0.2, 0.3])
    with pytest.raises(ValueError):
        compute_optimal_smooth_strategy(3, 1.5, [0.1, 0.2, 0.3])
