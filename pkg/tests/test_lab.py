import numpy as np
import pytest

from smoothverify import prng
from smoothverify.lab import (
    CoinStream,
    available_engines,
    decide_coin_bias_via_reduction,
    hard_game_instance,
    hard_learning_instance,
    measure_learning_success,
    random_smooth_strategy,
    solve_coin_bias,
)
from smoothverify.lab.learning import LearnerBudgetExceeded, _BudgetedOracle
from smoothverify.lab.reduction import _side_inputs
from smoothverify.model import Bandit
from smoothverify.policy import compute_optimal_smooth_strategy
from smoothverify.stats import hoeffding_bound


def test_coin_stream_counts_draws():
    c = CoinStream(1, 0.1, 3)
    for _ in range(5):
        assert c.sample() in (0, 1)
    block = c.sample_block(100)
    assert c.samples_used == 105
    assert set(np.unique(block)) <= {0, 1}


def test_solve_coin_bias_trivial():
    assert solve_coin_bias([1, 1, 1]) == 1
    assert solve_coin_bias([0, 0, 0]) == -1
    assert solve_coin_bias([0, 1]) == 1  # tie goes to +1
    with pytest.raises(ValueError):
        solve_coin_bias([])


def test_solve_coin_bias_success_rate():
    # eps=0.1, m=1000: Hoeffding promises success rate >= 1 - e^{-2*1000*0.01}
    assert hoeffding_bound(1000, 0.1) / 2 < 0.01
    for sign in (1, -1):
        hits = 0
        for t in range(1000):
            c = CoinStream(sign, 0.1, prng.derive(400, sign, t))
            hits += solve_coin_bias(c.sample_block(1000)) == sign
        assert hits >= 990


def test_hard_learning_instance_structure():
    inst = hard_learning_instance(4, 0.5, prng.generator(5))
    assert len(inst.good_arms) == 2
    u = inst.expected_utilities()
    assert sorted(u[inst.good_arms]) == [1.0, 1.0]
    assert u.sum() == 2.0
    # optimal smooth value of every instance is exactly 1
    assert compute_optimal_smooth_strategy(4, 0.5, u).value == 1.0


def test_hard_learning_instance_param_checks():
    with pytest.raises(ValueError):
        hard_learning_instance(10, 0.3, prng.generator(0))  # 1/sigma not integral
    with pytest.raises(ValueError):
        hard_learning_instance(3, 0.25, prng.generator(0))  # 1/sigma > n


def test_hidden_set_overlap_expectation():
    # |S ∩ Q| for fixed Q of size m has mean m/(sigma*n); Monte-Carlo within
    # three sigma of the exact expectation
    n, sigma, m, trials = 60, 0.1, 12, 100_000
    q = np.arange(m)
    gen = prng.generator(9)
    overlaps = np.empty(trials)
    for t in range(trials):
        s = gen.choice(n, size=10, replace=False)
        overlaps[t] = np.isin(s, q).sum()
    want = m / (sigma * n)
    sd = overlaps.std(ddof=1) / np.sqrt(trials)
    assert abs(overlaps.mean() - want) <= 3 * sd


def test_hard_game_equilibrium_gives_star_utility_one():
    # exact enumeration for small k, n
    for t, (k, n, sigma) in enumerate([(2, 4, 0.5), (3, 4, 0.25), (4, 4, 0.25)]):
        inst = hard_game_instance(k, n, sigma, prng.generator(20, t))
        prof = inst.equilibrium_profile()
        total = 0.0
        from itertools import product

        for a in product(range(n), repeat=k):
            p = np.prod([prof[i, a[i]] for i in range(k)])
            total += p * inst.game.utilities(a)[inst.star]
        assert abs(total - 1.0) < 1e-12
        # closed form via the induced distribution agrees
        d = inst.game.induced_arm_distribution(inst.star, int(inst.blocks[inst.star][0]), prof)
        assert abs(d.mean() - 1.0) < 1e-12


def test_random_smooth_strategy_properties():
    gen = prng.generator(33)
    for _ in range(200):
        n = int(gen.integers(2, 30))
        sigma = float(gen.uniform(1.0 / n, 1.0))
        pi = random_smooth_strategy(n, sigma, gen)
        assert abs(pi.sum() - 1.0) <= 1e-9
        assert pi.max() <= sigma + 1e-12
        assert pi.min() >= 0.0


def test_engines_bit_identical():
    engines = available_engines()
    assert "python" in engines
    if "compiled" not in engines:
        pytest.skip("compiled engine not built")
    for t in range(6):
        seed = prng.derive(500, t)
        results = []
        for eng in ("compiled", "python"):
            coin = CoinStream(1 if t % 2 else -1, 0.2, prng.derive(seed, "coin"))
            r = decide_coin_bias_via_reduction(120, 0.2, 0.2, coin, 200_000, seed,
                                               engine=eng)
            results.append((r.output, r.terminated_side, r.reason, r.coins_consumed,
                            r.used_plus, r.used_minus, r.audits_done_plus,
                            r.audits_done_minus))
        assert results[0] == results[1]


def test_reduction_interleaving_and_output_rule():
    correct = 0
    for t in range(40):
        seed = prng.derive(501, t)
        sign = 1 if t % 2 == 0 else -1
        coin = CoinStream(sign, 0.2, prng.derive(seed, "coin"))
        r = decide_coin_bias_via_reduction(120, 0.2, 0.2, coin, 200_000, seed)
        assert r.interleaving_ok
        assert abs(r.used_plus - r.used_minus) <= 1
        if r.reason == "reject":
            # first output rule: a rejecting simulation answers its own sign
            assert r.output == r.terminated_side
        correct += r.output == sign
    assert correct >= 36


def test_reduction_requires_wide_sigma():
    coin = CoinStream(1, 0.2, 1)
    with pytest.raises(ValueError):
        decide_coin_bias_via_reduction(50, 0.1, 0.2, coin, 1000, 1)  # sigma < 24/n
    with pytest.raises(ValueError):
        decide_coin_bias_via_reduction(120, 0.21, 0.2, coin, 1000, 1)  # 1/sigma not int


def test_reduction_exhaustion_returns_bot():
    coin = CoinStream(1, 0.2, 2)
    r = decide_coin_bias_via_reduction(120, 0.2, 0.2, coin, 10, 3)
    assert r.output == 0 and r.reason == "exhausted"
    assert r.coins_consumed == 10


def test_side_inputs_distributionally_correct():
    # planted audits read the coin stream: side +1 sees x_t with mean 1/2+eps,
    # side -1 sees 1-x_t with mean 1/2-eps; local draws concentrate at 1/2-eps
    n, sigma, eps = 120, 0.2, 0.2
    mask = np.zeros(n, dtype=bool)
    mask[prng.generator(40).choice(n, size=5, replace=False)] = True
    side = _side_inputs(n, sigma, eps, prng.derive(41), mask)
    m = side["m"]
    local_means = side["local_sum"] / m
    # every local mean within the 1e-6 Hoeffding radius of 0.3
    for mean, pulls in zip(local_means, m):
        radius = np.sqrt(np.log(2 / 1e-6) / (2 * pulls))
        assert abs(mean - (0.5 - eps)) <= radius
    coins = CoinStream(1, eps, 42).sample_block(200_000)
    assert abs(coins.mean() - (0.5 + eps)) <= 0.01
    assert abs((1 - coins).mean() - (0.5 - eps)) <= 0.01


def test_budget_enforcement_invalidates_trial():
    oracle = _BudgetedOracle(Bandit.bernoulli([0.5] * 4).oracle(1), budget=3)
    for _ in range(3):
        oracle.pull(0)
    with pytest.raises(LearnerBudgetExceeded):
        oracle.pull(1)


def test_full_information_learner_always_succeeds():
    rep = measure_learning_success("round_robin_greedy", 24, 0.25, 0.25,
                                   budget=24, trials=50, seed=600)
    assert rep.success_rate == 1.0
    assert rep.mean_queries == 24


def test_zero_budget_equals_uniform_guess():
    # with no pulls the learners fall back to uniform; success is then the
    # deterministic indicator 1 - 1/(sigma n) <= eps, checked by enumeration
    n, sigma = 4, 0.5
    uniform_value = (1.0 / sigma) / n  # |S|/n arms pay 1 under uniform play
    for eps, want in [(0.6, 1.0), (0.2, 0.0)]:
        gap = 1.0 - uniform_value
        assert (gap <= eps) == bool(want)
        rep = measure_learning_success("uniform_greedy", n, sigma, eps,
                                       budget=0, trials=30, seed=601)
        assert rep.success_rate == want


def test_tiny_budget_fails_on_large_instances():
    rep = measure_learning_success("uniform_greedy", 240, 1.0 / 12, 0.25,
                                   budget=20, trials=60, seed=602)
    assert rep.success_rate < 2 / 3


def test_budget_violating_learner_reported_as_invalid():
    from smoothverify.lab import learning

    def rogue(oracle, n, sigma, budget, gen):
        for i in range(budget + 5):
            oracle.pull(i % n)
        return np.full(n, 1.0 / n)

    learning.LEARNERS["rogue"] = rogue
    try:
        rep = measure_learning_success("rogue", 12, 0.25, 0.25, budget=4,
                                       trials=6, seed=700)
    finally:
        del learning.LEARNERS["rogue"]
    assert rep.invalid_trials == 6
    assert rep.successes == 0
