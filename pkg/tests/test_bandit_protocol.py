import numpy as np
import pytest

from smoothverify import prng
from smoothverify.bandit_protocol import (
    bin_count,
    bin_schedule,
    bucket_of,
    prover_pull_budget,
    run_bandit_verification,
    run_prover,
)
from smoothverify.behaviors import (
    FixedClaim,
    Honest,
    InflateBlock,
    ProverContext,
    RandomNoise,
    RawMessage,
    ShiftAll,
)
from smoothverify.model import Bandit
from smoothverify.policy import compute_optimal_smooth_strategy, is_epsilon_optimal


def test_bin_count_examples():
    assert bin_count(0.25) == 2          # ceil(log4 4) = 1
    assert bin_count(1.0 / 4**3) == 4
    assert bin_count(0.2) == 3
    assert bin_count(0.9) == 2           # ceil(log4(1/0.9)) = 1


def test_bin_schedule_golden_values():
    # frozen from 50-digit evaluation of the closed forms (n=100, sigma=0.05,
    # eps=0.25): a_b and m_b per bucket
    sched = bin_schedule(100, 0.05, 0.25)
    assert [(s.b, s.a_b, s.m_b) for s in sched] == [(0, 108, 16929), (1, 431, 1236)]
    assert sched[0].eps_b == 0.25 and sched[1].eps_b == 1.0

    sched = bin_schedule(200, 0.05, 0.25)
    assert [(s.b, s.a_b, s.m_b) for s in sched] == [(0, 216, 18348), (1, 861, 1324)]

    sched = bin_schedule(480, 0.05, 0.2)
    assert [(s.b, s.a_b, s.m_b) for s in sched] == [
        (0, 544, 31792), (1, 2175, 2265), (2, 8700, 159)]


def test_prover_budget_golden_values():
    # frozen from 50-digit evaluation of ceil(128 ln(12 n/eps)/eps^2)
    assert prover_pull_budget(100, 0.25) == 17360
    assert prover_pull_budget(200, 0.25) == 18780
    assert prover_pull_budget(2000, 0.25) == 23495
    assert prover_pull_budget(480, 0.2) == 32859


def test_schedule_rejects_bad_params():
    with pytest.raises(ValueError):
        bin_schedule(10, 0.05, 0.25)  # sigma < 1/n
    with pytest.raises(ValueError):
        bin_schedule(10, 0.5, 1.5)


def test_bucket_of_examples():
    assert bucket_of(0.1, 0.1) == 0      # boundary of (eps/4, eps]
    assert bucket_of(0.25, 0.1) == 1
    assert bucket_of(0.02, 0.1) is None
    assert bucket_of(0.0, 0.1) is None
    assert bucket_of(0.41, 0.1) == 2


def test_honest_prover_deterministic_bandit_exact():
    bandit = Bandit.bernoulli([1.0, 0.0, 1.0, 0.0])
    oracle = bandit.oracle(3)
    ctx = ProverContext(oracle=oracle, n=4, sigma=0.5, eps=0.25,
                        k_p=prover_pull_budget(4, 0.25), gen=prng.generator(3, "p"))
    u = Honest().purported_utilities(ctx)
    assert np.array_equal(u, [1.0, 0.0, 1.0, 0.0])
    assert oracle.pull_count == 4 * ctx.k_p


def test_prover_estimate_utilities_operation():
    from smoothverify.bandit_protocol import prover_estimate_utilities

    bandit = Bandit.bernoulli([1.0, 0.0, 1.0])
    oracle = bandit.oracle(2)
    u = prover_estimate_utilities(oracle, 0.25, seed=2)
    assert np.array_equal(u, [1.0, 0.0, 1.0])  # exact on deterministic arms
    assert oracle.pull_count == 3 * prover_pull_budget(3, 0.25)


def test_prover_query_count_exact():
    n, eps = 10, 0.2
    bandit = Bandit.bernoulli(np.full(n, 0.5))
    oracle = bandit.oracle(1)
    payload, pulls = run_prover(oracle, Honest(), n, 0.2, eps, 17, quantize=True)
    assert pulls == n * prover_pull_budget(n, eps)
    assert oracle.pull_count == pulls


def test_prover_estimates_concentrate():
    # n=2, eps=0.2, fair arms: each estimate within eps/16 of 1/2 in at least
    # 5/6 of 300 seeded trials (the completeness analysis promises 1 - eps/6).
    n, eps = 2, 0.2
    k_p = prover_pull_budget(n, eps)
    hits = 0
    for t in range(300):
        oracle = Bandit.bernoulli([0.5, 0.5]).oracle(prng.derive(100, t))
        ctx = ProverContext(oracle=oracle, n=n, sigma=0.5, eps=eps, k_p=k_p,
                            gen=prng.generator(100, t, "g"))
        u = Honest().purported_utilities(ctx)
        if np.all(np.abs(u - 0.5) <= eps / 16):
            hits += 1
    assert hits >= 250  # 5/6 of 300


def test_deterministic_bandit_honest_run_outputs_optimal():
    means = np.array([1.0, 0.0, 1.0, 0.0, 0.0, 1.0])
    bandit = Bandit.bernoulli(means)
    outcome, tr = run_bandit_verification(bandit, Honest(), 0.4, 0.25, seed=5)
    assert not outcome.rejected
    assert is_epsilon_optimal(outcome.strategy, means, 0.4, 0.0)
    assert tr.verdict["rejected"] is False


def test_output_equals_algorithm_applied_to_claim():
    means = prng.generator(6, "m").random(30)
    outcome, tr = run_bandit_verification(Bandit.bernoulli(means), Honest(),
                                          0.2, 0.25, seed=6)
    assert not outcome.rejected
    claimed_value = tr.verdict["claimed_value"]
    # non-reject verdicts carry exactly the closed-form strategy for the claim
    assert outcome.strategy.max() <= 0.2 + 1e-12
    assert abs(outcome.strategy.sum() - 1.0) <= 1e-12
    assert claimed_value <= 1.0


def test_nonreject_strategy_equals_closed_form_on_claims():
    # decode the actual wire message and recompute: the verdict's strategy is
    # exactly the closed form applied to the decoded claims
    from smoothverify import wire

    means = prng.generator(14).random(20)
    outcome, tr = run_bandit_verification(Bandit.bernoulli(means), RandomNoise(0.01),
                                          0.25, 0.25, seed=15, keep_payloads=True)
    assert not outcome.rejected
    framed = next(m.payload for m in tr.messages if m.label == "utilities")
    claims = wire.dequantize(wire.decode_indices(framed[4:], 20, 0.25), 0.25)
    expect = compute_optimal_smooth_strategy(20, 0.25, claims)
    assert np.array_equal(outcome.strategy, expect.strategy)
    assert tr.verdict["claimed_value"] == expect.value


def test_inflate_block_rejected():
    bandit = Bandit.bernoulli(np.zeros(50))
    rejections = 0
    for t in range(20):
        outcome, _ = run_bandit_verification(
            bandit, InflateBlock(np.arange(10), 1.0), 0.1, 0.25, seed=prng.derive(8, t))
        rejections += outcome.rejected
    assert rejections == 20


def test_malformed_messages_rejected():
    bandit = Bandit.bernoulli([0.5, 0.5, 0.5])
    # wrong-length payload
    outcome, _ = run_bandit_verification(bandit, RawMessage(b"\x00\x01"), 0.5, 0.25, seed=1)
    assert outcome.rejected and outcome.reason == "malformed-message"
    # full-precision mode: entries outside [0,1] are representable and rejected
    from smoothverify import wire

    bad = RawMessage(wire.encode_floats([0.5, 1.5, -0.2]))
    outcome, _ = run_bandit_verification(bandit, bad, 0.5, 0.25, seed=1, quantize=False)
    assert outcome.rejected and outcome.reason == "malformed-message"


def test_nonadaptive_plan_independent_of_claims_and_rewards():
    n = 40
    b1 = Bandit.bernoulli(prng.generator(1).random(n))
    b2 = Bandit.bernoulli(prng.generator(2).random(n))
    plans = []
    for bandit, behavior in [(b1, Honest()), (b1, ShiftAll(0.3)),
                             (b1, FixedClaim(np.zeros(n))), (b2, Honest())]:
        _, tr = run_bandit_verification(bandit, behavior, 0.1, 0.25, seed=777)
        plans.append(tr.planned_query_multiset())
    assert len(set(plans)) == 1


def test_accounting_identities_every_run():
    n = 40
    bandit = Bandit.bernoulli(prng.generator(4).random(n))
    for behavior in [Honest(), ShiftAll(0.4), RandomNoise(0.2)]:
        oracle = bandit.oracle(prng.derive(11, "o"))
        _, tr = run_bandit_verification(oracle, behavior, 0.1, 0.25, seed=11)
        sched = bin_schedule(n, 0.1, 0.25)
        assert tr.verifier_pulls_planned == sum(s.a_b * s.m_b for s in sched)
        assert oracle.pull_count == tr.prover_pulls + tr.verifier_pulls_executed
        assert tr.verifier_pulls_executed == int(tr.verifier_arm_tally.sum())


def test_transcripts_bit_identical_across_runs():
    bandit = Bandit.bernoulli(prng.generator(9).random(25))
    _, t1 = run_bandit_verification(bandit, Honest(), 0.2, 0.25, seed=33)
    _, t2 = run_bandit_verification(bandit, Honest(), 0.2, 0.25, seed=33)
    assert t1.dumps() == t2.dumps()
    _, t3 = run_bandit_verification(bandit, Honest(), 0.2, 0.25, seed=34)
    assert t1.dumps() != t3.dumps()


def test_quantization_perturbs_claims_by_at_most_half_step():
    means = prng.generator(10).random(30)
    bandit = Bandit.bernoulli(means)
    out_q, _ = run_bandit_verification(bandit, Honest(), 0.2, 0.25, seed=50)
    out_f, _ = run_bandit_verification(bandit, Honest(), 0.2, 0.25, seed=50, quantize=False)
    assert not out_q.rejected and not out_f.rejected
    v_q = compute_optimal_smooth_strategy(30, 0.2, means).value
    # both modes give a near-optimal strategy against the true means
    assert v_q - float(out_q.strategy @ means) <= 0.25
    assert v_q - float(out_f.strategy @ means) <= 0.25


def test_early_rejection_reports_executed_below_planned():
    bandit = Bandit.bernoulli(np.zeros(60))
    outcome, tr = run_bandit_verification(
        bandit, InflateBlock(np.arange(12), 1.0), 1.0 / 6, 0.25, seed=21)
    assert outcome.rejected
    assert tr.verifier_pulls_executed <= tr.verifier_pulls_planned
    assert tr.verdict["bin"] == 0


def test_prover_budget_override():
    bandit = Bandit.bernoulli([0.5, 0.5, 0.5])
    oracle = bandit.oracle(30)
    _, tr = run_bandit_verification(oracle, Honest(), 0.5, 0.25, seed=30,
                                    k_p_override=500)
    assert tr.prover_pulls == 3 * 500
