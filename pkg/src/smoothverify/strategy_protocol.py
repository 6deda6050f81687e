"""Verify that a GIVEN strategy is near-optimal among smooth strategies.

The bandit protocol outputs a good strategy of the verifier's choosing; here
the verifier must judge a strategy it was handed. It runs the single-message
protocol k times at accuracy eta/4, collecting candidate strategies (or bot
for rejected runs), then estimates each candidate's value and the given
strategy's value with ell pulls apiece and compares the median candidate
value against the given strategy's value.

    k   = ceil(18 * ln(8/delta))
    ell = ceil(32 * ln(8*(k+1)/delta) / eta^2)

Accept/reject gates, in order: the given strategy must be sigma-smooth and a
valid distribution; fewer than half the runs may reject; and
median(candidate values) - (given value) must not exceed eps + eta/2.

Each inner run gets its own derived seed and oracle substream, so runs are
exchangeable and can execute on parallel workers without changing the
verdict distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import prng
from .bandit_protocol import run_bandit_verification, tol_ceil
from .model import is_smooth, wire_strategy
from .transcript import Transcript


@dataclass
class AmplificationParams:
    k: int
    ell: int
    delta: float
    eta: float


def amplification_params(delta: float, eta: float) -> AmplificationParams:
    if not 0.0 < delta < 1.0 or not 0.0 < eta < 1.0:
        raise ValueError("delta and eta must lie in (0,1)")
    k = tol_ceil(18.0 * math.log(8.0 / delta))
    ell = tol_ceil(32.0 * math.log(8.0 * (k + 1) / delta) / eta**2)
    return AmplificationParams(k=k, ell=ell, delta=delta, eta=eta)


def lower_median(values) -> float:
    """ceil(k/2)-th order statistic ascending; for odd k the usual median.

    The lower median only tightens acceptance relative to interpolation.
    """
    values = sorted(float(v) for v in values)
    k = len(values)
    return values[(k + 1) // 2 - 1]


@dataclass
class StrategyVerdict:
    accepted: bool
    reason: str | None = None
    candidate_values: list = field(default_factory=list)
    given_value: float | None = None
    rejected_runs: int = 0


def _estimate_value(pi: np.ndarray, oracle, gen: np.random.Generator, ell: int) -> float:
    """Mean reward of ell pulls routed through strategy pi."""
    counts = gen.multinomial(ell, pi / pi.sum())
    arms = np.flatnonzero(counts)
    sums = oracle.pull_sums(arms, counts[arms])
    return float(sums.sum() / ell)


def verify_strategy_optimality(bandit_or_oracle, behavior, sigma: float, pi, eps: float,
                               delta: float, eta: float, seed: int, *,
                               keep_runs: bool = False,
                               _run_keys=None) -> tuple[StrategyVerdict, Transcript]:
    """Accept iff pi looks eps-optimal; reject when it is (eps+eta)-far.

    ``_run_keys`` overrides the inner-run stream labels (used by tests to
    check that permuting run order only permutes the candidate values).
    """
    from .model import as_bandit_oracle

    oracle = as_bandit_oracle(bandit_or_oracle, seed)
    n = oracle.n
    params = amplification_params(delta, eta)
    inner_eps = eta / 4.0

    tr = Transcript(
        protocol="strategy-verify",
        params={"n": n, "sigma": sigma, "eps": eps, "delta": delta, "eta": eta,
                "seed": seed, "k": params.k, "ell": params.ell},
        keep_audits=False,
    )

    # Interactive phase: k independent runs of the single-message protocol at
    # accuracy eta/4 (this happens before any validity gate, as specified).
    run_keys = list(_run_keys) if _run_keys is not None else list(range(params.k))
    candidates: list[np.ndarray | None] = []
    for key in run_keys:
        run_seed = prng.derive(seed, "run", key)
        run_oracle = oracle.substream("run", key)
        outcome, run_tr = run_bandit_verification(
            run_oracle, behavior, sigma, inner_eps, run_seed,
            keep_audits=False,
        )
        candidates.append(None if outcome.rejected else outcome.strategy)
        tr.prover_pulls += run_tr.prover_pulls
        tr.verifier_pulls_planned += run_tr.verifier_pulls_planned
        tr.verifier_pulls_executed += run_tr.verifier_pulls_executed
        tr.bytes_to_verifier += run_tr.bytes_to_verifier
        tr.bytes_to_prover += run_tr.bytes_to_prover
        if keep_runs:
            tr.runs.append(run_tr.to_json())
        else:
            tr.runs.append({"rejected": outcome.rejected,
                            "verifier_pulls": run_tr.verifier_pulls_executed})

    rejected_runs = sum(1 for c in candidates if c is None)

    pi_clean = wire_strategy(pi)
    if pi_clean is None or len(pi_clean) != n or not is_smooth(pi_clean, sigma):
        verdict = StrategyVerdict(accepted=False, reason="invalid-strategy",
                                  rejected_runs=rejected_runs)
        tr.verdict = {"accepted": False, "reason": verdict.reason}
        return verdict, tr

    if 2 * rejected_runs >= params.k:
        verdict = StrategyVerdict(accepted=False, reason="too-many-rejections",
                                  rejected_runs=rejected_runs)
        tr.verdict = {"accepted": False, "reason": verdict.reason,
                      "rejected_runs": rejected_runs}
        return verdict, tr

    # Estimation phase: ell pulls per candidate (a constant-0 stream for
    # rejected runs, costing no queries) and ell pulls for the given strategy.
    values = []
    for key, cand in zip(run_keys, candidates):
        if cand is None:
            values.append(0.0)
            continue
        est_gen = prng.generator(seed, "estimate", key)
        est_oracle = oracle.substream("estimate", key)
        values.append(_estimate_value(cand, est_oracle, est_gen, params.ell))
        tr.verifier_pulls_executed += params.ell
        tr.verifier_pulls_planned += params.ell
    given_value = _estimate_value(
        pi_clean, oracle.substream("estimate", "given"),
        prng.generator(seed, "estimate", "given"), params.ell,
    )
    tr.verifier_pulls_executed += params.ell
    tr.verifier_pulls_planned += params.ell

    med = lower_median(values)
    gap = med - given_value
    accepted = gap <= eps + eta / 2.0
    verdict = StrategyVerdict(
        accepted=accepted,
        reason=None if accepted else "value-gap",
        candidate_values=values, given_value=given_value, rejected_runs=rejected_runs,
    )
    tr.verdict = {"accepted": accepted, "median": med, "given_value": given_value,
                  "gap": gap, "rejected_runs": rejected_runs}
    return verdict, tr
