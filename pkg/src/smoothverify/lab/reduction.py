"""Coin-bias decision through two interleaved verification simulations.

The query lower bound works by turning a verifier into a coin tester: run two
copies of the bandit verification protocol, one per candidate bias sign. Both
simulated provers see a bandit whose arms are all Ber(1/2-eps). Each
verifier's oracle, however, answers a randomly planted block of 1/sigma arms
from the coin stream (the "-1" copy flips each coin it consumes), so exactly
one copy sees a block of genuinely better arms. The two simulations alternate
on every coin consumption, keeping their sample counts within one of each
other at all times.

The first copy to terminate decides: if its verifier rejected, or its output
strategy puts at least half its mass on that copy's planted block, answer
that copy's sign, otherwise the opposite sign. Exhausting the coin supply
yields 0 (no answer).

The simulated parties are this package's own protocol implementation: the
same audit schedule, quantization, thresholds and final strategy computation
as ``run_bandit_verification``. Note the scope: the query lower bound
quantifies over *every* possible verifier, while this laboratory demonstrates
the reduction mechanism against one concrete verifier (ours); a high
correct-decision rate here illustrates the argument, it does not prove the
universal statement. Arm selections and the non-planted reward
draws are pre-generated (they never touch the coin stream), which reduces the
simulation to the alternating per-coin state machine implemented twice:
``_interleave_core`` (compiled, preferred) and ``_interleave_py`` (fallback).
Both return bit-identical results; ``engine="auto"`` picks the compiled one
when the extension built.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import prng, wire
from ..bandit_protocol import bin_schedule, prover_pull_budget
from ..policy import cap_count, compute_optimal_smooth_strategy
from . import _interleave_py
from .coin import CoinStream

try:
    from . import _interleave_core
except ImportError:  # extension not built; pure-Python engine only
    _interleave_core = None

_REASONS = {0: "exhausted", 1: "reject", 2: "complete"}


def available_engines() -> list[str]:
    return (["compiled"] if _interleave_core is not None else []) + ["python"]


def default_engine() -> str:
    return "compiled" if _interleave_core is not None else "python"


@dataclass
class ReductionResult:
    output: int  # +1, -1, or 0 for "no answer" (coin supply exhausted)
    terminated_side: int  # which simulation ended the run (0 if none)
    reason: str
    coins_consumed: int
    used_plus: int
    used_minus: int
    audits_done_plus: int
    audits_done_minus: int
    planted_plus: np.ndarray = None
    planted_minus: np.ndarray = None
    engine: str = ""

    @property
    def interleaving_ok(self) -> bool:
        return abs(self.used_plus - self.used_minus) <= 1


def _side_inputs(n: int, sigma: float, eps: float, sim_seed: int, planted_mask: np.ndarray):
    """Flattened audit schedule plus pre-generated local data for one side."""
    schedule = bin_schedule(n, sigma, eps)
    k_p = prover_pull_budget(n, eps)
    q = 0.5 - eps  # every arm of the simulated prover's bandit

    prover_gen = prng.generator(sim_seed, "prover-oracle")
    u_raw = prover_gen.binomial(k_p, q, size=n) / k_p
    claimed_by_arm = wire.snap(u_raw, eps)

    plan_gen = prng.generator(sim_seed, "verifier")
    local_gen = prng.generator(sim_seed, "verifier-oracle")
    arms, pulls, thresholds, local_sums = [], [], [], []
    for s in schedule:
        a = plan_gen.integers(0, n, size=s.a_b)
        arms.append(a)
        pulls.append(np.full(s.a_b, s.m_b, dtype=np.int64))
        thresholds.append(np.full(s.a_b, s.eps_b / 8.0))
        # Draws for every audit slot; slots on planted arms are ignored by the
        # engine (those pulls come from the coin stream instead).
        local_sums.append(local_gen.binomial(s.m_b, q, size=s.a_b).astype(float))
    arm = np.concatenate(arms)
    result = compute_optimal_smooth_strategy(n, sigma, claimed_by_arm)
    heavy = float(result.strategy[planted_mask].sum()) >= 0.5
    return {
        "arm": arm.astype(np.int64),
        "m": np.concatenate(pulls),
        "thr": np.concatenate(thresholds),
        "claimed": claimed_by_arm[arm],
        "planted": planted_mask[arm].astype(np.uint8),
        "local_sum": np.concatenate(local_sums),
        "heavy_mass": float(result.strategy[planted_mask].sum()),
        "complete_out": None,  # filled by caller (needs the side sign)
        "heavy": heavy,
    }


def decide_coin_bias_via_reduction(n: int, sigma: float, eps: float, coin: CoinStream,
                                   max_samples: int, seed: int, *,
                                   engine: str = "auto") -> ReductionResult:
    """Decide the coin's bias sign using this package's verifier as the tester.

    Requires sigma >= 24/n with 1/sigma integral (the regime where the
    planted block argument applies).
    """
    if sigma < 24.0 / n - 1e-12:
        raise ValueError(f"need sigma >= 24/n; got sigma={sigma}, n={n}")
    inv = cap_count(sigma)
    if abs(inv * sigma - 1.0) > 1e-9:
        raise ValueError("1/sigma must be an integer")
    if engine == "auto":
        engine = default_engine()
    if engine == "compiled" and _interleave_core is None:
        raise RuntimeError("compiled interleave engine is not available")
    runner = _interleave_core.interleave_run if engine == "compiled" \
        else _interleave_py.interleave_run

    sides = {}
    masks = {}
    for sign, tag in ((1, "plus"), (-1, "minus")):
        plant_gen = prng.generator(seed, "plant", tag)
        block = plant_gen.choice(n, size=inv, replace=False)
        mask = np.zeros(n, dtype=bool)
        mask[block] = True
        masks[sign] = block
        side = _side_inputs(n, sigma, eps, prng.derive(seed, "sim", tag), mask)
        side["complete_out"] = sign if side["heavy"] else -sign
        sides[sign] = side

    coins = coin.sample_block(max_samples)
    s0, s1 = sides[1], sides[-1]
    out = runner(
        s0["arm"], s0["m"], s0["thr"], s0["claimed"], s0["planted"], s0["local_sum"],
        s0["complete_out"],
        s1["arm"], s1["m"], s1["thr"], s1["claimed"], s1["planted"], s1["local_sum"],
        s1["complete_out"],
        coins,
    )
    output, term_side, reason, consumed, used0, used1, done0, done1 = out
    return ReductionResult(
        output=int(output), terminated_side=int(term_side), reason=_REASONS[int(reason)],
        coins_consumed=int(consumed), used_plus=int(used0), used_minus=int(used1),
        audits_done_plus=int(done0), audits_done_minus=int(done1),
        planted_plus=masks[1], planted_minus=masks[-1], engine=engine,
    )
