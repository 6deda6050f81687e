"""Verify that a strategy profile is an approximate strong smooth equilibrium.

For each player i, fixing everyone else's strategy turns player i's deviation
problem into an n-arm bandit (arm j = "deviate to action j"), whose oracle is
implemented by routing every pull through one game query. The profile is an
approximate smooth equilibrium exactly when each player's own strategy is
near-optimal for their induced bandit, so the protocol runs the
given-strategy verifier once per player with per-player failure budget
delta = 1/(3k) and accepts iff every player passes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import prng
from .model import Game, is_smooth, wire_strategy
from .strategy_protocol import verify_strategy_optimality
from .transcript import Transcript


@dataclass
class EquilibriumVerdict:
    accepted: bool
    reason: str | None = None
    per_player: list = field(default_factory=list)  # StrategyVerdict | None (skipped)
    query_total: int = 0


def verify_smooth_equilibrium(game_or_oracle, profile, sigma: float, eps: float, eta: float,
                              behavior, seed: int, *, delta_override: float | None = None,
                              full_audit: bool = False,
                              player_seeds=None) -> tuple[EquilibriumVerdict, Transcript]:
    """Accept iff no player has a worthwhile smooth deviation.

    Players run sequentially and a rejection short-circuits the loop unless
    ``full_audit`` forces all k subprotocols (useful for statistics).
    ``player_seeds`` pre-splits the per-player subprotocol seeds (defaults to
    children of ``seed``), supporting parallel per-player execution.
    """
    if isinstance(game_or_oracle, Game):
        oracle = game_or_oracle.oracle(prng.derive(seed, "oracle"))
    else:
        oracle = game_or_oracle
    game = oracle.game
    k, n = game.k, game.n
    delta = delta_override if delta_override is not None else 1.0 / (3.0 * k)

    tr = Transcript(
        protocol="equilibrium-verify",
        params={"k": k, "n": n, "sigma": sigma, "eps": eps, "eta": eta,
                "delta": delta, "seed": seed},
        keep_audits=False,
    )
    queries_before = oracle.query_count

    prof = np.asarray(profile, dtype=float)
    if prof.shape != (k, n):
        verdict = EquilibriumVerdict(accepted=False, reason="profile-arity")
        tr.verdict = {"accepted": False, "reason": verdict.reason}
        return verdict, tr
    rows = [wire_strategy(row) for row in prof]
    if any(r is None for r in rows):
        verdict = EquilibriumVerdict(accepted=False, reason="profile-invalid")
        tr.verdict = {"accepted": False, "reason": verdict.reason}
        return verdict, tr
    prof = np.vstack(rows)
    if not all(is_smooth(r, sigma) for r in prof):
        verdict = EquilibriumVerdict(accepted=False, reason="profile-not-smooth")
        tr.verdict = {"accepted": False, "reason": verdict.reason}
        return verdict, tr

    if player_seeds is None:
        player_seeds = [prng.derive(seed, "player", i) for i in range(k)]
    if len(player_seeds) != k:
        raise ValueError("need one pre-split seed per player")

    per_player = []
    accepted = True
    for i in range(k):
        if not accepted and not full_audit:
            per_player.append(None)
            tr.runs.append({"player": i, "skipped": True})
            continue
        induced = oracle.induced_bandit(i, prof, "seed", player_seeds[i])
        sub_verdict, sub_tr = verify_strategy_optimality(
            induced, behavior, sigma, prof[i], eps, delta, eta, player_seeds[i],
        )
        per_player.append(sub_verdict)
        gap = None
        if sub_verdict.candidate_values and sub_verdict.given_value is not None:
            from .strategy_protocol import lower_median

            gap = lower_median(sub_verdict.candidate_values) - sub_verdict.given_value
        tr.runs.append({"player": i, "accepted": sub_verdict.accepted,
                        "reason": sub_verdict.reason, "gap": gap,
                        "induced_pulls": induced.pull_count})
        tr.prover_pulls += sub_tr.prover_pulls
        tr.verifier_pulls_planned += sub_tr.verifier_pulls_planned
        tr.verifier_pulls_executed += sub_tr.verifier_pulls_executed
        tr.bytes_to_verifier += sub_tr.bytes_to_verifier
        tr.bytes_to_prover += sub_tr.bytes_to_prover
        if not sub_verdict.accepted:
            accepted = False

    total = oracle.query_count - queries_before
    verdict = EquilibriumVerdict(
        accepted=accepted,
        reason=None if accepted else "player-rejected",
        per_player=per_player, query_total=total,
    )
    tr.verdict = {
        "accepted": accepted,
        "per_player": [None if v is None else v.accepted for v in per_player],
        "query_total": total,
    }
    return verdict, tr
