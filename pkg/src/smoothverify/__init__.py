"""Interactive verification of near-optimal smooth strategies.

Protocols for convincing a resource-limited verifier that bandit and game
strategies are close to the best smoothness-capped strategy, with exact query
and byte accounting, a commitment-based low-communication variant, and
empirical laboratories for the matching query lower bounds.
"""

from .bandit_protocol import (
    BinSpec,
    VerifierOutcome,
    bin_schedule,
    bucket_of,
    prover_pull_budget,
    run_bandit_verification,
)
from .game_protocol import EquilibriumVerdict, verify_smooth_equilibrium
from .model import (
    Bandit,
    BanditOracle,
    Bernoulli,
    BlockRewardGame,
    ConstantGame,
    Discrete,
    ExplicitGame,
    Game,
    GameOracle,
    bandit_from_json,
    game_from_json,
)
from .policy import (
    SmoothOptResult,
    compute_optimal_smooth_strategy,
    is_epsilon_optimal,
    optimal_smooth_value_oracle,
    strategy_value,
)
from .lowcomm import LowCommOutcome, LowCommProver, run_lowcomm_verification
from .strategy_protocol import (
    AmplificationParams,
    StrategyVerdict,
    amplification_params,
    verify_strategy_optimality,
)

__version__ = "0.1.0"
