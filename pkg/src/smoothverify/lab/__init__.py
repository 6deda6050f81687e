from .coin import CoinStream, solve_coin_bias
from .instances import (
    HardBanditInstance,
    HardGameInstance,
    hard_game_instance,
    hard_learning_instance,
    random_smooth_strategy,
)
from .learning import LearnerBudgetExceeded, measure_learning_success, LEARNERS
from .reduction import ReductionResult, available_engines, decide_coin_bias_via_reduction

__all__ = [
    "CoinStream",
    "solve_coin_bias",
    "HardBanditInstance",
    "HardGameInstance",
    "hard_game_instance",
    "hard_learning_instance",
    "random_smooth_strategy",
    "LearnerBudgetExceeded",
    "measure_learning_success",
    "LEARNERS",
    "ReductionResult",
    "available_engines",
    "decide_coin_bias_via_reduction",
]
