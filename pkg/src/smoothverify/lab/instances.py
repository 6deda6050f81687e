"""Hard instance families for the learning and game-verification lower bounds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import Bandit, Bernoulli, BlockRewardGame
from ..policy import cap_count


@dataclass
class HardBanditInstance:
    """Deterministic needle-in-haystack bandit: arms in the hidden set pay 1,
    all others pay 0; the optimal smooth value is exactly 1."""

    n: int
    sigma: float
    good_arms: np.ndarray
    bandit: Bandit

    def expected_utilities(self) -> np.ndarray:
        u = np.zeros(self.n)
        u[self.good_arms] = 1.0
        return u


def hard_learning_instance(n: int, sigma: float, gen: np.random.Generator) -> HardBanditInstance:
    """Uniformly hidden set of 1/sigma unit-reward arms.

    Constructible whenever 1/sigma is an integer at most n; the learning
    lower bound's regime additionally wants sigma >= 5/n.
    """
    inv = cap_count(sigma)
    if abs(inv * sigma - 1.0) > 1e-9:
        raise ValueError("1/sigma must be an integer")
    if inv > n:
        raise ValueError(f"need 1/sigma <= n; got sigma={sigma}, n={n}")
    good = np.sort(gen.choice(n, size=inv, replace=False))
    means = np.zeros(n)
    means[good] = 1.0
    return HardBanditInstance(n=n, sigma=sigma, good_arms=good,
                              bandit=Bandit([Bernoulli(p) for p in means]))


@dataclass
class HardGameInstance:
    """Game where one hidden player can earn 1 by keeping every player inside
    their hidden action blocks; everyone else always earns 0."""

    k: int
    n: int
    sigma: float
    blocks: list
    star: int
    game: BlockRewardGame

    def equilibrium_profile(self) -> np.ndarray:
        """Uniform-on-block profile: gives the designated player utility 1."""
        prof = np.zeros((self.k, self.n))
        for i, b in enumerate(self.blocks):
            prof[i, b] = 1.0 / len(b)
        return prof

    def deviating_profile(self, gen: np.random.Generator) -> np.ndarray:
        """Designated player plays uniform on a block disjoint from their own:
        their realized utility is 0, but deviating back is worth 1."""
        prof = self.equilibrium_profile()
        inv = len(self.blocks[self.star])
        outside = np.setdiff1d(np.arange(self.n), self.blocks[self.star])
        if len(outside) < inv:
            raise ValueError("no disjoint block available")
        r = gen.choice(outside, size=inv, replace=False)
        prof[self.star] = 0.0
        prof[self.star, r] = 1.0 / inv
        return prof


def hard_game_instance(k: int, n: int, sigma: float, gen: np.random.Generator,
                       star: int | None = None) -> HardGameInstance:
    inv = cap_count(sigma)
    if abs(inv * sigma - 1.0) > 1e-9:
        raise ValueError("1/sigma must be an integer")
    if star is None:
        star = int(gen.integers(0, k))
    blocks = [np.sort(gen.choice(n, size=inv, replace=False)) for _ in range(k)]
    return HardGameInstance(k=k, n=n, sigma=sigma, blocks=blocks, star=star,
                            game=BlockRewardGame(k, n, blocks, star))


def random_smooth_strategy(n: int, sigma: float, gen: np.random.Generator) -> np.ndarray:
    """A random distribution with every coordinate capped at sigma.

    Draws exponential weights, then repeatedly pins coordinates that exceed
    the cap and renormalizes the rest; this terminates because pinned mass is
    feasible (n*sigma >= 1).
    """
    if n * sigma < 1.0 - 1e-12:
        raise ValueError("no sigma-smooth strategy exists")
    w = gen.exponential(size=n)
    pi = w / w.sum()
    capped = np.zeros(n, dtype=bool)
    for _ in range(n):
        over = pi > sigma
        if not over.any():
            break
        capped |= over
        pi[capped] = sigma
        free = ~capped
        spare = 1.0 - sigma * capped.sum()
        if spare <= 0 or not free.any():
            pi[free] = 0.0
            # distribute any leftover among capped coordinates is impossible;
            # spare<0 cannot happen since n*sigma >= 1
            break
        total = pi[free].sum()
        if total <= 0:
            pi[free] = spare / free.sum()
        else:
            pi[free] *= spare / total
    pi = np.clip(pi, 0.0, sigma)
    pi /= pi.sum()
    return pi
