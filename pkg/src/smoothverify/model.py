"""Ground-truth reward models and the instrumented oracles protocols query.

Two kinds of objects live here and the distinction matters:

* Generator-side models (:class:`Bandit`, :class:`Game`) know the true
  reward distributions. ``Bandit.expected_utilities`` and the exact induced
  distributions are generator-side facilities: protocol code must never read
  them; only oracles, tests and acceptance checks may.
* Oracles (:class:`BanditOracle`, :class:`GameOracle`) are the only surface
  protocols see. Every sample served is counted, one unit per conceptual
  pull/query, so query-complexity claims are checked against counters rather
  than formulas.

Batched pulls of one arm are served from the exact distribution of the sum
of ``m`` independent draws (binomial for Bernoulli arms, multinomial for
finite-support arms), which is distributionally identical to ``m`` single
pulls and is what makes million-pull audit schedules affordable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import prng

STRATEGY_SUM_TOL = 1e-12
# Strategies arriving over the wire as decimals get a looser gate, and tiny
# negative dust is clamped before checking.
WIRE_SUM_TOL = 1e-9
WIRE_NEG_TOL = 1e-12
SMOOTH_TOL = 1e-12


# ---------------------------------------------------------------------------
# Arm reward distributions (supported families: Bernoulli, finite discrete)
# ---------------------------------------------------------------------------


class Bernoulli:
    """Bernoulli(p) rewards on {0, 1}."""

    __slots__ = ("p",)

    def __init__(self, p: float):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"Bernoulli parameter must be in [0,1], got {p}")
        self.p = float(p)

    def mean(self) -> float:
        return self.p

    @property
    def degenerate(self) -> bool:
        return self.p in (0.0, 1.0)

    def sample(self, gen: np.random.Generator) -> float:
        if self.degenerate:
            return self.p
        return 1.0 if gen.random() < self.p else 0.0

    def sample_sum(self, gen: np.random.Generator, m: int) -> float:
        """Sum of m independent draws."""
        if self.degenerate:
            return self.p * m
        return float(gen.binomial(m, self.p))

    def __repr__(self):
        return f"Bernoulli({self.p})"


class Discrete:
    """Finite discrete distribution on grid points in [0, 1]."""

    __slots__ = ("values", "probs", "_cum")

    def __init__(self, values, probs):
        values = np.asarray(values, dtype=float)
        probs = np.asarray(probs, dtype=float)
        if values.shape != probs.shape or values.ndim != 1 or len(values) == 0:
            raise ValueError("values and probs must be equal-length 1-d sequences")
        if values.min() < 0.0 or values.max() > 1.0:
            raise ValueError("support must lie in [0,1]")
        if probs.min() < 0.0 or abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError("probs must be nonnegative and sum to 1")
        self.values = values
        self.probs = probs / probs.sum()
        self._cum = np.cumsum(self.probs)

    def mean(self) -> float:
        return float(self.values @ self.probs)

    @property
    def degenerate(self) -> bool:
        return len(self.values) == 1

    def sample(self, gen: np.random.Generator) -> float:
        if self.degenerate:
            return float(self.values[0])
        i = int(np.searchsorted(self._cum, gen.random(), side="right"))
        return float(self.values[min(i, len(self.values) - 1)])

    def sample_sum(self, gen: np.random.Generator, m: int) -> float:
        if self.degenerate:
            return float(self.values[0]) * m
        counts = gen.multinomial(m, self.probs)
        return float(counts @ self.values)

    def __repr__(self):
        return f"Discrete({self.values.tolist()}, {self.probs.tolist()})"


def point_mass(value: float) -> Discrete:
    return Discrete([value], [1.0])


# ---------------------------------------------------------------------------
# Bandits
# ---------------------------------------------------------------------------


@dataclass
class Bandit:
    """An n-arm bandit: one reward distribution on [0,1] per arm."""

    arms: list

    def __post_init__(self):
        if len(self.arms) < 1:
            raise ValueError("a bandit needs at least one arm")

    @property
    def n(self) -> int:
        return len(self.arms)

    def expected_utilities(self) -> np.ndarray:
        """Exact per-arm means. Generator-side only: never consumes queries,
        and protocol code must not call it."""
        return np.array([a.mean() for a in self.arms], dtype=float)

    @classmethod
    def bernoulli(cls, means) -> "Bandit":
        return cls([Bernoulli(p) for p in np.asarray(means, dtype=float)])

    def oracle(self, seed: int) -> "BanditOracle":
        return BanditOracle(self, seed)


class _Counters:
    """Mutable tally shared by an oracle and all its substream views."""

    __slots__ = ("pulls", "per_arm")

    def __init__(self, n: int):
        self.pulls = 0
        self.per_arm = np.zeros(n, dtype=np.int64)


class _PullingOracle:
    """Common pull/pull_sums machinery over a vector of arm distributions."""

    def __init__(self, n: int, seed: int, counters: _Counters | None):
        self.n = n
        self.seed = int(seed)
        self.gen = prng.generator(seed)
        self._counters = counters if counters is not None else _Counters(n)

    # -- accounting ---------------------------------------------------------

    @property
    def pull_count(self) -> int:
        return self._counters.pulls

    @property
    def per_arm_pulls(self) -> np.ndarray:
        return self._counters.per_arm

    def _account(self, arms, counts):
        np.add.at(self._counters.per_arm, arms, counts)
        self._counters.pulls += int(np.sum(np.broadcast_to(counts, np.shape(arms))))

    # -- sampling -----------------------------------------------------------

    def _distribution(self, i: int):
        raise NotImplementedError

    def _bernoulli_means(self) -> np.ndarray | None:
        """Per-arm Bernoulli parameters when every arm is Bernoulli, else None."""
        return None

    def pull(self, i: int) -> float:
        """One reward draw from arm i (0-based). Counts as one query."""
        if not 0 <= i < self.n:
            raise IndexError(f"arm index {i} out of range [0, {self.n})")
        self._account(i, 1)
        return float(self._distribution(i).sample(self.gen))

    def pull_sum(self, i: int, m: int) -> float:
        """Sum of m draws from arm i. Counts as m queries."""
        if not 0 <= i < self.n:
            raise IndexError(f"arm index {i} out of range [0, {self.n})")
        if m < 0:
            raise ValueError("pull count must be nonnegative")
        self._account(i, m)
        return self._distribution(i).sample_sum(self.gen, m)

    def pull_sums(self, arms, counts) -> np.ndarray:
        """Vector of per-entry sums: entry t is the sum of counts[t] draws of
        arm arms[t]. Arms may repeat. Counts as sum(counts) queries."""
        arms = np.asarray(arms, dtype=np.int64)
        counts = np.broadcast_to(np.asarray(counts, dtype=np.int64), arms.shape)
        if arms.size and (arms.min() < 0 or arms.max() >= self.n):
            raise IndexError("arm index out of range")
        self._account(arms, counts)
        p = self._bernoulli_means()
        if p is not None:
            pa = p[arms]
            sums = pa * counts  # exact for degenerate arms, placeholder otherwise
            live = (pa > 0.0) & (pa < 1.0) & (counts > 0)
            if live.any():
                sums = sums.astype(float)
                sums[live] = self.gen.binomial(counts[live], pa[live])
            return np.asarray(sums, dtype=float)
        return np.array(
            [self._distribution(int(a)).sample_sum(self.gen, int(m)) for a, m in zip(arms, counts)]
        )

    def substream(self, *keys) -> "_PullingOracle":
        """A view with an independent child sample stream but shared tallies."""
        raise NotImplementedError


class BanditOracle(_PullingOracle):
    """Stateful sampler for a bandit; the unit of query complexity."""

    def __init__(self, bandit: Bandit, seed: int, _counters: _Counters | None = None):
        super().__init__(bandit.n, seed, _counters)
        self.bandit = bandit
        means = [a.p if isinstance(a, Bernoulli) else None for a in bandit.arms]
        self._p = None if any(m is None for m in means) else np.array(means, dtype=float)

    def _distribution(self, i: int):
        return self.bandit.arms[i]

    def _bernoulli_means(self):
        return self._p

    def substream(self, *keys) -> "BanditOracle":
        return BanditOracle(self.bandit, prng.derive(self.seed, *keys), _counters=self._counters)


def as_bandit_oracle(bandit_or_oracle, seed: int):
    """Protocols accept either a Bandit (wrapped here) or an existing oracle view."""
    if isinstance(bandit_or_oracle, Bandit):
        return bandit_or_oracle.oracle(prng.derive(seed, "oracle"))
    return bandit_or_oracle


# ---------------------------------------------------------------------------
# Strategies
# ---------------------------------------------------------------------------


def validate_strategy(pi, *, tol: float = STRATEGY_SUM_TOL) -> np.ndarray:
    """Check nonnegativity and normalization; returns the vector as float array."""
    pi = np.asarray(pi, dtype=float)
    if pi.ndim != 1 or len(pi) == 0:
        raise ValueError("strategy must be a nonempty 1-d vector")
    if pi.min() < 0.0:
        raise ValueError("strategy has negative entries")
    if abs(pi.sum() - 1.0) > tol:
        raise ValueError(f"strategy sums to {pi.sum()!r}, not 1 within {tol}")
    return pi


def is_smooth(pi, sigma: float, *, tol: float = SMOOTH_TOL) -> bool:
    return bool(np.max(np.asarray(pi, dtype=float)) <= sigma + tol)


def wire_strategy(pi) -> np.ndarray | None:
    """Clean a strategy that arrived as decimals; None when invalid.

    Entries below -1e-12 or a sum off by more than 1e-9 are invalid; tiny
    negative dust is clamped to 0.
    """
    pi = np.asarray(pi, dtype=float)
    if pi.ndim != 1 or len(pi) == 0 or not np.all(np.isfinite(pi)):
        return None
    if pi.min() < -WIRE_NEG_TOL or abs(pi.sum() - 1.0) > WIRE_SUM_TOL:
        return None
    return np.clip(pi, 0.0, None)


def validate_profile(profiles, n: int, k: int) -> np.ndarray:
    prof = np.asarray(profiles, dtype=float)
    if prof.shape != (k, n):
        raise ValueError(f"profile must have shape ({k}, {n}), got {prof.shape}")
    for row in prof:
        validate_strategy(row, tol=WIRE_SUM_TOL)
    return prof


# ---------------------------------------------------------------------------
# Games
# ---------------------------------------------------------------------------


class Game:
    """k-player, n-action normal-form game with utilities in [0,1].

    Subclasses supply ``utilities(a)`` (realized utility vector for an action
    tuple) and may override ``induced_arm_distribution`` with a closed form.
    """

    k: int
    n: int

    def utilities(self, a) -> np.ndarray:
        raise NotImplementedError

    def induced_arm_distribution(self, i: int, j: int, profile: np.ndarray):
        """Exact law of player i's utility when i plays j and others follow
        the profile. Generator-side: used by oracles to serve batched pulls."""
        raise NotImplementedError

    def oracle(self, seed: int) -> "GameOracle":
        return GameOracle(self, seed)


class ExplicitGame(Game):
    """Game given by explicit utility tensors, one of shape (n,)*k per player."""

    def __init__(self, tensors):
        tensors = [np.asarray(t, dtype=float) for t in tensors]
        self.k = len(tensors)
        if self.k < 1:
            raise ValueError("need at least one player")
        shape = tensors[0].shape
        self.n = shape[0]
        for t in tensors:
            if t.shape != (self.n,) * self.k:
                raise ValueError("every tensor must have shape (n,)*k")
            if t.min() < 0.0 or t.max() > 1.0:
                raise ValueError("utilities must lie in [0,1]")
        self.tensors = tensors

    def utilities(self, a) -> np.ndarray:
        a = tuple(int(x) for x in a)
        return np.array([t[a] for t in self.tensors], dtype=float)

    def exact_expected_utility(self, i: int, profile: np.ndarray) -> float:
        """Enumerated expectation of player i's utility under the profile."""
        w = self.tensors[i]
        for axis in range(self.k):
            w = np.tensordot(profile[axis], w, axes=([0], [0]))
        return float(w)

    def induced_arm_distribution(self, i: int, j: int, profile: np.ndarray):
        # Weight tensor over the other players' actions, then group the
        # utility slice u_i(..., a_i=j, ...) by value.
        others = [l for l in range(self.k) if l != i]
        if not others:
            return point_mass(float(self.tensors[i][(j,)]))
        sl = [slice(None)] * self.k
        sl[i] = j
        values = self.tensors[i][tuple(sl)]
        w = np.ones(())
        for l in others:
            w = np.multiply.outer(w, profile[l])
        vals, inverse = np.unique(values.ravel(), return_inverse=True)
        probs = np.bincount(inverse, weights=w.ravel(), minlength=len(vals))
        keep = probs > 0
        return Discrete(vals[keep], probs[keep])


class ConstantGame(Game):
    """Every player always receives the same constant utility."""

    def __init__(self, k: int, n: int, c: float = 0.0):
        if not 0.0 <= c <= 1.0:
            raise ValueError("constant utility must be in [0,1]")
        self.k, self.n, self.c = k, n, float(c)

    def utilities(self, a) -> np.ndarray:
        return np.full(self.k, self.c)

    def induced_arm_distribution(self, i, j, profile):
        return point_mass(self.c)


class BlockRewardGame(Game):
    """One designated player earns 1 exactly when every player's action lands
    in that player's designated block; everyone else always earns 0."""

    def __init__(self, k: int, n: int, blocks, star: int):
        self.k, self.n = k, n
        if not 0 <= star < k:
            raise ValueError("designated player index out of range")
        if len(blocks) != k:
            raise ValueError("need one action block per player")
        self.star = star
        self.blocks = [np.asarray(sorted(b), dtype=np.int64) for b in blocks]
        self.masks = []
        for b in self.blocks:
            m = np.zeros(n, dtype=bool)
            m[b] = True
            self.masks.append(m)

    def utilities(self, a) -> np.ndarray:
        out = np.zeros(self.k)
        if all(self.masks[l][int(a[l])] for l in range(self.k)):
            out[self.star] = 1.0
        return out

    def induced_arm_distribution(self, i, j, profile):
        if i != self.star or not self.masks[self.star][j]:
            return point_mass(0.0)
        p = 1.0
        for l in range(self.k):
            if l != i:
                p *= float(profile[l][self.masks[l]].sum())
        return Bernoulli(min(1.0, p))


def _sample_action(strategy: np.ndarray, gen: np.random.Generator) -> int:
    nz = np.flatnonzero(strategy)
    if len(nz) == 1:
        return int(nz[0])  # pure strategies consume no randomness
    cum = np.cumsum(strategy)
    i = int(np.searchsorted(cum, gen.random() * cum[-1], side="right"))
    return min(i, len(strategy) - 1)


class GameOracle:
    """Sampler for a game: one query draws one action profile and returns all
    players' realized utilities."""

    def __init__(self, game: Game, seed: int, _count_holder: list | None = None):
        self.game = game
        self.seed = int(seed)
        self.gen = prng.generator(seed)
        self._count = _count_holder if _count_holder is not None else [0]

    @property
    def query_count(self) -> int:
        return self._count[0]

    def query(self, profile) -> np.ndarray:
        profile = validate_profile(profile, self.game.n, self.game.k)
        a = [_sample_action(profile[l], self.gen) for l in range(self.game.k)]
        self._count[0] += 1
        return self.game.utilities(a)

    def substream(self, *keys) -> "GameOracle":
        return GameOracle(self.game, prng.derive(self.seed, *keys), _count_holder=self._count)

    def induced_bandit(self, i: int, profile, *keys) -> "InducedBanditOracle":
        """Bandit-oracle view of player i's deviation problem: pulling arm j
        queries the game on the profile where i plays j deterministically.

        The view's sample stream is keyed by ``keys`` alone (not by i), so a
        caller can give relabeled players identical streams."""
        profile = validate_profile(profile, self.game.n, self.game.k)
        if not 0 <= i < self.game.k:
            raise IndexError("player index out of range")
        return InducedBanditOracle(self, i, profile, prng.derive(self.seed, "induced", *keys))


class InducedBanditOracle(_PullingOracle):
    """Player i's n-arm bandit; every pull maps to exactly one game query."""

    def __init__(self, game_oracle: GameOracle, i: int, profile: np.ndarray, seed: int,
                 _counters: _Counters | None = None, _dists: list | None = None):
        super().__init__(game_oracle.game.n, seed, _counters)
        self.game_oracle = game_oracle
        self.player = i
        self.profile = profile
        # Induced distributions are fixed for the run (the profile is fixed),
        # so they are computed lazily once and shared across substreams.
        self._dists = _dists if _dists is not None else [None] * self.n
        self._p_cache = None

    def _distribution(self, j: int):
        d = self._dists[j]
        if d is None:
            d = self.game_oracle.game.induced_arm_distribution(self.player, j, self.profile)
            self._dists[j] = d
        return d

    def _bernoulli_means(self):
        if self._p_cache is None:
            means = []
            for j in range(self.n):
                d = self._distribution(j)
                if isinstance(d, Bernoulli):
                    means.append(d.p)
                elif isinstance(d, Discrete) and d.degenerate and float(d.values[0]) in (0.0, 1.0):
                    means.append(float(d.values[0]))
                else:
                    self._p_cache = (None,)
                    return None
            self._p_cache = (np.array(means, dtype=float),)
        return self._p_cache[0]

    def _account(self, arms, counts):
        super()._account(arms, counts)
        self.game_oracle._count[0] += int(np.sum(np.broadcast_to(counts, np.shape(arms))))

    def pull(self, i: int) -> float:
        """One game query on the profile where the player deviates to arm i."""
        if not 0 <= i < self.n:
            raise IndexError(f"arm index {i} out of range [0, {self.n})")
        self._account(i, 1)
        game = self.game_oracle.game
        a = [
            i if l == self.player else _sample_action(self.profile[l], self.gen)
            for l in range(game.k)
        ]
        return float(game.utilities(a)[self.player])

    def substream(self, *keys) -> "InducedBanditOracle":
        return InducedBanditOracle(
            self.game_oracle, self.player, self.profile,
            prng.derive(self.seed, *keys), _counters=self._counters, _dists=self._dists,
        )


# ---------------------------------------------------------------------------
# JSON specifications (documented in docs/schemas.md)
# ---------------------------------------------------------------------------


def arm_from_json(obj: dict):
    kind = obj.get("kind")
    if kind == "bernoulli":
        return Bernoulli(obj["p"])
    if kind == "discrete":
        return Discrete(obj["values"], obj["probs"])
    raise ValueError(f"unknown arm kind: {kind!r}")


def bandit_from_json(obj: dict) -> Bandit:
    return Bandit([arm_from_json(a) for a in obj["arms"]])


def game_from_json(obj: dict) -> Game:
    if "tensor" in obj:
        return ExplicitGame([np.asarray(t, dtype=float) for t in obj["tensor"]])
    gen = obj.get("generator")
    params = obj.get("params", {})
    if gen == "constant":
        return ConstantGame(params["k"], params["n"], params.get("c", 0.0))
    if gen == "block_reward":
        return BlockRewardGame(params["k"], params["n"], params["blocks"], params["star"])
    raise ValueError(f"unknown game generator: {gen!r}")
