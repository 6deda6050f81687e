"""Prover behaviors: the honest estimator and scripted adversaries.

A behavior receives oracle access plus the public parameters and produces the
purported utility vector the prover sends. Adversaries here are the scripted
families used for soundness testing; they may distort the honest estimate but
never emit entries outside [0,1] (malformed wire messages are injected with
:class:`RawMessage` instead).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ProverContext:
    oracle: object  # prover's oracle view
    n: int
    sigma: float
    eps: float
    k_p: int
    gen: np.random.Generator


class Honest:
    """Pull every arm k_P times and report empirical means."""

    name = "honest"

    def purported_utilities(self, ctx: ProverContext) -> np.ndarray:
        sums = ctx.oracle.pull_sums(np.arange(ctx.n), ctx.k_p)
        return sums / ctx.k_p


class ShiftAll(Honest):
    """Add a constant offset to every honest estimate."""

    name = "shift_all"

    def __init__(self, delta: float):
        self.delta = float(delta)

    def purported_utilities(self, ctx):
        u = super().purported_utilities(ctx)
        return np.clip(u + self.delta, 0.0, 1.0)


class InflateBlock(Honest):
    """Raise the claims on a fixed block of arms."""

    name = "inflate_block"

    def __init__(self, arms, delta: float):
        self.arms = np.asarray(arms, dtype=np.int64)
        self.delta = float(delta)

    def purported_utilities(self, ctx):
        u = super().purported_utilities(ctx)
        u[self.arms] = np.clip(u[self.arms] + self.delta, 0.0, 1.0)
        return u


class DeflateTop(Honest):
    """Lower the claims on the ceil(1/sigma) arms the honest estimate ranks highest."""

    name = "deflate_top"

    def __init__(self, delta: float):
        self.delta = float(delta)

    def purported_utilities(self, ctx):
        u = super().purported_utilities(ctx)
        top = int(np.ceil(1.0 / ctx.sigma))
        order = np.argsort(-u, kind="stable")[:top]
        u[order] = np.clip(u[order] - self.delta, 0.0, 1.0)
        return u


class RandomNoise(Honest):
    """Perturb every honest estimate by independent uniform noise."""

    name = "random_noise"

    def __init__(self, delta: float):
        self.delta = float(delta)

    def purported_utilities(self, ctx):
        u = super().purported_utilities(ctx)
        noise = ctx.gen.uniform(-self.delta, self.delta, size=ctx.n)
        return np.clip(u + noise, 0.0, 1.0)


class FixedClaim:
    """Send a preset utility vector without touching the oracle."""

    name = "fixed_claim"

    def __init__(self, utilities):
        self.utilities = np.asarray(utilities, dtype=float)

    def purported_utilities(self, ctx):
        if len(self.utilities) != ctx.n:
            raise ValueError("fixed claim has wrong length")
        return self.utilities.copy()


class RawMessage:
    """Inject raw payload bytes as the prover message (malformed-wire tests)."""

    name = "raw_message"

    def __init__(self, payload: bytes):
        self.payload = payload

    def purported_utilities(self, ctx):  # pragma: no cover - never decoded
        raise RuntimeError("raw message behaviors bypass utility estimation")


def behavior_from_json(obj: dict):
    name = obj.get("name", "honest")
    params = obj.get("params", {})
    table = {
        "honest": lambda: Honest(),
        "shift_all": lambda: ShiftAll(params["delta"]),
        "inflate_block": lambda: InflateBlock(params["arms"], params["delta"]),
        "deflate_top": lambda: DeflateTop(params["delta"]),
        "random_noise": lambda: RandomNoise(params["delta"]),
        "fixed_claim": lambda: FixedClaim(params["utilities"]),
    }
    if name not in table:
        raise ValueError(f"unknown prover behavior: {name!r}")
    return table[name]()
