"""The coin bias problem: distinguish Ber(1/2+eps) from Ber(1/2-eps)."""

from __future__ import annotations

import numpy as np

from .. import prng


class CoinStream:
    """Sampler for a coin with hidden bias sign. Draws are counted."""

    def __init__(self, bias_sign: int, eps: float, seed: int):
        if bias_sign not in (-1, 1):
            raise ValueError("bias sign must be -1 or +1")
        if not 0.0 < eps < 0.5:
            raise ValueError("bias magnitude must lie in (0, 1/2)")
        self.bias_sign = bias_sign
        self.eps = float(eps)
        self.p = 0.5 + bias_sign * eps
        self.gen = prng.generator(seed)
        self.samples_used = 0

    def sample(self) -> int:
        self.samples_used += 1
        return int(self.gen.random() < self.p)

    def sample_block(self, count: int) -> np.ndarray:
        self.samples_used += count
        return (self.gen.random(count) < self.p).astype(np.uint8)


def solve_coin_bias(samples) -> int:
    """Threshold baseline: +1 iff the empirical mean is at least 1/2 (ties +1)."""
    samples = np.asarray(samples)
    if samples.size == 0:
        raise ValueError("need at least one sample")
    return 1 if samples.mean() >= 0.5 else -1
