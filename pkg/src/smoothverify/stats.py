"""Shared statistical utilities: Hoeffding tail bound and binomial CIs."""

from __future__ import annotations

import math


def hoeffding_bound(m: int, eps: float, lo: float = 0.0, hi: float = 1.0) -> float:
    """P(|mean of m iid draws - mu| > eps) <= 2*exp(-2*m*eps^2/(hi-lo)^2)."""
    if m <= 0 or eps <= 0:
        return 1.0
    return min(1.0, 2.0 * math.exp(-2.0 * m * eps**2 / (hi - lo) ** 2))


def wilson_ci(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% (by default) Wilson score interval for a binomial rate."""
    if trials == 0:
        return (0.0, 1.0)
    p = successes / trials
    denom = 1.0 + z**2 / trials
    center = (p + z**2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z**2 / (4 * trials**2)) / denom
    return (max(0.0, center - half), min(1.0, center + half))
