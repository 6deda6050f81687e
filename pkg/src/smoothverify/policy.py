"""Exact optimization over smoothness-capped strategies.

A strategy is sigma-smooth when no action carries more than sigma probability.
The best sigma-smooth response to a utility vector has a closed form: put
sigma on the floor(1/sigma) highest-utility actions, the leftover mass
1 - sigma*floor(1/sigma) on the next one, zero elsewhere. The leftover never
exceeds sigma, so the output is itself sigma-smooth.

``optimal_smooth_value_oracle`` is the independent check: it enumerates every
vertex of the capped simplex and takes the max. It shares no code with the
closed form and is the oracle the closed form is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .model import SMOOTH_TOL, is_smooth, validate_strategy

ORACLE_MAX_N = 10


def cap_count(sigma: float) -> int:
    """floor(1/sigma), robust to float division dust at integer boundaries."""
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    k = int(1.0 / sigma)
    # k*sigma may round past 1, or (k+1)*sigma may still fit; correct by at most one.
    while k > 0 and k * sigma > 1.0 + SMOOTH_TOL:
        k -= 1
    while (k + 1) * sigma <= 1.0 + SMOOTH_TOL:
        k += 1
    return k


def remainder_mass(sigma: float) -> float:
    r = 1.0 - sigma * cap_count(sigma)
    return 0.0 if r < SMOOTH_TOL else r


def _check_params(n: int, sigma: float):
    if n < 1:
        raise ValueError("n must be at least 1")
    if not (1.0 / n - SMOOTH_TOL <= sigma <= 1.0 + SMOOTH_TOL):
        raise ValueError(f"sigma={sigma} outside [1/n, 1] for n={n}")


@dataclass
class SmoothOptResult:
    strategy: np.ndarray
    value: float


def compute_optimal_smooth_strategy(n: int, sigma: float, u) -> SmoothOptResult:
    """Best sigma-smooth strategy for utility vector u, ties broken by lower index.

    Sort is stable descending, so among equal utilities the smaller index
    receives mass first; the returned value is invariant to permutations of
    tied entries even though the strategy need not be.
    """
    _check_params(n, sigma)
    u = np.asarray(u, dtype=float)
    if u.shape != (n,):
        raise ValueError(f"utility vector must have shape ({n},)")
    order = np.argsort(-u, kind="stable")
    k = min(cap_count(sigma), n)
    pi = np.zeros(n)
    pi[order[:k]] = sigma
    r = 1.0 - sigma * k
    if r > SMOOTH_TOL:
        if k >= n:
            raise ValueError("sigma too small: remaining mass does not fit n actions")
        pi[order[k]] = r
    value = float(pi @ u)
    return SmoothOptResult(strategy=pi, value=value)


def strategy_value(pi, u) -> float:
    """Expected utility pi . u."""
    pi = np.asarray(pi, dtype=float)
    u = np.asarray(u, dtype=float)
    if pi.shape != u.shape:
        raise ValueError(f"dimension mismatch: {pi.shape} vs {u.shape}")
    return float(pi @ u)


def smooth_vertices(n: int, sigma: float) -> np.ndarray:
    """All vertices of {0 <= pi_i <= sigma, sum pi = 1}: each picks
    floor(1/sigma) coordinates at sigma plus, when mass remains, one
    remainder coordinate."""
    _check_params(n, sigma)
    k = cap_count(sigma)
    if k > n:
        raise ValueError("no feasible sigma-smooth strategy")
    r = remainder_mass(sigma)
    rows = []
    for chosen in combinations(range(n), k):
        base = np.zeros(n)
        base[list(chosen)] = sigma
        if r == 0.0:
            rows.append(base)
            continue
        for extra in range(n):
            if extra in chosen:
                continue
            v = base.copy()
            v[extra] = r
            rows.append(v)
    return np.array(rows)


def optimal_smooth_value_oracle(n: int, sigma: float, u) -> float:
    """Brute-force optimum by vertex enumeration; refuses n > 10."""
    if n > ORACLE_MAX_N:
        raise ValueError(f"oracle enumeration is limited to n <= {ORACLE_MAX_N}")
    u = np.asarray(u, dtype=float)
    return float(np.max(smooth_vertices(n, sigma) @ u))


def optimality_gap(pi, u, sigma: float) -> float:
    """Best sigma-smooth value for u minus pi . u."""
    pi = np.asarray(pi, dtype=float)
    best = compute_optimal_smooth_strategy(len(pi), sigma, u).value
    return best - strategy_value(pi, u)


def is_epsilon_optimal(pi, u, sigma: float, eps: float) -> bool:
    """True iff pi is a sigma-smooth distribution within eps of the best
    sigma-smooth value for u."""
    pi = validate_strategy(pi, tol=1e-9)
    if not is_smooth(pi, sigma):
        return False
    return optimality_gap(pi, u, sigma) <= eps
