#!/usr/bin/env python3
"""Benchmark the interleaved-simulation engines (compiled kernel vs pure Python).

Runs the coin-bias reduction at the lower-bound lab's acceptance scale with
both engines, checks they return identical results trial by trial, and prints
wall times. Usage:

    python benchmarks/bench_interleave.py [--trials N]
"""

import argparse
import time

from smoothverify import prng
from smoothverify.lab import CoinStream, available_engines, decide_coin_bias_via_reduction

N, SIGMA, EPS, MAX_SAMPLES = 480, 0.05, 0.2, 400_000


def run(engine: str, trials: int, seed: int):
    results = []
    t0 = time.perf_counter()
    for t in range(trials):
        s = prng.derive(seed, "bench", t)
        sign = 1 if t % 2 == 0 else -1
        coin = CoinStream(sign, EPS, prng.derive(s, "coin"))
        r = decide_coin_bias_via_reduction(N, SIGMA, EPS, coin, MAX_SAMPLES, s,
                                           engine=engine)
        results.append((r.output, r.reason, r.coins_consumed, r.used_plus, r.used_minus))
    return time.perf_counter() - t0, results


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    engines = available_engines()
    print(f"engines available: {engines}")
    print(f"config: n={N} sigma={SIGMA} eps={EPS} max_samples={MAX_SAMPLES} "
          f"trials={args.trials}")
    timings, outputs = {}, {}
    for eng in engines:
        elapsed, results = run(eng, args.trials, args.seed)
        timings[eng] = elapsed
        outputs[eng] = results
        per = 1000.0 * elapsed / args.trials
        print(f"{eng:>9}: {elapsed:7.2f}s total, {per:7.2f} ms/trial")
    if len(engines) == 2:
        same = outputs[engines[0]] == outputs[engines[1]]
        speedup = timings["python"] / timings["compiled"]
        print(f"bit-identical results: {same}; compiled speedup: {speedup:.1f}x")
        if not same:
            raise SystemExit("ENGINE MISMATCH")


if __name__ == "__main__":
    main()
