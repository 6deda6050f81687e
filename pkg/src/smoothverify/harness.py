"""Seeded batch execution of protocol and lab experiments, with reports.

An experiment config names a protocol (or lab), the instance generator, the
prover behavior and the success predicate. ``run_experiment`` derives one
seed per trial from the master seed, dispatches trials (optionally on a
process pool), and aggregates order-independently, so reports are
byte-identical across worker counts. Query and byte counts in reports come
from oracle counters and transcripts, never from formulas.

Config files are JSON validated against a strict schema (unknown keys are
errors); see docs/schemas.md for the schema and the CSV column contracts.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import prng
from .behaviors import behavior_from_json
from .bandit_protocol import run_bandit_verification
from .game_protocol import verify_smooth_equilibrium
from .lab.coin import CoinStream
from .lab.instances import hard_game_instance, hard_learning_instance, random_smooth_strategy
from .lab.learning import LEARNERS, measure_learning_success
from .lab.reduction import decide_coin_bias_via_reduction
from .lowcomm import LowCommProver, run_lowcomm_verification
from .model import Bandit, bandit_from_json, game_from_json
from .policy import compute_optimal_smooth_strategy, is_epsilon_optimal
from .stats import wilson_ci
from .strategy_protocol import verify_strategy_optimality

EXPERIMENTS = ("verify-bandit", "verify-strategy", "verify-game", "lowcomm",
               "lb-coin", "lb-learning")

TRIAL_COLUMNS = [
    "experiment", "trial", "seed", "n", "k", "sigma", "epsilon", "eta", "delta",
    "lambda_bits", "budget", "verdict", "success", "prover_pulls",
    "verifier_pulls_planned", "verifier_pulls_executed", "oracle_queries",
    "bytes_to_verifier", "bytes_to_prover", "value", "detail",
]

SUMMARY_COLUMNS = ["experiment", "n", "sigma", "epsilon", "budget", "trials",
                   "success_rate", "mean_queries", "ci95"]

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["experiment", "trials", "seed", "params"],
    "properties": {
        "experiment": {"enum": list(EXPERIMENTS)},
        "trials": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "workers": {"type": "integer", "minimum": 1},
        "params": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n": {"type": "integer", "minimum": 1},
                "k": {"type": "integer", "minimum": 1},
                "sigma": {"type": "number"},
                "epsilon": {"type": "number"},
                "eta": {"type": "number"},
                "delta": {"type": "number"},
                "lambda_bits": {"type": "integer"},
                "budget": {"type": "integer", "minimum": 0},
                "max_samples": {"type": "integer", "minimum": 1},
                "learner": {"enum": sorted(LEARNERS)},
                "engine": {"enum": ["auto", "compiled", "python"]},
            },
        },
        "bandit": {"type": "object"},
        "game": {"type": "object"},
        "strategy": {"type": "object"},
        "profile": {"type": "object"},
        "behavior": {"type": "object"},
        "success": {"enum": ["accept", "reject", "accept_and_optimal", "value_within_eps"]},
    },
}


class ConfigError(ValueError):
    pass


def validate_config(cfg: dict) -> dict:
    import jsonschema

    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        raise ConfigError(str(e.message)) from e
    _preflight(cfg)
    return cfg


def _require(cfg: dict, *names):
    missing = [x for x in names if cfg["params"].get(x) is None]
    if missing:
        raise ConfigError(f"{cfg['experiment']} requires params: {', '.join(missing)}")


def _preflight(cfg: dict):
    """Parameter preconditions are checked before any trial runs."""
    from .bandit_protocol import check_protocol_params
    from .policy import cap_count

    exp = cfg["experiment"]
    p = cfg["params"]
    try:
        if exp in ("verify-bandit", "lowcomm"):
            _require(cfg, "n", "sigma", "epsilon")
            check_protocol_params(p["n"], p["sigma"], p["epsilon"])
        if exp == "lowcomm":
            _require(cfg, "lambda_bits")
            if p["lambda_bits"] % 8 != 0 or not 8 <= p["lambda_bits"] <= 256:
                raise ValueError("lambda_bits must be a multiple of 8 in [8, 256]")
        if exp == "verify-strategy":
            _require(cfg, "n", "sigma", "epsilon", "eta", "delta")
            check_protocol_params(p["n"], p["sigma"], p["eta"] / 4.0)
            if not 0.0 < p["delta"] < 1.0 or not 0.0 < p["eta"] < 1.0:
                raise ValueError("delta and eta must lie in (0,1)")
        if exp == "verify-game":
            _require(cfg, "k", "n", "sigma", "epsilon", "eta")
            check_protocol_params(p["n"], p["sigma"], p["eta"] / 4.0)
        if exp == "lb-coin":
            _require(cfg, "n", "sigma", "epsilon", "max_samples")
            if p["sigma"] < 24.0 / p["n"] - 1e-12:
                raise ValueError("lb-coin needs sigma >= 24/n")
            if abs(cap_count(p["sigma"]) * p["sigma"] - 1.0) > 1e-9:
                raise ValueError("lb-coin needs 1/sigma integral")
        if exp == "lb-learning":
            _require(cfg, "n", "sigma", "epsilon", "budget", "learner")
            if abs(cap_count(p["sigma"]) * p["sigma"] - 1.0) > 1e-9:
                raise ValueError("lb-learning needs 1/sigma integral")
        if "behavior" in cfg:
            behavior_from_json(cfg["behavior"])
    except (ValueError, KeyError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e)) from e


# ---------------------------------------------------------------------------
# Instance generation (per-trial, seeded)
# ---------------------------------------------------------------------------


def _make_bandit(spec: dict, params: dict, trial_seed: int):
    """Returns (bandit, true_means or None)."""
    kind = spec.get("kind", "explicit")
    if kind == "explicit":
        b = bandit_from_json(spec)
        return b, b.expected_utilities()
    n = params["n"]
    if kind == "random_bernoulli":
        means = prng.generator(trial_seed, "instance").random(n)
        return Bandit.bernoulli(means), means
    if kind == "all_bernoulli":
        means = np.full(n, float(spec["p"]))
        return Bandit.bernoulli(means), means
    if kind == "hard_learning":
        inst = hard_learning_instance(n, params["sigma"], prng.generator(trial_seed, "instance"))
        return inst.bandit, inst.expected_utilities()
    raise ConfigError(f"unknown bandit kind: {kind!r}")


def _make_strategy(spec: dict, params: dict, means, trial_seed: int) -> np.ndarray:
    kind = spec.get("kind", "optimal_smooth")
    n, sigma = params["n"], params["sigma"]
    if kind == "explicit":
        return np.asarray(spec["pi"], dtype=float)
    if kind == "optimal_smooth":
        return compute_optimal_smooth_strategy(n, sigma, means).strategy
    if kind == "uniform_complement":
        # uniform over the arms whose true mean is zero (hard-instance foil)
        zeros = np.flatnonzero(np.asarray(means) == 0.0)
        pi = np.zeros(n)
        pi[zeros] = 1.0 / len(zeros)
        return pi
    if kind == "random_smooth":
        return random_smooth_strategy(n, sigma, prng.generator(trial_seed, "strategy"))
    raise ConfigError(f"unknown strategy kind: {kind!r}")


def _make_game(spec: dict, params: dict, trial_seed: int):
    """Returns (game, instance or None)."""
    kind = spec.get("kind", "explicit")
    if kind == "explicit":
        return game_from_json(spec), None
    k, n = params["k"], params["n"]
    if kind == "constant":
        from .model import ConstantGame

        return ConstantGame(k, n, float(spec.get("c", 0.0))), None
    if kind == "hard_block":
        inst = hard_game_instance(k, n, params["sigma"], prng.generator(trial_seed, "instance"))
        return inst.game, inst
    raise ConfigError(f"unknown game kind: {kind!r}")


def _make_profile(spec: dict, params: dict, instance, trial_seed: int) -> np.ndarray:
    kind = spec.get("kind", "random_smooth")
    k, n, sigma = params["k"], params["n"], params["sigma"]
    if kind == "explicit":
        return np.asarray(spec["profile"], dtype=float)
    if kind == "random_smooth":
        gen = prng.generator(trial_seed, "profile")
        return np.vstack([random_smooth_strategy(n, sigma, gen) for _ in range(k)])
    if kind == "equilibrium":
        return instance.equilibrium_profile()
    if kind == "deviating":
        return instance.deviating_profile(prng.generator(trial_seed, "profile"))
    raise ConfigError(f"unknown profile kind: {kind!r}")


# ---------------------------------------------------------------------------
# Per-trial execution
# ---------------------------------------------------------------------------


def _blank_row(cfg: dict, trial: int, seed: int) -> dict:
    p = cfg["params"]
    return {
        "experiment": cfg["experiment"], "trial": trial, "seed": seed,
        "n": p.get("n"), "k": p.get("k"), "sigma": p.get("sigma"),
        "epsilon": p.get("epsilon"), "eta": p.get("eta"), "delta": p.get("delta"),
        "lambda_bits": p.get("lambda_bits"), "budget": p.get("budget"),
        "verdict": None, "success": None, "prover_pulls": 0,
        "verifier_pulls_planned": 0, "verifier_pulls_executed": 0,
        "oracle_queries": 0, "bytes_to_verifier": 0, "bytes_to_prover": 0,
        "value": None, "detail": None,
    }


def run_trial(cfg: dict, trial: int, *, keep_transcript: bool = False) -> dict:
    """Execute one trial; returns a row dict (and optionally the transcript)."""
    p = cfg["params"]
    exp = cfg["experiment"]
    seed = prng.derive(cfg["seed"], "trial", trial)
    row = _blank_row(cfg, trial, seed)
    success_mode = cfg.get("success", "accept")
    tr = None

    if exp == "verify-bandit":
        bandit, means = _make_bandit(cfg.get("bandit", {"kind": "random_bernoulli"}), p, seed)
        behavior = behavior_from_json(cfg.get("behavior", {"name": "honest"}))
        oracle = bandit.oracle(prng.derive(seed, "oracle"))
        outcome, tr = run_bandit_verification(
            oracle, behavior, p["sigma"], p["epsilon"], seed, keep_audits=keep_transcript)
        row["verdict"] = "reject" if outcome.rejected else "strategy"
        if success_mode == "reject":
            row["success"] = int(outcome.rejected)
        elif success_mode == "accept_and_optimal":
            row["success"] = int(not outcome.rejected and is_epsilon_optimal(
                outcome.strategy, means, p["sigma"], p["epsilon"]))
        else:
            row["success"] = int(not outcome.rejected)
        row["oracle_queries"] = oracle.pull_count
        row["detail"] = outcome.reason

    elif exp == "verify-strategy":
        bandit, means = _make_bandit(cfg.get("bandit", {"kind": "random_bernoulli"}), p, seed)
        pi = _make_strategy(cfg.get("strategy", {}), p, means, seed)
        behavior = behavior_from_json(cfg.get("behavior", {"name": "honest"}))
        oracle = bandit.oracle(prng.derive(seed, "oracle"))
        verdict, tr = verify_strategy_optimality(
            oracle, behavior, p["sigma"], pi, p["epsilon"], p["delta"], p["eta"], seed)
        row["verdict"] = "accept" if verdict.accepted else "reject"
        row["success"] = int(verdict.accepted if success_mode == "accept" else not verdict.accepted)
        row["oracle_queries"] = oracle.pull_count
        row["detail"] = verdict.reason
        if verdict.candidate_values and verdict.given_value is not None:
            from .strategy_protocol import lower_median

            row["value"] = lower_median(verdict.candidate_values) - verdict.given_value

    elif exp == "verify-game":
        game, instance = _make_game(cfg.get("game", {"kind": "constant"}), p, seed)
        profile = _make_profile(cfg.get("profile", {}), p, instance, seed)
        behavior = behavior_from_json(cfg.get("behavior", {"name": "honest"}))
        oracle = game.oracle(prng.derive(seed, "oracle"))
        verdict, tr = verify_smooth_equilibrium(
            oracle, profile, p["sigma"], p["epsilon"], p["eta"], behavior, seed)
        row["verdict"] = "accept" if verdict.accepted else "reject"
        row["success"] = int(verdict.accepted if success_mode == "accept" else not verdict.accepted)
        row["oracle_queries"] = oracle.query_count
        row["detail"] = verdict.reason

    elif exp == "lowcomm":
        bandit, means = _make_bandit(cfg.get("bandit", {"kind": "random_bernoulli"}), p, seed)
        beh = cfg.get("behavior", {"name": "honest"})
        tamper = beh.get("tamper")
        prover = LowCommProver(
            base=behavior_from_json({k: v for k, v in beh.items() if k != "tamper"}),
            tamper=tamper, t_shift=beh.get("t_shift", 0.0))
        oracle = bandit.oracle(prng.derive(seed, "oracle"))
        outcome, tr = run_lowcomm_verification(
            oracle, prover, p["sigma"], p["epsilon"], p["lambda_bits"], seed,
            keep_audits=keep_transcript)
        row["verdict"] = "reject" if outcome.rejected else "value"
        row["value"] = outcome.value
        if success_mode == "value_within_eps":
            true_opt = compute_optimal_smooth_strategy(p["n"], p["sigma"], means).value
            row["success"] = int(not outcome.rejected
                                 and abs(outcome.value - true_opt) <= p["epsilon"])
        elif success_mode == "reject":
            row["success"] = int(outcome.rejected)
        else:
            row["success"] = int(not outcome.rejected)
        row["oracle_queries"] = oracle.pull_count
        row["detail"] = outcome.reason

    elif exp == "lb-coin":
        sign = 1 if prng.generator(seed, "bias").random() < 0.5 else -1
        coin = CoinStream(sign, p["epsilon"], prng.derive(seed, "coin"))
        res = decide_coin_bias_via_reduction(
            p["n"], p["sigma"], p["epsilon"], coin, p["max_samples"], seed,
            engine=p.get("engine", "auto"))
        row["verdict"] = str(res.output)
        row["success"] = int(res.output == sign)
        row["oracle_queries"] = res.coins_consumed
        row["detail"] = f"{res.reason};side={res.terminated_side};interleave_ok={res.interleaving_ok}"
        if not res.interleaving_ok:
            raise RuntimeError("interleaving invariant violated")

    elif exp == "lb-learning":
        rep = measure_learning_success(
            p["learner"], p["n"], p["sigma"], p["epsilon"], p["budget"], 1, seed)
        row["verdict"] = "success" if rep.successes else "failure"
        row["success"] = rep.successes
        row["oracle_queries"] = int(rep.mean_queries)
        row["detail"] = p["learner"]

    else:  # pragma: no cover - schema forbids
        raise ConfigError(f"unknown experiment {exp!r}")

    if tr is not None:
        row["prover_pulls"] = tr.prover_pulls
        row["verifier_pulls_planned"] = tr.verifier_pulls_planned
        row["verifier_pulls_executed"] = tr.verifier_pulls_executed
        row["bytes_to_verifier"] = tr.bytes_to_verifier
        row["bytes_to_prover"] = tr.bytes_to_prover
        if keep_transcript:
            row["_transcript"] = tr.to_json()
    return row


def _pool_trial(args):
    cfg, trial, keep = args
    return run_trial(cfg, trial, keep_transcript=keep)


@dataclass
class TrialReport:
    config: dict
    rows: list = field(default_factory=list)
    wall_time_s: float = 0.0

    @property
    def trials(self) -> int:
        return len(self.rows)

    @property
    def successes(self) -> int:
        return sum(r["success"] for r in self.rows)

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials

    def summary(self) -> dict:
        lo, hi = wilson_ci(self.successes, self.trials)
        return {
            "experiment": self.config["experiment"],
            "trials": self.trials,
            "successes": self.successes,
            "success_rate": self.success_rate,
            "ci95": [lo, hi],
            "mean_queries": float(np.mean([r["oracle_queries"] for r in self.rows])),
            "total_prover_pulls": int(sum(r["prover_pulls"] for r in self.rows)),
            "total_verifier_pulls": int(sum(r["verifier_pulls_executed"] for r in self.rows)),
        }


def run_experiment(cfg: dict, *, workers: int | None = None,
                   keep_transcripts: bool = False) -> TrialReport:
    """Run all trials of a validated config; aggregation is order-independent."""
    cfg = validate_config(cfg)
    trials = cfg["trials"]
    workers = workers if workers is not None else cfg.get("workers", 1)
    t0 = time.monotonic()
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_pool_trial, [(cfg, t, keep_transcripts) for t in range(trials)],
                                 chunksize=max(1, trials // (4 * workers))))
    else:
        rows = [run_trial(cfg, t, keep_transcript=keep_transcripts) for t in range(trials)]
    rows.sort(key=lambda r: r["trial"])
    return TrialReport(config=cfg, rows=rows, wall_time_s=time.monotonic() - t0)


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def trials_csv(report: TrialReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRIAL_COLUMNS)
    for r in report.rows:
        w.writerow([_fmt(r[c]) for c in TRIAL_COLUMNS])
    return buf.getvalue()


def summary_csv(reports: list) -> str:
    """Aggregate-per-experiment CSV (the lab report format)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for rep in reports:
        s = rep.summary()
        p = rep.config["params"]
        lo, hi = s["ci95"]
        w.writerow([_fmt(v) for v in [
            s["experiment"], p.get("n"), p.get("sigma"), p.get("epsilon"),
            p.get("budget", p.get("max_samples")), s["trials"],
            s["success_rate"], s["mean_queries"], f"{lo!r}|{hi!r}",
        ]])
    return buf.getvalue()


def report_json(report: TrialReport, *, transcripts: bool = False) -> str:
    payload = {
        "config": report.config,
        "summary": report.summary(),
        "wall_time_s": report.wall_time_s,
        "trials": [
            {k: v for k, v in r.items() if transcripts or not k.startswith("_")}
            for r in report.rows
        ],
    }
    return json.dumps(payload, sort_keys=True, indent=1)


def emit_report(report: TrialReport, fmt: str, path: str, *, transcripts: bool = False) -> str:
    """Write the report; returns the path. CSV holds per-trial rows; JSON adds
    the summary (and transcripts when requested)."""
    if fmt == "csv":
        text = trials_csv(report)
    elif fmt == "json":
        text = report_json(report, transcripts=transcripts)
    else:
        raise ConfigError(f"unknown report format: {fmt!r}")
    try:
        with open(path, "w") as f:
            f.write(text)
    except OSError as e:
        raise OSError(f"cannot write report to {path!r}: {e}") from e
    return path
