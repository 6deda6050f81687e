import json

import pytest

from smoothverify import harness, prng
from smoothverify.bandit_protocol import run_bandit_verification
from smoothverify.behaviors import Honest
from smoothverify.model import Bandit


def _cfg(**over):
    cfg = {
        "experiment": "verify-bandit",
        "trials": 5,
        "seed": 11,
        "params": {"n": 30, "sigma": 0.2, "epsilon": 0.25},
        "bandit": {"kind": "random_bernoulli"},
        "behavior": {"name": "honest"},
        "success": "accept_and_optimal",
    }
    cfg.update(over)
    return cfg


def test_unknown_keys_rejected():
    with pytest.raises(harness.ConfigError):
        harness.validate_config(_cfg(typo_field=1))
    with pytest.raises(harness.ConfigError):
        harness.validate_config(_cfg(params={"n": 30, "sigma": 0.2, "epsilon": 0.25,
                                             "mystery": 3}))
    with pytest.raises(harness.ConfigError):
        harness.validate_config(_cfg(experiment="nope"))


def test_preconditions_rejected_before_trials():
    # sigma below 1/n
    with pytest.raises(harness.ConfigError):
        harness.validate_config(_cfg(params={"n": 30, "sigma": 0.01, "epsilon": 0.25}))
    # missing required parameter
    with pytest.raises(harness.ConfigError):
        harness.validate_config(_cfg(params={"n": 30, "sigma": 0.2}))
    # unknown behavior name
    with pytest.raises(harness.ConfigError):
        harness.validate_config(_cfg(behavior={"name": "evil_genius"}))
    # lb-coin regime checks
    with pytest.raises(harness.ConfigError):
        harness.validate_config({
            "experiment": "lb-coin", "trials": 1, "seed": 1,
            "params": {"n": 480, "sigma": 0.03, "epsilon": 0.2, "max_samples": 10},
        })


def test_single_trial_equals_direct_call():
    cfg = _cfg(trials=1)
    report = harness.run_experiment(cfg)
    row = report.rows[0]
    seed = prng.derive(11, "trial", 0)
    means = prng.generator(seed, "instance").random(30)
    bandit = Bandit.bernoulli(means)
    oracle = bandit.oracle(prng.derive(seed, "oracle"))
    outcome, tr = run_bandit_verification(oracle, Honest(), 0.2, 0.25, seed,
                                          keep_audits=False)
    assert row["verdict"] == ("reject" if outcome.rejected else "strategy")
    assert row["prover_pulls"] == tr.prover_pulls
    assert row["verifier_pulls_executed"] == tr.verifier_pulls_executed
    assert row["oracle_queries"] == oracle.pull_count


def test_same_config_same_bytes():
    a = harness.trials_csv(harness.run_experiment(_cfg()))
    b = harness.trials_csv(harness.run_experiment(_cfg()))
    assert a == b


def test_worker_count_does_not_change_report():
    seq = harness.run_experiment(_cfg(trials=6), workers=1)
    par = harness.run_experiment(_cfg(trials=6), workers=3)
    assert harness.trials_csv(seq) == harness.trials_csv(par)
    assert harness.report_json(seq).split('"wall_time_s"')[0] == \
        harness.report_json(par).split('"wall_time_s"')[0]


def test_csv_shape_and_summary():
    report = harness.run_experiment(_cfg())
    text = harness.trials_csv(report)
    lines = text.strip().split("\n")
    assert lines[0] == ",".join(harness.TRIAL_COLUMNS)
    assert len(lines) == 6
    s = report.summary()
    assert s["trials"] == 5
    assert 0.0 <= s["success_rate"] <= 1.0
    assert s["ci95"][0] <= s["success_rate"] <= s["ci95"][1]


def test_empty_rows_give_header_only_csv():
    empty = harness.TrialReport(config=_cfg())
    assert harness.trials_csv(empty) == ",".join(harness.TRIAL_COLUMNS) + "\n"


def test_json_round_trip_and_transcripts():
    report = harness.run_experiment(_cfg(trials=2), keep_transcripts=True)
    payload = json.loads(harness.report_json(report, transcripts=True))
    assert payload["summary"]["trials"] == 2
    tr = payload["trials"][0]["_transcript"]
    assert tr["protocol"] == "bandit-verify"
    # byte counts in the rows equal the transcript message sums
    msg_bytes = sum(m["bytes"] for m in tr["messages"] if m["sender"] == "prover")
    assert payload["trials"][0]["bytes_to_verifier"] == msg_bytes
    # without the flag transcripts are omitted
    bare = json.loads(harness.report_json(report, transcripts=False))
    assert "_transcript" not in bare["trials"][0]


def test_emit_report_writes_files(tmp_path):
    report = harness.run_experiment(_cfg(trials=2))
    csv_path = harness.emit_report(report, "csv", str(tmp_path / "out.csv"))
    json_path = harness.emit_report(report, "json", str(tmp_path / "out.json"))
    assert open(csv_path).read().startswith("experiment,")
    json.loads(open(json_path).read())
    with pytest.raises(OSError):
        harness.emit_report(report, "csv", str(tmp_path / "nodir" / "x.csv"))


def test_reject_experiments_count_rejections():
    cfg = _cfg(
        bandit={"kind": "all_bernoulli", "n": 30, "p": 0.0},
        behavior={"name": "inflate_block",
                  "params": {"arms": list(range(6)), "delta": 1.0}},
        success="reject",
    )
    report = harness.run_experiment(cfg)
    assert report.success_rate == 1.0


def test_lb_learning_experiment_rows():
    cfg = {
        "experiment": "lb-learning", "trials": 8, "seed": 3,
        "params": {"n": 24, "sigma": 0.25, "epsilon": 0.25, "budget": 24,
                   "learner": "round_robin_greedy"},
    }
    report = harness.run_experiment(cfg)
    assert report.success_rate == 1.0
    assert all(r["oracle_queries"] == 24 for r in report.rows)


def test_summary_csv_schema():
    reports = [harness.run_experiment(_cfg(trials=3))]
    text = harness.summary_csv(reports)
    lines = text.strip().split("\n")
    assert lines[0] == ",".join(harness.SUMMARY_COLUMNS)
    assert len(lines) == 2
