"""Hand-enumerated traces for the alternating-simulation engines.

Each case pins the exact per-coin schedule: who consumes which coin, when
audits complete, and which side's termination decides the output. Both
engines must reproduce the same tuple:

    (output, terminated_side, reason, coins_consumed,
     used_plus, used_minus, audits_done_plus, audits_done_minus)
"""

import numpy as np
import pytest

from smoothverify.lab import _interleave_py
from smoothverify.lab.reduction import _interleave_core

ENGINES = [("python", _interleave_py.interleave_run)]
if _interleave_core is not None:
    ENGINES.append(("compiled", _interleave_core.interleave_run))

REJECT, COMPLETE, EXHAUSTED = 1, 2, 0


def side(*audits):
    """audits: (m, thr, claimed, planted, local_sum) per audit, in order."""
    if not audits:
        return dict(arm=np.zeros(0, np.int64), m=np.zeros(0, np.int64),
                    thr=np.zeros(0), claimed=np.zeros(0),
                    planted=np.zeros(0, np.uint8), local_sum=np.zeros(0))
    m, thr, claimed, planted, local = map(np.array, zip(*audits))
    return dict(arm=np.zeros(len(audits), np.int64), m=m.astype(np.int64),
                thr=thr.astype(float), claimed=claimed.astype(float),
                planted=planted.astype(np.uint8), local_sum=local.astype(float))


def run(engine, s0, s1, out0, out1, coins):
    return engine(s0["arm"], s0["m"], s0["thr"], s0["claimed"], s0["planted"],
                  s0["local_sum"], out0,
                  s1["arm"], s1["m"], s1["thr"], s1["claimed"], s1["planted"],
                  s1["local_sum"], out1,
                  np.array(coins, dtype=np.uint8))


@pytest.mark.parametrize("name,engine", ENGINES)
def test_opponent_completes_while_first_side_waits(name, engine):
    # side+ consumes one coin, then side- passes a local audit and completes:
    # side- terminates first and its completion output decides
    s0 = side((3, 0.1, 1.0, 1, 0.0))
    s1 = side((4, 0.1, 0.5, 0, 2.0))  # local mean 0.5 == claimed
    got = run(engine, s0, s1, 1, -1, [1, 1, 1, 1])
    assert got == (-1, -1, COMPLETE, 1, 1, 0, 0, 1)


@pytest.mark.parametrize("name,engine", ENGINES)
def test_strict_alternation_both_planted(name, engine):
    # both sides audit one planted arm with m=2; coins alternate +,-,+,-;
    # side+ resumes first after both finish and completes. side- never gets
    # its post-audit check turn, so its audit pointer stays at 0.
    s0 = side((2, 0.1, 1.0, 1, 0.0))
    s1 = side((2, 0.1, 0.0, 1, 0.0))  # sees 1-x = 0, claimed 0: passes
    got = run(engine, s0, s1, 1, -1, [1, 1, 1, 1])
    assert got == (1, 1, COMPLETE, 4, 2, 2, 1, 0)


@pytest.mark.parametrize("name,engine", ENGINES)
def test_planted_audit_rejection_after_resume(name, engine):
    # side+ claims 0.0 but its planted arm pays 1: the threshold check fires
    # when control returns after its second coin; side- is still mid-audit
    s0 = side((2, 0.1, 0.0, 1, 0.0))
    s1 = side((5, 0.1, 0.0, 1, 0.0))
    got = run(engine, s0, s1, 1, -1, [1, 1, 1, 1, 1, 1, 1, 1])
    assert got == (1, 1, REJECT, 4, 2, 2, 0, 0)


@pytest.mark.parametrize("name,engine", ENGINES)
def test_exhaustion_mid_audit(name, engine):
    s0 = side((5, 0.1, 0.5, 1, 0.0))
    s1 = side((5, 0.1, 0.5, 1, 0.0))
    got = run(engine, s0, s1, 1, -1, [1, 0, 1])
    assert got == (0, 0, EXHAUSTED, 3, 2, 1, 0, 0)


@pytest.mark.parametrize("name,engine", ENGINES)
def test_local_rejection_consumes_no_coins(name, engine):
    s0 = side((4, 0.05, 0.9, 0, 0.0))  # local mean 0 vs claim 0.9: reject
    s1 = side((2, 0.1, 0.5, 1, 0.0))
    got = run(engine, s0, s1, 1, -1, [1, 1])
    assert got == (1, 1, REJECT, 0, 0, 0, 0, 0)


@pytest.mark.parametrize("name,engine", ENGINES)
def test_local_audits_resolve_between_coins(name, engine):
    # side+: local pass, planted m=1, local pass, complete; side-: planted m=1.
    # side+ burns no coins on locals, one coin on the planted audit; when it
    # completes all audits its completion output (here -1: "not heavy") wins
    s0 = side((3, 0.1, 0.5, 0, 1.5),
              (1, 0.6, 1.0, 1, 0.0),
              (2, 0.1, 0.0, 0, 0.0))
    s1 = side((1, 0.6, 0.0, 1, 0.0))
    got = run(engine, s0, s1, -1, 1, [1, 1])
    assert got == (-1, 1, COMPLETE, 2, 1, 1, 3, 0)


@pytest.mark.parametrize("name,engine", ENGINES)
def test_flip_applies_to_minus_side(name, engine):
    # coins are all ones; the minus side receives 1-x = 0 everywhere, so a
    # claim of 0.0 passes on the minus side but the plus side (claim 0.0,
    # sees raw ones) rejects first if scheduled
    s0 = side()  # completes immediately
    s1 = side((2, 0.1, 0.0, 1, 0.0))
    got = run(engine, s0, s1, 1, -1, [1, 1])
    assert got == (1, 1, COMPLETE, 0, 0, 0, 0, 0)


@pytest.mark.parametrize("name,engine", ENGINES)
def test_empty_minus_side_completes_on_its_first_turn(name, engine):
    s0 = side((2, 0.1, 1.0, 1, 0.0))
    s1 = side()
    got = run(engine, s0, s1, 1, -1, [1, 1, 1])
    assert got == (-1, -1, COMPLETE, 1, 1, 0, 0, 0)
