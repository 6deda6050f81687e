"""Low-communication variant: commit to the claims, open only audited indices.

Instead of sending the full utility vector, the prover sends a vector
commitment root, the claimed optimal smooth value t, and an argument that the
committed vector really has optimal value t. The verifier checks the
argument, then runs exactly the same bucket audit as the single-message
protocol, but fetches each audited claim interactively as (value, opening
proof). Any opening failure or estimate mismatch rejects; otherwise the
verifier outputs t (a value, not a policy).

Under the same seed and an honest prover the audited indices, estimates and
accept/reject decision coincide with ``run_bandit_verification``: this
protocol is the single-message protocol with its message factored through a
commitment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import prng, wire
from .bandit_protocol import bin_schedule, check_protocol_params, run_prover
from .behaviors import Honest
from .commitments import (
    BackendRefusal,
    OpeningProof,
    TrustedReexecutionBackend,
    TOKEN_BYTES,
    vc_commit,
    vc_keygen,
    vc_open,
    vc_verify,
)
from .model import as_bandit_oracle
from .policy import compute_optimal_smooth_strategy
from .transcript import PROVER, VERIFIER, AuditRecord, Transcript


@dataclass
class LowCommOutcome:
    rejected: bool
    value: float | None = None
    reason: str | None = None
    bytes_to_verifier: int = 0
    bytes_to_prover: int = 0


def _finish(outcome: LowCommOutcome, tr):
    outcome.bytes_to_verifier = tr.bytes_to_verifier
    outcome.bytes_to_prover = tr.bytes_to_prover
    return outcome, tr


class LowCommProver:
    """Prover side: estimation behavior plus optional scripted tampering.

    tamper kinds (soundness test hooks):
      "value": first opening reports the entry shifted by one grid step
      "path":  first opening carries one corrupted path digest
      "root":  the bundle carries a corrupted root
      "t":     claim t shifted by ``t_shift`` (backend refuses; token forged)
    """

    def __init__(self, base=None, tamper: str | None = None, t_shift: float = 0.0):
        self.base = base if base is not None else Honest()
        self.tamper = tamper
        self.t_shift = float(t_shift)


def run_lowcomm_verification(bandit_or_oracle, prover, sigma: float, eps: float,
                             lambda_bits: int, seed: int, *, backend=None,
                             keep_audits: bool = True) -> tuple[LowCommOutcome, Transcript]:
    if not isinstance(prover, LowCommProver):
        prover = LowCommProver(base=prover)
    oracle = as_bandit_oracle(bandit_or_oracle, seed)
    n = oracle.n
    check_protocol_params(n, sigma, eps)
    schedule = bin_schedule(n, sigma, eps)

    tr = Transcript(
        protocol="lowcomm-verify",
        params={"n": n, "sigma": sigma, "eps": eps, "lambda_bits": lambda_bits, "seed": seed},
        keep_audits=keep_audits,
    )
    tr.verifier_pulls_planned = sum(s.a_b * s.m_b for s in schedule)

    # Trusted setup: commitment parameters and argument backend key.
    params = vc_keygen(n, lambda_bits, prng.derive(seed, "setup"))
    if backend is None:
        backend = TrustedReexecutionBackend()
    backend.setup(params, sigma, eps, prng.derive(seed, "setup"))

    # Prover: estimate as in the single-message protocol, then commit.
    payload, prover_pulls = run_prover(oracle, prover.base, n, sigma, eps, seed, quantize=True)
    tr.prover_pulls = prover_pulls
    idx = wire.decode_indices(payload, n, eps)
    values = wire.dequantize(idx, eps)
    w = wire.entry_width(eps)
    entries = [payload[i * w:(i + 1) * w] for i in range(n)]
    root, aux = vc_commit(params, entries)
    t_claim = compute_optimal_smooth_strategy(n, sigma, values).value + prover.t_shift
    t_claim = min(1.0, max(0.0, t_claim))
    sent_root = root
    if prover.tamper == "root":
        sent_root = bytes([root[0] ^ 0x01]) + root[1:]
    try:
        token = backend.prove(sent_root, t_claim, idx)
    except BackendRefusal:
        token = b"\x00" * TOKEN_BYTES  # forged constant token
    bundle = sent_root + wire.encode_floats([t_claim]) + token
    tr.add_message(PROVER, "commitment-bundle", wire.frame(bundle))

    # Verifier: check the argument before touching the oracle.
    if len(bundle) != params.digest_bytes + 8 + TOKEN_BYTES:
        outcome = LowCommOutcome(rejected=True, reason="malformed-message")
        tr.verdict = {"rejected": True, "reason": outcome.reason}
        return _finish(outcome, tr)
    if not backend.verify(sent_root, t_claim, token):
        outcome = LowCommOutcome(rejected=True, reason="argument-invalid")
        tr.verdict = {"rejected": True, "reason": outcome.reason}
        return _finish(outcome, tr)

    # Audit plan and pulls: identical derivations to the single-message
    # protocol, so transcripts line up under a shared seed.
    verifier_gen = prng.generator(seed, "verifier")
    plan = [verifier_gen.integers(0, n, size=s.a_b) for s in schedule]
    tr.plan = [
        {"bin": s.b, "eps_b": s.eps_b, "arms": arms, "pulls_per_arm": s.m_b}
        for s, arms in zip(schedule, plan)
    ]
    verifier_oracle = oracle.substream("verifier")

    tampered_once = False
    for s, arms in zip(schedule, plan):
        sums = verifier_oracle.pull_sums(arms, s.m_b)
        tr.record_verifier_pulls(arms, s.m_b, n)
        estimates = sums / s.m_b
        threshold = s.eps_b / 8.0
        for slot, arm in enumerate(int(a) for a in arms):
            tr.add_message(VERIFIER, "open-request", wire.frame(wire.encode_uint32(arm)))
            proof = vc_open(params, aux, arm)
            if prover.tamper == "value" and not tampered_once:
                shifted = (idx[arm] + 1) % (wire.grid_max_index(eps) + 1)
                proof = OpeningProof(arm, int(shifted).to_bytes(w, "big"), proof.path)
                tampered_once = True
            elif prover.tamper == "path" and not tampered_once:
                bad = bytearray(proof.path[0])
                bad[0] ^= 0x01
                proof = OpeningProof(arm, proof.value, [bytes(bad)] + proof.path[1:])
                tampered_once = True
            tr.add_message(PROVER, "opening", wire.frame(proof.encode()))
            if not vc_verify(params, sent_root, proof):
                # claimed = -1 marks "no usable opening" in the audit log
                tr.add_audit(AuditRecord(s.b, slot, arm, s.m_b, float(estimates[slot]),
                                         -1.0, threshold, True))
                outcome = LowCommOutcome(rejected=True, reason="opening-invalid")
                tr.verdict = {"rejected": True, "reason": outcome.reason,
                              "bin": s.b, "slot": slot, "arm": arm}
                return _finish(outcome, tr)
            opened = float(wire.dequantize(
                np.array([int.from_bytes(proof.value, "big")]), eps)[0])
            triggered = abs(opened - float(estimates[slot])) > threshold
            tr.add_audit(AuditRecord(s.b, slot, arm, s.m_b, float(estimates[slot]),
                                     opened, threshold, triggered))
            if triggered:
                outcome = LowCommOutcome(rejected=True, reason="estimate-mismatch")
                tr.verdict = {"rejected": True, "reason": outcome.reason,
                              "bin": s.b, "slot": slot, "arm": arm}
                return _finish(outcome, tr)

    outcome = LowCommOutcome(rejected=False, value=t_claim)
    tr.verdict = {"rejected": False, "value": t_claim}
    return _finish(outcome, tr)
