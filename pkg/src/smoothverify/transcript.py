"""Ordered message logs with byte and query accounting.

A transcript is the auditable record of one protocol run: every message with
its framed byte size, the verifier's audit outcomes, planned versus executed
pull totals, and the verdict. Counts recorded here are cross-checked against
oracle counters by the test suite, so nothing in a transcript is derived from
a formula.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

PROVER = "prover"
VERIFIER = "verifier"


@dataclass
class Message:
    sender: str
    label: str
    n_bytes: int
    payload: bytes | None = None

    def to_json(self) -> dict:
        d = {"sender": self.sender, "label": self.label, "bytes": self.n_bytes}
        if self.payload is not None:
            d["payload_hex"] = self.payload.hex()
        return d


@dataclass
class AuditRecord:
    """One audited arm: pulled `pulls` times, estimate compared to the claim."""

    bin_index: int
    slot: int
    arm: int
    pulls: int
    estimate: float
    claimed: float
    threshold: float
    triggered: bool

    def key(self) -> tuple:
        return (self.bin_index, self.slot, self.arm, self.pulls,
                self.estimate, self.claimed, self.threshold, self.triggered)

    def to_json(self) -> dict:
        return {
            "bin": self.bin_index, "slot": self.slot, "arm": self.arm,
            "pulls": self.pulls, "estimate": self.estimate, "claimed": self.claimed,
            "threshold": self.threshold, "triggered": self.triggered,
        }


@dataclass
class Transcript:
    protocol: str
    params: dict = field(default_factory=dict)
    messages: list = field(default_factory=list)
    audits: list = field(default_factory=list)
    keep_audits: bool = True
    keep_payloads: bool = False
    # planned schedule: list of dicts (bin, eps_b, arms, pulls_per_arm)
    plan: list = field(default_factory=list)
    verifier_pulls_planned: int = 0
    verifier_pulls_executed: int = 0
    prover_pulls: int = 0
    verifier_arm_tally: np.ndarray | None = None
    bytes_to_verifier: int = 0
    bytes_to_prover: int = 0
    verdict: dict = field(default_factory=dict)
    runs: list = field(default_factory=list)  # summaries of inner runs (composite protocols)

    def add_message(self, sender: str, label: str, framed: bytes):
        self.messages.append(Message(sender, label, len(framed),
                                     framed if self.keep_payloads else None))
        if sender == PROVER:
            self.bytes_to_verifier += len(framed)
        else:
            self.bytes_to_prover += len(framed)

    def add_audit(self, record: AuditRecord):
        if self.keep_audits:
            self.audits.append(record)

    def record_verifier_pulls(self, arms, pulls_each, n: int):
        arms = np.asarray(arms, dtype=np.int64)
        counts = np.broadcast_to(np.asarray(pulls_each, dtype=np.int64), arms.shape)
        self.verifier_pulls_executed += int(counts.sum())
        if self.verifier_arm_tally is None:
            self.verifier_arm_tally = np.zeros(n, dtype=np.int64)
        np.add.at(self.verifier_arm_tally, arms, counts)

    def audit_keys(self) -> list:
        return [a.key() for a in self.audits]

    def planned_query_multiset(self) -> tuple:
        """Multiset of (arm, pull-count) pairs of the planned audit schedule."""
        pairs = []
        for entry in self.plan:
            pairs.extend((int(a), int(entry["pulls_per_arm"])) for a in entry["arms"])
        return tuple(sorted(pairs))

    def to_json(self) -> dict:
        tally = None
        if self.keep_audits and self.verifier_arm_tally is not None:
            tally = [int(c) for c in self.verifier_arm_tally]
        return {
            "protocol": self.protocol,
            "params": self.params,
            "verifier_arm_tally": tally,
            "messages": [m.to_json() for m in self.messages],
            "audits": [a.to_json() for a in self.audits],
            "plan": [
                {"bin": e["bin"], "eps_b": e["eps_b"],
                 "arms": [int(a) for a in e["arms"]], "pulls_per_arm": int(e["pulls_per_arm"])}
                for e in self.plan
            ],
            "verifier_pulls_planned": self.verifier_pulls_planned,
            "verifier_pulls_executed": self.verifier_pulls_executed,
            "prover_pulls": self.prover_pulls,
            "bytes_to_verifier": self.bytes_to_verifier,
            "bytes_to_prover": self.bytes_to_prover,
            "verdict": self.verdict,
            "runs": self.runs,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
