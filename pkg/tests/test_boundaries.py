"""Structural check: protocol code never reads generator-side ground truth."""

import pathlib

PROTOCOL_MODULES = [
    "bandit_protocol.py", "strategy_protocol.py", "game_protocol.py",
    "lowcomm.py", "commitments.py", "behaviors.py", "transcript.py", "wire.py",
]

FORBIDDEN = ("expected_utilities", "exact_expected_utility", ".bandit.arms")


def test_protocol_modules_do_not_touch_ground_truth():
    root = pathlib.Path(__file__).resolve().parents[1] / "src" / "smoothverify"
    for name in PROTOCOL_MODULES:
        text = (root / name).read_text()
        for token in FORBIDDEN:
            assert token not in text, f"{name} references generator-side API {token!r}"
