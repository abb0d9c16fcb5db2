"""Deterministic-replay demonstration: run a stochastic trial (collision
resets included), persist the JSONL log, re-run it from its own header, and
show the byte-level comparison, plus what tampering looks like.

Usage: python3 demos/replay_verification.py
"""

from __future__ import annotations

import json
import os
import tempfile

from repairsim import load_scenario_file
from repairsim.logs import TrialLog, diff_logs
from repairsim.orchestrator import OperatorSpec, TrialConfig, replay_trial, run_trial
from repairsim.protocol import ScriptedPolicy

HERE = os.path.dirname(__file__)
SCENARIO = os.path.join(HERE, "..", "scenarios", "paper_trash_task")


def main() -> None:
    scenario = load_scenario_file(SCENARIO)
    cfg = TrialConfig(
        scenario=scenario,
        mode="repair",
        seed=1,  # this seed happens to include a collision reset
        operator=OperatorSpec(kind="scripted", policy=ScriptedPolicy("always_assist")),
    )
    log = run_trial(cfg)
    print(f"trial: {log.termination}, progress {log.progress()}, "
          f"{len(log.events)} events, {len(log.events_of('reset'))} resets")

    with tempfile.NamedTemporaryFile("w", suffix=".jsonl", delete=False) as handle:
        handle.write(log.to_jsonl())
        path = handle.name
    print(f"log written to {path}")

    replayed = replay_trial(TrialLog.load(path))
    print("replay:", "byte-identical" if diff_logs(log, replayed) is None else "DIVERGED")

    lines = log.to_jsonl().splitlines()
    record = json.loads(lines[10])
    record["tick"] += 1
    lines[10] = json.dumps(record, sort_keys=True, separators=(",", ":"))
    tampered = TrialLog.parse("\n".join(lines) + "\n")
    diff = diff_logs(tampered, replay_trial(tampered))
    print(f"tampered copy: mismatch at record {diff.seq}")
    print(f"  log has:    {diff.expected[:100]}...")
    print(f"  replay has: {diff.actual[:100]}...")
    os.unlink(path)


if __name__ == "__main__":
    main()
