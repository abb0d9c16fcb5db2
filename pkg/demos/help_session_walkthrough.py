"""Narrated walk through one help session: a persistent detection failure,
the raised request, the operator's teleop fix, and the resumed plan.

Usage: python3 demos/help_session_walkthrough.py
"""

from __future__ import annotations

import os

from repairsim import load_scenario_file
from repairsim.orchestrator import OperatorSpec, TrialConfig, run_trial
from repairsim.protocol import ScriptedPolicy

HERE = os.path.dirname(__file__)
SCENARIO = os.path.join(HERE, "..", "scenarios", "paper_trash_task_l1clean")


def main() -> None:
    scenario = load_scenario_file(SCENARIO)
    cfg = TrialConfig(
        scenario=scenario,
        mode="repair",
        seed=3,
        operator=OperatorSpec(kind="scripted", policy=ScriptedPolicy("always_assist")),
    )
    log = run_trial(cfg)

    print("easy objects clear autonomously; hard ones go through the operator\n")
    for event in log.events:
        tick = event["tick"]
        if event["type"] == "help_raised":
            request = event["request"]
            print(f"[{tick:5d}] HELP {request['id']}: {request['message']}")
        elif event["type"] == "operator_action":
            action = event["action"]
            if action["kind"] == "teleop":
                command = action["command"]
                target = command.get("target") or ""
                print(f"[{tick:5d}]   operator {command['kind']} {target}".rstrip())
            else:
                print(f"[{tick:5d}]   operator {action['kind']}: {action['text']}")
        elif event["type"] == "feedback_applied":
            print(f"[{tick:5d}] RESUME {event['request_id']} ({event['outcome']})\n")

    whole, level1, level2 = log.progress()
    print(f"finished: {log.termination} with {whole}/6 collected (L1 {level1}, L2 {level2})")


if __name__ == "__main__":
    main()
