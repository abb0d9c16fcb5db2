"""Run the canonical trash-collection trial in all three operation modes
and print a Table-style progress summary.

Usage: python3 demos/run_three_modes.py [n_seeds]
"""

from __future__ import annotations

import os
import sys

from repairsim import load_scenario_file
from repairsim.orchestrator import OperatorSpec, TrialConfig, run_batch
from repairsim.protocol import ScriptedPolicy
from repairsim.stats import summarize_progress

HERE = os.path.dirname(__file__)
SCENARIO = os.path.join(HERE, "..", "scenarios", "paper_trash_task")


def main() -> None:
    n_seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 12
    seeds = list(range(1, n_seeds + 1))
    scenario = load_scenario_file(SCENARIO)

    configs = []
    for seed in seeds:
        configs.append(
            TrialConfig(
                scenario=scenario,
                mode="teleop",
                seed=seed,
                operator=OperatorSpec(kind="teleop_script", script_name="optimal"),
            )
        )
        configs.append(
            TrialConfig(
                scenario=scenario,
                mode="repair",
                seed=seed,
                operator=OperatorSpec(kind="scripted", policy=ScriptedPolicy("always_assist")),
            )
        )
        configs.append(TrialConfig(scenario=scenario, mode="auto", seed=seed))

    logs = run_batch(configs, jobs=4)
    groups: dict[str, list] = {"teleop": [], "repair": [], "auto": []}
    for log in logs:
        groups[log.mode].append(log.progress())

    print(f"{n_seeds} seeds per mode, canonical scenario\n")
    print(f"{'mode':<10}{'whole':<14}{'level1':<14}{'level2':<14}")
    for mode in ("teleop", "repair", "auto"):
        rows = {r.measure: r for r in summarize_progress({mode: groups[mode]})}
        print(
            f"{mode:<10}{rows['whole'].display():<14}"
            f"{rows['level1'].display():<14}{rows['level2'].display():<14}"
        )


if __name__ == "__main__":
    main()
