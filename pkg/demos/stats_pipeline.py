"""Paired-trial evaluation end to end: simulate 12 seeds in REPAIR and Auto,
turn the logs into a scores CSV, and run the two-stage analysis
(Friedman, then Wilcoxon pairs under Holm with effect sizes).

Usage: python3 demos/stats_pipeline.py
"""

from __future__ import annotations

import os

from repairsim import load_scenario_file
from repairsim.orchestrator import OperatorSpec, TrialConfig, run_batch
from repairsim.protocol import ScriptedPolicy
from repairsim.report import analyze_scores, progress_to_csv, read_scores, render_report

HERE = os.path.dirname(__file__)
SCENARIO = os.path.join(HERE, "..", "scenarios", "paper_trash_task_autoloop")


def main() -> None:
    scenario = load_scenario_file(SCENARIO)
    seeds = range(1, 13)
    configs = [TrialConfig(scenario=scenario, mode="auto", seed=s) for s in seeds]
    configs += [
        TrialConfig(
            scenario=scenario,
            mode="repair",
            seed=s,
            operator=OperatorSpec(kind="scripted", policy=ScriptedPolicy("always_assist")),
        )
        for s in seeds
    ]
    logs = run_batch(configs, jobs=4)

    csv_text = progress_to_csv(logs)
    print("scores CSV (first lines):")
    print("\n".join(csv_text.splitlines()[:5]))
    print("...\n")

    matrices = read_scores(csv_text, is_text=True)
    reports = analyze_scores(matrices, [("repair", "auto")], alpha=0.05)
    print(render_report(reports))


if __name__ == "__main__":
    main()
