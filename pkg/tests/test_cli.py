from __future__ import annotations

import json
import os

import pytest

from repairsim.cli import main, parse_operator, parse_seeds
from tests.conftest import scenario_path


def test_parse_seeds():
    assert parse_seeds("1..4") == [1, 2, 3, 4]
    assert parse_seeds("3,5,9") == [3, 5, 9]
    assert parse_seeds("7") == [7]
    assert parse_seeds("1..2,9") == [1, 2, 9]
    with pytest.raises(ValueError):
        parse_seeds("")


def test_parse_operator():
    assert parse_operator("always_assist").policy.kind == "always_assist"
    assert parse_operator("delay:40").policy.delay_ticks == 40
    assert parse_operator("optimal_script").script_name == "optimal"
    assert parse_operator("live").kind == "live"
    with pytest.raises(ValueError):
        parse_operator("psychic")


def test_run_writes_logs_and_summary(tmp_path, capsys):
    status = main(
        [
            "run",
            "--scenario", scenario_path("paper_trash_task_autoloop"),
            "--mode", "auto",
            "--seeds", "1..3",
            "--log-dir", str(tmp_path),
            "--run-id", "t",
        ]
    )
    assert status == 0
    out = capsys.readouterr().out
    assert "0.00±0.00" in out
    for seed in (1, 2, 3):
        path = tmp_path / "t" / f"{seed}-auto.jsonl"
        assert path.is_file()
        first = path.read_text().splitlines()[0]
        header = json.loads(first)
        assert header["type"] == "trial_header"
        assert header["seed"] == seed


def test_streamed_log_matches_canonical_serialization(tmp_path):
    from repairsim.logs import TrialLog

    main(
        [
            "run",
            "--scenario", scenario_path("paper_trash_task_autoloop"),
            "--mode", "repair",
            "--operator", "always_assist",
            "--seeds", "9",
            "--log-dir", str(tmp_path),
            "--run-id", "t",
        ]
    )
    path = tmp_path / "t" / "9-repair.jsonl"
    text = path.read_text()
    log = TrialLog.parse(text)
    assert text == log.to_jsonl()
    # append-only streaming means any prefix parses (crashed-trial guarantee)
    prefix = "\n".join(text.splitlines()[:10]) + "\n"
    partial = TrialLog.parse(prefix)
    assert partial.footer is None
    assert len(partial.events) == 9


def test_run_missing_scenario_exits_2(capsys):
    status = main(["run", "--scenario", "no/such/file", "--mode", "auto"])
    assert status == 2
    assert "scenario not found" in capsys.readouterr().err


def test_run_live_operator_requires_serve(capsys):
    status = main(
        [
            "run",
            "--scenario", scenario_path("paper_trash_task"),
            "--mode", "repair",
            "--operator", "live",
        ]
    )
    assert status == 2
    assert "serve" in capsys.readouterr().err


def test_replay_ok_and_tamper(tmp_path, capsys):
    main(
        [
            "run",
            "--scenario", scenario_path("paper_trash_task_autoloop"),
            "--mode", "repair",
            "--operator", "always_assist",
            "--seeds", "5",
            "--log-dir", str(tmp_path),
            "--run-id", "t",
        ]
    )
    log_path = tmp_path / "t" / "5-repair.jsonl"
    capsys.readouterr()
    assert main(["replay", str(log_path)]) == 0
    assert capsys.readouterr().out.startswith("OK")

    lines = log_path.read_text().splitlines()
    record = json.loads(lines[4])
    record["tick"] += 7
    lines[4] = json.dumps(record, sort_keys=True, separators=(",", ":"))
    tampered = tmp_path / "t" / "tampered.jsonl"
    tampered.write_text("\n".join(lines) + "\n")
    assert main(["replay", str(tampered)]) == 1
    out = capsys.readouterr().out
    assert "MISMATCH" in out
    assert "at seq 4" in out


def test_stats_pipeline_from_simulated_logs(tmp_path, capsys):
    # 12 paired repair/auto trials -> CSV -> two-stage report
    from repairsim.logs import TrialLog
    from repairsim.report import progress_to_csv

    for mode, operator in (("auto", "always_assist"), ("repair", "always_assist")):
        main(
            [
                "run",
                "--scenario", scenario_path("paper_trash_task_autoloop"),
                "--mode", mode,
                "--operator", operator,
                "--seeds", "1..12",
                "--log-dir", str(tmp_path),
                "--run-id", "t",
            ]
        )
    logs = []
    for seed in range(1, 13):
        for mode in ("auto", "repair"):
            logs.append(TrialLog.load(str(tmp_path / "t" / f"{seed}-{mode}.jsonl")))
    csv_path = tmp_path / "scores.csv"
    csv_path.write_text(progress_to_csv(logs))
    capsys.readouterr()

    json_path = tmp_path / "report.json"
    status = main(
        [
            "stats",
            "--input", str(csv_path),
            "--pairs", "repair:auto",
            "--json", str(json_path),
        ]
    )
    assert status == 0
    payload = json.loads(json_path.read_text())
    whole = next(r for r in payload if r["measure"] == "whole")
    assert whole["significant"] is True
    pair = whole["pairs"][0]
    assert pair["p_value"] == pytest.approx(2 * (1 / 2**12), abs=1e-15)
    assert pair["p_value"] < 0.05


def test_stats_missing_cell_schema_error(tmp_path, capsys):
    csv_path = tmp_path / "bad.csv"
    csv_path.write_text(
        "subject,condition,measure,value\n"
        "s0,repair,whole,6\n"
        "s0,auto,whole,0\n"
        "s1,repair,whole,5\n"
    )
    status = main(["stats", "--input", str(csv_path), "--pairs", "repair:auto"])
    assert status == 2
    err = capsys.readouterr().err
    assert "subject=s1" in err and "condition=auto" in err


def test_stats_identical_conditions_no_posthoc(tmp_path, capsys):
    rows = ["subject,condition,measure,value"]
    for s in range(4):
        for condition in ("teleop", "repair", "auto"):
            rows.append(f"s{s},{condition},whole,3")
    csv_path = tmp_path / "flat.csv"
    csv_path.write_text("\n".join(rows) + "\n")
    status = main(["stats", "--input", str(csv_path), "--pairs", "repair:auto"])
    assert status == 0
    out = capsys.readouterr().out
    assert "no post hoc" in out
