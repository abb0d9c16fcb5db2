"""Command-line entry points: run, stats, replay, serve."""

from __future__ import annotations

import argparse
import os
import sys

from .logs import JsonlLogWriter, TrialLog, diff_logs
from .orchestrator import (
    BackendSpec,
    ConfigError,
    OperatorSpec,
    TrialConfig,
    TrialFailure,
    replay_trial,
    run_batch,
)
from .planner import DEFAULT_CREDENTIAL_ENV, DEFAULT_INSTRUCTION, DEFAULT_MODEL
from .protocol import ALWAYS_ASSIST, ALWAYS_DECLINE, DELAY_K, ScriptedPolicy
from .report import (
    EmptyFamily,
    SchemaError,
    analyze_scores,
    parse_pair_spec,
    read_scores,
    render_report,
    report_json,
)
from .stats import summarize_progress
from .world import ParseError, ValidationError, load_scenario_file

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def parse_seeds(spec: str) -> list[int]:
    """'1..12' or '3,5,9' or '4'."""
    seeds: list[int] = []
    for chunk in spec.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ".." in chunk:
            low, high = chunk.split("..", 1)
            seeds.extend(range(int(low), int(high) + 1))
        else:
            seeds.append(int(chunk))
    if not seeds:
        raise ValueError(f"no seeds in {spec!r}")
    return seeds


def parse_operator(spec: str) -> OperatorSpec:
    """'always_assist' | 'delay:K' | 'always_decline' | 'optimal_script' | 'live'."""
    if spec == "live":
        return OperatorSpec(kind="live")
    if spec == "optimal_script":
        return OperatorSpec(kind="teleop_script", script_name="optimal")
    if spec == ALWAYS_ASSIST:
        return OperatorSpec(kind="scripted", policy=ScriptedPolicy(ALWAYS_ASSIST))
    if spec == ALWAYS_DECLINE:
        return OperatorSpec(kind="scripted", policy=ScriptedPolicy(ALWAYS_DECLINE))
    if spec.startswith("delay:"):
        return OperatorSpec(
            kind="scripted", policy=ScriptedPolicy(DELAY_K, delay_ticks=int(spec.split(":", 1)[1]))
        )
    raise ValueError(f"unknown operator {spec!r}")


def _add_backend_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--backend", choices=["rule", "service"], default="rule")
    parser.add_argument("--endpoint", default="", help="chat-completion endpoint URL")
    parser.add_argument("--model", default=DEFAULT_MODEL)
    parser.add_argument(
        "--credential-env", default=DEFAULT_CREDENTIAL_ENV, help="env var holding the API key"
    )
    parser.add_argument("--reply-cache", default=None, help="prompt-hash reply cache file")


def _backend_spec(args: argparse.Namespace) -> BackendSpec:
    if args.backend == "rule":
        return BackendSpec(kind="rule_based")
    return BackendSpec(
        kind="external_service",
        endpoint=args.endpoint,
        model=args.model,
        credential_env=args.credential_env,
        cache_path=args.reply_cache,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="repairsim")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="run trials and write JSONL logs")
    run.add_argument("--scenario", required=True)
    run.add_argument("--mode", choices=["teleop", "repair", "auto"], required=True)
    run.add_argument("--seeds", default="0", help="e.g. 1..12 or 3,5,9")
    run.add_argument("--operator", default="always_assist")
    run.add_argument("--budget", type=int, default=None, help="override the scenario tick budget")
    run.add_argument("--give-up-at", type=int, default=None, help="scripted give-up tick")
    run.add_argument("--instruction", default=DEFAULT_INSTRUCTION)
    run.add_argument("--log-dir", default="logs")
    run.add_argument("--run-id", default="run")
    run.add_argument("--jobs", type=int, default=1)
    _add_backend_arguments(run)

    stats = subparsers.add_parser("stats", help="two-stage analysis of a scores CSV")
    stats.add_argument("--input", required=True, help="CSV: subject,condition,measure,value")
    stats.add_argument("--pairs", default="", help="post hoc pairs, e.g. repair:auto,teleop:auto")
    stats.add_argument("--alpha", type=float, default=0.05)
    stats.add_argument("--exact-friedman", action="store_true")
    stats.add_argument("--json", dest="json_out", default=None, help="write the JSON report here")

    replay = subparsers.add_parser("replay", help="re-run logs and verify byte-identical output")
    replay.add_argument("logs", nargs="+")

    serve = subparsers.add_parser("serve", help="run one live trial behind the console gateway")
    serve.add_argument("--scenario", required=True)
    serve.add_argument("--mode", choices=["repair"], default="repair")
    serve.add_argument("--seed", type=int, default=0)
    serve.add_argument("--budget", type=int, default=None)
    serve.add_argument("--instruction", default=DEFAULT_INSTRUCTION)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8765)
    serve.add_argument("--cadence", type=int, default=5, help="snapshot every N ticks")
    serve.add_argument("--frontend", default=None, help="directory with console assets")
    serve.add_argument("--log-dir", default="logs")
    serve.add_argument("--run-id", default="live")
    _add_backend_arguments(serve)

    return parser


def cmd_run(args: argparse.Namespace) -> int:
    if not os.path.isfile(args.scenario):
        print(f"error: scenario not found: {args.scenario}", file=sys.stderr)
        return EXIT_USAGE
    try:
        scenario = load_scenario_file(args.scenario)
        operator = parse_operator(args.operator)
        if operator.kind == "live":
            print("error: a live operator requires the serve command (gateway)", file=sys.stderr)
            return EXIT_USAGE
        if args.give_up_at is not None:
            operator = OperatorSpec(
                kind=operator.kind,
                policy=ScriptedPolicy(
                    kind=operator.policy.kind,
                    delay_ticks=operator.policy.delay_ticks,
                    give_up_at_tick=args.give_up_at,
                ),
                script=operator.script,
                script_name=operator.script_name,
            )
        seeds = parse_seeds(args.seeds)
        backend = _backend_spec(args)
        cfgs = [
            TrialConfig(
                scenario=scenario,
                mode=args.mode,
                backend=backend,
                operator=operator,
                seed=seed,
                tick_budget=args.budget,
                instruction=args.instruction,
            )
            for seed in seeds
        ]
        for cfg in cfgs:
            cfg.validate()
    except (ParseError, ValidationError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    out_dir = os.path.join(args.log_dir, args.run_id)
    os.makedirs(out_dir, exist_ok=True)

    def log_path(seed: int) -> str:
        return os.path.join(out_dir, f"{seed}-{args.mode}.jsonl")

    # logs stream to disk during the trial: a crash leaves a parseable prefix
    results = run_batch(
        cfgs,
        jobs=args.jobs,
        hooks_factory=lambda index, cfg: JsonlLogWriter(log_path(cfg.seed)),
    )

    failures = 0
    progress: dict[str, list[tuple[int, int, int]]] = {args.mode: []}
    for seed, result in zip(seeds, results):
        if isinstance(result, TrialFailure):
            failures += 1
            print(f"trial seed={seed} failed: {result.error}", file=sys.stderr)
            continue
        progress[args.mode].append(result.progress())
        print(
            f"seed={seed} mode={args.mode} reason={result.termination} "
            f"progress={result.progress()} -> {log_path(seed)}"
        )

    if progress[args.mode]:
        print()
        print(f"{'mode':<10}{'measure':<10}{'mean±std':<16}{'n':<4}")
        for row in summarize_progress(progress):
            print(f"{row.group:<10}{row.measure:<10}{row.display():<16}{row.n:<4}")
    return EXIT_FAILURE if failures else EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    if not os.path.isfile(args.input):
        print(f"error: input not found: {args.input}", file=sys.stderr)
        return EXIT_USAGE
    try:
        matrices = read_scores(args.input)
        pairs = parse_pair_spec(args.pairs)
        reports = analyze_scores(matrices, pairs, alpha=args.alpha, exact_friedman=args.exact_friedman)
    except (SchemaError, EmptyFamily) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(render_report(reports), end="")
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as handle:
            handle.write(report_json(reports))
        print(f"json report -> {args.json_out}")
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    status = EXIT_OK
    for path in args.logs:
        if not os.path.isfile(path):
            print(f"error: log not found: {path}", file=sys.stderr)
            return EXIT_USAGE
        original = TrialLog.load(path)
        regenerated = replay_trial(original)
        diff = diff_logs(original, regenerated)
        if diff is None:
            print(f"OK {path}")
        else:
            status = EXIT_FAILURE
            print(f"MISMATCH {path} at seq {diff.seq}")
            print(f"  expected: {diff.expected}")
            print(f"  actual:   {diff.actual}")
    return status


def cmd_serve(args: argparse.Namespace) -> int:
    from .gateway import GatewayServer

    if not os.path.isfile(args.scenario):
        print(f"error: scenario not found: {args.scenario}", file=sys.stderr)
        return EXIT_USAGE
    try:
        scenario = load_scenario_file(args.scenario)
        cfg = TrialConfig(
            scenario=scenario,
            mode=args.mode,
            backend=_backend_spec(args),
            operator=OperatorSpec(kind="live"),
            seed=args.seed,
            tick_budget=args.budget,
            instruction=args.instruction,
        )
        cfg.validate()
    except (ParseError, ValidationError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    frontend = args.frontend
    if frontend is None:
        bundled = os.path.join(os.path.dirname(__file__), "..", "..", "frontend", "dist")
        frontend = os.path.realpath(bundled) if os.path.isdir(bundled) else None
    out_dir = os.path.join(args.log_dir, args.run_id)
    os.makedirs(out_dir, exist_ok=True)
    log_path = os.path.join(out_dir, f"{args.seed}-{args.mode}.jsonl")
    server = GatewayServer(
        cfg,
        host=args.host,
        port=args.port,
        cadence=args.cadence,
        frontend_dir=frontend,
        log_writer=JsonlLogWriter(log_path),
    )
    server.start()
    # flush so wrapping processes see the port immediately
    print(f"gateway listening on ws://{args.host}:{server.port}/ws", flush=True)
    if frontend:
        print(f"console at http://{args.host}:{server.port}/", flush=True)
    try:
        server.wait_finished()
    except KeyboardInterrupt:
        print("interrupted")
    finally:
        server.stop()
    if server.trial_error:
        print(f"trial failed: {server.trial_error}", file=sys.stderr)
        return EXIT_FAILURE
    if server.trial_log is not None:
        print(f"log -> {log_path}")
        print(f"reason={server.trial_log.termination} progress={server.trial_log.progress()}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "stats":
        return cmd_stats(args)
    if args.command == "replay":
        return cmd_replay(args)
    if args.command == "serve":
        return cmd_serve(args)
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
