"""Runs one trial end to end in Teleop, REPAIR, or Auto mode.

One executor owns the world and both planning contexts.  Robots are
scheduled round-robin, one command each per step; while a help session is
open, only operator actions touch the world.  Collisions teleport both
robots home with the clock still running.  The trial ends at the first of:
everything collected, an explicit give-up, or the tick budget.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field

from . import actions, planner, protocol
from .actions import SkillCommand, SkillResult
from .logs import TrialLog, config_digest, SCHEMA_VERSION
from .planner import (
    BackendError,
    ExternalServiceBackend,
    PlanningContext,
    RuleBasedBackend,
    UnparseableReply,
)
from .protocol import (
    HelpBroker,
    HelpRequest,
    OperatorAction,
    ScriptedPolicy,
    TeleopCommand,
    run_scripted_operator,
)
from .world import (
    CARRIER,
    MANIPULATOR,
    ProgressCounts,
    ScenarioConfig,
    WorldState,
    collected_count,
    init_world,
    load_scenario,
    reset_to_initial,
)

MODE_TELEOP = "teleop"
MODE_REPAIR = "repair"
MODE_AUTO = "auto"
MODES = (MODE_TELEOP, MODE_REPAIR, MODE_AUTO)

ALL_COLLECTED = "all_collected"
GAVE_UP = "gave_up"
TIME_LIMIT = "time_limit"

ROBOT_ORDER = (CARRIER, MANIPULATOR)


class ConfigError(ValueError):
    pass


class ProtocolViolation(RuntimeError):
    pass


class OrchestratorError(RuntimeError):
    pass


@dataclass(frozen=True)
class BackendSpec:
    kind: str = "rule_based"  # "rule_based" | "external_service"
    endpoint: str = ""
    model: str = planner.DEFAULT_MODEL
    credential_env: str = planner.DEFAULT_CREDENTIAL_ENV
    timeout: float = 60.0
    cache_path: str | None = None

    def build(self, mode: str):
        planning_mode = planner.MODE_AUTO if mode == MODE_AUTO else planner.MODE_REPAIR
        if self.kind == "rule_based":
            return RuleBasedBackend(mode=planning_mode)
        if self.kind == "external_service":
            if not self.endpoint:
                raise ConfigError("external_service backend needs an endpoint")
            return ExternalServiceBackend(
                endpoint=self.endpoint,
                model=self.model,
                credential_env=self.credential_env,
                timeout=self.timeout,
                cache_path=self.cache_path,
                mode=planning_mode,
            )
        raise ConfigError(f"unknown backend kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "endpoint": self.endpoint,
            "model": self.model,
            "credential_env": self.credential_env,
            "timeout": self.timeout,
            "cache_path": self.cache_path,
        }

    @staticmethod
    def from_dict(data: dict) -> "BackendSpec":
        return BackendSpec(
            kind=data.get("kind", "rule_based"),
            endpoint=data.get("endpoint", ""),
            model=data.get("model", planner.DEFAULT_MODEL),
            credential_env=data.get("credential_env", planner.DEFAULT_CREDENTIAL_ENV),
            timeout=data.get("timeout", 60.0),
            cache_path=data.get("cache_path"),
        )


@dataclass(frozen=True)
class OperatorSpec:
    """Where operator behaviour comes from: a scripted policy, a teleop
    command script, or a live console attached through the gateway."""

    kind: str = "scripted"  # "scripted" | "teleop_script" | "live"
    policy: ScriptedPolicy = field(default_factory=ScriptedPolicy)
    script: tuple[TeleopCommand, ...] = ()
    script_name: str = ""  # "optimal" builds the script from the scenario

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "policy": self.policy.to_dict(),
            "script": [command.to_dict() for command in self.script],
            "script_name": self.script_name,
        }

    @staticmethod
    def from_dict(data: dict) -> "OperatorSpec":
        policy_data = data.get("policy") or {}
        return OperatorSpec(
            kind=data.get("kind", "scripted"),
            policy=ScriptedPolicy(
                kind=policy_data.get("kind", protocol.ALWAYS_ASSIST),
                delay_ticks=policy_data.get("delay_ticks", 0),
                give_up_at_tick=policy_data.get("give_up_at_tick"),
            ),
            script=tuple(TeleopCommand.from_dict(c) for c in data.get("script", [])),
            script_name=data.get("script_name", ""),
        )


@dataclass
class TrialConfig:
    scenario: ScenarioConfig
    mode: str
    backend: BackendSpec = field(default_factory=BackendSpec)
    operator: OperatorSpec = field(default_factory=OperatorSpec)
    seed: int = 0
    tick_budget: int | None = None  # None: use the scenario's budget
    instruction: str = planner.DEFAULT_INSTRUCTION

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.budget <= 0:
            raise ConfigError("tick budget must be positive")
        if self.mode == MODE_TELEOP and self.operator.kind == "live":
            raise ConfigError("live teleop is not supported; use a teleop script")
        if self.mode == MODE_TELEOP and self.operator.kind == "scripted":
            raise ConfigError("teleop mode needs operator kind 'teleop_script'")
        if not self.instruction.strip():
            raise ConfigError("instruction must be non-empty")

    @property
    def budget(self) -> int:
        return self.tick_budget if self.tick_budget is not None else self.scenario.tick_budget

    def to_dict(self) -> dict:
        if self.scenario.source_text is None:
            raise ConfigError("scenario has no source text; load it from a document")
        return {
            "scenario_text": self.scenario.source_text,
            "mode": self.mode,
            "backend": self.backend.to_dict(),
            "operator": self.operator.to_dict(),
            "seed": self.seed,
            "tick_budget": self.tick_budget,
            "instruction": self.instruction,
        }

    @staticmethod
    def from_dict(data: dict) -> "TrialConfig":
        return TrialConfig(
            scenario=load_scenario(data["scenario_text"]),
            mode=data["mode"],
            backend=BackendSpec.from_dict(data.get("backend", {})),
            operator=OperatorSpec.from_dict(data.get("operator", {})),
            seed=data.get("seed", 0),
            tick_budget=data.get("tick_budget"),
            instruction=data.get("instruction", planner.DEFAULT_INSTRUCTION),
        )

    def digest(self) -> str:
        return config_digest(self.to_dict())


class TrialHooks:
    """Observer callbacks a trial runner invokes; all optional no-ops."""

    def on_header(self, header: dict) -> None:
        pass

    def on_event(self, event: dict, world: WorldState) -> None:
        pass

    def on_tick(self, world: WorldState) -> None:
        pass

    def on_help(self, request: HelpRequest, world: WorldState) -> None:
        pass

    def on_resume(self, request_id: str) -> None:
        pass

    def on_operator_error(self, error: str) -> None:
        pass


class LiveControl:
    """Bridge between a live operator connection and the trial executor.

    The gateway owns the inbound queue; the executor blocks on it whenever a
    help session is open.  ``give_up`` may arrive at any time.
    """

    def __init__(self) -> None:
        import queue
        import threading

        self._queue: "queue.Queue[tuple[str, object]]" = queue.Queue()
        self._give_up = threading.Event()
        self.on_help = None  # callable(HelpRequest)
        self.on_world = None  # callable(WorldState)
        self.on_event = None  # callable(dict)

    def submit_action(self, action: OperatorAction) -> None:
        self._queue.put(("action", action))

    def submit_give_up(self) -> None:
        self._give_up.set()
        self._queue.put(("give_up", None))

    def give_up_requested(self) -> bool:
        return self._give_up.is_set()

    def next_action(self) -> OperatorAction | None:
        """Blocking; None signals a give-up arrived instead of an action."""
        kind, payload = self._queue.get()
        if kind == "give_up":
            return None
        return payload  # type: ignore[return-value]


class _ReplayControl:
    """Feeds operator actions recorded in an earlier log back into a trial."""

    def __init__(self, actions_by_request: dict[str, list[OperatorAction]], give_up_tick: int | None) -> None:
        self.actions_by_request = actions_by_request
        self.give_up_tick = give_up_tick

    def actions_for(self, request_id: str) -> list[OperatorAction]:
        return self.actions_by_request.get(request_id, [])


class _TrialRunner:
    def __init__(self, cfg: TrialConfig, hooks=None, live: LiveControl | None = None, replay: _ReplayControl | None = None):
        cfg.validate()
        if cfg.operator.kind == "live" and live is None and replay is None:
            raise ConfigError("live operator requires an attached control channel")
        self.cfg = cfg
        self.hooks = hooks
        self.live = live
        self.replay = replay
        self.world: WorldState = init_world(cfg.scenario, cfg.seed)
        self.broker = HelpBroker()
        self.seq = 0
        self.help_counter = 0
        self.events: list[dict] = []
        self.reason: str | None = None
        header_config = cfg.to_dict()
        self.log = TrialLog(
            header={
                "type": "trial_header",
                "version": SCHEMA_VERSION,
                "mode": cfg.mode,
                "seed": cfg.seed,
                "digest": config_digest(header_config),
                "config": header_config,
            }
        )

    # -- event plumbing ----------------------------------------------------

    def emit(self, event_type: str, **payload) -> dict:
        event = {"type": event_type, "seq": self.seq, "tick": self.world.tick}
        event.update(payload)
        self.seq += 1
        self.log.events.append(event)
        if self.hooks is not None:
            self.hooks.on_event(event, self.world)
        return event

    def after_execution(self) -> None:
        if self.hooks is not None:
            self.hooks.on_tick(self.world)

    # -- termination -------------------------------------------------------

    def check_termination(self) -> bool:
        if self.reason is not None:
            return True
        if len(self.world.collected) == len(self.world.objects):
            self.reason = ALL_COLLECTED
            return True
        if self.world.tick >= self.cfg.budget:
            self.reason = TIME_LIMIT
            return True
        return False

    def check_give_up(self) -> bool:
        if self.reason is not None:
            return True
        policy = self.cfg.operator.policy
        if (
            self.cfg.operator.kind in ("scripted", "teleop_script")
            and policy.give_up_at_tick is not None
            and self.world.tick >= policy.give_up_at_tick
        ):
            self.reason = GAVE_UP
            self.emit("give_up", source="scripted_policy")
            return True
        if self.replay is not None and self.replay.give_up_tick is not None:
            if self.world.tick >= self.replay.give_up_tick:
                self.reason = GAVE_UP
                self.emit("give_up", source="live_operator")
                return True
        if self.live is not None and self.live.give_up_requested():
            self.reason = GAVE_UP
            self.emit("give_up", source="live_operator")
            return True
        return False

    # -- command execution -------------------------------------------------

    def execute_planner_command(self, ctx: PlanningContext, cmd: SkillCommand) -> SkillResult:
        if self.cfg.mode == MODE_REPAIR:
            # Protocol safety: planning output must never touch the world
            # while any help session is open.
            if self.broker.phase(ctx.robot) != protocol.RUNNING or self.broker.active:
                raise ProtocolViolation(f"planner command for {ctx.robot} while suspended")
        _, result = actions.execute_skill(self.world, cmd)
        self.emit("skill", robot=cmd.robot, command=cmd.to_dict(), result=result.to_dict())
        ctx.note_result(cmd, result)
        self.after_execution()
        return result

    def handle_collision(self) -> None:
        event = actions.check_collision(self.world)
        if event is None:
            return
        self.emit("collision", room=event.room, during=event.during)
        reset_to_initial(self.world)
        self.emit("reset", collected=collected_count(self.world).to_dict())
        self.after_execution()

    # -- help sessions -----------------------------------------------------

    def run_help_session(self, ctx: PlanningContext, request: HelpRequest, failed_room: str | None) -> None:
        self.emit("help_raised", request=request.to_dict())
        if self.hooks is not None:
            self.hooks.on_help(request, self.world)
        if self.replay is not None:
            operator_actions = iter(self.replay.actions_for(request.id))
            next_action = lambda: next(operator_actions, None)  # noqa: E731
        elif self.cfg.operator.kind == "live":
            next_action = self.live.next_action
        else:
            scripted = iter(
                run_scripted_operator(self.cfg.operator.policy, request, self.world, failed_room)
            )
            next_action = lambda: next(scripted, None)  # noqa: E731

        while self.broker.session is not None and self.broker.session.outcome is None:
            action = next_action()
            if action is None:
                # Live give-up or an exhausted recorded session: the request
                # ends with the trial, never silently dropped.
                self.reason = self.reason or GAVE_UP
                if self.reason == GAVE_UP and not any(
                    e["type"] == "give_up" for e in self.log.events
                ):
                    self.emit("give_up", source="live_operator")
                self.emit("help_unresolved", request_id=request.id)
                return
            try:
                phase, _ = self.broker.operator_step(self.world, action)
            except protocol.InvalidTeleop as exc:
                # Recorded with the attempted action so replays walk the
                # exact same path, rejections included.
                self.emit(
                    "operator_error",
                    request_id=request.id,
                    action=action.to_dict(),
                    error=str(exc),
                )
                if self.hooks is not None:
                    self.hooks.on_operator_error(str(exc))
                continue
            payload = {"request_id": request.id, "action": action.to_dict(), "phase": phase}
            if action.kind == "teleop":
                session_actions = self.broker.session.actions
                _, result = session_actions[-1]
                payload["result"] = result.to_dict() if result else None
            self.emit("operator_action", **payload)
            self.after_execution()
            if action.kind == "teleop":
                self.handle_collision()
            if self.check_termination():
                if self.broker.session is not None and self.broker.session.outcome is None:
                    # The budget expired mid-intervention: cut here and log
                    # the request as unresolved.
                    self.emit("help_unresolved", request_id=request.id)
                    return
                break  # decided session still resumes; resuming costs no time

        _, session = self.broker.resume(ctx)
        self.emit(
            "feedback_applied",
            request_id=request.id,
            outcome=session.outcome,
            text=session.closing_text,
            delta=session.delta().to_dict(),
        )
        if self.hooks is not None:
            self.hooks.on_resume(request.id)

    # -- planned modes (repair / auto) --------------------------------------

    def run_planned(self) -> None:
        backend = self.cfg.backend.build(self.cfg.mode)
        bundle = planner.assemble_decomposition_prompt(self.cfg.scenario, self.cfg.instruction)
        try:
            allocation = planner.decompose_and_allocate(bundle, backend)
        except (BackendError, UnparseableReply) as exc:
            self.emit("backend_error", stage="decompose", error=str(exc))
            raise
        self.drain_backend(backend, stage="decompose")
        self.emit(
            "allocation",
            subtasks={
                robot: [subtask.to_dict() for subtask in sequence.subtasks]
                for robot, sequence in allocation.items()
            },
        )
        contexts = {robot: PlanningContext(robot, allocation[robot]) for robot in ROBOT_ORDER}
        done: dict[str, bool] = {robot: False for robot in ROBOT_ORDER}

        if self.check_termination():
            return
        while True:
            if self.check_give_up():
                return
            for robot in ROBOT_ORDER:
                ctx = contexts[robot]
                if done[robot]:
                    continue
                cmd = self.plan_one(ctx, backend)
                self.drain_backend(backend, stage="plan")
                if cmd is None:
                    continue
                if cmd.kind == actions.DONE:
                    done[robot] = True
                    continue
                if cmd.kind == actions.HELP and self.cfg.mode == MODE_AUTO:
                    # Help is disabled in fully autonomous mode.
                    self.emit("planner_error", robot=robot, error="help disabled in auto mode")
                    done[robot] = True
                    continue
                failed_room = None
                if cmd.kind == actions.HELP:
                    failed_skill, failed_object, failed_room = planner.failure_context(ctx)
                result = self.execute_planner_command(ctx, cmd)
                if cmd.kind == actions.HELP and result.ok:
                    if self.check_termination():
                        # The help call itself ran out the clock; nothing
                        # gets raised into a trial that is already over.
                        return
                    self.help_counter += 1
                    request = HelpRequest(
                        id=f"help-{self.help_counter:04d}",
                        robot=robot,
                        message=cmd.message,
                        failed_skill=failed_skill,
                        failed_object=failed_object,
                        raised_at=self.world.tick,
                    )
                    self.broker.raise_help(ctx, request)
                    self.run_help_session(ctx, request, failed_room)
                    if self.reason is not None:
                        return
                else:
                    # Teleop actions inside a session already ran their own
                    # collision checks; only bare skill executions check here.
                    self.handle_collision()
                if self.check_termination():
                    return
            if all(done.values()):
                raise OrchestratorError("all robots finished but the trial did not terminate")

    def plan_one(self, ctx: PlanningContext, backend) -> SkillCommand | None:
        try:
            return planner.next_action(ctx, backend)
        except (BackendError, UnparseableReply) as exc:
            # A dead or incoherent backend counts as a failure of the command
            # being planned; REPAIR escalates through the normal help path.
            self.emit("backend_error", stage="plan", robot=ctx.robot, error=str(exc))
            synthetic_cmd, synthetic_result = self.synthesize_failure(ctx)
            ctx.note_result(synthetic_cmd, synthetic_result)
            _, wait_result = actions.execute_skill(self.world, actions.wait(ctx.robot))
            self.emit(
                "skill",
                robot=ctx.robot,
                command=actions.wait(ctx.robot).to_dict(),
                result=wait_result.to_dict(),
            )
            self.after_execution()
            return None

    def synthesize_failure(self, ctx: PlanningContext) -> tuple[SkillCommand, SkillResult]:
        subtask = ctx.current_subtask()
        if subtask is None or subtask.verb == planner.VERB_WAIT_FOR:
            cmd = actions.detect(ctx.robot, subtask.object if subtask else "unknown")
        elif subtask.verb == planner.VERB_NAVIGATE:
            cmd = actions.navigate(ctx.robot, subtask.room)
        elif subtask.verb == planner.VERB_DETECT:
            cmd = actions.detect(ctx.robot, subtask.object)
        elif subtask.verb == planner.VERB_PICK:
            cmd = actions.pick(ctx.robot, subtask.object)
        else:
            cmd = actions.place(ctx.robot, CARRIER)
        result = SkillResult("failure", "backend_error", 0, "planning backend failed")
        return cmd, result

    def drain_backend(self, backend, stage: str) -> None:
        drain = getattr(backend, "drain_exchanges", None)
        if drain is None:
            return
        for exchange in drain():
            self.emit("backend_exchange", stage=stage, **exchange)

    # -- teleop mode ---------------------------------------------------------

    def run_teleop(self) -> None:
        script = list(self.cfg.operator.script)
        if not script and self.cfg.operator.script_name == "optimal":
            script = teleop_optimal_script(self.cfg.scenario)
        if not script:
            raise ConfigError("teleop mode needs a command script")
        if self.check_termination():
            return
        for command in script:
            if self.check_give_up():
                return
            try:
                cmd = protocol.teleop_to_skill(self.world, command)
            except protocol.InvalidTeleop as exc:
                self.emit("operator_error", error=str(exc))
                continue
            _, result = actions.execute_skill(self.world, cmd, privileged=True)
            self.emit("operator_action", action={"kind": "teleop", "command": command.to_dict()}, result=result.to_dict(), phase="teleop")
            self.after_execution()
            self.handle_collision()
            if self.check_termination():
                return
        # Script exhausted with trash still out there: the operator stopped.
        if self.reason is None:
            self.reason = GAVE_UP
            self.emit("give_up", source="script_exhausted")

    # -- entry ---------------------------------------------------------------

    def run(self) -> TrialLog:
        if self.hooks is not None:
            header_hook = getattr(self.hooks, "on_header", None)
            if header_hook is not None:
                header_hook(self.log.header)
        if self.cfg.mode == MODE_TELEOP:
            self.run_teleop()
        else:
            self.run_planned()
        counts = collected_count(self.world)
        self.log.footer = {
            "type": "trial_footer",
            "seq": self.seq,
            "tick": self.world.tick,
            "reason": self.reason or TIME_LIMIT,
            "collected": counts.to_dict(),
            "final_digest": self.world.digest(),
        }
        if self.hooks is not None:
            self.hooks.on_event(self.log.footer, self.world)
        return self.log


def run_trial(cfg: TrialConfig, hooks=None, live: LiveControl | None = None) -> TrialLog:
    """Execute one trial and return its complete log."""
    return _TrialRunner(cfg, hooks=hooks, live=live).run()


def task_progress(log: TrialLog) -> ProgressCounts:
    """Final collected counts of a finished trial."""
    whole, level1, level2 = log.progress()
    return ProgressCounts(whole=whole, level1=level1, level2=level2)


@dataclass(frozen=True)
class TrialFailure:
    index: int
    error: str

    def to_dict(self) -> dict:
        return {"index": self.index, "error": self.error}


def run_batch(
    cfgs: list[TrialConfig], jobs: int = 1, hooks_factory=None
) -> list[TrialLog | TrialFailure]:
    """Run independent trials; per-trial errors never abort the batch.

    ``hooks_factory(index, cfg)`` may supply per-trial hooks, e.g. streaming
    log writers.
    """

    def one(indexed: tuple[int, TrialConfig]) -> TrialLog | TrialFailure:
        index, cfg = indexed
        hooks = hooks_factory(index, cfg) if hooks_factory is not None else None
        try:
            return run_trial(cfg, hooks=hooks)
        except Exception as exc:  # noqa: BLE001 - isolation boundary
            return TrialFailure(index=index, error=f"{type(exc).__name__}: {exc}")
        finally:
            closer = getattr(hooks, "close", None)
            if closer is not None:
                closer()

    items = list(enumerate(cfgs))
    if jobs <= 1 or len(items) <= 1:
        return [one(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, items))


def teleop_optimal_script(scenario: ScenarioConfig) -> list[TeleopCommand]:
    """Shortest full-collection command list for a scripted teleoperator."""
    script: list[TeleopCommand] = []
    for room, object_ids in scenario.placement.items():
        script.append(TeleopCommand("move", CARRIER, room))
        script.append(TeleopCommand("move", MANIPULATOR, room))
        for object_id in object_ids:
            script.append(TeleopCommand("grasp", MANIPULATOR, object_id))
            script.append(TeleopCommand("place_into_box", MANIPULATOR))
        script.append(TeleopCommand("move", CARRIER, "trash_area"))
    return script


def replay_trial(log: TrialLog) -> TrialLog:
    """Re-run a trial from its own header, feeding back recorded operator
    input where the original had a live console."""
    cfg = TrialConfig.from_dict(log.header["config"])
    replay = None
    if cfg.operator.kind == "live":
        # Rejected attempts (operator_error) replay alongside accepted ones.
        actions_by_request: dict[str, list[OperatorAction]] = {}
        for event in log.events_of("operator_action", "operator_error"):
            request_id = event.get("request_id")
            if request_id is None or "action" not in event:
                continue
            actions_by_request.setdefault(request_id, []).append(
                OperatorAction.from_dict(event["action"])
            )
        give_up_tick = None
        for event in log.events_of("give_up"):
            give_up_tick = event["tick"]
            break
        replay = _ReplayControl(actions_by_request, give_up_tick)
    return _TrialRunner(cfg, replay=replay).run()
