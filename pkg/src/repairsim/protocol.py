"""Suspend / assist / resume protocol between the planner and an operator.

Raising help suspends planning for the requesting robot; the operator (a
human console or a scripted policy) teleoperates with privileged commands,
then closes the session with feedback or a decline, which resumes planning.
Each request id is consumed by exactly one session.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import actions
from .actions import SkillCommand, SkillResult
from .planner import OperatorDelta, PlanningContext, apply_feedback
from .world import CARRIER, MANIPULATOR, WorldState

HELPABLE_SKILLS = ("navigation", "object_detection", "pick", "place")

RUNNING = "running"
SUSPENDED = "suspended"
OPERATOR_CONTROL = "operator_control"
RESUMING = "resuming"

ALWAYS_ASSIST = "always_assist"
DELAY_K = "delay_k"
ALWAYS_DECLINE = "always_decline"


class IllegalTransition(RuntimeError):
    pass


class MismatchedFailure(ValueError):
    pass


class InvalidTeleop(ValueError):
    pass


@dataclass(frozen=True)
class HelpRequest:
    id: str
    robot: str
    message: str
    failed_skill: str
    failed_object: str | None
    raised_at: int

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "robot": self.robot,
            "message": self.message,
            "failed_skill": self.failed_skill,
            "failed_object": self.failed_object,
            "raised_at": self.raised_at,
        }


@dataclass(frozen=True)
class TeleopCommand:
    kind: str  # "move" | "grasp" | "place_into_box" | "wait"
    robot: str
    target: str | None = None  # room / object
    ticks: int = 1

    def to_dict(self) -> dict:
        return {"kind": self.kind, "robot": self.robot, "target": self.target, "ticks": self.ticks}

    @staticmethod
    def from_dict(data: dict) -> "TeleopCommand":
        return TeleopCommand(
            kind=data["kind"],
            robot=data["robot"],
            target=data.get("target"),
            ticks=data.get("ticks", 1),
        )


@dataclass(frozen=True)
class OperatorAction:
    kind: str  # "teleop" | "feedback" | "decline"
    command: TeleopCommand | None = None
    text: str = ""

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "text": self.text}
        if self.command is not None:
            out["command"] = self.command.to_dict()
        return out

    @staticmethod
    def from_dict(data: dict) -> "OperatorAction":
        command = data.get("command")
        return OperatorAction(
            kind=data["kind"],
            command=TeleopCommand.from_dict(command) if command else None,
            text=data.get("text", ""),
        )


def teleop_move(robot: str, room: str) -> OperatorAction:
    return OperatorAction("teleop", TeleopCommand("move", robot, room))


def teleop_grasp(robot: str, object_id: str) -> OperatorAction:
    return OperatorAction("teleop", TeleopCommand("grasp", robot, object_id))


def teleop_place_into_box(robot: str = MANIPULATOR) -> OperatorAction:
    return OperatorAction("teleop", TeleopCommand("place_into_box", robot))


def teleop_wait(ticks: int) -> OperatorAction:
    return OperatorAction("teleop", TeleopCommand("wait", MANIPULATOR, ticks=max(1, ticks)))


def feedback(text: str) -> OperatorAction:
    return OperatorAction("feedback", text=text)


def decline(reason: str) -> OperatorAction:
    return OperatorAction("decline", text=reason)


@dataclass
class HelpSession:
    request: HelpRequest
    actions: list[tuple[OperatorAction, SkillResult | None]] = field(default_factory=list)
    boxed: list[str] = field(default_factory=list)
    moved: dict[str, str] = field(default_factory=dict)
    outcome: str | None = None  # "feedback" | "decline"
    closing_text: str = ""

    def delta(self) -> OperatorDelta:
        if self.outcome == "decline":
            return OperatorDelta()
        return OperatorDelta(
            boxed=tuple(self.boxed),
            moved=tuple(sorted(self.moved.items())),
        )


class HelpBroker:
    """Owns the per-robot session phase machine and request bookkeeping."""

    def __init__(self) -> None:
        self.phases: dict[str, str] = {CARRIER: RUNNING, MANIPULATOR: RUNNING}
        self.session: HelpSession | None = None
        self.consumed_ids: set[str] = set()
        self.raised_ids: list[str] = []

    def phase(self, robot: str) -> str:
        return self.phases[robot]

    @property
    def active(self) -> bool:
        return self.session is not None

    def raise_help(self, ctx: PlanningContext, request: HelpRequest) -> tuple[PlanningContext, HelpRequest]:
        """Suspend planning for the robot and enqueue the request once."""
        if request.failed_skill not in HELPABLE_SKILLS:
            raise MismatchedFailure(f"help cannot be raised for skill {request.failed_skill!r}")
        if self.phases[request.robot] != RUNNING or self.session is not None:
            raise IllegalTransition(f"help raised while {self.phases[request.robot]}")
        if request.id in self.consumed_ids or request.id in self.raised_ids:
            raise IllegalTransition(f"request id {request.id} reused")
        last_failure = _last_failed_skill(ctx)
        if last_failure != request.failed_skill:
            raise MismatchedFailure(
                f"request says {request.failed_skill!r} but last failure is {last_failure!r}"
            )
        self.phases[request.robot] = SUSPENDED
        ctx.suspended = True
        self.session = HelpSession(request)
        self.raised_ids.append(request.id)
        return ctx, request

    def operator_step(self, world: WorldState, action: OperatorAction) -> tuple[str, WorldState]:
        """Apply one operator action to the active session."""
        if self.session is None:
            raise IllegalTransition("no active help session")
        robot = self.session.request.robot
        phase = self.phases[robot]
        if phase not in (SUSPENDED, OPERATOR_CONTROL):
            raise IllegalTransition(f"operator action in phase {phase}")
        if action.kind == "teleop":
            result = self._execute_teleop(world, action.command)
            self.session.actions.append((action, result))
            self.phases[robot] = OPERATOR_CONTROL
        elif action.kind in ("feedback", "decline"):
            self.session.actions.append((action, None))
            self.session.outcome = action.kind
            self.session.closing_text = action.text
            self.phases[robot] = RESUMING
        else:
            raise IllegalTransition(f"unknown operator action {action.kind!r}")
        return self.phases[robot], world

    def resume(self, ctx: PlanningContext) -> tuple[PlanningContext, HelpSession]:
        """Fold the closed session into the planning context; back to Running."""
        if self.session is None or self.session.outcome is None:
            raise IllegalTransition("resume without a closed session")
        robot = self.session.request.robot
        if self.phases[robot] != RESUMING:
            raise IllegalTransition(f"resume in phase {self.phases[robot]}")
        session = self.session
        if session.outcome == "decline":
            text = f"declined: {session.closing_text}"
        else:
            text = session.closing_text
        apply_feedback(ctx, text, session.delta())
        self.phases[robot] = RUNNING
        self.consumed_ids.add(session.request.id)
        self.session = None
        return ctx, session

    def _execute_teleop(self, world: WorldState, command: TeleopCommand | None) -> SkillResult:
        if command is None:
            raise InvalidTeleop("teleop action without a command")
        session = self.session
        cmd = teleop_to_skill(world, command)
        _, result = actions.execute_skill(world, cmd, privileged=True)
        if not result.ok:
            raise InvalidTeleop(f"teleop {command.kind} failed: {result.reason} ({result.observation})")
        if command.kind == "move":
            session.moved[command.robot] = command.target
        elif command.kind == "place_into_box":
            boxed = world.robots[CARRIER].box_contents
            if boxed:
                session.boxed.append(boxed[-1])
        return result


def teleop_to_skill(world: WorldState, command: TeleopCommand) -> SkillCommand:
    if command.kind == "move":
        if command.target not in world.config.rooms:
            raise InvalidTeleop(f"unknown room {command.target!r}")
        return actions.navigate(command.robot, command.target)
    if command.kind == "grasp":
        robot = world.robots.get(command.robot)
        obj = world.objects.get(command.target or "")
        if robot is None or obj is None:
            raise InvalidTeleop(f"unknown robot or object in grasp {command!r}")
        if "pick" not in robot.skills:
            # privilege bypasses failure draws, not missing hardware
            raise InvalidTeleop(f"{command.robot} has no gripper")
        if obj.location.kind != "room" or obj.location.name != robot.room:
            raise InvalidTeleop(f"{command.target} is not co-located with {command.robot}")
        if robot.holding is not None:
            raise InvalidTeleop(f"{command.robot} already holds {robot.holding}")
        return actions.pick(command.robot, command.target)
    if command.kind == "place_into_box":
        robot = world.robots.get(command.robot)
        if robot is None or robot.holding is None:
            raise InvalidTeleop("nothing held to place")
        if "place" not in robot.skills:
            raise InvalidTeleop(f"{command.robot} cannot place")
        if world.robots[CARRIER].room != robot.room:
            raise InvalidTeleop("carrier is not co-located for the load")
        return actions.place(command.robot, CARRIER)
    if command.kind == "wait":
        return actions.wait(command.robot, command.ticks)
    raise InvalidTeleop(f"unknown teleop kind {command.kind!r}")


def _last_failed_skill(ctx: PlanningContext) -> str | None:
    for cmd, result in reversed(ctx.history):
        if cmd.kind == actions.HELP:
            continue
        if not result.ok and cmd.kind in actions.SKILL_FOR_KIND:
            return actions.SKILL_FOR_KIND[cmd.kind]
        return None
    return None


@dataclass(frozen=True)
class ScriptedPolicy:
    """Headless operator: assist every request, assist after a delay, or
    refuse outright.  ``give_up_at_tick`` aborts the whole trial once the
    clock passes that point."""

    kind: str = ALWAYS_ASSIST
    delay_ticks: int = 0
    give_up_at_tick: int | None = None

    def describe(self) -> str:
        if self.kind == DELAY_K:
            return f"{self.kind}:{self.delay_ticks}"
        return self.kind

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "delay_ticks": self.delay_ticks,
            "give_up_at_tick": self.give_up_at_tick,
        }


def run_scripted_operator(
    policy: ScriptedPolicy,
    request: HelpRequest,
    world: WorldState,
    failed_room: str | None = None,
) -> list[OperatorAction]:
    """Compute the operator action sequence a policy emits for one request."""
    if policy.kind == ALWAYS_DECLINE:
        return [decline("retry yourself")]
    prefix: list[OperatorAction] = []
    if policy.kind == DELAY_K and policy.delay_ticks > 0:
        prefix.append(teleop_wait(policy.delay_ticks))
    elif policy.kind not in (ALWAYS_ASSIST, DELAY_K):
        raise ValueError(f"unknown operator policy {policy.kind!r}")

    if request.failed_skill == "navigation":
        room = failed_room or world.config.initial_rooms[request.robot]
        return prefix + [
            teleop_move(request.robot, room),
            feedback(f"moved {request.robot} to {room}"),
        ]

    object_id = request.failed_object
    obj = world.objects.get(object_id or "")
    if obj is None:
        return prefix + [decline(f"cannot find {object_id}")]
    if obj.location.kind == "box":
        return prefix + [feedback(f"{object_id} is already in the clear box")]

    sequence: list[OperatorAction] = list(prefix)
    manipulator = world.robots[MANIPULATOR]
    carrier = world.robots[CARRIER]
    if obj.location.kind == "held":
        load_room = world.robots[obj.location.name].room
        if carrier.room != load_room:
            sequence.append(teleop_move(CARRIER, load_room))
        sequence.append(teleop_place_into_box(obj.location.name))
    else:
        room = obj.location.name
        if manipulator.room != room:
            sequence.append(teleop_move(MANIPULATOR, room))
        if carrier.room != room:
            sequence.append(teleop_move(CARRIER, room))
        sequence.append(teleop_grasp(MANIPULATOR, object_id))
        sequence.append(teleop_place_into_box(MANIPULATOR))
    sequence.append(feedback(f"placed {object_id} into the clear box"))
    return sequence
