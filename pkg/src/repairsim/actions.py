"""Five-skill action engine: executes commands against a world state.

Every execution advances the clock, failed attempts included; failures come
back as structured results, never exceptions.  Operator teleoperation runs
through the same engine with ``privileged=True``, which skips the failure
draws (the human can do what autonomy cannot).
"""

from __future__ import annotations

from dataclasses import dataclass

from .world import (
    BOTTLE_CATEGORIES,
    CARRIER,
    FALLEN,
    MANIPULATOR,
    TRASH_AREA,
    UPRIGHT,
    FailureRule,
    Location,
    WorldState,
    path_cost,
    shortest_path,
)

# Command kinds.  The first five mirror the robot skill vocabulary; wait and
# done are scheduler plumbing (a one-tick idle and a terminal no-op).
NAVIGATE = "navigate"
DETECT = "detect"
PICK = "pick"
PLACE = "place"
HELP = "help"
WAIT = "wait"
DONE = "done"

SKILL_FOR_KIND = {
    NAVIGATE: "navigation",
    DETECT: "object_detection",
    PICK: "pick",
    PLACE: "place",
    HELP: "help",
}

SUCCESS = "success"
FAILURE = "failure"

# Failure reason codes.
NONE = "none"
NO_PATH = "no_path"
NOT_DETECTED = "not_detected"
GRASP_FAILED = "grasp_failed"
OBJECT_TIPPED = "object_tipped"
IK_UNSOLVABLE = "ik_unsolvable"
PLACE_FAILED = "place_failed"
NOT_CO_LOCATED = "not_co_located"
SKILL_UNAVAILABLE = "skill_unavailable"


@dataclass(frozen=True)
class SkillCommand:
    kind: str
    robot: str
    target: str | None = None  # room / object / destination robot
    message: str = ""
    ticks: int | None = None  # wait duration override

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "robot": self.robot}
        if self.target is not None:
            out["target"] = self.target
        if self.message:
            out["message"] = self.message
        if self.ticks is not None:
            out["ticks"] = self.ticks
        return out

    @staticmethod
    def from_dict(data: dict) -> "SkillCommand":
        return SkillCommand(
            kind=data["kind"],
            robot=data["robot"],
            target=data.get("target"),
            message=data.get("message", ""),
            ticks=data.get("ticks"),
        )


def navigate(robot: str, room: str) -> SkillCommand:
    return SkillCommand(NAVIGATE, robot, room)


def detect(robot: str, object_id: str) -> SkillCommand:
    return SkillCommand(DETECT, robot, object_id)


def pick(robot: str, object_id: str) -> SkillCommand:
    return SkillCommand(PICK, robot, object_id)


def place(robot: str, destination: str) -> SkillCommand:
    return SkillCommand(PLACE, robot, destination)


def help_command(robot: str, message: str) -> SkillCommand:
    return SkillCommand(HELP, robot, message=message)


def wait(robot: str, ticks: int = 1) -> SkillCommand:
    return SkillCommand(WAIT, robot, ticks=ticks)


def done(robot: str) -> SkillCommand:
    return SkillCommand(DONE, robot)


@dataclass(frozen=True)
class SkillResult:
    status: str
    reason: str = NONE
    ticks_spent: int = 0
    observation: str = ""

    @property
    def ok(self) -> bool:
        return self.status == SUCCESS

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "reason": self.reason,
            "ticks_spent": self.ticks_spent,
            "observation": self.observation,
        }

    @staticmethod
    def from_dict(data: dict) -> "SkillResult":
        return SkillResult(
            status=data["status"],
            reason=data.get("reason", NONE),
            ticks_spent=data.get("ticks_spent", 0),
            observation=data.get("observation", ""),
        )


@dataclass(frozen=True)
class CollisionEvent:
    tick: int
    room: str
    during: str  # command kind that provoked it

    def to_dict(self) -> dict:
        return {"tick": self.tick, "room": self.room, "during": self.during}


def _success(world: WorldState, cost: int, observation: str = "") -> SkillResult:
    world.advance(cost)
    return SkillResult(SUCCESS, NONE, cost, observation)


def _failure(world: WorldState, reason: str, cost: int, observation: str = "") -> SkillResult:
    world.advance(cost)
    return SkillResult(FAILURE, reason, cost, observation)


def _draw_fails(world: WorldState, rule: FailureRule) -> bool:
    # persistent bypasses the generator entirely so the loop reproduces
    # identically under every seed.
    if rule.persistent:
        return True
    if rule.failure <= 0.0:
        return False
    return world.rng.random() < rule.failure


def _draw_tip(world: WorldState, rule: FailureRule) -> bool:
    if rule.persistent and rule.tip_over > 0.0:
        return True
    if rule.tip_over <= 0.0:
        return False
    return world.rng.random() < rule.tip_over


def _box_note(world: WorldState, robot_id: str) -> str:
    if robot_id != CARRIER:
        return ""
    contents = ",".join(world.robots[CARRIER].box_contents)
    return f" box=[{contents}]"


def execute_skill(
    world: WorldState, cmd: SkillCommand, privileged: bool = False
) -> tuple[WorldState, SkillResult]:
    """Execute one command, mutating and returning the world.

    Failures are results, not exceptions; the clock advances by the full
    skill cost either way.
    """
    robot = world.robots[cmd.robot]
    config = world.config
    world.last_command = (cmd.robot, cmd.kind)

    if cmd.kind == WAIT:
        ticks = cmd.ticks if cmd.ticks and cmd.ticks > 0 else config.cost("wait")
        return world, _success(world, ticks, f"waited {ticks}{_box_note(world, cmd.robot)}")

    if cmd.kind == DONE:
        return world, _success(world, 1, "idle")

    skill = SKILL_FOR_KIND[cmd.kind]
    cost = _skill_cost(world, cmd)
    if not privileged and skill not in robot.skills:
        return world, _failure(world, SKILL_UNAVAILABLE, cost, f"{cmd.robot} lacks {skill}")

    if cmd.kind == NAVIGATE:
        return world, _navigate(world, cmd, cost)
    if cmd.kind == DETECT:
        return world, _detect(world, cmd, cost, privileged)
    if cmd.kind == PICK:
        return world, _pick(world, cmd, cost, privileged)
    if cmd.kind == PLACE:
        return world, _place(world, cmd, cost, privileged)
    if cmd.kind == HELP:
        # Mechanically always succeeds; the protocol layer owns the semantics.
        return world, _success(world, cost, cmd.message)
    raise ValueError(f"unknown command kind {cmd.kind!r}")


def _skill_cost(world: WorldState, cmd: SkillCommand) -> int:
    config = world.config
    if cmd.kind == NAVIGATE:
        path = shortest_path(config, world.robots[cmd.robot].room, cmd.target)
        if path is None:
            # failed route computation still burns one leg of travel time
            return config.cost("navigation_per_edge")
        return max(1, path_cost(config, path))
    if cmd.kind == DETECT:
        return config.cost("object_detection")
    if cmd.kind == PICK:
        return config.cost("pick")
    if cmd.kind == PLACE:
        return config.cost("place")
    if cmd.kind == HELP:
        return config.cost("help")
    return 1


def _navigate(world: WorldState, cmd: SkillCommand, cost: int) -> SkillResult:
    robot = world.robots[cmd.robot]
    if cmd.target not in world.config.rooms:
        return _failure(world, NO_PATH, cost, f"unknown room {cmd.target!r}")
    path = shortest_path(world.config, robot.room, cmd.target)
    if path is None:
        return _failure(world, NO_PATH, cost, f"no path {robot.room} -> {cmd.target}")
    robot.room = cmd.target
    world.mark_collected_if_at_trash()
    return _success(world, cost, f"arrived {cmd.target}{_box_note(world, cmd.robot)}")


def _active_detect_rule(world: WorldState, category: str, posture: str, dropped: bool) -> FailureRule:
    profile = world.config.profile
    if posture == FALLEN:
        return profile.fallen_detect_rule(category)
    if dropped:
        return profile.dropped_detect_rule(category)
    return profile.rule(category, "object_detection")


def _detect(world: WorldState, cmd: SkillCommand, cost: int, privileged: bool) -> SkillResult:
    robot = world.robots[cmd.robot]
    obj = world.objects.get(cmd.target)
    if obj is None or obj.location != Location.room(robot.room):
        return _failure(world, NOT_DETECTED, cost, f"{cmd.target} not visible in {robot.room}")
    if not privileged:
        rule = _active_detect_rule(world, obj.category, obj.posture, obj.dropped)
        if _draw_fails(world, rule):
            reason = rule.reason or NOT_DETECTED
            return _failure(world, reason, cost, f"no bounding box for {cmd.target}")
    return _success(world, cost, f"detected {cmd.target} in {robot.room}")


def _pick(world: WorldState, cmd: SkillCommand, cost: int, privileged: bool) -> SkillResult:
    robot = world.robots[cmd.robot]
    obj = world.objects.get(cmd.target)
    if obj is None or obj.location != Location.room(robot.room):
        return _failure(world, NOT_CO_LOCATED, cost, f"{cmd.target} not in {robot.room}")
    if robot.holding is not None:
        return _failure(world, GRASP_FAILED, cost, f"gripper already holds {robot.holding}")
    profile = world.config.profile
    rule = profile.rule(obj.category, "pick")
    if not privileged:
        if obj.posture == UPRIGHT and obj.category in BOTTLE_CATEGORIES and _draw_tip(world, rule):
            obj.posture = FALLEN
            obj.dropped = True
            return _failure(world, OBJECT_TIPPED, cost, f"{cmd.target} tipped over")
        if obj.posture == FALLEN and obj.category not in profile.fallen_grasp:
            return _failure(world, GRASP_FAILED, cost, f"{cmd.target} lies fallen")
        if _draw_fails(world, rule):
            reason = rule.reason or GRASP_FAILED
            return _failure(world, reason, cost, f"grasp on {cmd.target} failed")
    obj.location = Location.held(cmd.robot)
    obj.posture = UPRIGHT
    obj.dropped = False
    robot.holding = obj.id
    return _success(world, cost, f"holding {cmd.target}")


def _place(world: WorldState, cmd: SkillCommand, cost: int, privileged: bool) -> SkillResult:
    robot = world.robots[cmd.robot]
    if robot.holding is None:
        return _failure(world, PLACE_FAILED, cost, "nothing held")
    destination = world.robots.get(cmd.target)
    if destination is None:
        return _failure(world, PLACE_FAILED, cost, f"unknown destination {cmd.target!r}")
    if destination.room != robot.room:
        return _failure(world, NOT_CO_LOCATED, cost, f"{cmd.target} is in {destination.room}")
    obj = world.objects[robot.holding]
    if not privileged:
        rule = world.config.profile.rule(obj.category, "place")
        if _draw_fails(world, rule):
            # The object slips out of the gripper onto the floor.
            obj.location = Location.room(robot.room)
            obj.dropped = True
            if obj.category in BOTTLE_CATEGORIES:
                obj.posture = FALLEN
            robot.holding = None
            reason = rule.reason or PLACE_FAILED
            return _failure(world, reason, cost, f"{obj.id} dropped in {robot.room}")
    obj.location = Location.box(destination.id)
    robot.holding = None
    destination.box_contents.append(obj.id)
    world.mark_collected_if_at_trash()
    return _success(world, cost, f"{obj.id} placed into {destination.id} box")


def check_collision(world: WorldState) -> CollisionEvent | None:
    """Collision predicate: co-located pick/place by the manipulator may
    detach the carrier's cart with the profile's collision probability."""
    if world.last_command is None:
        return None
    robot_id, kind = world.last_command
    if robot_id != MANIPULATOR or kind not in (PICK, PLACE):
        return None
    carrier = world.robots[CARRIER]
    manipulator = world.robots[MANIPULATOR]
    if carrier.room != manipulator.room:
        return None
    probability = world.config.profile.collision
    if probability <= 0.0:
        return None
    if world.rng.random() < probability:
        return CollisionEvent(tick=world.tick, room=carrier.room, during=kind)
    return None


def teleop_target_room(world: WorldState, object_id: str) -> str | None:
    """Room an operator must reach to fetch the object, or None if boxed/held."""
    obj = world.objects.get(object_id)
    if obj is None:
        return None
    if obj.location.kind == "room":
        return obj.location.name
    if obj.location.kind == "held":
        return world.robots[obj.location.name].room
    return None
