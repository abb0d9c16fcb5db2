"""Task decomposition, allocation, and per-robot action planning.

A pluggable completion backend produces replies in a line-oriented grammar
(``VERB arg ...``, one action per line).  The rule-based backend is a pure
function of its inputs and reproduces the reference behaviour offline; the
external-service backend talks to a chat-completion endpoint and caches
replies by prompt hash so recorded runs replay without network access.
"""

from __future__ import annotations

import functools
import hashlib
import json
import os
from dataclasses import dataclass, field
from importlib import resources

from . import actions
from .actions import SkillCommand, SkillResult
from .world import CARRIER, CARRIER_SKILLS, MANIPULATOR, MANIPULATOR_SKILLS, TRASH_AREA, ScenarioConfig

DEFAULT_INSTRUCTION = "Collect all the trash in the rooms and transport it to the trash_area."
DEFAULT_MODEL = "o3-2025-0416"
DEFAULT_CREDENTIAL_ENV = "REPAIR_LLM_API_KEY"

MODE_REPAIR = "repair"
MODE_AUTO = "auto"

# Subtask verbs.  Manipulation verbs may only be allocated to robots with
# the matching skills; wait_for is the carrier-side load synchronisation.
VERB_NAVIGATE = "navigate"
VERB_DETECT = "detect"
VERB_PICK = "pick"
VERB_PLACE = "place"
VERB_WAIT_FOR = "wait_for"

MANIPULATION_VERBS = (VERB_DETECT, VERB_PICK, VERB_PLACE)

_SKILL_FOR_VERB = {
    VERB_NAVIGATE: "navigation",
    VERB_DETECT: "object_detection",
    VERB_PICK: "pick",
    VERB_PLACE: "place",
}

_ROBOT_SKILLS = {CARRIER: CARRIER_SKILLS, MANIPULATOR: MANIPULATOR_SKILLS}

HELP_TEMPLATES = {
    "object_detection": (
        "The target object {obj} could not be detected; "
        "please grasp the object and place it into the clear box instead."
    ),
    "pick": (
        "The object {obj} could not be grasped; "
        "please grasp the object and place it into the clear box instead."
    ),
    "place": (
        "The object {obj} could not be placed into the clear box; "
        "please load it instead."
    ),
    "navigation": "The robot could not reach {room}; please move it there.",
}

DECLINE_PREFIX = "declined:"


class EmptyInstruction(ValueError):
    pass


class BackendError(RuntimeError):
    pass


class UnparseableReply(ValueError):
    def __init__(self, message: str, reply: str) -> None:
        super().__init__(message)
        self.reply = reply


class SuspendedContext(RuntimeError):
    pass


class NotSuspended(RuntimeError):
    pass


@dataclass(frozen=True)
class Subtask:
    verb: str
    object: str | None = None
    room: str | None = None

    def to_dict(self) -> dict:
        return {"verb": self.verb, "object": self.object, "room": self.room}


@dataclass
class SubtaskSequence:
    robot: str
    subtasks: list[Subtask] = field(default_factory=list)

    def objects(self, verbs: tuple[str, ...] = MANIPULATION_VERBS) -> list[str]:
        seen: list[str] = []
        for subtask in self.subtasks:
            if subtask.verb in verbs and subtask.object and subtask.object not in seen:
                seen.append(subtask.object)
        return seen


@dataclass
class PromptBundle:
    """The seven prompt elements, in presentation order."""

    task_description: str
    robot_profiles: dict[str, str]
    room_names: list[str]
    object_locations: list[tuple[str, str]]  # (object id, room)
    rules: str
    examples: str
    instruction: str

    def elements(self) -> list[tuple[str, object]]:
        return [
            ("task_description", self.task_description),
            ("robot_profiles", self.robot_profiles),
            ("room_names", self.room_names),
            ("object_locations", self.object_locations),
            ("rules", self.rules),
            ("examples", self.examples),
            ("instruction", self.instruction),
        ]


@dataclass(frozen=True)
class OperatorDelta:
    """What an operator session changed in the world."""

    boxed: tuple[str, ...] = ()
    moved: tuple[tuple[str, str], ...] = ()  # (robot, room)

    @property
    def empty(self) -> bool:
        return not self.boxed and not self.moved

    def to_dict(self) -> dict:
        return {"boxed": list(self.boxed), "moved": [list(m) for m in self.moved]}


@dataclass
class PlanningContext:
    """Per-robot planning state: allocated subtasks plus execution history."""

    robot: str
    assigned: SubtaskSequence
    history: list[tuple[SkillCommand, SkillResult]] = field(default_factory=list)
    operator_feedback: list[str] = field(default_factory=list)
    suspended: bool = False
    completed: set[int] = field(default_factory=set)
    known_box: list[str] = field(default_factory=list)

    def cursor(self) -> int | None:
        for index in range(len(self.assigned.subtasks)):
            if index not in self.completed:
                return index
        return None

    def current_subtask(self) -> Subtask | None:
        index = self.cursor()
        return None if index is None else self.assigned.subtasks[index]

    def note_result(self, cmd: SkillCommand, result: SkillResult) -> None:
        """Record an executed command and mark directly-completed subtasks."""
        self.history.append((cmd, result))
        manifest = _box_manifest(result.observation)
        if manifest is not None:
            self.known_box = manifest
        self._fold_moot_subtasks()
        if not result.ok:
            if cmd.kind == actions.PLACE and "dropped" in result.observation:
                self._unmark_pick_for_current_place()
            return
        index = self.cursor()
        if index is None:
            return
        subtask = self.assigned.subtasks[index]
        if cmd.kind == actions.NAVIGATE and subtask.verb == VERB_NAVIGATE and subtask.room == cmd.target:
            self.completed.add(index)
        elif cmd.kind == actions.DETECT and subtask.verb == VERB_DETECT and subtask.object == cmd.target:
            self.completed.add(index)
        elif cmd.kind == actions.PICK and subtask.verb == VERB_PICK and subtask.object == cmd.target:
            self.completed.add(index)
        elif cmd.kind == actions.PLACE and subtask.verb == VERB_PLACE:
            self.completed.add(index)
        self._fold_moot_subtasks()

    def _fold_moot_subtasks(self) -> None:
        # Loads that already happened retire their wait and the travel leg
        # that was serving them.
        subtasks = self.assigned.subtasks
        while True:
            index = self.cursor()
            if index is None:
                return
            subtask = subtasks[index]
            if subtask.verb == VERB_WAIT_FOR and subtask.object in self.known_box:
                self.completed.add(index)
                continue
            if subtask.verb == VERB_NAVIGATE:
                following = self._next_incomplete(index)
                if following is not None:
                    next_subtask = subtasks[following]
                    if next_subtask.verb == VERB_WAIT_FOR and next_subtask.object in self.known_box:
                        self.completed.add(index)
                        self.completed.add(following)
                        continue
            return

    def _next_incomplete(self, after: int) -> int | None:
        for index in range(after + 1, len(self.assigned.subtasks)):
            if index not in self.completed:
                return index
        return None

    def _unmark_pick_for_current_place(self) -> None:
        # A drop during place puts the object back on the floor: the pick
        # has to happen again before any retry of the place can work.
        index = self.cursor()
        if index is None:
            return
        current = self.assigned.subtasks[index]
        if current.verb != VERB_PLACE or current.object is None:
            return
        for j in range(index - 1, -1, -1):
            subtask = self.assigned.subtasks[j]
            if subtask.verb == VERB_PICK and subtask.object == current.object:
                self.completed.discard(j)
                return


def _box_manifest(observation: str) -> list[str] | None:
    marker = "box=["
    start = observation.find(marker)
    if start < 0:
        return None
    end = observation.find("]", start)
    if end < 0:
        return None
    inner = observation[start + len(marker) : end]
    return [part for part in inner.split(",") if part]


# ---------------------------------------------------------------------------
# Prompt assembly
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def _prompt_text(name: str) -> str:
    return resources.files("repairsim.prompts").joinpath(f"{name}.txt").read_text(encoding="utf-8")


def _split_robot_profiles(text: str) -> dict[str, str]:
    profiles: dict[str, str] = {}
    current: str | None = None
    for line in text.splitlines():
        head = line.split(":", 1)[0].strip()
        if head in (CARRIER, MANIPULATOR) and ":" in line:
            current = head
            profiles[current] = line.split(":", 1)[1].strip()
        elif current is not None and line.strip():
            profiles[current] += " " + line.strip()
    return profiles


def assemble_decomposition_prompt(config: ScenarioConfig, instruction: str) -> PromptBundle:
    """Gather the seven decomposition-prompt elements for a scenario."""
    if not instruction or not instruction.strip():
        raise EmptyInstruction("instruction must be non-empty")
    object_locations = [
        (object_id, room) for room, ids in config.placement.items() for object_id in ids
    ]
    return PromptBundle(
        task_description=_prompt_text("task_description").strip(),
        robot_profiles=_split_robot_profiles(_prompt_text("robot_profiles")),
        room_names=list(config.rooms),
        object_locations=object_locations,
        rules=_prompt_text("rules").strip(),
        examples=_prompt_text("examples").strip(),
        instruction=instruction,
    )


def render_decomposition_prompt(bundle: PromptBundle) -> str:
    """Flatten the bundle into the text sent to an external backend."""
    lines: list[str] = []
    lines.append("== Task ==")
    lines.append(bundle.task_description)
    lines.append("== Robots ==")
    for robot, profile in bundle.robot_profiles.items():
        lines.append(f"{robot}: {profile}")
    lines.append("== Rooms ==")
    lines.append(", ".join(bundle.room_names))
    lines.append("== Object locations ==")
    for object_id, room in bundle.object_locations:
        lines.append(f"{object_id} is in {room}")
    lines.append("== Rules ==")
    lines.append(bundle.rules)
    lines.append("== Examples ==")
    lines.append(bundle.examples)
    lines.append("== Instruction ==")
    lines.append(bundle.instruction)
    return "\n".join(lines) + "\n"


def render_planning_prompt(ctx: PlanningContext) -> str:
    lines = [f"You are planning the next action for robot {ctx.robot}."]
    lines.append("Assigned subtasks (done marked *):")
    for index, subtask in enumerate(ctx.assigned.subtasks):
        mark = "*" if index in ctx.completed else " "
        arg = subtask.object or subtask.room or ""
        lines.append(f"{mark} {subtask.verb} {arg}".rstrip())
    lines.append("Recent results:")
    for cmd, result in ctx.history[-6:]:
        lines.append(f"{cmd.kind} {cmd.target or ''} -> {result.status} {result.reason}")
    if ctx.operator_feedback:
        lines.append("Operator feedback:")
        lines.extend(ctx.operator_feedback[-3:])
    lines.append(
        "Answer with exactly one action line: "
        "NAVIGATE <room> | DETECT <object> | PICK <object> | PLACE <robot> | "
        "HELP <message> | WAIT_FOR <object> | WAIT | DONE"
    )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Reply grammar
# ---------------------------------------------------------------------------


def _capability_check(robot: str, verb: str, reply: str) -> None:
    skill = _SKILL_FOR_VERB.get(verb)
    if skill is None:  # wait_for carries no skill requirement
        return
    if skill not in _ROBOT_SKILLS[robot]:
        raise UnparseableReply(f"capability violation: {robot} cannot {verb}", reply)


def parse_allocation(reply: str, known_objects: list[str], rooms: list[str]) -> dict[str, SubtaskSequence]:
    """Parse a decomposition reply into per-robot subtask sequences."""
    sequences: dict[str, SubtaskSequence] = {
        CARRIER: SubtaskSequence(CARRIER),
        MANIPULATOR: SubtaskSequence(MANIPULATOR),
    }
    current: str | None = None
    last_pick: str | None = None
    for raw in reply.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        verb = parts[0].upper()
        args = parts[1:]
        if verb == "ROBOT":
            if len(args) != 1 or args[0] not in sequences:
                raise UnparseableReply(f"bad robot section {line!r}", reply)
            current = args[0]
            last_pick = None
            continue
        if current is None:
            raise UnparseableReply(f"action before any ROBOT section: {line!r}", reply)
        if verb == "NAVIGATE":
            if len(args) != 1 or args[0] not in rooms:
                raise UnparseableReply(f"bad navigate line {line!r}", reply)
            _capability_check(current, VERB_NAVIGATE, reply)
            sequences[current].subtasks.append(Subtask(VERB_NAVIGATE, room=args[0]))
        elif verb in ("DETECT", "PICK"):
            if len(args) != 1 or args[0] not in known_objects:
                raise UnparseableReply(f"bad {verb.lower()} line {line!r}", reply)
            subtask_verb = VERB_DETECT if verb == "DETECT" else VERB_PICK
            _capability_check(current, subtask_verb, reply)
            sequences[current].subtasks.append(Subtask(subtask_verb, object=args[0]))
            if verb == "PICK":
                last_pick = args[0]
        elif verb == "PLACE":
            if not args or args[0] not in sequences:
                raise UnparseableReply(f"bad place line {line!r}", reply)
            payload = args[1] if len(args) > 1 else last_pick
            if payload is None or payload not in known_objects:
                raise UnparseableReply(f"place with no picked object: {line!r}", reply)
            _capability_check(current, VERB_PLACE, reply)
            sequences[current].subtasks.append(Subtask(VERB_PLACE, object=payload, room=None))
        elif verb == "WAIT_FOR":
            if len(args) != 1 or args[0] not in known_objects:
                raise UnparseableReply(f"bad wait_for line {line!r}", reply)
            sequences[current].subtasks.append(Subtask(VERB_WAIT_FOR, object=args[0]))
        else:
            raise UnparseableReply(f"unknown verb {verb!r}", reply)
    return sequences


def validate_allocation(
    sequences: dict[str, SubtaskSequence], expected_objects: list[str], reply: str
) -> None:
    """Every object is fetched by exactly one robot's manipulation subtasks."""
    allocated: dict[str, str] = {}
    for robot, sequence in sequences.items():
        for object_id in sequence.objects():
            if object_id in allocated:
                raise UnparseableReply(
                    f"object {object_id} allocated to both {allocated[object_id]} and {robot}", reply
                )
            allocated[object_id] = robot
    missing = [object_id for object_id in expected_objects if object_id not in allocated]
    if missing:
        raise UnparseableReply(f"objects never allocated: {missing}", reply)
    extra = [object_id for object_id in allocated if object_id not in expected_objects]
    if extra:
        raise UnparseableReply(f"unknown objects allocated: {extra}", reply)


def parse_action_line(reply: str, robot: str) -> SkillCommand:
    """Parse a single planning reply line into a command for ``robot``."""
    line = ""
    for raw in reply.splitlines():
        stripped = raw.strip()
        if stripped and not stripped.startswith("#"):
            line = stripped
            break
    if not line:
        raise UnparseableReply("empty planning reply", reply)
    parts = line.split()
    verb = parts[0].upper()
    args = parts[1:]
    if verb == "NAVIGATE" and len(args) == 1:
        return actions.navigate(robot, args[0])
    if verb == "DETECT" and len(args) == 1:
        _capability_check(robot, VERB_DETECT, reply)
        return actions.detect(robot, args[0])
    if verb == "PICK" and len(args) == 1:
        _capability_check(robot, VERB_PICK, reply)
        return actions.pick(robot, args[0])
    if verb == "PLACE" and len(args) >= 1:
        _capability_check(robot, VERB_PLACE, reply)
        return actions.place(robot, args[0])
    if verb == "HELP":
        if robot != MANIPULATOR:
            raise UnparseableReply(f"capability violation: {robot} cannot help", reply)
        return actions.help_command(robot, " ".join(args))
    if verb in ("WAIT", "WAIT_FOR"):
        return actions.wait(robot)
    if verb == "DONE" and not args:
        return actions.done(robot)
    raise UnparseableReply(f"bad action line {line!r}", reply)


# ---------------------------------------------------------------------------
# Backends
# ---------------------------------------------------------------------------


class RuleBasedBackend:
    """Deterministic offline planner: same inputs, same reply, always."""

    kind = "rule_based"

    def __init__(self, mode: str = MODE_REPAIR) -> None:
        if mode not in (MODE_REPAIR, MODE_AUTO):
            raise ValueError(f"unknown planning mode {mode!r}")
        self.mode = mode

    def decompose(self, bundle: PromptBundle) -> str:
        lines = ["ROBOT manipulator"]
        position: str | None = None
        for object_id, room in bundle.object_locations:
            if room != position:
                lines.append(f"NAVIGATE {room}")
                position = room
            lines.append(f"DETECT {object_id}")
            lines.append(f"PICK {object_id}")
            lines.append(f"PLACE carrier {object_id}")
        lines.append("ROBOT carrier")
        position = TRASH_AREA
        for object_id, room in bundle.object_locations:
            if room != position:
                lines.append(f"NAVIGATE {room}")
            lines.append(f"WAIT_FOR {object_id}")
            lines.append(f"NAVIGATE {TRASH_AREA}")
            position = TRASH_AREA
        return "\n".join(lines) + "\n"

    def plan_next(self, ctx: PlanningContext) -> str:
        if ctx.robot == MANIPULATOR:
            line = self._manipulator_failure_line(ctx)
            if line is not None:
                return line
        index = ctx.cursor()
        if index is None:
            return "DONE"
        subtask = ctx.assigned.subtasks[index]
        if subtask.verb == VERB_NAVIGATE:
            return f"NAVIGATE {subtask.room}"
        if subtask.verb == VERB_DETECT:
            return f"DETECT {subtask.object}"
        if subtask.verb == VERB_PICK:
            return f"PICK {subtask.object}"
        if subtask.verb == VERB_PLACE:
            return f"PLACE {CARRIER}"
        if subtask.verb == VERB_WAIT_FOR:
            return "WAIT"
        raise ValueError(f"unknown subtask verb {subtask.verb!r}")

    def _manipulator_failure_line(self, ctx: PlanningContext) -> str | None:
        if not ctx.history:
            return None
        last_cmd, last_result = ctx.history[-1]
        if not last_result.ok and last_cmd.kind in (
            actions.NAVIGATE,
            actions.DETECT,
            actions.PICK,
            actions.PLACE,
        ):
            if self.mode == MODE_REPAIR:
                skill, object_id, room = failure_context(ctx)
                message = HELP_TEMPLATES[skill].format(obj=object_id, room=room)
                return f"HELP {message}"
            # Autonomous recovery: retry a failed route, otherwise go back to
            # detecting the object it lost track of.
            if last_cmd.kind == actions.NAVIGATE:
                return f"NAVIGATE {last_cmd.target}"
            _, object_id, _ = failure_context(ctx)
            return f"DETECT {object_id}"
        if (
            last_cmd.kind == actions.HELP
            and last_result.ok
            and ctx.operator_feedback
            and ctx.operator_feedback[-1].startswith(DECLINE_PREFIX)
        ):
            # Declined request: retry the failed skill once before asking again.
            retry = _failure_before_help(ctx)
            if retry is not None:
                return _command_line(retry)
        return None


def _command_line(cmd: SkillCommand) -> str:
    if cmd.kind == actions.NAVIGATE:
        return f"NAVIGATE {cmd.target}"
    if cmd.kind == actions.DETECT:
        return f"DETECT {cmd.target}"
    if cmd.kind == actions.PICK:
        return f"PICK {cmd.target}"
    if cmd.kind == actions.PLACE:
        return f"PLACE {cmd.target}"
    raise ValueError(f"no retry line for {cmd.kind!r}")


def _failure_before_help(ctx: PlanningContext) -> SkillCommand | None:
    for cmd, result in reversed(ctx.history[:-1]):
        if cmd.kind == actions.HELP:
            continue
        if not result.ok:
            return cmd
        return None
    return None


def failure_context(ctx: PlanningContext) -> tuple[str, str | None, str | None]:
    """(failed skill, object, room) of the failure planning is reacting to.

    Looks past help entries only; an intervening success means there is no
    live failure to react to.
    """
    for cmd, result in reversed(ctx.history):
        if cmd.kind == actions.HELP:
            continue
        if result.ok:
            break
        skill = actions.SKILL_FOR_KIND[cmd.kind]
        if cmd.kind == actions.NAVIGATE:
            return skill, None, cmd.target
        if cmd.kind == actions.PLACE:
            return skill, _place_payload(ctx), None
        return skill, cmd.target, None
    raise ValueError("no failure in history")


def _place_payload(ctx: PlanningContext) -> str | None:
    current = ctx.current_subtask()
    if current is not None and current.verb == VERB_PLACE:
        return current.object
    for cmd, result in reversed(ctx.history):
        if cmd.kind == actions.PICK and result.ok:
            return cmd.target
    return None


class ExternalServiceBackend:
    """Chat-completion client with a prompt-hash replay cache.

    Every exchange is retained until the orchestrator drains it into the
    trial log.  Cache records are line-delimited JSON objects, so recorded
    runs replay byte-identically with no credential or network.
    """

    kind = "external_service"

    def __init__(
        self,
        endpoint: str,
        model: str = DEFAULT_MODEL,
        credential_env: str = DEFAULT_CREDENTIAL_ENV,
        timeout: float = 60.0,
        cache_path: str | None = None,
        mode: str = MODE_REPAIR,
        transport=None,
    ) -> None:
        self.endpoint = endpoint
        self.model = model
        self.credential_env = credential_env
        self.timeout = timeout
        self.cache_path = cache_path
        self.mode = mode
        self._transport = transport
        self._cache: dict[str, str] = {}
        self._exchanges: list[dict] = []
        if cache_path and os.path.exists(cache_path):
            with open(cache_path, "r", encoding="utf-8") as handle:
                for line in handle:
                    if line.strip():
                        record = json.loads(line)
                        self._cache[record["hash"]] = record["reply"]

    def decompose(self, bundle: PromptBundle) -> str:
        return self.complete(render_decomposition_prompt(bundle))

    def plan_next(self, ctx: PlanningContext) -> str:
        return self.complete(render_planning_prompt(ctx))

    def drain_exchanges(self) -> list[dict]:
        out, self._exchanges = self._exchanges, []
        return out

    def complete(self, prompt: str) -> str:
        prompt_hash = hashlib.sha256(prompt.encode()).hexdigest()
        if prompt_hash in self._cache:
            reply = self._cache[prompt_hash]
            self._exchanges.append({"prompt_hash": prompt_hash, "reply": reply, "cached": True})
            return reply
        reply = self._request(prompt)
        self._cache[prompt_hash] = reply
        if self.cache_path:
            with open(self.cache_path, "a", encoding="utf-8") as handle:
                handle.write(json.dumps({"hash": prompt_hash, "reply": reply}) + "\n")
        self._exchanges.append({"prompt_hash": prompt_hash, "reply": reply, "cached": False})
        return reply

    def _request(self, prompt: str) -> str:
        import httpx

        headers = {}
        credential = os.environ.get(self.credential_env)
        if credential:
            headers["Authorization"] = f"Bearer {credential}"
        body = {"model": self.model, "messages": [{"role": "user", "content": prompt}]}
        try:
            with httpx.Client(transport=self._transport, timeout=self.timeout) as client:
                response = client.post(self.endpoint, json=body, headers=headers)
                response.raise_for_status()
                payload = response.json()
            return payload["choices"][0]["message"]["content"]
        except Exception as exc:  # noqa: BLE001 - one boundary for service faults
            raise BackendError(f"completion service failure: {exc}") from exc


# ---------------------------------------------------------------------------
# Planner operations
# ---------------------------------------------------------------------------


def decompose_and_allocate(bundle: PromptBundle, backend) -> dict[str, SubtaskSequence]:
    """Query the backend once and split the task across both robots."""
    reply = backend.decompose(bundle)
    known_objects = [object_id for object_id, _ in bundle.object_locations]
    sequences = parse_allocation(reply, known_objects, bundle.room_names)
    validate_allocation(sequences, known_objects, reply)
    return sequences


def next_action(ctx: PlanningContext, backend) -> SkillCommand:
    """Produce the next command for a robot; Help on failures in REPAIR mode."""
    if ctx.suspended:
        raise SuspendedContext(f"{ctx.robot} planning is suspended")
    reply = backend.plan_next(ctx)
    cmd = parse_action_line(reply, ctx.robot)
    if cmd.robot != ctx.robot:
        raise UnparseableReply(f"command for {cmd.robot}, expected {ctx.robot}", reply)
    return cmd


def apply_feedback(ctx: PlanningContext, feedback: str, delta: OperatorDelta) -> PlanningContext:
    """Fold operator feedback into the context and resume planning."""
    if not ctx.suspended:
        raise NotSuspended(f"{ctx.robot} is not suspended")
    ctx.operator_feedback.append(feedback)
    for object_id in delta.boxed:
        for index, subtask in enumerate(ctx.assigned.subtasks):
            if index in ctx.completed:
                continue
            if subtask.object == object_id:
                ctx.completed.add(index)
        if object_id not in ctx.known_box:
            ctx.known_box.append(object_id)
    for robot, room in delta.moved:
        if robot != ctx.robot:
            continue
        index = ctx.cursor()
        if index is not None:
            subtask = ctx.assigned.subtasks[index]
            if subtask.verb == VERB_NAVIGATE and subtask.room == room:
                ctx.completed.add(index)
    ctx._fold_moot_subtasks()
    ctx.suspended = False
    return ctx
