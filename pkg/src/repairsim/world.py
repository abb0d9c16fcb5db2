"""Simulated household world: rooms, trash objects, two robots, failure profiles.

The world is deliberately small and fully deterministic: a four-room graph,
six trash objects in two difficulty levels, a navigation-only carrier robot
with a clear box, and a five-skill mobile manipulator.  All randomness flows
through one seeded generator stored on the world state, so identical
(scenario, seed, command sequence) triples produce bit-identical worlds.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import random
from dataclasses import dataclass, field, replace

ROOM_NAMES = ("trash_area", "dining_room", "living_room", "workspace")
TRASH_AREA = "trash_area"

CARRIER = "carrier"
MANIPULATOR = "manipulator"

CARRIER_SKILLS = ("navigation",)
MANIPULATOR_SKILLS = ("navigation", "object_detection", "pick", "place", "help")

# Initial poses: the carrier starts at the collection point, the manipulator
# in the workspace.
INITIAL_ROOMS = {CARRIER: TRASH_AREA, MANIPULATOR: "workspace"}

CATEGORIES = ("paper_waste", "partially_filled_bottle", "snack_cup", "empty_bottle")
LEVEL_BY_CATEGORY = {
    "partially_filled_bottle": "L1",
    "snack_cup": "L1",
    "empty_bottle": "L2",
    "paper_waste": "L2",
}
# Only bottles can fall over.
BOTTLE_CATEGORIES = frozenset({"partially_filled_bottle", "empty_bottle"})

UPRIGHT = "upright"
FALLEN = "fallen"

SKILLS = ("navigation", "object_detection", "pick", "place", "help")

# Time model: 1 tick = 1 simulated second; a 25-minute limit maps to 1500.
DEFAULT_TICK_BUDGET = 1500
DEFAULT_COSTS = {
    "navigation_per_edge": 30,
    "object_detection": 10,
    "pick": 20,
    "place": 15,
    "help": 5,
    "wait": 1,
    "reset": 60,
}
# Detection of knocked-over / dropped objects fails more often than upright
# detection unless the profile says otherwise.
DEFAULT_DISTURBED_DETECT_FAILURE = 0.8


class ParseError(ValueError):
    """Scenario document is not syntactically valid."""

    def __init__(self, field_name: str, message: str) -> None:
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class ValidationError(ValueError):
    """Scenario document parses but violates a world invariant."""

    def __init__(self, field_name: str, message: str) -> None:
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class Location:
    """Where an object is: a room, a robot's box, or a robot's gripper."""

    kind: str  # "room" | "box" | "held"
    name: str  # room name, or robot id for box/held

    def __str__(self) -> str:
        return f"{self.kind}:{self.name}"

    @staticmethod
    def room(name: str) -> "Location":
        return Location("room", name)

    @staticmethod
    def box(robot: str) -> "Location":
        return Location("box", robot)

    @staticmethod
    def held(robot: str) -> "Location":
        return Location("held", robot)


@dataclass
class ObjectItem:
    id: str
    category: str
    level: str
    location: Location
    posture: str = UPRIGHT
    # Set when the object left a gripper involuntarily; re-detection of a
    # dropped object draws from a separate profile entry.
    dropped: bool = False

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "category": self.category,
            "level": self.level,
            "location": str(self.location),
            "posture": self.posture,
            "dropped": self.dropped,
        }


@dataclass
class RobotState:
    id: str
    room: str
    holding: str | None = None
    box_contents: list[str] = field(default_factory=list)
    skills: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "room": self.room,
            "holding": self.holding,
            "box_contents": list(self.box_contents),
            "skills": list(self.skills),
        }


@dataclass(frozen=True)
class FailureRule:
    """Failure behaviour of one (category, skill) combination.

    ``persistent`` short-circuits the draw: the skill fails on every attempt,
    which keeps loop reproduction independent of the seed.
    """

    failure: float = 0.0
    tip_over: float = 0.0
    persistent: bool = False
    reason: str | None = None  # override for the failure reason code

    def validate(self, where: str) -> None:
        for label, p in (("failure", self.failure), ("tip_over", self.tip_over)):
            if not 0.0 <= p <= 1.0:
                raise ValidationError("failure_profile", f"{where} {label}={p} outside [0,1]")


@dataclass(frozen=True)
class FailureProfile:
    """Per (object category x skill) failure injection table."""

    rules: dict[tuple[str, str], FailureRule] = field(default_factory=dict)
    # Detection rules for objects that fell over or were dropped.
    fallen_detect: dict[str, FailureRule] = field(default_factory=dict)
    dropped_detect: dict[str, FailureRule] = field(default_factory=dict)
    # Categories the manipulator can grasp while they lie fallen.
    fallen_grasp: frozenset[str] = frozenset()
    # Probability that a co-located pick/place provokes a robot collision.
    collision: float = 0.0

    def rule(self, category: str, skill: str) -> FailureRule:
        return self.rules.get((category, skill), FailureRule())

    def fallen_detect_rule(self, category: str) -> FailureRule:
        rule = self.fallen_detect.get(category)
        if rule is not None:
            return rule
        base = self.rule(category, "object_detection")
        return replace(base, failure=max(base.failure, DEFAULT_DISTURBED_DETECT_FAILURE))

    def dropped_detect_rule(self, category: str) -> FailureRule:
        rule = self.dropped_detect.get(category)
        if rule is not None:
            return rule
        base = self.rule(category, "object_detection")
        return replace(base, failure=max(base.failure, DEFAULT_DISTURBED_DETECT_FAILURE))

    def validate(self) -> None:
        for (category, skill), rule in self.rules.items():
            rule.validate(f"{category}.{skill}")
        for category, rule in self.fallen_detect.items():
            rule.validate(f"fallen_detect.{category}")
        for category, rule in self.dropped_detect.items():
            rule.validate(f"dropped_detect.{category}")
        if not 0.0 <= self.collision <= 1.0:
            raise ValidationError("failure_profile", f"collision={self.collision} outside [0,1]")

    def to_dict(self) -> dict:
        def rule_dict(rule: FailureRule) -> dict:
            return {
                "failure": rule.failure,
                "tip_over": rule.tip_over,
                "persistent": rule.persistent,
                "reason": rule.reason,
            }

        return {
            "rules": {f"{c}.{s}": rule_dict(r) for (c, s), r in sorted(self.rules.items())},
            "fallen_detect": {c: rule_dict(r) for c, r in sorted(self.fallen_detect.items())},
            "dropped_detect": {c: rule_dict(r) for c, r in sorted(self.dropped_detect.items())},
            "fallen_grasp": sorted(self.fallen_grasp),
            "collision": self.collision,
        }


@dataclass(frozen=True)
class ObjectSpec:
    id: str
    category: str
    level: str


@dataclass
class ScenarioConfig:
    """Validated description of one trial world."""

    rooms: tuple[str, ...]
    edges: dict[tuple[str, str], int]  # keys sorted (a, b), symmetric
    objects: list[ObjectSpec]
    placement: dict[str, list[str]]  # room -> object ids, insertion-ordered
    profile: FailureProfile
    initial_rooms: dict[str, str]
    tick_budget: int = DEFAULT_TICK_BUDGET
    costs: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_COSTS))
    seed: int = 0
    source_text: str | None = None  # original document, kept for log headers

    def object_room(self, object_id: str) -> str:
        for room, ids in self.placement.items():
            if object_id in ids:
                return room
        raise KeyError(object_id)

    def spec_for(self, object_id: str) -> ObjectSpec:
        for spec in self.objects:
            if spec.id == object_id:
                return spec
        raise KeyError(object_id)

    def placed_objects(self) -> list[str]:
        """Object ids in placement order (room order, then slot order)."""
        out: list[str] = []
        for ids in self.placement.values():
            out.extend(ids)
        return out

    def cost(self, name: str) -> int:
        return self.costs.get(name, DEFAULT_COSTS[name])

    def to_dict(self) -> dict:
        return {
            "rooms": list(self.rooms),
            "edges": {f"{a}--{b}": c for (a, b), c in sorted(self.edges.items())},
            "objects": [{"id": o.id, "category": o.category, "level": o.level} for o in self.objects],
            "placement": {room: list(ids) for room, ids in self.placement.items()},
            "profile": self.profile.to_dict(),
            "initial_rooms": dict(self.initial_rooms),
            "tick_budget": self.tick_budget,
            "costs": dict(self.costs),
            "seed": self.seed,
        }


@dataclass
class WorldState:
    """Single source of simulation truth for one trial."""

    config: ScenarioConfig
    seed: int
    objects: dict[str, ObjectItem]
    robots: dict[str, RobotState]
    tick: int = 0
    collected: list[str] = field(default_factory=list)
    rng: random.Random = field(default_factory=random.Random)
    # (robot, command kind) of the most recent skill execution; consumed by
    # the collision predicate.
    last_command: tuple[str, str] | None = None

    def robot(self, robot_id: str) -> RobotState:
        return self.robots[robot_id]

    def object(self, object_id: str) -> ObjectItem:
        return self.objects[object_id]

    def advance(self, ticks: int) -> None:
        if ticks < 1:
            raise ValueError("tick advance must be positive")
        self.tick += ticks

    def mark_collected_if_at_trash(self) -> None:
        """Box contents count as collected once the carrier is at the trash area."""
        carrier = self.robots[CARRIER]
        if carrier.room != TRASH_AREA:
            return
        for object_id in carrier.box_contents:
            if object_id not in self.collected:
                self.collected.append(object_id)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "tick": self.tick,
            "objects": [self.objects[k].to_dict() for k in sorted(self.objects)],
            "robots": [self.robots[k].to_dict() for k in sorted(self.robots)],
            "collected": list(self.collected),
            "rng_state": _rng_state_to_jsonable(self.rng.getstate()),
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    def snapshot(self) -> "WorldState":
        """Deep, independent copy; safe to hand to observers."""
        clone = WorldState(
            config=self.config,
            seed=self.seed,
            objects={k: replace(v) for k, v in self.objects.items()},
            robots={
                k: RobotState(v.id, v.room, v.holding, list(v.box_contents), v.skills)
                for k, v in self.robots.items()
            },
            tick=self.tick,
            collected=list(self.collected),
            last_command=self.last_command,
        )
        clone.rng.setstate(self.rng.getstate())
        return clone


def _rng_state_to_jsonable(state: tuple) -> list:
    version, internal, gauss = state
    return [version, list(internal), gauss]


@dataclass(frozen=True)
class ProgressCounts:
    whole: int
    level1: int
    level2: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.whole, self.level1, self.level2)

    def to_dict(self) -> dict:
        return {"whole": self.whole, "level1": self.level1, "level2": self.level2}


# ---------------------------------------------------------------------------
# Scenario document parsing
# ---------------------------------------------------------------------------

_SECTIONS = ("rooms", "edges", "objects", "placement", "failure_profile", "initial", "budget")


def load_scenario(text: str) -> ScenarioConfig:
    """Parse and validate a scenario document.

    The format is line-oriented: ``[section]`` headers followed by
    whitespace-separated records; ``#`` starts a comment.  See the bundled
    ``scenarios/paper_trash_task`` for the canonical example.
    """
    sections = _split_sections(text)

    rooms = tuple(line[0] for line in sections.get("rooms", []))
    _validate_rooms(rooms)

    edges = _parse_edges(sections.get("edges", []), rooms)
    objects = _parse_objects(sections.get("objects", []))
    placement = _parse_placement(sections.get("placement", []), rooms, objects)
    profile = _parse_profile(sections.get("failure_profile", []))
    profile.validate()
    initial_rooms = _parse_initial(sections.get("initial", []), rooms)
    tick_budget, costs = _parse_budget(sections.get("budget", []))

    config = ScenarioConfig(
        rooms=rooms,
        edges=edges,
        objects=objects,
        placement=placement,
        profile=profile,
        initial_rooms=initial_rooms,
        tick_budget=tick_budget,
        costs=costs,
        source_text=text,
    )
    _validate_placement_rule(config)
    return config


def load_scenario_file(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as handle:
        return load_scenario(handle.read())


def _split_sections(text: str) -> dict[str, list[list[str]]]:
    sections: dict[str, list[list[str]]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in _SECTIONS:
                raise ParseError("section", f"unknown section [{name}] at line {lineno}")
            if name in sections:
                raise ParseError("section", f"duplicate section [{name}] at line {lineno}")
            sections[name] = []
            current = name
            continue
        if current is None:
            raise ParseError("section", f"content before any section header at line {lineno}")
        sections[current].append(line.split())
    for required in _SECTIONS:
        if required not in sections:
            raise ParseError(required, f"missing [{required}] section")
    return sections


def _validate_rooms(rooms: tuple[str, ...]) -> None:
    if len(rooms) != 4:
        raise ValidationError("rooms", f"expected exactly 4 rooms, got {len(rooms)}")
    if len(set(rooms)) != len(rooms):
        raise ValidationError("rooms", "room names must be unique")
    if set(rooms) != set(ROOM_NAMES):
        raise ValidationError("rooms", f"room names must be {sorted(ROOM_NAMES)}, got {sorted(rooms)}")


def _parse_edges(lines: list[list[str]], rooms: tuple[str, ...]) -> dict[tuple[str, str], int]:
    edges: dict[tuple[str, str], int] = {}
    for parts in lines:
        if len(parts) != 3:
            raise ParseError("edges", f"expected 'room room cost', got {' '.join(parts)!r}")
        a, b, cost_text = parts
        for room in (a, b):
            if room not in rooms:
                raise ValidationError("edges", f"unknown room {room!r}")
        if a == b:
            raise ValidationError("edges", f"self-edge on {a!r}")
        try:
            cost = int(cost_text)
        except ValueError:
            raise ParseError("edges", f"non-integer cost {cost_text!r}") from None
        if cost < 1:
            raise ValidationError("edges", f"edge cost must be >= 1, got {cost}")
        key = (min(a, b), max(a, b))
        edges[key] = cost
    if not edges:
        raise ValidationError("edges", "at least one edge is required")
    return edges


def _parse_objects(lines: list[list[str]]) -> list[ObjectSpec]:
    objects: list[ObjectSpec] = []
    seen: set[str] = set()
    for parts in lines:
        if len(parts) != 3:
            raise ParseError("objects", f"expected 'id category level', got {' '.join(parts)!r}")
        object_id, category, level = parts
        if object_id in seen:
            raise ValidationError("objects", f"duplicate object id {object_id!r}")
        seen.add(object_id)
        if category not in CATEGORIES:
            raise ValidationError("objects", f"unknown category {category!r}")
        expected = LEVEL_BY_CATEGORY[category]
        if level != expected:
            raise ValidationError("objects", f"{object_id}: category {category} is {expected}, not {level}")
        objects.append(ObjectSpec(object_id, category, level))
    return objects


def _parse_placement(
    lines: list[list[str]], rooms: tuple[str, ...], objects: list[ObjectSpec]
) -> dict[str, list[str]]:
    by_id = {o.id: o for o in objects}
    placement: dict[str, list[str]] = {}
    placed: set[str] = set()
    for parts in lines:
        room, ids = parts[0], parts[1:]
        if room not in rooms:
            raise ValidationError("placement", f"unknown room {room!r}")
        if room == TRASH_AREA:
            raise ValidationError("placement", "no trash is placed in the trash area")
        if room in placement:
            raise ValidationError("placement", f"duplicate placement row for {room!r}")
        for object_id in ids:
            if object_id not in by_id:
                raise ValidationError("placement", f"unknown object {object_id!r}")
            if object_id in placed:
                raise ValidationError("placement", f"object {object_id!r} placed twice")
            placed.add(object_id)
        placement[room] = list(ids)
    unplaced = [o.id for o in objects if o.id not in placed]
    if unplaced:
        raise ValidationError("placement", f"objects never placed: {unplaced}")
    return placement


def _validate_placement_rule(config: ScenarioConfig) -> None:
    # Each trash-holding location receives exactly one L1 and one L2 object.
    for room, ids in config.placement.items():
        levels = sorted(config.spec_for(i).level for i in ids)
        if levels != ["L1", "L2"]:
            raise ValidationError(
                "placement", f"{room}: must hold exactly one L1 and one L2 object, got {levels}"
            )


def _parse_bool(text: str, where: str) -> bool:
    if text in ("true", "yes", "1"):
        return True
    if text in ("false", "no", "0"):
        return False
    raise ParseError("failure_profile", f"{where}: expected boolean, got {text!r}")


def _parse_profile(lines: list[list[str]]) -> FailureProfile:
    rules: dict[tuple[str, str], FailureRule] = {}
    fallen_detect: dict[str, FailureRule] = {}
    dropped_detect: dict[str, FailureRule] = {}
    fallen_grasp: set[str] = set()
    collision = 0.0

    def parse_rule(parts: list[str], where: str) -> FailureRule:
        failure = 0.0
        tip_over = 0.0
        persistent = False
        reason: str | None = None
        for token in parts:
            if "=" not in token:
                raise ParseError("failure_profile", f"{where}: expected key=value, got {token!r}")
            key, value = token.split("=", 1)
            if key == "failure":
                failure = float(value)
            elif key == "tip_over":
                tip_over = float(value)
            elif key == "persistent":
                persistent = _parse_bool(value, where)
            elif key == "reason":
                reason = value
            else:
                raise ParseError("failure_profile", f"{where}: unknown key {key!r}")
        return FailureRule(failure, tip_over, persistent, reason)

    for parts in lines:
        head = parts[0]
        if head == "collision":
            if len(parts) != 2:
                raise ParseError("failure_profile", "collision expects one probability")
            collision = float(parts[1])
        elif head == "fallen_grasp":
            for category in parts[1:]:
                if category not in CATEGORIES:
                    raise ValidationError("failure_profile", f"fallen_grasp: unknown category {category!r}")
                fallen_grasp.add(category)
        elif head in ("fallen_detect", "dropped_detect"):
            if len(parts) < 2:
                raise ParseError("failure_profile", f"{head} expects a category")
            category = parts[1]
            if category not in CATEGORIES:
                raise ValidationError("failure_profile", f"{head}: unknown category {category!r}")
            rule = parse_rule(parts[2:], f"{head}.{category}")
            (fallen_detect if head == "fallen_detect" else dropped_detect)[category] = rule
        else:
            if len(parts) < 2:
                raise ParseError("failure_profile", f"expected 'category skill key=value...', got {' '.join(parts)!r}")
            category, skill = parts[0], parts[1]
            if category not in CATEGORIES:
                raise ValidationError("failure_profile", f"unknown category {category!r}")
            if skill not in SKILLS:
                raise ValidationError("failure_profile", f"unknown skill {skill!r}")
            rules[(category, skill)] = parse_rule(parts[2:], f"{category}.{skill}")

    return FailureProfile(
        rules=rules,
        fallen_detect=fallen_detect,
        dropped_detect=dropped_detect,
        fallen_grasp=frozenset(fallen_grasp),
        collision=collision,
    )


def _parse_initial(lines: list[list[str]], rooms: tuple[str, ...]) -> dict[str, str]:
    initial: dict[str, str] = {}
    for parts in lines:
        if len(parts) != 2:
            raise ParseError("initial", f"expected 'robot room', got {' '.join(parts)!r}")
        robot, room = parts
        if robot not in (CARRIER, MANIPULATOR):
            raise ValidationError("initial", f"unknown robot {robot!r}")
        if room not in rooms:
            raise ValidationError("initial", f"unknown room {room!r}")
        initial[robot] = room
    for robot, room in INITIAL_ROOMS.items():
        if initial.get(robot) != room:
            raise ValidationError("initial", f"{robot} must start in {room}, got {initial.get(robot)!r}")
    return initial


def _parse_budget(lines: list[list[str]]) -> tuple[int, dict[str, int]]:
    budget = DEFAULT_TICK_BUDGET
    costs = dict(DEFAULT_COSTS)
    for parts in lines:
        if parts[0] == "ticks":
            if len(parts) != 2:
                raise ParseError("budget", "ticks expects one integer")
            budget = int(parts[1])
        elif parts[0] == "cost":
            if len(parts) != 3:
                raise ParseError("budget", "cost expects 'cost name ticks'")
            name, value = parts[1], int(parts[2])
            if name not in DEFAULT_COSTS:
                raise ValidationError("budget", f"unknown cost entry {name!r}")
            if value < 1:
                raise ValidationError("budget", f"cost {name} must be >= 1")
            costs[name] = value
        else:
            raise ParseError("budget", f"unknown budget entry {parts[0]!r}")
    if budget <= 0:
        raise ValidationError("budget", f"tick budget must be positive, got {budget}")
    return budget, costs


# ---------------------------------------------------------------------------
# World operations
# ---------------------------------------------------------------------------


def init_world(config: ScenarioConfig, seed: int) -> WorldState:
    """Build the tick-0 world: robots at start poses, objects upright in place."""
    objects: dict[str, ObjectItem] = {}
    for room, ids in config.placement.items():
        for object_id in ids:
            spec = config.spec_for(object_id)
            objects[object_id] = ObjectItem(
                id=spec.id,
                category=spec.category,
                level=spec.level,
                location=Location.room(room),
            )
    robots = {
        CARRIER: RobotState(CARRIER, config.initial_rooms[CARRIER], skills=CARRIER_SKILLS),
        MANIPULATOR: RobotState(
            MANIPULATOR, config.initial_rooms[MANIPULATOR], skills=MANIPULATOR_SKILLS
        ),
    }
    world = WorldState(
        config=config,
        seed=seed,
        objects=objects,
        robots=robots,
        rng=random.Random(seed),
    )
    world.mark_collected_if_at_trash()
    return world


def reset_to_initial(world: WorldState) -> WorldState:
    """Return both robots to their start poses after a collision.

    A held object is dropped where the manipulator stands (bottles land
    fallen).  Box contents stay aboard and count as collected once the
    carrier is back at the trash area.  The clock keeps running: the reset
    itself costs ``reset`` ticks.
    """
    manipulator = world.robots[MANIPULATOR]
    if manipulator.holding is not None:
        dropped = world.objects[manipulator.holding]
        dropped.location = Location.room(manipulator.room)
        dropped.dropped = True
        if dropped.category in BOTTLE_CATEGORIES:
            dropped.posture = FALLEN
        manipulator.holding = None
    for robot_id, robot in world.robots.items():
        robot.room = world.config.initial_rooms[robot_id]
    world.advance(world.config.cost("reset"))
    world.mark_collected_if_at_trash()
    return world


def collected_count(world: WorldState) -> ProgressCounts:
    """Partition the collected set by difficulty level."""
    level1 = sum(1 for object_id in world.collected if world.objects[object_id].level == "L1")
    level2 = sum(1 for object_id in world.collected if world.objects[object_id].level == "L2")
    return ProgressCounts(whole=level1 + level2, level1=level1, level2=level2)


def shortest_path(config: ScenarioConfig, start: str, goal: str) -> list[str] | None:
    """Rooms on the cheapest path from start to goal inclusive, or None."""
    if start == goal:
        return [start]
    adjacency: dict[str, list[tuple[str, int]]] = {room: [] for room in config.rooms}
    for (a, b), cost in config.edges.items():
        adjacency[a].append((b, cost))
        adjacency[b].append((a, cost))
    best: dict[str, int] = {start: 0}
    prev: dict[str, str] = {}
    queue: list[tuple[int, str]] = [(0, start)]
    while queue:
        dist, room = heapq.heappop(queue)
        if room == goal:
            path = [goal]
            while path[-1] != start:
                path.append(prev[path[-1]])
            return list(reversed(path))
        if dist > best.get(room, float("inf")):
            continue
        for neighbor, cost in sorted(adjacency[room]):
            candidate = dist + cost
            if candidate < best.get(neighbor, float("inf")):
                best[neighbor] = candidate
                prev[neighbor] = room
                heapq.heappush(queue, (candidate, neighbor))
    return None


def path_cost(config: ScenarioConfig, path: list[str]) -> int:
    total = 0
    for a, b in zip(path, path[1:]):
        total += config.edges[(min(a, b), max(a, b))]
    return total
