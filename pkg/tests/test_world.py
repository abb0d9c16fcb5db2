from __future__ import annotations

import random

import pytest

from repairsim.world import (
    CARRIER,
    MANIPULATOR,
    FALLEN,
    Location,
    ParseError,
    ValidationError,
    collected_count,
    init_world,
    load_scenario,
    reset_to_initial,
    shortest_path,
)


def test_canonical_scenario_census(canonical):
    assert len(canonical.rooms) == 4
    assert len(canonical.objects) == 6
    levels = [o.level for o in canonical.objects]
    assert levels.count("L1") == 3
    assert levels.count("L2") == 3
    categories = {o.category for o in canonical.objects}
    assert len(categories) == 4


def test_placement_rule_holds(canonical):
    for room, ids in canonical.placement.items():
        levels = sorted(canonical.spec_for(i).level for i in ids)
        assert levels == ["L1", "L2"], room


def test_five_rooms_rejected(canonical_text):
    text = canonical_text.replace("[rooms]\ntrash_area", "[rooms]\npantry\ntrash_area")
    with pytest.raises(ValidationError) as err:
        load_scenario(text)
    assert err.value.field == "rooms"


def test_bad_placement_rejected(canonical_text):
    # two L1 objects at one location, zero L2
    text = canonical_text.replace(
        "dining_room snack_cup_1 paper_waste_1", "dining_room snack_cup_1 snack_cup_2"
    ).replace("workspace snack_cup_2 empty_bottle_2", "workspace paper_waste_1 empty_bottle_2")
    with pytest.raises(ValidationError) as err:
        load_scenario(text)
    assert err.value.field == "placement"


def test_level_mismatch_rejected(canonical_text):
    text = canonical_text.replace("snack_cup_1 snack_cup L1", "snack_cup_1 snack_cup L2")
    with pytest.raises(ValidationError) as err:
        load_scenario(text)
    assert err.value.field == "objects"


def test_missing_section_is_parse_error(canonical_text):
    text = canonical_text.replace("[budget]", "[edges] # wrong")
    with pytest.raises(ParseError):
        load_scenario(text)


def test_probability_out_of_range_rejected(canonical_text):
    text = canonical_text.replace("collision 0.05", "collision 1.5")
    with pytest.raises(ValidationError) as err:
        load_scenario(text)
    assert err.value.field == "failure_profile"


def test_wrong_start_pose_rejected(canonical_text):
    text = canonical_text.replace("carrier trash_area", "carrier dining_room")
    with pytest.raises(ValidationError) as err:
        load_scenario(text)
    assert err.value.field == "initial"


def test_init_world_start_poses(canonical):
    world = init_world(canonical, 7)
    assert world.tick == 0
    assert world.robots[CARRIER].room == "trash_area"
    assert world.robots[MANIPULATOR].room == "workspace"
    assert world.collected == []
    for obj in world.objects.values():
        assert obj.posture == "upright"
        assert obj.location.kind == "room"


def test_init_world_deterministic(canonical):
    a = init_world(canonical, 7)
    b = init_world(canonical, 7)
    assert a.canonical_json() == b.canonical_json()


def test_seed_changes_rng_not_placement(canonical):
    a = init_world(canonical, 7)
    b = init_world(canonical, 8)
    placements_a = {k: str(v.location) for k, v in a.objects.items()}
    placements_b = {k: str(v.location) for k, v in b.objects.items()}
    assert placements_a == placements_b
    assert a.rng.getstate() != b.rng.getstate()


def test_reset_marks_boxed_objects_collected(canonical):
    world = init_world(canonical, 1)
    carrier = world.robots[CARRIER]
    carrier.room = "dining_room"
    world.objects["snack_cup_1"].location = Location.box(CARRIER)
    carrier.box_contents.append("snack_cup_1")
    before = world.tick
    reset_to_initial(world)
    assert "snack_cup_1" in world.collected
    assert carrier.room == "trash_area"
    assert world.robots[MANIPULATOR].room == "workspace"
    assert world.tick == before + canonical.cost("reset")


def test_reset_with_empty_box_keeps_collected(canonical):
    world = init_world(canonical, 1)
    world.robots[CARRIER].room = "living_room"
    reset_to_initial(world)
    assert world.collected == []
    assert world.robots[CARRIER].room == "trash_area"


def test_reset_drops_held_bottle_fallen(canonical):
    world = init_world(canonical, 1)
    manipulator = world.robots[MANIPULATOR]
    manipulator.room = "living_room"
    obj = world.objects["empty_bottle_1"]
    obj.location = Location.held(MANIPULATOR)
    manipulator.holding = "empty_bottle_1"
    reset_to_initial(world)
    assert obj.location == Location.room("living_room")
    assert obj.posture == FALLEN
    assert obj.dropped
    assert manipulator.holding is None


def test_collected_count_partitions(canonical):
    world = init_world(canonical, 1)
    assert collected_count(world).as_tuple() == (0, 0, 0)
    world.collected = ["empty_bottle_1"]
    assert collected_count(world).as_tuple() == (1, 0, 1)
    world.collected = list(world.objects)
    assert collected_count(world).as_tuple() == (6, 3, 3)


def test_object_conservation_under_mutations(canonical):
    # every object keeps exactly one location through arbitrary world churn
    world = init_world(canonical, 3)
    rng = random.Random(0)
    rooms = list(canonical.rooms)
    for _ in range(200):
        obj = world.objects[rng.choice(list(world.objects))]
        obj.location = Location.room(rng.choice(rooms))
        assert len(world.objects) == 6
        locations = [world.objects[k].location for k in world.objects]
        assert all(loc.kind in ("room", "box", "held") for loc in locations)


def test_shortest_path_complete_graph(canonical):
    path = shortest_path(canonical, "trash_area", "workspace")
    assert path == ["trash_area", "workspace"]
    assert shortest_path(canonical, "dining_room", "dining_room") == ["dining_room"]


def test_shortest_path_multi_hop():
    text = """
[rooms]
trash_area
dining_room
living_room
workspace
[edges]
trash_area dining_room 30
dining_room living_room 30
living_room workspace 30
[objects]
snack_cup_1 snack_cup L1
paper_waste_1 paper_waste L2
[placement]
dining_room snack_cup_1 paper_waste_1
[failure_profile]
collision 0.0
[initial]
carrier trash_area
manipulator workspace
[budget]
ticks 1500
"""
    config = load_scenario(text)
    path = shortest_path(config, "trash_area", "workspace")
    assert path == ["trash_area", "dining_room", "living_room", "workspace"]


def test_snapshot_is_independent(canonical):
    world = init_world(canonical, 5)
    snap = world.snapshot()
    world.robots[CARRIER].room = "living_room"
    world.objects["snack_cup_1"].posture = FALLEN
    assert snap.robots[CARRIER].room == "trash_area"
    assert snap.objects["snack_cup_1"].posture == "upright"
    assert snap.canonical_json() != world.canonical_json()
