from __future__ import annotations

import random

import pytest

from repairsim import actions
from repairsim.actions import SkillResult
from repairsim.planner import (
    DEFAULT_INSTRUCTION,
    EmptyInstruction,
    NotSuspended,
    OperatorDelta,
    PlanningContext,
    RuleBasedBackend,
    SuspendedContext,
    UnparseableReply,
    apply_feedback,
    assemble_decomposition_prompt,
    decompose_and_allocate,
    next_action,
    parse_action_line,
    parse_allocation,
    render_decomposition_prompt,
)
from repairsim.world import CARRIER, MANIPULATOR


def ok(kind, ticks=10, observation=""):
    return SkillResult("success", "none", ticks, observation)


def fail(reason, observation=""):
    return SkillResult("failure", reason, 10, observation)


def contexts_for(config, mode="repair"):
    backend = RuleBasedBackend(mode=mode)
    bundle = assemble_decomposition_prompt(config, DEFAULT_INSTRUCTION)
    allocation = decompose_and_allocate(bundle, backend)
    return {robot: PlanningContext(robot, allocation[robot]) for robot in allocation}, backend


def test_bundle_has_seven_elements(canonical):
    bundle = assemble_decomposition_prompt(canonical, DEFAULT_INSTRUCTION)
    assert len(bundle.elements()) == 7
    assert bundle.instruction == DEFAULT_INSTRUCTION
    assert [e for e, _ in bundle.elements()] == [
        "task_description",
        "robot_profiles",
        "room_names",
        "object_locations",
        "rules",
        "examples",
        "instruction",
    ]
    assert all(value for _, value in bundle.elements())
    assert set(bundle.robot_profiles) == {CARRIER, MANIPULATOR}
    assert len(bundle.object_locations) == 6


def test_empty_instruction_rejected(canonical):
    with pytest.raises(EmptyInstruction):
        assemble_decomposition_prompt(canonical, "")
    with pytest.raises(EmptyInstruction):
        assemble_decomposition_prompt(canonical, "   ")


def test_rendered_prompt_sections_in_order(canonical):
    bundle = assemble_decomposition_prompt(canonical, DEFAULT_INSTRUCTION)
    text = render_decomposition_prompt(bundle)
    positions = [text.index(h) for h in ("== Task ==", "== Robots ==", "== Rooms ==",
                                         "== Object locations ==", "== Rules ==",
                                         "== Examples ==", "== Instruction ==")]
    assert positions == sorted(positions)


def test_rule_based_allocation_shape(canonical):
    backend = RuleBasedBackend()
    bundle = assemble_decomposition_prompt(canonical, DEFAULT_INSTRUCTION)
    allocation = decompose_and_allocate(bundle, backend)
    manipulator = allocation[MANIPULATOR]
    carrier = allocation[CARRIER]
    # every object fetched exactly once, by the manipulator
    assert manipulator.objects() == [o for o, _ in bundle.object_locations]
    assert carrier.objects() == []
    # carrier shuttles to the trash area after every load
    waits = [s for s in carrier.subtasks if s.verb == "wait_for"]
    trash_runs = [s for s in carrier.subtasks if s.verb == "navigate" and s.room == "trash_area"]
    assert len(waits) == 6
    assert len(trash_runs) == 6
    verbs = {s.verb for s in manipulator.subtasks}
    assert verbs == {"navigate", "detect", "pick", "place"}


def test_allocation_capability_violation():
    reply = "ROBOT carrier\nPICK snack_cup_1\n"
    with pytest.raises(UnparseableReply) as err:
        parse_allocation(reply, ["snack_cup_1"], ["dining_room"])
    assert "capability" in str(err.value)


def test_allocation_totality_enforced(canonical):
    class LazyBackend:
        def decompose(self, bundle):
            return "ROBOT manipulator\nNAVIGATE dining_room\nDETECT snack_cup_1\nPICK snack_cup_1\nPLACE carrier\nROBOT carrier\n"

    bundle = assemble_decomposition_prompt(canonical, DEFAULT_INSTRUCTION)
    with pytest.raises(UnparseableReply) as err:
        decompose_and_allocate(bundle, LazyBackend())
    assert "never allocated" in str(err.value)


def test_duplicate_allocation_rejected(canonical):
    class GreedyBackend:
        def decompose(self, bundle):
            lines = ["ROBOT manipulator"]
            for object_id, room in bundle.object_locations:
                lines += [f"NAVIGATE {room}", f"DETECT {object_id}", f"PICK {object_id}", "PLACE carrier"]
            lines += ["DETECT snack_cup_1", "ROBOT carrier"]
            return "\n".join(lines)

    bundle = assemble_decomposition_prompt(canonical, DEFAULT_INSTRUCTION)
    # snack_cup_1 appears twice for the same robot: fine (retry), but a second
    # robot claiming it is not. Same-robot repeats collapse in objects().
    allocation = decompose_and_allocate(bundle, GreedyBackend())
    assert allocation[MANIPULATOR].objects().count("snack_cup_1") == 1


def test_zero_object_scenario_allocates_nothing():
    from repairsim.world import load_scenario

    text = """
[rooms]
trash_area
dining_room
living_room
workspace
[edges]
trash_area dining_room 30
trash_area living_room 30
trash_area workspace 30
dining_room living_room 30
dining_room workspace 30
living_room workspace 30
[objects]
[placement]
[failure_profile]
collision 0.0
[initial]
carrier trash_area
manipulator workspace
[budget]
ticks 100
"""
    config = load_scenario(text)
    backend = RuleBasedBackend()
    bundle = assemble_decomposition_prompt(config, DEFAULT_INSTRUCTION)
    allocation = decompose_and_allocate(bundle, backend)
    assert allocation[MANIPULATOR].subtasks == []
    assert allocation[CARRIER].subtasks == []


def test_first_action_is_navigate(canonical):
    contexts, backend = contexts_for(canonical)
    cmd = next_action(contexts[MANIPULATOR], backend)
    assert cmd.kind == actions.NAVIGATE
    assert cmd.target == "dining_room"


def test_detect_failure_triggers_help_with_object_name(canonical):
    contexts, backend = contexts_for(canonical)
    ctx = contexts[MANIPULATOR]
    ctx.note_result(actions.navigate(MANIPULATOR, "dining_room"), ok("navigate", 30))
    ctx.note_result(actions.detect(MANIPULATOR, "snack_cup_1"), ok("detect"))
    ctx.note_result(actions.pick(MANIPULATOR, "snack_cup_1"), ok("pick"))
    ctx.note_result(actions.detect(MANIPULATOR, "paper_waste_1"), fail("not_detected"))
    cmd = next_action(ctx, backend)
    assert cmd.kind == actions.HELP
    assert "paper_waste_1" in cmd.message
    assert "could not be detected" in cmd.message
    assert "place it into the clear box" in cmd.message


def test_auto_mode_replans_detect_instead_of_help(canonical):
    contexts, backend = contexts_for(canonical, mode="auto")
    ctx = contexts[MANIPULATOR]
    ctx.note_result(actions.navigate(MANIPULATOR, "dining_room"), ok("navigate", 30))
    ctx.note_result(actions.detect(MANIPULATOR, "paper_waste_1"), fail("not_detected"))
    cmd = next_action(ctx, backend)
    assert cmd.kind == actions.DETECT
    assert cmd.target == "paper_waste_1"


def test_done_when_all_subtasks_complete(canonical):
    contexts, backend = contexts_for(canonical)
    ctx = contexts[MANIPULATOR]
    ctx.completed = set(range(len(ctx.assigned.subtasks)))
    cmd = next_action(ctx, backend)
    assert cmd.kind == actions.DONE


def test_suspended_context_refuses_planning(canonical):
    contexts, backend = contexts_for(canonical)
    ctx = contexts[MANIPULATOR]
    ctx.suspended = True
    with pytest.raises(SuspendedContext):
        next_action(ctx, backend)


def test_apply_feedback_marks_operator_completed_subtasks(canonical):
    contexts, backend = contexts_for(canonical)
    ctx = contexts[MANIPULATOR]
    ctx.note_result(actions.navigate(MANIPULATOR, "dining_room"), ok("navigate", 30))
    ctx.note_result(actions.detect(MANIPULATOR, "snack_cup_1"), fail("not_detected"))
    ctx.note_result(actions.help_command(MANIPULATOR, "m"), ok("help", 5))
    ctx.suspended = True
    apply_feedback(ctx, "placed snack_cup_1 into the clear box", OperatorDelta(boxed=("snack_cup_1",)))
    assert not ctx.suspended
    cmd = next_action(ctx, backend)
    # moves on to the second dining room object, never repeating snack_cup_1
    assert (cmd.kind, cmd.target) == (actions.DETECT, "paper_waste_1")


def test_apply_feedback_requires_suspension(canonical):
    contexts, _ = contexts_for(canonical)
    with pytest.raises(NotSuspended):
        apply_feedback(contexts[MANIPULATOR], "anything", OperatorDelta())


def test_declined_feedback_keeps_subtasks_and_retries_once(canonical):
    contexts, backend = contexts_for(canonical)
    ctx = contexts[MANIPULATOR]
    ctx.note_result(actions.navigate(MANIPULATOR, "dining_room"), ok("navigate", 30))
    ctx.note_result(actions.detect(MANIPULATOR, "snack_cup_1"), fail("not_detected"))
    completed_before = set(ctx.completed)
    ctx.suspended = True
    apply_feedback(ctx, "declined: retry yourself", OperatorDelta())
    assert ctx.completed == completed_before
    ctx.note_result(actions.help_command(MANIPULATOR, "m"), ok("help", 5))
    # history ends [detect-fail, help-ok] with a decline: retry the detect
    cmd = next_action(ctx, backend)
    assert (cmd.kind, cmd.target) == (actions.DETECT, "snack_cup_1")
    # a second failure raises help again
    ctx.note_result(cmd, fail("not_detected"))
    cmd2 = next_action(ctx, backend)
    assert cmd2.kind == actions.HELP


def test_help_mandate_exactly_one_help_per_failure(canonical):
    # simulate a full REPAIR planning loop against stub results: every
    # failure of the four skills is followed by exactly one help before any
    # retry of that skill
    contexts, backend = contexts_for(canonical)
    ctx = contexts[MANIPULATOR]
    rng = random.Random(11)
    failures_pending_help = 0
    for _ in range(300):
        cmd = next_action(ctx, backend)
        if cmd.kind == actions.DONE:
            break
        if cmd.kind == actions.HELP:
            assert failures_pending_help == 1
            failures_pending_help = 0
            ctx.note_result(cmd, ok("help", 5))
            ctx.suspended = True
            # operator always boxes the object named in the failure
            from repairsim.planner import failure_context

            _, failed_object, _ = failure_context(ctx)
            apply_feedback(
                ctx,
                f"placed {failed_object} into the clear box",
                OperatorDelta(boxed=(failed_object,)),
            )
            continue
        assert failures_pending_help == 0, "retried a skill before help"
        if cmd.kind in (actions.DETECT, actions.PICK, actions.PLACE) and rng.random() < 0.4:
            ctx.note_result(cmd, fail("not_detected"))
            failures_pending_help = 1
        else:
            ctx.note_result(cmd, ok(cmd.kind, 10))


def test_carrier_wait_until_load_then_shuttle(canonical):
    contexts, backend = contexts_for(canonical)
    ctx = contexts[CARRIER]
    cmd = next_action(ctx, backend)
    assert (cmd.kind, cmd.target) == (actions.NAVIGATE, "dining_room")
    ctx.note_result(cmd, ok("navigate", 30, "arrived dining_room box=[]"))
    cmd = next_action(ctx, backend)
    assert cmd.kind == actions.WAIT
    ctx.note_result(cmd, ok("wait", 1, "waited 1 box=[]"))
    cmd = next_action(ctx, backend)
    assert cmd.kind == actions.WAIT
    ctx.note_result(cmd, ok("wait", 1, "waited 1 box=[snack_cup_1]"))
    cmd = next_action(ctx, backend)
    assert (cmd.kind, cmd.target) == (actions.NAVIGATE, "trash_area")


def test_carrier_skips_moot_travel_leg(canonical):
    contexts, backend = contexts_for(canonical)
    ctx = contexts[CARRIER]
    ctx.note_result(actions.navigate(CARRIER, "dining_room"), ok("navigate", 30, "arrived dining_room box=[]"))
    ctx.note_result(actions.wait(CARRIER), ok("wait", 1, "waited 1 box=[snack_cup_1]"))
    ctx.note_result(actions.navigate(CARRIER, "trash_area"), ok("navigate", 30, "arrived trash_area box=[snack_cup_1]"))
    # paper_waste_1 got boxed by the operator while the carrier was away:
    # the dining room leg and its wait are moot, go straight to the trash run
    ctx.note_result(actions.wait(CARRIER), ok("wait", 1, "waited 1 box=[snack_cup_1,paper_waste_1]"))
    cmd = next_action(ctx, backend)
    assert (cmd.kind, cmd.target) == (actions.NAVIGATE, "trash_area")


def test_rule_based_determinism(canonical):
    for _ in range(3):
        a_contexts, a_backend = contexts_for(canonical)
        b_contexts, b_backend = contexts_for(canonical)
        for robot in (CARRIER, MANIPULATOR):
            assert next_action(a_contexts[robot], a_backend) == next_action(b_contexts[robot], b_backend)


def test_capability_soundness_fuzz(canonical):
    # randomized histories never coax the planner into a command the robot
    # cannot perform
    from repairsim.world import CARRIER_SKILLS, MANIPULATOR_SKILLS

    skills = {CARRIER: set(CARRIER_SKILLS), MANIPULATOR: set(MANIPULATOR_SKILLS)}
    rng = random.Random(99)
    object_ids = [o.id for o in canonical.objects]
    for trial in range(400):
        contexts, backend = contexts_for(canonical, mode=rng.choice(["repair", "auto"]))
        robot = rng.choice([CARRIER, MANIPULATOR])
        ctx = contexts[robot]
        for _ in range(rng.randrange(0, 12)):
            kind = rng.choice([actions.NAVIGATE, actions.DETECT, actions.PICK, actions.PLACE, actions.WAIT])
            target = {
                actions.NAVIGATE: rng.choice(canonical.rooms),
                actions.DETECT: rng.choice(object_ids),
                actions.PICK: rng.choice(object_ids),
                actions.PLACE: CARRIER,
                actions.WAIT: None,
            }[kind]
            result = ok(kind, 10, "box=[]") if rng.random() < 0.6 else fail("grasp_failed")
            ctx.note_result(actions.SkillCommand(kind, robot, target), result)
        if ctx.suspended:
            continue
        cmd = next_action(ctx, backend)
        if cmd.kind in actions.SKILL_FOR_KIND:
            assert actions.SKILL_FOR_KIND[cmd.kind] in skills[robot], (robot, cmd)


def test_parse_action_line_variants():
    assert parse_action_line("NAVIGATE dining_room", MANIPULATOR).kind == actions.NAVIGATE
    assert parse_action_line("HELP please assist", MANIPULATOR).message == "please assist"
    assert parse_action_line("WAIT", CARRIER).kind == actions.WAIT
    assert parse_action_line("DONE", CARRIER).kind == actions.DONE
    with pytest.raises(UnparseableReply):
        parse_action_line("FLY to the moon", MANIPULATOR)
    with pytest.raises(UnparseableReply):
        parse_action_line("PICK snack_cup_1", CARRIER)
    with pytest.raises(UnparseableReply):
        parse_action_line("", MANIPULATOR)
