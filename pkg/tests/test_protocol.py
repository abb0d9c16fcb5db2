from __future__ import annotations

import itertools
import random

import pytest

from repairsim import actions
from repairsim.actions import SkillResult
from repairsim.planner import (
    DEFAULT_INSTRUCTION,
    PlanningContext,
    RuleBasedBackend,
    assemble_decomposition_prompt,
    decompose_and_allocate,
)
from repairsim.protocol import (
    ALWAYS_ASSIST,
    ALWAYS_DECLINE,
    DELAY_K,
    OPERATOR_CONTROL,
    RESUMING,
    RUNNING,
    SUSPENDED,
    HelpBroker,
    HelpRequest,
    IllegalTransition,
    InvalidTeleop,
    MismatchedFailure,
    OperatorAction,
    ScriptedPolicy,
    decline,
    feedback,
    run_scripted_operator,
    teleop_grasp,
    teleop_move,
    teleop_place_into_box,
)
from repairsim.world import CARRIER, MANIPULATOR, Location, init_world


def make_ctx(config, with_failure="object_detection", failed_object="paper_waste_1"):
    backend = RuleBasedBackend()
    bundle = assemble_decomposition_prompt(config, DEFAULT_INSTRUCTION)
    allocation = decompose_and_allocate(bundle, backend)
    ctx = PlanningContext(MANIPULATOR, allocation[MANIPULATOR])
    if with_failure == "object_detection":
        cmd = actions.detect(MANIPULATOR, failed_object)
    elif with_failure == "pick":
        cmd = actions.pick(MANIPULATOR, failed_object)
    else:
        cmd = actions.navigate(MANIPULATOR, "dining_room")
    ctx.note_result(cmd, SkillResult("failure", "not_detected", 10, ""))
    ctx.note_result(actions.help_command(MANIPULATOR, "assist"), SkillResult("success", "none", 5, ""))
    return ctx


def request_for(ctx, skill="object_detection", object_id="paper_waste_1", request_id="help-1"):
    return HelpRequest(
        id=request_id,
        robot=MANIPULATOR,
        message="assist",
        failed_skill=skill,
        failed_object=object_id,
        raised_at=0,
    )


def test_raise_help_suspends_and_enqueues(canonical):
    broker = HelpBroker()
    ctx = make_ctx(canonical)
    ctx, request = broker.raise_help(ctx, request_for(ctx))
    assert broker.phase(MANIPULATOR) == SUSPENDED
    assert ctx.suspended
    assert broker.session is not None
    assert broker.session.request.id == request.id


def test_raise_help_twice_is_illegal(canonical):
    broker = HelpBroker()
    ctx = make_ctx(canonical)
    broker.raise_help(ctx, request_for(ctx))
    with pytest.raises(IllegalTransition):
        broker.raise_help(ctx, request_for(ctx, request_id="help-2"))


def test_raise_help_for_help_skill_rejected(canonical):
    broker = HelpBroker()
    ctx = make_ctx(canonical)
    with pytest.raises(MismatchedFailure):
        broker.raise_help(ctx, request_for(ctx, skill="help"))


def test_raise_help_mismatched_failure(canonical):
    broker = HelpBroker()
    ctx = make_ctx(canonical)  # last failure is object_detection
    with pytest.raises(MismatchedFailure):
        broker.raise_help(ctx, request_for(ctx, skill="pick"))


def test_operator_session_transitions(canonical):
    broker = HelpBroker()
    world = init_world(canonical, 1)
    world.robots[MANIPULATOR].room = "dining_room"
    world.robots[CARRIER].room = "dining_room"
    ctx = make_ctx(canonical)
    broker.raise_help(ctx, request_for(ctx))

    phase, _ = broker.operator_step(world, teleop_grasp(MANIPULATOR, "paper_waste_1"))
    assert phase == OPERATOR_CONTROL
    assert world.objects["paper_waste_1"].location == Location.held(MANIPULATOR)

    phase, _ = broker.operator_step(world, feedback("object boxed"))
    assert phase == RESUMING

    ctx, session = broker.resume(ctx)
    assert broker.phase(MANIPULATOR) == RUNNING
    assert not ctx.suspended
    assert session.request.id in broker.consumed_ids


def test_operator_step_without_session_is_illegal(canonical):
    broker = HelpBroker()
    world = init_world(canonical, 1)
    with pytest.raises(IllegalTransition):
        broker.operator_step(world, feedback("hi"))


def test_operator_step_after_resuming_is_illegal(canonical):
    broker = HelpBroker()
    world = init_world(canonical, 1)
    ctx = make_ctx(canonical)
    broker.raise_help(ctx, request_for(ctx))
    broker.operator_step(world, decline("busy"))
    with pytest.raises(IllegalTransition):
        broker.operator_step(world, feedback("more"))


def test_teleop_grasp_needs_a_gripper(canonical):
    # operator privilege bypasses failure draws, not missing hardware
    broker = HelpBroker()
    world = init_world(canonical, 1)
    world.robots[CARRIER].room = "dining_room"
    ctx = make_ctx(canonical)
    broker.raise_help(ctx, request_for(ctx))
    with pytest.raises(InvalidTeleop):
        broker.operator_step(world, teleop_grasp(CARRIER, "paper_waste_1"))
    assert world.robots[CARRIER].holding is None


def test_invalid_teleop_grasp_not_co_located(canonical):
    broker = HelpBroker()
    world = init_world(canonical, 1)  # manipulator in workspace, object in dining
    ctx = make_ctx(canonical)
    broker.raise_help(ctx, request_for(ctx))
    with pytest.raises(InvalidTeleop):
        broker.operator_step(world, teleop_grasp(MANIPULATOR, "paper_waste_1"))
    # session survives an invalid action
    assert broker.phase(MANIPULATOR) == SUSPENDED


def test_decline_resumes_without_world_change(canonical):
    broker = HelpBroker()
    world = init_world(canonical, 1)
    ctx = make_ctx(canonical)
    before = world.canonical_json()
    broker.raise_help(ctx, request_for(ctx))
    phase, _ = broker.operator_step(world, decline("retry yourself"))
    assert phase == RESUMING
    ctx, session = broker.resume(ctx)
    assert session.delta().empty
    assert world.canonical_json() == before
    assert ctx.operator_feedback[-1] == "declined: retry yourself"


def test_exactly_once_request_ids(canonical):
    broker = HelpBroker()
    world = init_world(canonical, 1)
    ctx = make_ctx(canonical)
    broker.raise_help(ctx, request_for(ctx))
    broker.operator_step(world, decline("no"))
    broker.resume(ctx)
    # same id can never be raised again
    ctx.note_result(actions.detect(MANIPULATOR, "paper_waste_1"), SkillResult("failure", "not_detected", 10, ""))
    ctx.note_result(actions.help_command(MANIPULATOR, "assist"), SkillResult("success", "none", 5, ""))
    with pytest.raises(IllegalTransition):
        broker.raise_help(ctx, request_for(ctx))


def test_scripted_always_assist_minimal_sequence(canonical):
    # detection failure on paper_waste_1 in the dining room; the carrier is
    # already there, the manipulator is not
    world = init_world(canonical, 1)
    world.robots[CARRIER].room = "dining_room"
    request = HelpRequest("h1", MANIPULATOR, "m", "object_detection", "paper_waste_1", 0)
    sequence = run_scripted_operator(ScriptedPolicy(ALWAYS_ASSIST), request, world)
    kinds = [(a.kind, a.command.kind if a.command else None) for a in sequence]
    assert kinds == [
        ("teleop", "move"),
        ("teleop", "grasp"),
        ("teleop", "place_into_box"),
        ("feedback", None),
    ]
    assert sequence[0].command.robot == MANIPULATOR
    assert sequence[0].command.target == "dining_room"
    assert "paper_waste_1" in sequence[-1].text


def test_scripted_assist_sequence_reaches_box(canonical):
    # executing the scripted sequence actually boxes the object
    broker = HelpBroker()
    world = init_world(canonical, 1)
    ctx = make_ctx(canonical)
    broker.raise_help(ctx, request_for(ctx))
    request = broker.session.request
    for action in run_scripted_operator(ScriptedPolicy(ALWAYS_ASSIST), request, world):
        broker.operator_step(world, action)
    assert "paper_waste_1" in world.robots[CARRIER].box_contents
    _, session = broker.resume(ctx)
    assert session.boxed == ["paper_waste_1"]


def test_scripted_always_decline(canonical):
    world = init_world(canonical, 1)
    request = HelpRequest("h1", MANIPULATOR, "m", "pick", "snack_cup_1", 0)
    sequence = run_scripted_operator(ScriptedPolicy(ALWAYS_DECLINE), request, world)
    assert len(sequence) == 1
    assert sequence[0].kind == "decline"
    assert sequence[0].text == "retry yourself"


def test_delay_zero_equals_always_assist(canonical):
    world = init_world(canonical, 1)
    request = HelpRequest("h1", MANIPULATOR, "m", "object_detection", "paper_waste_1", 0)
    assist = run_scripted_operator(ScriptedPolicy(ALWAYS_ASSIST), request, world)
    delayed = run_scripted_operator(ScriptedPolicy(DELAY_K, delay_ticks=0), request, world)
    assert assist == delayed


def test_delay_k_prepends_wait(canonical):
    world = init_world(canonical, 1)
    request = HelpRequest("h1", MANIPULATOR, "m", "object_detection", "paper_waste_1", 0)
    delayed = run_scripted_operator(ScriptedPolicy(DELAY_K, delay_ticks=25), request, world)
    assert delayed[0].kind == "teleop"
    assert delayed[0].command.kind == "wait"
    assert delayed[0].command.ticks == 25


def test_assist_for_held_object(canonical):
    # place failed while still holding (carrier was elsewhere): the operator
    # brings the carrier over and loads the box
    world = init_world(canonical, 1)
    world.robots[MANIPULATOR].room = "dining_room"
    world.robots[MANIPULATOR].holding = "snack_cup_1"
    world.objects["snack_cup_1"].location = Location.held(MANIPULATOR)
    request = HelpRequest("h1", MANIPULATOR, "m", "place", "snack_cup_1", 0)
    sequence = run_scripted_operator(ScriptedPolicy(ALWAYS_ASSIST), request, world)
    kinds = [(a.kind, a.command.kind if a.command else None) for a in sequence]
    assert kinds == [("teleop", "move"), ("teleop", "place_into_box"), ("feedback", None)]
    assert sequence[0].command.robot == CARRIER


def test_transition_closure_random_sequences(canonical):
    # no random action sequence can leave the four-phase enum or corrupt the
    # broker
    rng = random.Random(5)
    phases = {RUNNING, SUSPENDED, OPERATOR_CONTROL, RESUMING}
    for _ in range(200):
        broker = HelpBroker()
        world = init_world(canonical, rng.randrange(1000))
        ctx = make_ctx(canonical)
        raised = rng.random() < 0.8
        if raised:
            broker.raise_help(ctx, request_for(ctx))
        for _ in range(rng.randrange(0, 6)):
            action = rng.choice(
                [
                    teleop_move(MANIPULATOR, rng.choice(canonical.rooms)),
                    teleop_grasp(MANIPULATOR, "paper_waste_1"),
                    teleop_place_into_box(),
                    feedback("done"),
                    decline("no"),
                ]
            )
            try:
                broker.operator_step(world, action)
            except (IllegalTransition, InvalidTeleop):
                pass
            assert broker.phase(MANIPULATOR) in phases
            assert broker.phase(CARRIER) == RUNNING


def test_liveness_small_trace_enumeration(canonical):
    # exhaustive enumeration over operator action traces (length <= 8 with
    # closure actions): every raised request either reaches Resuming within
    # the trace or the session is still legally open; none vanish
    base_actions = ["move", "grasp", "feedback", "decline"]
    for length in range(1, 5):
        for trace in itertools.product(base_actions, repeat=length):
            broker = HelpBroker()
            world = init_world(canonical, 1)
            world.robots[MANIPULATOR].room = "dining_room"
            world.robots[CARRIER].room = "dining_room"
            ctx = make_ctx(canonical)
            broker.raise_help(ctx, request_for(ctx))
            closed = False
            for step in trace:
                action = {
                    "move": teleop_move(MANIPULATOR, "dining_room"),
                    "grasp": teleop_grasp(MANIPULATOR, "paper_waste_1"),
                    "feedback": feedback("ok"),
                    "decline": decline("no"),
                }[step]
                try:
                    broker.operator_step(world, action)
                except (IllegalTransition, InvalidTeleop):
                    continue
                if broker.session is not None and broker.session.outcome is not None:
                    broker.resume(ctx)
                    closed = True
                    break
            if closed:
                assert broker.phase(MANIPULATOR) == RUNNING
                assert "help-1" in broker.consumed_ids
            else:
                # still suspended, never dropped
                assert broker.session is not None
                assert broker.phase(MANIPULATOR) in (SUSPENDED, OPERATOR_CONTROL)
