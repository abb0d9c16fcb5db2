import { describe, expect, it } from "vitest";

import { controlOptions, renderStatusBar, renderWorld } from "../src/render.js";
import { controlsEnabled, initialView, reduce, type ConsoleView } from "../src/state.js";
import type { SnapshotPayload, WireMessage } from "../src/wire.js";

function snapshot(overrides: Partial<SnapshotPayload> = {}): SnapshotPayload {
  return {
    tick: 100,
    budget: 1500,
    mode: "repair",
    rooms: ["trash_area", "dining_room", "living_room", "workspace"],
    robots: [
      { id: "carrier", room: "dining_room", holding: null, box_contents: [], skills: ["navigation"] },
      {
        id: "manipulator",
        room: "dining_room",
        holding: null,
        box_contents: [],
        skills: ["navigation", "object_detection", "pick", "place", "help"],
      },
    ],
    objects: [
      { id: "snack_cup_1", category: "snack_cup", level: "L1", location: "room:dining_room", posture: "upright", dropped: false },
      { id: "paper_waste_1", category: "paper_waste", level: "L2", location: "room:dining_room", posture: "upright", dropped: false },
      { id: "empty_bottle_1", category: "empty_bottle", level: "L2", location: "room:living_room", posture: "fallen", dropped: true },
    ],
    collected: { whole: 2, level1: 2, level2: 0, ids: ["a", "b"] },
    phases: { carrier: "running", manipulator: "running" },
    ...overrides,
  };
}

function message(type: WireMessage["type"], seq: number, payload: Record<string, unknown>): WireMessage {
  return { v: 1, type, seq, payload };
}

function helped(view: ConsoleView, seq = 5): ConsoleView {
  reduce(view, message("trial_event", seq - 2, { event: { type: "hello", controller: true } }));
  reduce(view, message("world_snapshot", seq - 1, snapshot() as unknown as Record<string, unknown>));
  reduce(
    view,
    message("help_request", seq, {
      id: "help-0001",
      robot: "manipulator",
      message: "The target object paper_waste_1 could not be detected; please grasp the object and place it into the clear box instead.",
      failed_skill: "object_detection",
      failed_object: "paper_waste_1",
      raised_at: 90,
    }),
  );
  return view;
}

describe("view reducer", () => {
  it("renders collected counts in the status bar", () => {
    const view = initialView();
    reduce(view, message("world_snapshot", 0, snapshot() as unknown as Record<string, unknown>));
    const bar = renderStatusBar(view);
    expect(bar).toContain("collected 2/3");
    expect(bar).toContain("L1 2");
    expect(bar).toContain("tick 100/1500");
  });

  it("drops stale snapshots (lower seq)", () => {
    const view = initialView();
    reduce(view, message("world_snapshot", 10, snapshot({ tick: 500 }) as unknown as Record<string, unknown>));
    reduce(view, message("world_snapshot", 4, snapshot({ tick: 120 }) as unknown as Record<string, unknown>));
    expect(view.world?.tick).toBe(500);
  });

  it("marks fallen objects in the world panel", () => {
    const view = initialView();
    reduce(view, message("world_snapshot", 0, snapshot() as unknown as Record<string, unknown>));
    const html = renderWorld(view);
    expect(html).toContain("empty_bottle_1 (fallen)");
    expect(html).toContain('class="object fallen"');
  });

  it("keeps controls disabled until a help session opens", () => {
    const view = initialView();
    reduce(view, message("trial_event", 0, { event: { type: "hello", controller: true } }));
    reduce(view, message("world_snapshot", 1, snapshot() as unknown as Record<string, unknown>));
    expect(controlsEnabled(view)).toBe(false);
    expect(controlOptions(view)).toEqual([]);

    helped(view, 5);
    expect(controlsEnabled(view)).toBe(true);
    const labels = controlOptions(view).map((option) => option.label);
    expect(labels).toContain("grasp paper_waste_1");
    expect(labels).toContain("move carrier → trash_area");
  });

  it("surfaces pending requests in the inbox until resolution", () => {
    const view = helped(initialView());
    expect(view.inbox).toHaveLength(1);
    expect(view.inbox[0].id).toBe("help-0001");
    reduce(view, message("resume_ack", 6, { request_id: "help-0001" }));
    expect(view.inbox).toHaveLength(0);
    expect(view.sessionActive).toBe(false);
    expect(controlsEnabled(view)).toBe(false);
  });

  it("observers never get controls", () => {
    const view = initialView();
    reduce(view, message("trial_event", 0, { event: { type: "hello", controller: false } }));
    reduce(view, message("world_snapshot", 1, snapshot() as unknown as Record<string, unknown>));
    reduce(view, message("help_request", 2, { id: "h", robot: "manipulator", message: "m", failed_skill: "pick", failed_object: "x", raised_at: 5 }));
    expect(controlsEnabled(view)).toBe(false);
  });

  it("shows error banners without dropping the connection state", () => {
    const view = helped(initialView());
    reduce(view, message("trial_event", 6, { event: { type: "error", error: "no active help session" } }));
    expect(view.banner).toBe("no active help session");
    expect(view.connected).toBe(true);
  });

  it("locks everything after the trial footer", () => {
    const view = helped(initialView());
    reduce(view, message("trial_event", 6, { event: { type: "trial_footer", reason: "gave_up", tick: 400 } }));
    expect(view.trialOver).toBe(true);
    expect(view.termination).toBe("gave_up");
    expect(controlsEnabled(view)).toBe(false);
  });

  it("place option appears only when the pair is co-located with a load", () => {
    const view = helped(initialView());
    const world = snapshot({
      robots: [
        { id: "carrier", room: "living_room", holding: null, box_contents: [], skills: ["navigation"] },
        { id: "manipulator", room: "dining_room", holding: "paper_waste_1", box_contents: [], skills: [] },
      ],
    });
    reduce(view, message("world_snapshot", 9, world as unknown as Record<string, unknown>));
    let labels = controlOptions(view).map((option) => option.label);
    expect(labels.some((label) => label.startsWith("place"))).toBe(false);

    const together = snapshot({
      robots: [
        { id: "carrier", room: "dining_room", holding: null, box_contents: [], skills: ["navigation"] },
        { id: "manipulator", room: "dining_room", holding: "paper_waste_1", box_contents: [], skills: [] },
      ],
    });
    reduce(view, message("world_snapshot", 10, together as unknown as Record<string, unknown>));
    labels = controlOptions(view).map((option) => option.label);
    expect(labels).toContain("place paper_waste_1 into box");
  });
});
