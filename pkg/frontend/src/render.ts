// Pure HTML renderers for each console panel: strings in, strings out, so
// the layout is testable without a DOM.

import { controlsEnabled, type ConsoleView } from "./state.js";
import type { ObjectState, RobotState } from "./wire.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function objectsIn(objects: ObjectState[], room: string): ObjectState[] {
  return objects.filter((o) => o.location === `room:${room}`);
}

function robotsIn(robots: RobotState[], room: string): RobotState[] {
  return robots.filter((r) => r.room === room);
}

function objectMarker(object: ObjectState): string {
  const badge = object.level === "L1" ? "badge-l1" : "badge-l2";
  const fallen = object.posture === "fallen" ? " fallen" : "";
  const state = object.posture === "fallen" ? " (fallen)" : object.dropped ? " (dropped)" : "";
  return (
    `<li class="object${fallen}"><span class="badge ${badge}">${object.level}</span> ` +
    `${escapeHtml(object.id)}${state}</li>`
  );
}

export function renderWorld(view: ConsoleView): string {
  const world = view.world;
  if (world === null) {
    return '<p class="muted">waiting for the first snapshot…</p>';
  }
  const rooms = world.rooms
    .map((room) => {
      const robots = robotsIn(world.robots, room)
        .map((robot) => {
          const load =
            robot.id === "carrier"
              ? ` box:[${robot.box_contents.map(escapeHtml).join(", ")}]`
              : robot.holding
                ? ` holding ${escapeHtml(robot.holding)}`
                : "";
          return `<li class="robot robot-${robot.id}">${robot.id}${load}</li>`;
        })
        .join("");
      const objects = objectsIn(world.objects, room).map(objectMarker).join("");
      return (
        `<div class="room" id="room-${room}"><h3>${escapeHtml(room)}</h3>` +
        `<ul>${robots}${objects}</ul></div>`
      );
    })
    .join("");
  return `<div class="room-grid">${rooms}</div>`;
}

export function renderStatusBar(view: ConsoleView): string {
  const world = view.world;
  if (world === null) {
    return '<span class="muted">disconnected</span>';
  }
  const collected = world.collected;
  const total = world.objects.length;
  const over = view.trialOver ? ` — trial over: ${escapeHtml(view.termination ?? "")}` : "";
  return (
    `<span class="mode">${escapeHtml(world.mode)}</span>` +
    `<span class="tick">tick ${world.tick}/${world.budget}</span>` +
    `<span class="collected">collected ${collected.whole}/${total}` +
    ` (L1 ${collected.level1}, L2 ${collected.level2})</span>` +
    `<span class="phase">${view.sessionActive ? "HELP SESSION" : "running"}${over}</span>`
  );
}

export function renderInbox(view: ConsoleView): string {
  if (view.inbox.length === 0) {
    return '<p class="muted">no pending help requests</p>';
  }
  const items = view.inbox
    .map(
      (request) =>
        `<li class="request"><strong>${escapeHtml(request.id)}</strong> ` +
        `(${escapeHtml(request.failed_skill)}` +
        `${request.failed_object ? " / " + escapeHtml(request.failed_object) : ""})` +
        `<br>${escapeHtml(request.message)}</li>`,
    )
    .join("");
  return `<ul class="inbox">${items}</ul>`;
}

export interface ControlOption {
  label: string;
  kind: "move" | "grasp" | "place_into_box";
  robot: string;
  target?: string;
}

/** Concrete control-panel actions for the current snapshot. */
export function controlOptions(view: ConsoleView): ControlOption[] {
  const world = view.world;
  if (world === null || !controlsEnabled(view)) {
    return [];
  }
  const options: ControlOption[] = [];
  for (const robot of world.robots) {
    for (const room of world.rooms) {
      if (room !== robot.room) {
        options.push({ label: `move ${robot.id} → ${room}`, kind: "move", robot: robot.id, target: room });
      }
    }
  }
  const manipulator = world.robots.find((robot) => robot.id === "manipulator");
  if (manipulator && manipulator.holding === null) {
    for (const object of world.objects) {
      if (object.location === `room:${manipulator.room}`) {
        options.push({
          label: `grasp ${object.id}`,
          kind: "grasp",
          robot: "manipulator",
          target: object.id,
        });
      }
    }
  }
  const carrier = world.robots.find((robot) => robot.id === "carrier");
  if (manipulator && carrier && manipulator.holding !== null && carrier.room === manipulator.room) {
    options.push({
      label: `place ${manipulator.holding} into box`,
      kind: "place_into_box",
      robot: "manipulator",
    });
  }
  return options;
}

export const FEEDBACK_TEMPLATES = [
  "placed the object into the clear box",
  "moved the robot to the requested room",
  "could not resolve the problem; please retry",
];

export function renderControls(view: ConsoleView): string {
  const enabled = controlsEnabled(view);
  const options = controlOptions(view)
    .map(
      (option, index) =>
        `<button class="teleop" data-index="${index}" ${enabled ? "" : "disabled"}>` +
        `${escapeHtml(option.label)}</button>`,
    )
    .join("");
  const templates = FEEDBACK_TEMPLATES.map(
    (template, index) =>
      `<button class="template" data-template="${index}" ${enabled ? "" : "disabled"}>` +
      `${escapeHtml(template)}</button>`,
  ).join("");
  return (
    `<div class="teleop-buttons">${options || '<p class="muted">controls locked until a help request arrives</p>'}</div>` +
    `<div class="composer">` +
    `<textarea id="feedback-text" placeholder="feedback to the planner…" ${enabled ? "" : "disabled"}></textarea>` +
    `<div class="templates">${templates}</div>` +
    `<button id="send-feedback" ${enabled ? "" : "disabled"}>send feedback</button>` +
    `<button id="send-decline" ${enabled ? "" : "disabled"}>decline</button>` +
    `</div>`
  );
}

export function renderFeed(view: ConsoleView): string {
  const lines = view.feed.slice(-FEED_SHOWN).map((line) => `<li>${escapeHtml(line)}</li>`);
  return `<ul class="feed">${lines.join("")}</ul>`;
}

const FEED_SHOWN = 18;

export function renderBanner(view: ConsoleView): string {
  if (view.banner === null) {
    return "";
  }
  return `<div class="banner">${escapeHtml(view.banner)}</div>`;
}
