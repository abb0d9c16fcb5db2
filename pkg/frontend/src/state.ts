// Console view-model: a pure reducer over incoming wire messages.
// Rendering and socket plumbing live elsewhere; everything here is
// deterministic and directly unit-testable.

import type { HelpRequestPayload, SnapshotPayload, WireMessage } from "./wire.js";

export interface ConsoleView {
  connected: boolean;
  controller: boolean;
  lastSnapshotSeq: number;
  world: SnapshotPayload | null;
  inbox: HelpRequestPayload[];
  sessionActive: boolean;
  awaitingAck: boolean;
  trialOver: boolean;
  termination: string | null;
  banner: string | null; // transient error banner; connection stays up
  feed: string[]; // compact trial-event feed, newest last
}

const FEED_LIMIT = 40;

export function initialView(): ConsoleView {
  return {
    connected: false,
    controller: false,
    lastSnapshotSeq: -1,
    world: null,
    inbox: [],
    sessionActive: false,
    awaitingAck: false,
    trialOver: false,
    termination: null,
    banner: null,
    feed: [],
  };
}

/** Teleop and feedback controls are live only during an open help session. */
export function controlsEnabled(view: ConsoleView): boolean {
  return view.sessionActive && view.controller && !view.awaitingAck && !view.trialOver;
}

function pushFeed(view: ConsoleView, line: string): void {
  view.feed.push(line);
  if (view.feed.length > FEED_LIMIT) {
    view.feed.splice(0, view.feed.length - FEED_LIMIT);
  }
}

function describeEvent(event: Record<string, unknown>): string | null {
  const type = event.type as string;
  const tick = event.tick !== undefined ? `[${event.tick}] ` : "";
  switch (type) {
    case "skill": {
      const command = event.command as Record<string, unknown>;
      const result = event.result as Record<string, unknown>;
      const target = command.target ? ` ${command.target}` : "";
      return `${tick}${event.robot} ${command.kind}${target}: ${result.status}`;
    }
    case "operator_action": {
      const action = event.action as Record<string, unknown>;
      if (action.kind === "teleop") {
        const command = action.command as Record<string, unknown>;
        const target = command.target ? ` ${command.target}` : "";
        return `${tick}operator ${command.kind}${target}`;
      }
      return `${tick}operator ${action.kind}: ${action.text}`;
    }
    case "collision":
      return `${tick}collision in ${event.room}; robots reset`;
    case "reset":
      return `${tick}robots returned to start poses`;
    case "help_raised":
      return `${tick}help raised`;
    case "feedback_applied":
      return `${tick}session closed (${event.outcome})`;
    case "give_up":
      return `${tick}trial given up`;
    case "trial_footer":
      return `${tick}trial over: ${event.reason}`;
    default:
      return null;
  }
}

/** Fold one decoded message into the view; returns the same mutated view. */
export function reduce(view: ConsoleView, message: WireMessage): ConsoleView {
  switch (message.type) {
    case "world_snapshot": {
      // Staleness rule: never apply a snapshot older than the one shown.
      if (message.seq <= view.lastSnapshotSeq) {
        return view;
      }
      view.lastSnapshotSeq = message.seq;
      view.world = message.payload as unknown as SnapshotPayload;
      return view;
    }
    case "help_request": {
      const request = message.payload as unknown as HelpRequestPayload;
      if (!view.inbox.some((r) => r.id === request.id)) {
        view.inbox.push(request);
      }
      view.sessionActive = true;
      view.awaitingAck = false;
      pushFeed(view, `[${request.raised_at}] HELP ${request.id}: ${request.message}`);
      return view;
    }
    case "resume_ack": {
      const requestId = message.payload.request_id as string;
      view.inbox = view.inbox.filter((r) => r.id !== requestId);
      view.sessionActive = false;
      view.awaitingAck = false;
      pushFeed(view, `resumed after ${requestId}`);
      return view;
    }
    case "trial_event": {
      const event = (message.payload.event ?? {}) as Record<string, unknown>;
      const type = event.type as string | undefined;
      if (type === "hello") {
        view.connected = true;
        view.controller = Boolean(event.controller);
        return view;
      }
      if (type === "error" || type === "operator_error") {
        view.banner = String(event.error ?? "unknown error");
        view.awaitingAck = false;
        return view;
      }
      if (type === "operator_action") {
        view.awaitingAck = false;
      }
      if (type === "feedback_applied" || type === "help_unresolved") {
        const requestId = event.request_id as string;
        view.inbox = view.inbox.filter((r) => r.id !== requestId);
        view.sessionActive = false;
        view.awaitingAck = false;
      }
      if (type === "trial_footer") {
        view.trialOver = true;
        view.sessionActive = false;
        view.termination = String(event.reason ?? "unknown");
      }
      const line = describeEvent(event);
      if (line !== null) {
        pushFeed(view, line);
      }
      return view;
    }
    default:
      // server-bound types never arrive; dropping is safer than crashing
      return view;
  }
}
