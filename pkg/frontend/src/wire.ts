// JSON wire protocol shared with the gateway: one message per WebSocket
// text frame, newline-terminated, with per-direction strictly increasing
// sequence numbers. See docs/wire-protocol.md.

export const WIRE_VERSION = 1;

export const MESSAGE_TYPES = [
  "world_snapshot",
  "help_request",
  "teleop_command",
  "operator_feedback",
  "decline",
  "give_up",
  "trial_event",
  "resume_ack",
] as const;

export type MessageType = (typeof MESSAGE_TYPES)[number];

export interface WireMessage {
  v: number;
  type: MessageType;
  seq: number;
  payload: Record<string, unknown>;
}

export interface RobotState {
  id: string;
  room: string;
  holding: string | null;
  box_contents: string[];
  skills: string[];
}

export interface ObjectState {
  id: string;
  category: string;
  level: string;
  location: string; // "room:<name>" | "box:<robot>" | "held:<robot>"
  posture: string;
  dropped: boolean;
}

export interface SnapshotPayload {
  tick: number;
  budget: number;
  mode: string;
  rooms: string[];
  robots: RobotState[];
  objects: ObjectState[];
  collected: { whole: number; level1: number; level2: number; ids: string[] };
  phases: Record<string, string>;
}

export interface HelpRequestPayload {
  id: string;
  robot: string;
  message: string;
  failed_skill: string;
  failed_object: string | null;
  raised_at: number;
}

export type TeleopKind = "move" | "grasp" | "place_into_box" | "wait";

export class WireError extends Error {}

export function encode(message: WireMessage): string {
  return JSON.stringify(message) + "\n";
}

export function decode(line: string): WireMessage {
  let record: unknown;
  try {
    record = JSON.parse(line);
  } catch (error) {
    throw new WireError(`not valid JSON: ${error}`);
  }
  if (typeof record !== "object" || record === null || Array.isArray(record)) {
    throw new WireError("message must be a JSON object");
  }
  const data = record as Record<string, unknown>;
  if (data.v !== WIRE_VERSION) {
    throw new WireError(`unsupported wire version ${String(data.v)}`);
  }
  const type = data.type;
  if (typeof type !== "string" || !(MESSAGE_TYPES as readonly string[]).includes(type)) {
    throw new WireError(`unknown message type ${String(type)}`);
  }
  if (typeof data.seq !== "number" || data.seq < 0 || !Number.isInteger(data.seq)) {
    throw new WireError(`bad seq ${String(data.seq)}`);
  }
  const payload = data.payload ?? {};
  if (typeof payload !== "object" || payload === null || Array.isArray(payload)) {
    throw new WireError("payload must be a JSON object");
  }
  return {
    v: WIRE_VERSION,
    type: type as MessageType,
    seq: data.seq,
    payload: payload as Record<string, unknown>,
  };
}

/** Rejects non-increasing sequence numbers from the server. */
export class SeqGuard {
  private last: number | null = null;

  check(seq: number): void {
    if (this.last !== null && seq <= this.last) {
      throw new WireError(`seq ${seq} not greater than ${this.last}`);
    }
    this.last = seq;
  }
}

/** Numbers this endpoint's outgoing messages from zero. */
export class Outbound {
  private nextSeq = 0;

  message(type: MessageType, payload: Record<string, unknown>): WireMessage {
    return { v: WIRE_VERSION, type, seq: this.nextSeq++, payload };
  }
}
