import { describe, expect, it } from "vitest";

import { ConsoleClient, type SocketLike } from "../src/client.js";
import { decode } from "../src/wire.js";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  onopen: ((event?: unknown) => void) | null = null;
  onmessage: ((event: { data: unknown }) => void) | null = null;
  onclose: ((event?: unknown) => void) | null = null;
  onerror: ((event?: unknown) => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.onclose?.();
  }

  push(message: Record<string, unknown>): void {
    this.onmessage?.({ data: JSON.stringify(message) + "\n" });
  }
}

function openSession(client: ConsoleClient, socket: FakeSocket): void {
  socket.push({ v: 1, type: "trial_event", seq: 0, payload: { event: { type: "hello", controller: true } } });
  socket.push({
    v: 1,
    type: "help_request",
    seq: 1,
    payload: { id: "help-0001", robot: "manipulator", message: "m", failed_skill: "pick", failed_object: "x", raised_at: 3 },
  });
}

describe("console client", () => {
  it("refuses teleop while no session is active (disabled-control invariant)", () => {
    const socket = new FakeSocket();
    const client = new ConsoleClient(() => socket);
    client.connect();
    socket.onopen?.();
    socket.push({ v: 1, type: "trial_event", seq: 0, payload: { event: { type: "hello", controller: true } } });
    expect(client.sendTeleop("grasp", "manipulator", "snack_cup_1")).toBe(false);
    expect(socket.sent).toHaveLength(0);
  });

  it("sends teleop during a session and numbers messages sequentially", () => {
    const socket = new FakeSocket();
    const client = new ConsoleClient(() => socket);
    client.connect();
    socket.onopen?.();
    openSession(client, socket);
    expect(client.sendTeleop("grasp", "manipulator", "x")).toBe(true);
    // optimistic lock until the action echo arrives
    expect(client.view.awaitingAck).toBe(true);
    expect(client.sendTeleop("place_into_box", "manipulator")).toBe(false);
    socket.push({
      v: 1,
      type: "trial_event",
      seq: 2,
      payload: { event: { type: "operator_action", action: { kind: "teleop", command: { kind: "grasp", target: "x" } }, tick: 5 } },
    });
    expect(client.view.awaitingAck).toBe(false);
    expect(client.sendFeedback("placed x into the clear box")).toBe(true);
    const sent = socket.sent.map((line) => decode(line));
    expect(sent.map((message) => message.seq)).toEqual([0, 1]);
    expect(sent[0].type).toBe("teleop_command");
    expect(sent[1].type).toBe("operator_feedback");
  });

  it("give-up works outside sessions but only for the controller", () => {
    const socket = new FakeSocket();
    const client = new ConsoleClient(() => socket);
    client.connect();
    socket.onopen?.();
    socket.push({ v: 1, type: "trial_event", seq: 0, payload: { event: { type: "hello", controller: false } } });
    expect(client.sendGiveUp()).toBe(false);
    socket.push({ v: 1, type: "trial_event", seq: 1, payload: { event: { type: "hello", controller: true } } });
    expect(client.sendGiveUp()).toBe(true);
    expect(decode(socket.sent[0]).type).toBe("give_up");
  });

  it("queues messages while closed and replays them after reconnect", () => {
    let current: FakeSocket = new FakeSocket();
    const client = new ConsoleClient(() => current);
    client.connect();
    current.onopen?.();
    openSession(client, current);
    current.onclose?.(); // channel drops mid-session

    expect(client.sendGiveUp()).toBe(true); // queued, not sent
    expect(client.queuedCount()).toBe(1);
    expect(current.sent).toHaveLength(0);

    current = new FakeSocket();
    client.connect();
    current.onopen?.();
    expect(client.queuedCount()).toBe(0);
    expect(current.sent).toHaveLength(1);
    expect(decode(current.sent[0]).type).toBe("give_up");
  });

  it("bad server frames raise the banner but keep the connection", () => {
    const socket = new FakeSocket();
    const client = new ConsoleClient(() => socket);
    client.connect();
    socket.onopen?.();
    socket.push({ v: 1, type: "trial_event", seq: 0, payload: { event: { type: "hello", controller: true } } });
    socket.onmessage?.({ data: "garbage{{{\n" });
    expect(client.view.banner).toContain("protocol");
    expect(client.view.connected).toBe(true);
    // later valid frames still apply
    socket.push({ v: 1, type: "resume_ack", seq: 1, payload: { request_id: "nope" } });
    expect(client.view.banner).toContain("protocol");
  });
});
