// Gateway client: socket lifecycle, outgoing sequence numbers, the
// disabled-controls guard, and a reconnect queue. Socket construction is
// injected so the same client runs in a browser (native WebSocket) and in
// node tests (the "ws" package).

import { controlsEnabled, initialView, reduce, type ConsoleView } from "./state.js";
import {
  Outbound,
  SeqGuard,
  WireError,
  decode,
  encode,
  type MessageType,
  type TeleopKind,
  type WireMessage,
} from "./wire.js";

// Handler params are `any` so both the browser WebSocket and the node "ws"
// class satisfy the shape under strictFunctionTypes.
export interface SocketLike {
  send(data: string): void;
  close(): void;
  // eslint-disable-next-line @typescript-eslint/no-explicit-any
  onopen: ((event?: any) => void) | null;
  // eslint-disable-next-line @typescript-eslint/no-explicit-any
  onmessage: ((event: any) => void) | null;
  // eslint-disable-next-line @typescript-eslint/no-explicit-any
  onclose: ((event?: any) => void) | null;
  // eslint-disable-next-line @typescript-eslint/no-explicit-any
  onerror: ((event?: any) => void) | null;
}

export type SocketFactory = () => SocketLike;

export class ConsoleClient {
  view: ConsoleView = initialView();
  private socket: SocketLike | null = null;
  private outbound = new Outbound();
  private guard = new SeqGuard();
  private queue: WireMessage[] = [];
  private socketOpen = false;
  private closedByUser = false;

  constructor(
    private makeSocket: SocketFactory,
    private onChange: (view: ConsoleView) => void = () => {},
  ) {}

  connect(): void {
    this.closedByUser = false;
    this.guard = new SeqGuard(); // fresh connection numbers from zero
    const socket = this.makeSocket();
    this.socket = socket;
    socket.onopen = () => {
      this.socketOpen = true;
      // reconnect-and-replay: flush anything queued while offline
      const queued = this.queue;
      this.queue = [];
      for (const message of queued) {
        socket.send(encode(message));
      }
      this.emit();
    };
    socket.onmessage = (event) => {
      this.handleLine(String(event.data));
    };
    socket.onclose = () => {
      this.socketOpen = false;
      this.view.connected = false;
      this.emit();
    };
    socket.onerror = () => {
      this.socketOpen = false;
    };
  }

  close(): void {
    this.closedByUser = true;
    this.socket?.close();
  }

  private emit(): void {
    this.onChange(this.view);
  }

  private handleLine(line: string): void {
    let message: WireMessage;
    try {
      message = decode(line);
      this.guard.check(message.seq);
    } catch (error) {
      if (error instanceof WireError) {
        // schema mismatch: show the banner, keep the connection
        this.view.banner = `protocol: ${error.message}`;
        this.emit();
        return;
      }
      throw error;
    }
    reduce(this.view, message);
    this.emit();
  }

  private post(type: MessageType, payload: Record<string, unknown>): void {
    const message = this.outbound.message(type, payload);
    if (this.socketOpen && this.socket) {
      this.socket.send(encode(message));
    } else if (!this.closedByUser) {
      // channel closed: queue, replay after reconnect
      this.queue.push(message);
    }
  }

  /** Teleop is refused outside an active help session (controls disabled). */
  sendTeleop(kind: TeleopKind, robot: string, target?: string, ticks?: number): boolean {
    if (!controlsEnabled(this.view)) {
      return false;
    }
    const command: Record<string, unknown> = { kind, robot };
    if (target !== undefined) {
      command.target = target;
    }
    if (ticks !== undefined) {
      command.ticks = ticks;
    }
    this.post("teleop_command", { command });
    this.view.awaitingAck = true;
    this.emit();
    return true;
  }

  sendFeedback(text: string): boolean {
    if (!controlsEnabled(this.view)) {
      return false;
    }
    this.post("operator_feedback", { text });
    this.view.awaitingAck = true;
    this.emit();
    return true;
  }

  sendDecline(reason: string): boolean {
    if (!controlsEnabled(this.view)) {
      return false;
    }
    this.post("decline", { reason });
    this.view.awaitingAck = true;
    this.emit();
    return true;
  }

  /** Give-up is always available to the controller, session or not. */
  sendGiveUp(): boolean {
    if (!this.view.controller || this.view.trialOver) {
      return false;
    }
    this.post("give_up", {});
    this.emit();
    return true;
  }

  queuedCount(): number {
    return this.queue.length;
  }
}
