"""WebSocket gateway: streams trial state to operator consoles and funnels
operator commands into the trial executor.

The first connection controls the trial; later ones observe read-only.
Snapshots go out every ``cadence`` ticks, help requests immediately.  All
world mutation stays on the trial thread; the gateway only queues actions.
"""

from __future__ import annotations

import mimetypes
import os
import socket
import threading

from . import ws
from .logs import TrialLog
from .orchestrator import LiveControl, TrialConfig, TrialHooks, run_trial
from .protocol import HelpRequest, OperatorAction, TeleopCommand
from .wire import Outbound, SequenceGuard, WireError, decode, encode, snapshot_payload
from .world import WorldState

CONTROL_TYPES = ("teleop_command", "operator_feedback", "decline", "give_up")


class _Client:
    def __init__(self, conn: ws.WebSocketConnection, controller: bool) -> None:
        self.conn = conn
        self.controller = controller
        self.outbound = Outbound()
        self.guard = SequenceGuard()
        self.lock = threading.Lock()

    def send(self, message_type: str, payload: dict) -> bool:
        try:
            with self.lock:
                self.conn.send_text(encode(self.outbound.message(message_type, payload)))
            return True
        except OSError:
            self.conn.open = False
            return False


class GatewayServer(TrialHooks):
    def __init__(
        self,
        cfg: TrialConfig,
        host: str = "127.0.0.1",
        port: int = 0,
        cadence: int = 5,
        frontend_dir: str | None = None,
        log_writer=None,
    ) -> None:
        if cadence < 1:
            raise ValueError("snapshot cadence must be >= 1")
        self.cfg = cfg
        self.host = host
        self.cadence = cadence
        self.frontend_dir = frontend_dir
        self.log_writer = log_writer
        self.control = LiveControl()
        self.clients: list[_Client] = []
        self.clients_lock = threading.Lock()
        self.latest_world: WorldState | None = None
        self.active_request: HelpRequest | None = None
        self.trial_log: TrialLog | None = None
        self.trial_error: str | None = None
        self.finished = threading.Event()
        self._last_bucket = -1
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((host, port))
        self.port = self._listener.getsockname()[1]
        self._threads: list[threading.Thread] = []
        self._stopping = False

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> None:
        self._listener.listen(8)
        acceptor = threading.Thread(target=self._accept_loop, name="gateway-accept", daemon=True)
        trial = threading.Thread(target=self._run_trial, name="gateway-trial", daemon=True)
        self._threads = [acceptor, trial]
        acceptor.start()
        trial.start()

    def stop(self) -> None:
        self._stopping = True
        if not self.finished.is_set():
            # Unblock a trial waiting on operator input.
            self.control.submit_give_up()
        try:
            self._listener.close()
        except OSError:
            pass
        with self.clients_lock:
            clients = list(self.clients)
        for client in clients:
            client.conn.close()
        for thread in self._threads:
            thread.join(timeout=5)

    def wait_finished(self, timeout: float | None = None) -> bool:
        return self.finished.wait(timeout)

    def _run_trial(self) -> None:
        try:
            self.trial_log = run_trial(self.cfg, hooks=self, live=self.control)
        except Exception as exc:  # noqa: BLE001 - surfaced to clients below
            self.trial_error = f"{type(exc).__name__}: {exc}"
            self._broadcast("trial_event", {"event": {"type": "trial_error", "error": self.trial_error}})
        finally:
            self.finished.set()

    # -- hooks from the trial thread ------------------------------------------

    def on_header(self, header: dict) -> None:
        if self.log_writer is not None:
            self.log_writer.on_header(header)

    def on_event(self, event: dict, world: WorldState) -> None:
        if self.log_writer is not None:
            self.log_writer.on_event(event, world)
        self.latest_world = world.snapshot()
        if event["type"] in ("feedback_applied", "help_unresolved"):
            self.active_request = None
        self._broadcast("trial_event", {"event": event})

    def on_tick(self, world: WorldState) -> None:
        self.latest_world = world.snapshot()
        bucket = world.tick // self.cadence
        if bucket > self._last_bucket:
            self._last_bucket = bucket
            self._broadcast_snapshot()

    def on_help(self, request: HelpRequest, world: WorldState) -> None:
        self.latest_world = world.snapshot()
        self.active_request = request
        # Help goes out of band, ahead of the next cadence snapshot.
        self._broadcast("help_request", request.to_dict())
        self._broadcast_snapshot()

    def on_resume(self, request_id: str) -> None:
        self.active_request = None
        self._broadcast("resume_ack", {"request_id": request_id})
        self._broadcast_snapshot()

    def on_operator_error(self, error: str) -> None:
        self._broadcast("trial_event", {"event": {"type": "operator_error", "error": error}})

    # -- fan-out ---------------------------------------------------------------

    def _snapshot_dict(self) -> dict | None:
        world = self.latest_world
        if world is None:
            return None
        phases = {"carrier": "running", "manipulator": "running"}
        if self.active_request is not None:
            phases[self.active_request.robot] = "suspended"
        return snapshot_payload(world, self.cfg.mode, self.cfg.budget, phases)

    def _broadcast_snapshot(self) -> None:
        payload = self._snapshot_dict()
        if payload is not None:
            self._broadcast("world_snapshot", payload)

    def _broadcast(self, message_type: str, payload: dict) -> None:
        with self.clients_lock:
            clients = list(self.clients)
        for client in clients:
            if not client.send(message_type, payload):
                self._drop(client)

    def _drop(self, client: _Client) -> None:
        with self.clients_lock:
            if client in self.clients:
                self.clients.remove(client)

    # -- connection handling -----------------------------------------------------

    def _accept_loop(self) -> None:
        while not self._stopping:
            try:
                sock, _ = self._listener.accept()
            except OSError:
                return
            thread = threading.Thread(target=self._serve_connection, args=(sock,), daemon=True)
            thread.start()

    def _serve_connection(self, sock: socket.socket) -> None:
        try:
            start_line, headers, leftover = ws.read_http_head(sock)
        except ws.HandshakeError:
            sock.close()
            return
        parts = start_line.split()
        path = parts[1] if len(parts) >= 2 else "/"
        if headers.get("upgrade", "").lower() == "websocket":
            try:
                sock.sendall(ws.server_handshake_response(headers))
            except (ws.HandshakeError, OSError):
                sock.close()
                return
            self._serve_websocket(ws.WebSocketConnection(sock, mask=False, initial=leftover))
            return
        self._serve_static(sock, path)

    def _serve_static(self, sock: socket.socket, path: str) -> None:
        try:
            body, content_type, status = self._static_body(path)
            head = (
                f"HTTP/1.1 {status}\r\n"
                f"Content-Type: {content_type}\r\n"
                f"Content-Length: {len(body)}\r\n"
                "Connection: close\r\n\r\n"
            )
            sock.sendall(head.encode() + body)
        except OSError:
            pass
        finally:
            sock.close()

    def _static_body(self, path: str) -> tuple[bytes, str, str]:
        if self.frontend_dir is None:
            return b"console assets not configured\n", "text/plain", "404 Not Found"
        relative = "index.html" if path in ("/", "") else path.lstrip("/")
        full = os.path.realpath(os.path.join(self.frontend_dir, relative))
        root = os.path.realpath(self.frontend_dir)
        if not full.startswith(root + os.sep) and full != root:
            return b"forbidden\n", "text/plain", "403 Forbidden"
        if not os.path.isfile(full):
            return b"not found\n", "text/plain", "404 Not Found"
        content_type = mimetypes.guess_type(full)[0] or "application/octet-stream"
        with open(full, "rb") as handle:
            return handle.read(), content_type, "200 OK"

    def _serve_websocket(self, conn: ws.WebSocketConnection) -> None:
        with self.clients_lock:
            controller = not any(c.controller for c in self.clients)
            client = _Client(conn, controller)
            self.clients.append(client)
        client.send("trial_event", {"event": {"type": "hello", "controller": controller}})
        payload = self._snapshot_dict()
        if payload is not None:
            client.send("world_snapshot", payload)
        # Late joiners still get the pending request and the final state;
        # every pending help request must reach every console.
        pending = self.active_request
        if pending is not None:
            client.send("help_request", pending.to_dict())
        if self.finished.is_set() and self.trial_log is not None and self.trial_log.footer:
            client.send("trial_event", {"event": self.trial_log.footer})
        try:
            while True:
                line = conn.recv_text()
                if line is None:
                    return
                try:
                    message = decode(line)
                    client.guard.check(message.seq)
                except WireError as exc:
                    conn.close(4002, f"protocol violation: {exc}")
                    return
                self._dispatch(client, message.type, message.payload)
        finally:
            self._drop(client)

    def _dispatch(self, client: _Client, message_type: str, payload: dict) -> None:
        if message_type not in CONTROL_TYPES:
            client.conn.close(4003, f"clients may not send {message_type}")
            self._drop(client)
            return
        if not client.controller:
            client.send("trial_event", {"event": {"type": "error", "error": "read-only observer"}})
            return
        if message_type == "give_up":
            self.control.submit_give_up()
            return
        if self.active_request is None:
            client.send("trial_event", {"event": {"type": "error", "error": "no active help session"}})
            return
        if message_type == "teleop_command":
            try:
                command = TeleopCommand.from_dict(payload["command"])
            except (KeyError, TypeError):
                client.send("trial_event", {"event": {"type": "error", "error": "bad teleop payload"}})
                return
            self.control.submit_action(OperatorAction(kind="teleop", command=command))
        elif message_type == "operator_feedback":
            self.control.submit_action(OperatorAction(kind="feedback", text=payload.get("text", "")))
        elif message_type == "decline":
            self.control.submit_action(OperatorAction(kind="decline", text=payload.get("reason", "")))
