"""Live steering service: one relaxation session exposed over a WebSocket.

The solver loop runs on a worker thread; commands cross over a queue and are
drained only at step boundaries, so every change lands at a well-defined
step number (echoed in the ack), which is what makes command logs exactly
replayable. Event emission never blocks the solver: the outbound buffer is
bounded and drops the oldest state events first, never acks or errors.

Wire format: one JSON object per WebSocket frame. Commands carry a "cmd"
discriminator, events an "event" discriminator. The server greets with
{"event": "hello", "version": 1}.
"""

from __future__ import annotations

import asyncio
import json
import queue
import threading
from pathlib import Path

import numpy as np

from .model import Model, ModelError, model_to_dict, parse_model, validate_model
from .scenarios import scenario_counts
from .solver import Relaxation

PROTOCOL_VERSION = 1
STATE_BUFFER_CAP = 256

COMMANDS = (
    "load_model",
    "start",
    "pause",
    "step",
    "set_param",
    "set_weight",
    "set_target",
    "move_fixed_node",
    "randomize",
    "subscribe",
    "snapshot",
)


class SteeringSession:
    """Solver session driven by a command queue, reporting through events.

    `emit` is called from the worker thread with one event dict at a time.
    """

    def __init__(self, emit, model: Model | None = None):
        self._emit = emit
        self._commands: queue.Queue[dict] = queue.Queue()
        self._wake = threading.Event()
        self._closed = False
        self.session: Relaxation | None = None
        self.running = False
        self.every = 0  # no periodic state events until subscribed
        self.command_log: list[tuple[int, dict]] = []
        self._was_converged = False
        if model is not None:
            self._load(model)
        self._thread = threading.Thread(target=self._loop, daemon=True)
        self._thread.start()

    # -- public API ----------------------------------------------------------

    def submit(self, command: dict) -> None:
        self._commands.put(command)
        self._wake.set()

    def close(self) -> None:
        self._closed = True
        self._wake.set()
        self._thread.join(timeout=5)

    # -- internals -----------------------------------------------------------

    def _load(self, model: Model) -> None:
        self.session = Relaxation(model)
        self.running = False
        self._was_converged = False
        self._emit(
            {
                "event": "model_loaded",
                "counts": scenario_counts(model),
                "model": model_to_dict(model),
            }
        )

    def _state_event(self) -> dict:
        s = self.session
        entry = s.last_entry
        event = {
            "event": "state",
            "step": s.state.step,
            "grad_norm": entry.grad_norm if entry else None,
            "residual_norm": entry.residual_norm if entry else None,
            "alpha": s.params.alpha,
            "positions": [list(map(float, p)) for p in s.state.x.reshape(-1, 3)],
        }
        if entry is not None and entry.pi is not None:
            event["pi"] = entry.pi
        return event

    def _apply(self, cmd: dict) -> None:
        name = cmd.get("cmd")
        try:
            if name not in COMMANDS:
                raise ValueError(f"unknown command '{name}'")
            if name == "load_model":
                doc = cmd["model"]
                model = parse_model(doc if isinstance(doc, str) else json.dumps(doc))
                self._load(model)
            elif self.session is None and name not in ("subscribe",):
                raise ValueError("no model loaded")
            elif name == "start":
                self.running = True
            elif name == "pause":
                self.running = False
            elif name == "step":
                count = int(cmd.get("count", 1))
                if count < 1:
                    raise ValueError("step count must be >= 1")
                for _ in range(count):
                    self.session.advance()
                self._emit(self._state_event())
            elif name == "set_param":
                self.session.set_param(str(cmd["name"]), float(cmd["value"]))
            elif name == "set_weight":
                self.session.set_weight(int(cmd["element"]), float(cmd["value"]))
            elif name == "set_target":
                self.session.set_target(int(cmd["element"]), float(cmd["value"]))
            elif name == "move_fixed_node":
                self.session.move_fixed_node(int(cmd["node"]), cmd["pos"])
            elif name == "randomize":
                self.session.randomize(
                    int(cmd["seed"]), float(cmd.get("range", 2.5))
                )
            elif name == "subscribe":
                self.every = max(0, int(cmd["every"]))
            elif name == "snapshot":
                self._emit(
                    {
                        "event": "model_loaded",
                        "counts": scenario_counts(self.session.model),
                        "model": model_to_dict(self.session.final_model()),
                    }
                )
                self._emit(self._state_event())
        except (KeyError, TypeError, ValueError, ModelError) as exc:
            msg = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
            self._emit({"event": "error", "message": msg, "command": name})
            return
        step = self.session.state.step if self.session else 0
        self.command_log.append((step, dict(cmd)))
        self._emit({"event": "ack", "command": name, "step": step})
        # parameter changes can clear or set convergence; re-arm the notifier
        self._was_converged = bool(self.session and self.session.converged)

    def _loop(self) -> None:
        while not self._closed:
            applied = False
            while True:
                try:
                    cmd = self._commands.get_nowait()
                except queue.Empty:
                    break
                self._apply(cmd)
                applied = True
            sess = self.session
            if sess is not None and self.running and not sess.converged:
                sess.advance()
                if sess.converged and not self._was_converged:
                    self._was_converged = True
                    self._emit({"event": "converged", "step": sess.state.step})
                    self._emit(self._state_event())
                elif self.every and sess.state.step % self.every == 0:
                    self._emit(self._state_event())
            elif not applied:
                self._wake.wait(timeout=0.05)
                self._wake.clear()


def replay_command_log(model: Model, log, final_step: int) -> np.ndarray:
    """Re-run a session by applying each logged command at its recorded step.

    Returns the positions after `final_step` solver steps; bit-identical to
    the original run because commands land at the same step boundaries.
    """
    session = Relaxation(validate_model(model))
    pending = sorted(log, key=lambda item: item[0])
    i = 0
    while True:
        while i < len(pending) and pending[i][0] <= session.state.step:
            _apply_to_relaxation(session, pending[i][1])
            i += 1
        if session.state.step >= final_step:
            break
        session.advance()
    return session.state.x.copy()


def _apply_to_relaxation(session: Relaxation, cmd: dict) -> None:
    name = cmd["cmd"]
    if name == "set_param":
        session.set_param(cmd["name"], float(cmd["value"]))
    elif name == "set_weight":
        session.set_weight(int(cmd["element"]), float(cmd["value"]))
    elif name == "set_target":
        session.set_target(int(cmd["element"]), float(cmd["value"]))
    elif name == "move_fixed_node":
        session.move_fixed_node(int(cmd["node"]), cmd["pos"])
    elif name == "randomize":
        session.randomize(int(cmd["seed"]), float(cmd.get("range", 2.5)))
    # start/pause/step/subscribe/snapshot carry no solver state: the replay
    # driver advances to each command's recorded step itself


# ---------------------------------------------------------------------------
# WebSocket server
# ---------------------------------------------------------------------------


class _EventBuffer:
    """Bounded outbound buffer: drops the oldest state events when full,
    never drops acks, errors or lifecycle events."""

    def __init__(self, loop: asyncio.AbstractEventLoop, cap: int = STATE_BUFFER_CAP):
        self._loop = loop
        self._cap = cap
        self._items: list[dict] = []
        self._ready = asyncio.Event()

    def push_threadsafe(self, event: dict) -> None:
        self._loop.call_soon_threadsafe(self._push, event)

    def _push(self, event: dict) -> None:
        if event["event"] == "state":
            states = sum(1 for e in self._items if e["event"] == "state")
            if states >= self._cap:
                for i, e in enumerate(self._items):
                    if e["event"] == "state":
                        del self._items[i]
                        break
        self._items.append(event)
        self._ready.set()

    async def drain(self) -> list[dict]:
        await self._ready.wait()
        self._ready.clear()
        items, self._items = self._items, []
        return items


async def serve(
    port: int,
    model: Model | None = None,
    host: str = "127.0.0.1",
    static_dir: Path | None = None,
    ready: asyncio.Event | None = None,
):
    """Run the steering endpoint at ws://host:port/session until cancelled.

    One session at a time; a second concurrent client is refused with a busy
    error. When `static_dir` is given, plain HTTP requests are served from it
    so the browser UI and the socket share one origin.
    """
    import websockets
    from websockets.http11 import Response
    from websockets.datastructures import Headers

    active = {"busy": False}

    def process_request(connection, request):
        if request.path == "/session":
            return None  # proceed with the WebSocket handshake
        if static_dir is None:
            return connection.respond(404, "not found\n")
        name = request.path.lstrip("/") or "index.html"
        target = (static_dir / name).resolve()
        if not str(target).startswith(str(static_dir.resolve())) or not target.is_file():
            return connection.respond(404, "not found\n")
        ctype = {
            ".html": "text/html", ".js": "text/javascript",
            ".css": "text/css", ".json": "application/json",
        }.get(target.suffix, "application/octet-stream")
        body = target.read_bytes()
        return Response(
            200, "OK",
            Headers([("Content-Type", ctype), ("Content-Length", str(len(body)))]),
            body,
        )

    async def handler(ws):
        if active["busy"]:
            await ws.send(json.dumps({"event": "error", "message": "busy"}))
            await ws.close()
            return
        active["busy"] = True
        loop = asyncio.get_running_loop()
        buffer = _EventBuffer(loop)
        session = SteeringSession(buffer.push_threadsafe, model=model)

        async def sender():
            while True:
                for event in await buffer.drain():
                    await ws.send(json.dumps(event))

        send_task = asyncio.create_task(sender())
        try:
            await ws.send(json.dumps({"event": "hello", "version": PROTOCOL_VERSION}))
            async for raw in ws:
                try:
                    cmd = json.loads(raw)
                except json.JSONDecodeError as exc:
                    buffer.push_threadsafe(
                        {"event": "error", "message": f"bad JSON: {exc.msg}"}
                    )
                    continue
                session.submit(cmd)
        finally:
            send_task.cancel()
            session.close()
            active["busy"] = False

    async with websockets.serve(handler, host, port, process_request=process_request):
        if ready is not None:
            ready.set()
        await asyncio.Future()
