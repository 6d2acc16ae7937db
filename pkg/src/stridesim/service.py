"""Live simulation service: one walker per session, steered over a
JSON-per-message websocket stream.

Protocol (all messages single-line JSON):
  inbound   {"type": "set_param", "name": str, "value": float}
            {"type": "push", "fx": N, "fy": N, "duration": s}
            {"type": "reset", "config": {name: value, ...}}   (config optional)
            {"type": "rate", "fps": float}
  outbound  {"type": "bounds", "params": {...}, "push": {...}}  (on connect/reset)
            {"type": "frame", ...flat frame record}
            {"type": "ack", "detail": str}
            {"type": "error", "detail": str}

Commands are applied at the next frame boundary; unknown fields are
ignored, unknown types answered with an error while the session lives
on.  Frames are delivered latest-wins: a stalled client skips frames
instead of growing a queue, and simulation time stays wall-clock-locked.
"""

from __future__ import annotations

import asyncio
import json
import logging
from typing import Callable

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .config import DEFAULTS, PARAM_BOUNDS, PUSH_BOUNDS
from .errors import StridesimError
from .frames import frame_record
from .sim import Walker

log = logging.getLogger(__name__)

STEER_PARAMS = ("speed", "freq", "ds_ratio", "slope", "torso", "clearance", "drag")


def bounds_message() -> dict:
    params = {}
    for name in STEER_PARAMS + ("mass", "height", "fps"):
        lo, hi = PARAM_BOUNDS[name]
        params[name] = {"min": lo, "max": hi, "default": DEFAULTS.get(name, 0.0)}
    return {"type": "bounds", "params": params,
            "push": {"force_max": PUSH_BOUNDS["force"],
                     "duration_max": PUSH_BOUNDS["duration"]},
            "units": {"slope": "rad", "torso": "rad", "speed": "m/s",
                      "freq": "steps/s", "drag": "N"}}


class _Mailbox:
    """One-slot latest-wins frame hand-off to the sender task."""

    def __init__(self):
        self._item = None
        self._event = asyncio.Event()

    def put(self, item):
        self._item = item
        self._event.set()

    async def get(self):
        await self._event.wait()
        self._event.clear()
        item, self._item = self._item, None
        return item


async def _session(ws: WebSocket, walker_factory: Callable[[], Walker], fps: float):
    await ws.accept()
    walker = walker_factory()
    await ws.send_text(json.dumps(bounds_message()))

    inbox: asyncio.Queue = asyncio.Queue()
    mailbox = _Mailbox()
    closed = asyncio.Event()

    async def reader():
        try:
            while True:
                inbox.put_nowait(await ws.receive_text())
        except WebSocketDisconnect:
            closed.set()
        except RuntimeError:
            closed.set()

    async def sender():
        try:
            while True:
                await ws.send_text(await mailbox.get())
        except (WebSocketDisconnect, RuntimeError):
            closed.set()

    reader_task = asyncio.create_task(reader())
    sender_task = asyncio.create_task(sender())
    loop = asyncio.get_event_loop()

    async def say(type_, detail):
        await ws.send_text(json.dumps({"type": type_, "detail": detail}))

    try:
        frame_idx = 0
        anchor_t, anchor_idx = 0.0, 0
        walker.control_sample()
        await ws.send_text(json.dumps({"type": "frame", **frame_record(walker.sample_frame())}))
        deadline = loop.time()
        while not closed.is_set():
            deadline += 1.0 / fps
            delay = deadline - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            frame_idx += 1
            # same float arithmetic as the offline frame grid, so a scripted
            # replay reproduces the export path bit-exactly
            t_next = anchor_t + (frame_idx - anchor_idx) * (1.0 / fps)
            deferred = []
            while not inbox.empty():
                raw = inbox.get_nowait()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await say("error", "malformed JSON")
                    continue
                mtype = msg.get("type")
                if mtype == "push":
                    try:
                        fx = float(msg.get("fx", 0.0))
                        fy = float(msg.get("fy", 0.0))
                        dur = float(msg.get("duration", 0.0))
                        if abs(fx) > PUSH_BOUNDS["force"] or abs(fy) > PUSH_BOUNDS["force"] \
                                or not 0.0 <= dur <= PUSH_BOUNDS["duration"]:
                            raise StridesimError("push outside bounds")
                        walker.apply_push(fx, fy, start=t_next, duration=dur)
                        await say("ack", f"push at frame {frame_idx}")
                    except (StridesimError, ValueError, TypeError) as exc:
                        await say("error", str(exc))
                elif mtype in ("set_param", "rate", "reset"):
                    deferred.append(msg)
                else:
                    await say("error", f"unknown message type {mtype!r}")
            walker.advance(t_next)
            reset = False
            for msg in deferred:
                mtype = msg["type"]
                try:
                    if mtype == "set_param":
                        walker.set_params(**{str(msg["name"]): float(msg["value"])})
                        await say("ack", f"set_param {msg['name']} at frame {frame_idx}")
                    elif mtype == "rate":
                        new_fps = float(msg["fps"])
                        lo, hi = PARAM_BOUNDS["fps"]
                        if not lo <= new_fps <= hi:
                            raise StridesimError(f"fps outside [{lo}, {hi}]")
                        fps = new_fps
                        anchor_t, anchor_idx = walker.t, frame_idx
                        await say("ack", f"rate {fps}")
                    elif mtype == "reset":
                        walker = walker_factory()
                        cfg = msg.get("config") or {}
                        if cfg:
                            walker.set_params(**{str(k): float(v) for k, v in cfg.items()})
                        frame_idx = 0
                        anchor_t, anchor_idx = 0.0, 0
                        reset = True
                        await ws.send_text(json.dumps(bounds_message()))
                        await say("ack", "reset")
                except (StridesimError, KeyError, ValueError, TypeError) as exc:
                    await say("error", str(exc))
            walker.control_sample()
            payload = json.dumps({"type": "frame", **frame_record(walker.sample_frame())})
            if reset:
                deadline = loop.time()
                await ws.send_text(payload)
            else:
                mailbox.put(payload)
    except (WebSocketDisconnect, RuntimeError):
        pass
    finally:
        reader_task.cancel()
        sender_task.cancel()


def create_app(walker_factory: Callable[[], Walker] | None = None,
               fps: float = DEFAULTS["fps"]) -> FastAPI:
    if walker_factory is None:
        from .body import scale_body
        from .config import make_config

        def walker_factory():
            return Walker(scale_body(DEFAULTS["mass"], DEFAULTS["height"]),
                          make_config(speed=DEFAULTS["speed"], freq=DEFAULTS["freq"],
                                      ds_ratio=DEFAULTS["ds_ratio"]))

    app = FastAPI(title="stridesim")

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await _session(ws, walker_factory, fps)

    return app


def serve_forever(walker_factory: Callable[[], Walker], port: int, fps: float):
    import uvicorn

    uvicorn.run(create_app(walker_factory, fps), host="127.0.0.1", port=port,
                log_level="warning")
