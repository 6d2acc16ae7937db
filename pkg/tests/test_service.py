"""Live-service protocol: bounds handshake, steering, error handling,
and exact replay equivalence with the offline frame path."""

import json

import pytest
from fastapi.testclient import TestClient

from stridesim import Walker, make_config, run_frames, scale_body
from stridesim.frames import frame_record
from stridesim.service import _Mailbox, bounds_message, create_app
from stridesim.sim import ParamEvent

FPS = 20.0


def default_walker():
    return Walker(scale_body(70.0, 1.7),
                  make_config(speed=1.0, freq=1.7, ds_ratio=0.2))


@pytest.fixture()
def client():
    app = create_app(walker_factory=default_walker, fps=FPS)
    with TestClient(app) as c:
        yield c


def recv_until(ws, type_, limit=200):
    """Next message of the wanted type, skipping others."""
    for _ in range(limit):
        msg = json.loads(ws.receive_text())
        if msg["type"] == type_:
            return msg
    raise AssertionError(f"no {type_!r} message within {limit} messages")


def test_healthz(client):
    res = client.get("/healthz")
    assert res.status_code == 200
    assert res.json() == {"status": "ok"}


def test_bounds_then_frames(client):
    with client.websocket_connect("/ws") as ws:
        first = json.loads(ws.receive_text())
        assert first["type"] == "bounds"
        assert first["params"]["speed"]["min"] == -1.7
        assert first["params"]["speed"]["max"] == 1.7
        frame = json.loads(ws.receive_text())
        assert frame["type"] == "frame"
        assert frame["t"] == 0.0


def test_push_ack_and_recovery_diagnostics(client):
    with client.websocket_connect("/ws") as ws:
        recv_until(ws, "bounds")
        recv_until(ws, "frame")
        ws.send_text(json.dumps({"type": "push", "fx": 50.0, "fy": 0.0,
                                 "duration": 0.5}))
        ack = recv_until(ws, "ack")
        assert "push" in ack["detail"]
        errs = [recv_until(ws, "frame")["err_norm"] for _ in range(30)]
        assert max(errs) > 0.01        # the push shows up in the diagnostics


def test_set_param_ack_and_out_of_bounds_error(client):
    with client.websocket_connect("/ws") as ws:
        recv_until(ws, "bounds")
        ws.send_text(json.dumps({"type": "set_param", "name": "speed", "value": 1.2}))
        assert "set_param" in recv_until(ws, "ack")["detail"]
        ws.send_text(json.dumps({"type": "set_param", "name": "speed", "value": 99.0}))
        assert "outside" in recv_until(ws, "error")["detail"]
        # session lives on
        assert recv_until(ws, "frame")["type"] == "frame"


def test_malformed_and_unknown_messages(client):
    with client.websocket_connect("/ws") as ws:
        recv_until(ws, "bounds")
        ws.send_text("this is not json")
        assert "JSON" in recv_until(ws, "error")["detail"]
        ws.send_text(json.dumps({"type": "teleport"}))
        assert "unknown" in recv_until(ws, "error")["detail"]
        assert recv_until(ws, "frame")["type"] == "frame"


def test_reset_resends_bounds(client):
    with client.websocket_connect("/ws") as ws:
        recv_until(ws, "bounds")
        recv_until(ws, "frame")
        ws.send_text(json.dumps({"type": "reset"}))
        msg = recv_until(ws, "bounds")
        assert msg["type"] == "bounds"
        frame = recv_until(ws, "frame")
        assert frame["t"] == 0.0


def test_mailbox_latest_wins():
    import asyncio

    async def run():
        box = _Mailbox()
        box.put("a")
        box.put("b")
        assert await box.get() == "b"

    asyncio.run(run())


def test_replay_matches_offline_frames(client):
    """A scripted session reproduces the offline export path bit-exactly.

    Commands are sent one frame ahead of their boundary, so they apply at
    frame times aligned with the offline scenario events.
    """
    n_frames = 40
    push_at = 0.5          # frame 10 at 20 fps
    param_at = 1.0         # frame 20

    offline = Walker(scale_body(70.0, 1.7), make_config(speed=1.0, freq=1.7, ds_ratio=0.2))
    offline.apply_push(40.0, 0.0, start=push_at, duration=0.4)
    expected = [frame_record(f) for f in run_frames(
        offline, n_frames / FPS, FPS, [ParamEvent(at=param_at, changes={"speed": 1.1})])]

    got = []
    with client.websocket_connect("/ws") as ws:
        recv_until(ws, "bounds")
        while len(got) < n_frames:
            msg = json.loads(ws.receive_text())
            if msg["type"] != "frame":
                continue
            msg.pop("type")
            got.append(msg)
            k = len(got) - 1           # frame index just received
            if k == 9:                 # boundary 10 carries the push window
                ws.send_text(json.dumps({"type": "push", "fx": 40.0, "fy": 0.0,
                                         "duration": 0.4}))
            if k == 19:
                ws.send_text(json.dumps({"type": "set_param", "name": "speed",
                                         "value": 1.1}))
    assert len(got) == len(expected) == n_frames
    for rec_got, rec_exp in zip(got, expected):
        assert rec_got == rec_exp
