"""Flat frame records and their CSV / JSONL serialization.

One record is a fixed, documented column set; floats are emitted with
shortest round-trip formatting so parse(emit(frames)) == frames exactly.
"""

from __future__ import annotations

import json
import math
from typing import Iterable

from .sim import Frame

_JOINTS = ("hip", "knee", "ankle", "toe")
_ANGLES = ("hip_sag", "hip_lat", "knee_flex", "ankle_flex", "foot_pitch")

COLUMNS = (
    ["t", "pel_x", "pel_y", "pel_z"]
    + [f"left_{j}_{c}" for j in _JOINTS for c in "xyz"]
    + [f"left_{a}" for a in _ANGLES]
    + [f"right_{j}_{c}" for j in _JOINTS for c in "xyz"]
    + [f"right_{a}" for a in _ANGLES]
    + ["err_norm", "du_norm", "push", "infeasible"]
)


def frame_record(frame: Frame) -> dict:
    """Flatten a frame into the documented column set (units m / rad / s)."""
    rec = {c: math.nan for c in COLUMNS}
    rec["t"] = frame.t
    rec["err_norm"] = frame.err_norm
    rec["du_norm"] = frame.du_norm
    rec["push"] = 1.0 if frame.push_active else 0.0
    rec["infeasible"] = 1.0 if frame.infeasible else 0.0
    if frame.pelvis is not None:
        rec["pel_x"], rec["pel_y"], rec["pel_z"] = map(float, frame.pelvis)
        for side in ("left", "right"):
            for j in _JOINTS:
                p = frame.joints[side][j]
                for c, v in zip("xyz", p):
                    rec[f"{side}_{j}_{c}"] = float(v)
            for a in _ANGLES:
                rec[f"{side}_{a}"] = float(frame.angles[side][a])
    return rec


def to_csv_line(rec: dict) -> str:
    return ",".join(repr(float(rec[c])) for c in COLUMNS)


def csv_header() -> str:
    return ",".join(COLUMNS)


def write_csv(records: Iterable[dict], fh):
    fh.write(csv_header() + "\n")
    for rec in records:
        fh.write(to_csv_line(rec) + "\n")


def read_csv(fh) -> list[dict]:
    header = fh.readline().strip().split(",")
    out = []
    for line in fh:
        if not line.strip():
            continue
        out.append({c: float(v) for c, v in zip(header, line.strip().split(","))})
    return out


def to_json_line(rec: dict) -> str:
    return json.dumps({c: rec[c] for c in COLUMNS})


def write_jsonl(records: Iterable[dict], fh):
    for rec in records:
        fh.write(to_json_line(rec) + "\n")


def read_jsonl(fh) -> list[dict]:
    return [json.loads(line) for line in fh if line.strip()]


def parse_scenario(lines: Iterable[str]):
    """Scenario script: one JSON op per line.

    ``{"at": s, "op": "push", "fx": N, "fy": N, "duration": s}``
    ``{"at": s, "op": "set_param", "name": str, "value": float}``

    Returns (pushes, param_events) with pushes as (at, fx, fy, duration)
    tuples and param_events as (at, {name: value}) sorted by time.
    """
    pushes = []
    params = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        at = float(obj["at"])
        op = obj.get("op")
        if op == "push":
            pushes.append((at, float(obj["fx"]), float(obj["fy"]), float(obj["duration"])))
        elif op == "set_param":
            params.append((at, {str(obj["name"]): float(obj["value"])}))
        else:
            raise ValueError(f"unknown scenario op: {op!r}")
    params.sort(key=lambda e: e[0])
    return pushes, params
