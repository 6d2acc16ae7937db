// Pure geometry: turn one streamed frame record into drawable segment
// lists for the side (x-z) and top (x-y) views.  Rendering is a pure
// function of the latest frame; no client-side simulation.

import { FrameRecord } from "./protocol.js";

export type Pt = [number, number];
export interface Segment {
  a: Pt;
  b: Pt;
  kind: "pelvis" | "thigh" | "shank" | "foot";
  side: "left" | "right";
}

const JOINTS = ["hip", "knee", "ankle", "toe"] as const;

function joint(rec: FrameRecord, side: string, name: string): [number, number, number] {
  return [
    rec[`${side}_${name}_x`],
    rec[`${side}_${name}_y`],
    rec[`${side}_${name}_z`],
  ];
}

function project(p: [number, number, number], view: "side" | "top"): Pt {
  return view === "side" ? [p[0], p[2]] : [p[0], p[1]];
}

export function skeletonSegments(rec: FrameRecord, view: "side" | "top"): Segment[] {
  if (rec.infeasible && !isFinite(rec.left_hip_x)) {
    return [];
  }
  const segs: Segment[] = [];
  const hips: Record<string, Pt> = {};
  for (const side of ["left", "right"] as const) {
    const pts = JOINTS.map((j) => project(joint(rec, side, j), view));
    hips[side] = pts[0];
    const kinds = ["thigh", "shank", "foot"] as const;
    for (let i = 0; i < 3; i++) {
      segs.push({ a: pts[i], b: pts[i + 1], kind: kinds[i], side });
    }
  }
  segs.push({ a: hips.left, b: hips.right, kind: "pelvis", side: "left" });
  return segs;
}

/** Lengths of the drawn segments, for ratio checks and debugging. */
export function segmentLengths3d(rec: FrameRecord, side: "left" | "right") {
  const p = JOINTS.map((j) => joint(rec, side, j));
  const d = (a: number[], b: number[]) =>
    Math.hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
  return { thigh: d(p[0], p[1]), shank: d(p[1], p[2]), foot: d(p[2], p[3]) };
}

/** Ground line in the side view: z = x tan(slope). */
export function groundLine(slope: number, x0: number, x1: number): [Pt, Pt] {
  const t = Math.tan(slope);
  return [
    [x0, x0 * t],
    [x1, x1 * t],
  ];
}
