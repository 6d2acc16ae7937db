// Wire protocol of the walking service: one JSON document per message.
// Outbound commands are always clamped into the served bounds, so the
// client can never send an out-of-range value.

export interface Range {
  min: number;
  max: number;
  default: number;
}

export interface Bounds {
  params: Record<string, Range>;
  push: { force_max: number; duration_max: number };
  units?: Record<string, string>;
}

export interface FrameRecord {
  t: number;
  pel_x: number;
  pel_y: number;
  pel_z: number;
  err_norm: number;
  du_norm: number;
  push: number;
  infeasible: number;
  [key: string]: number;
}

export type ServerMessage =
  | ({ type: "bounds" } & Bounds)
  | ({ type: "frame" } & FrameRecord)
  | { type: "ack"; detail: string }
  | { type: "error"; detail: string };

export interface SetParamMessage {
  type: "set_param";
  name: string;
  value: number;
}

export interface PushMessage {
  type: "push";
  fx: number;
  fy: number;
  duration: number;
}

export const clamp = (v: number, lo: number, hi: number): number =>
  Math.min(Math.max(v, lo), hi);

export function setParam(
  bounds: Bounds,
  name: string,
  value: number,
): SetParamMessage {
  const r = bounds.params[name];
  if (!r) {
    throw new Error(`parameter ${name} is not steerable`);
  }
  return { type: "set_param", name, value: clamp(value, r.min, r.max) };
}

export function pushCommand(
  bounds: Bounds,
  fx: number,
  fy: number,
  duration: number,
): PushMessage {
  const fmax = bounds.push.force_max;
  return {
    type: "push",
    fx: clamp(fx, -fmax, fmax),
    fy: clamp(fy, -fmax, fmax),
    duration: clamp(duration, 0, bounds.push.duration_max),
  };
}

export const resetCommand = () => ({ type: "reset" as const });
export const rateCommand = (fps: number) => ({ type: "rate" as const, fps });

export function parseServerMessage(raw: string): ServerMessage | null {
  try {
    const obj = JSON.parse(raw);
    if (obj && typeof obj.type === "string") {
      return obj as ServerMessage;
    }
  } catch {
    /* malformed frame: ignore */
  }
  return null;
}
