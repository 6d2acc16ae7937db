// Push gestures: dragging on the walker turns a pixel vector into a
// push command at a documented scale of 1 newton per pixel.

import { Bounds, PushMessage, pushCommand } from "./protocol.js";

export const NEWTONS_PER_PIXEL = 1.0;

export interface Drag {
  dxPx: number;
  dyPx: number;
  view: "side" | "top";
}

/**
 * Map a drag to a push.  In the side view the horizontal drag is the
 * sagittal force (vertical pixels are ignored: pushes are horizontal);
 * in the top view both axes act, screen-down being +lateral.
 */
export function dragToPush(
  bounds: Bounds,
  drag: Drag,
  duration: number,
  scale: number = NEWTONS_PER_PIXEL,
): PushMessage {
  const fx = drag.dxPx * scale;
  const fy = drag.view === "top" ? drag.dyPx * scale : 0;
  return pushCommand(bounds, fx, fy, duration);
}
