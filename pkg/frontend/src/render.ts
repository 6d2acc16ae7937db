// Canvas painter: side and top orthographic views of the streamed
// skeleton, camera following the pelvis, diagnostics overlay and the
// push-force arrow.

import { FrameRecord } from "./protocol.js";
import { groundLine, skeletonSegments } from "./skeleton.js";

const COLORS = { pelvis: "#888", thigh: "#2b7", shank: "#47c", foot: "#d63" };

export interface Arrow {
  fx: number;
  fy: number;
  until: number; // wall-clock ms
}

export class Painter {
  private readonly px = 170; // pixels per meter

  constructor(
    private side: CanvasRenderingContext2D,
    private top: CanvasRenderingContext2D,
  ) {}

  draw(rec: FrameRecord | null, slope: number, arrow: Arrow | null, live: boolean) {
    this.pane(this.side, rec, "side", slope, arrow, live);
    this.pane(this.top, rec, "top", slope, arrow, live);
  }

  private pane(
    ctx: CanvasRenderingContext2D,
    rec: FrameRecord | null,
    view: "side" | "top",
    slope: number,
    arrow: Arrow | null,
    live: boolean,
  ) {
    const { width, height } = ctx.canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = live ? "#fafafa" : "#ddd";
    ctx.fillRect(0, 0, width, height);
    if (!rec) return;

    const cx = rec.pel_x;
    const toPx = (p: [number, number]): [number, number] =>
      view === "side"
        ? [width / 2 + (p[0] - cx) * this.px, height * 0.9 - (p[1] - cx * Math.tan(slope)) * this.px]
        : [width / 2 + (p[0] - cx) * this.px, height / 2 + p[1] * this.px];

    if (view === "side") {
      const [a, b] = groundLine(slope, cx - 2.0, cx + 2.0);
      ctx.strokeStyle = "#444";
      ctx.lineWidth = 1;
      ctx.beginPath();
      ctx.moveTo(...toPx(a));
      ctx.lineTo(...toPx(b));
      ctx.stroke();
    }

    for (const seg of skeletonSegments(rec, view)) {
      ctx.strokeStyle = COLORS[seg.kind];
      ctx.lineWidth = seg.side === "left" ? 2 : 4;
      ctx.beginPath();
      ctx.moveTo(...toPx(seg.a));
      ctx.lineTo(...toPx(seg.b));
      ctx.stroke();
    }

    const pelvis: [number, number] =
      view === "side" ? [rec.pel_x, rec.pel_z] : [rec.pel_x, rec.pel_y];
    const pp = toPx(pelvis);
    ctx.fillStyle = "#222";
    ctx.beginPath();
    ctx.arc(pp[0], pp[1], 4, 0, 2 * Math.PI);
    ctx.fill();

    if (arrow && performance.now() < arrow.until) {
      const scale = 0.004 * this.px;
      const d: [number, number] =
        view === "side" ? [arrow.fx * scale, 0] : [arrow.fx * scale, arrow.fy * scale];
      ctx.strokeStyle = "#e22";
      ctx.lineWidth = 3;
      ctx.beginPath();
      ctx.moveTo(pp[0], pp[1]);
      ctx.lineTo(pp[0] + d[0], pp[1] + d[1]);
      ctx.stroke();
    }

    ctx.fillStyle = "#333";
    ctx.font = "12px monospace";
    if (view === "side") {
      ctx.fillText(`t=${rec.t.toFixed(2)}s  err=${rec.err_norm.toFixed(3)}`, 8, 16);
      if (rec.push) ctx.fillText("push active", 8, 32);
      if (rec.infeasible) ctx.fillText("pose clamped", 8, 48);
    }
  }
}
