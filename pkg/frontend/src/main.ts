// Wire-up: session, panel, painter and the push drag gesture.

import { dragToPush } from "./gesture.js";
import { Session } from "./net.js";
import { createPanel } from "./panel.js";
import { Arrow, Painter } from "./render.js";
import { resetCommand } from "./protocol.js";

function canvasCtx(id: string): CanvasRenderingContext2D {
  const el = document.getElementById(id) as HTMLCanvasElement;
  const ctx = el.getContext("2d");
  if (!ctx) throw new Error(`no 2d context for #${id}`);
  return ctx;
}

function main() {
  const painter = new Painter(canvasCtx("side"), canvasCtx("top"));
  let arrow: Arrow | null = null;

  const session = new Session(`ws://${location.hostname}:8787/ws`, (s) => {
    if (s.bounds && panel.root.childElementCount === 0) {
      panel.setBounds(s.bounds);
    }
    const status = document.getElementById("status")!;
    status.textContent = s.connected
      ? s.lastError
        ? `error: ${s.lastError}`
        : "live"
      : "reconnecting…";
  });

  const panel = createPanel(
    (msg) => session.send(msg),
    () => {
      session.send(resetCommand());
      panel.root.innerHTML = "";
    },
  );
  document.getElementById("controls")!.append(panel.root);

  const durationInput = document.getElementById("push-duration") as HTMLInputElement;
  for (const [id, view] of [["side", "side"], ["top", "top"]] as const) {
    const el = document.getElementById(id) as HTMLCanvasElement;
    let start: [number, number] | null = null;
    el.addEventListener("pointerdown", (ev) => (start = [ev.offsetX, ev.offsetY]));
    el.addEventListener("pointerup", (ev) => {
      if (!start || !session.state.bounds) return;
      const drag = { dxPx: ev.offsetX - start[0], dyPx: ev.offsetY - start[1], view };
      start = null;
      const dur = Number(durationInput.value) || 0.4;
      const msg = dragToPush(session.state.bounds, drag, dur);
      if (msg.fx !== 0 || msg.fy !== 0) {
        session.send(msg);
        arrow = { fx: msg.fx, fy: msg.fy, until: performance.now() + dur * 1000 };
      }
    });
  }

  const tick = () => {
    const slope = panel.values["slope"] ?? 0;
    painter.draw(session.state.frame, slope, arrow, session.state.connected);
    requestAnimationFrame(tick);
  };
  requestAnimationFrame(tick);
  session.connect();
}

window.addEventListener("load", main);
