// Parameter panel: one slider per served steerable parameter, enabled
// only once the bounds handshake arrives.  Values are clamped by
// construction (the slider attributes are the served bounds).

import { Bounds, SetParamMessage, setParam } from "./protocol.js";

const LABELS: Record<string, string> = {
  speed: "speed [m/s]",
  freq: "frequency [steps/s]",
  ds_ratio: "double support",
  slope: "slope [rad]",
  torso: "torso bend [rad]",
  clearance: "toe clearance",
  drag: "drag [N]",
};

export interface Panel {
  root: HTMLElement;
  setBounds(bounds: Bounds): void;
  values: Record<string, number>;
}

export function createPanel(
  onCommit: (msg: SetParamMessage) => void,
  onReset: () => void,
): Panel {
  const root = document.createElement("div");
  root.className = "panel";
  const values: Record<string, number> = {};
  let current: Bounds | null = null;

  const resetBtn = document.createElement("button");
  resetBtn.textContent = "reset";
  resetBtn.disabled = true;
  resetBtn.addEventListener("click", () => onReset());

  function setBounds(bounds: Bounds) {
    current = bounds;
    root.innerHTML = "";
    for (const [name, label] of Object.entries(LABELS)) {
      const r = bounds.params[name];
      if (!r) continue;
      const row = document.createElement("label");
      row.className = "row";
      const span = document.createElement("span");
      const slider = document.createElement("input");
      slider.type = "range";
      slider.min = String(r.min);
      slider.max = String(r.max);
      slider.step = String((r.max - r.min) / 200);
      slider.value = String(r.default);
      values[name] = r.default;
      span.textContent = `${label}: ${r.default.toFixed(2)}`;
      slider.addEventListener("input", () => {
        span.textContent = `${label}: ${Number(slider.value).toFixed(2)}`;
      });
      slider.addEventListener("change", () => {
        if (!current) return;
        const msg = setParam(current, name, Number(slider.value));
        values[name] = msg.value;
        onCommit(msg);
      });
      row.append(span, slider);
      root.append(row);
    }
    resetBtn.disabled = false;
    root.append(resetBtn);
  }

  return { root, setBounds, values };
}
