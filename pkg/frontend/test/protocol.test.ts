import { describe, expect, it } from "vitest";
import {
  Bounds,
  parseServerMessage,
  pushCommand,
  setParam,
} from "../src/protocol.js";

// matches the service's bounds handshake
const BOUNDS: Bounds = {
  params: {
    speed: { min: -1.7, max: 1.7, default: 1.0 },
    freq: { min: 1.0, max: 2.5, default: 1.7 },
    ds_ratio: { min: 0.0, max: 0.4, default: 0.2 },
    slope: { min: -0.2, max: 0.2, default: 0.0 },
    torso: { min: -0.15, max: 0.3, default: 0.0 },
    clearance: { min: 0.0, max: 0.1, default: 0.05 },
    drag: { min: -60, max: 60, default: 0.0 },
  },
  push: { force_max: 150, duration_max: 2 },
};

// deterministic LCG so the property run is reproducible
function lcg(seed: number) {
  let s = seed >>> 0;
  return () => {
    s = (1664525 * s + 1013904223) >>> 0;
    return s / 2 ** 32;
  };
}

describe("bounds clamping", () => {
  it("never emits an out-of-bounds set_param, for any input value", () => {
    const rnd = lcg(7);
    const names = Object.keys(BOUNDS.params);
    for (let i = 0; i < 2000; i++) {
      const name = names[Math.floor(rnd() * names.length)];
      const raw = (rnd() - 0.5) * 1000; // wildly outside the ranges
      const msg = setParam(BOUNDS, name, raw);
      const r = BOUNDS.params[name];
      expect(msg.value).toBeGreaterThanOrEqual(r.min);
      expect(msg.value).toBeLessThanOrEqual(r.max);
      expect(msg.type).toBe("set_param");
    }
  });

  it("keeps in-range values untouched", () => {
    const msg = setParam(BOUNDS, "speed", 1.2);
    expect(msg.value).toBe(1.2);
  });

  it("rejects unknown parameters", () => {
    expect(() => setParam(BOUNDS, "teleport", 1)).toThrow();
  });

  it("never emits an out-of-bounds push", () => {
    const rnd = lcg(11);
    for (let i = 0; i < 2000; i++) {
      const msg = pushCommand(
        BOUNDS,
        (rnd() - 0.5) * 2000,
        (rnd() - 0.5) * 2000,
        rnd() * 10,
      );
      expect(Math.abs(msg.fx)).toBeLessThanOrEqual(BOUNDS.push.force_max);
      expect(Math.abs(msg.fy)).toBeLessThanOrEqual(BOUNDS.push.force_max);
      expect(msg.duration).toBeGreaterThanOrEqual(0);
      expect(msg.duration).toBeLessThanOrEqual(BOUNDS.push.duration_max);
    }
  });
});

describe("server message parsing", () => {
  it("parses typed messages and rejects junk", () => {
    expect(parseServerMessage('{"type":"ack","detail":"ok"}')).toEqual({
      type: "ack",
      detail: "ok",
    });
    expect(parseServerMessage("not json")).toBeNull();
    expect(parseServerMessage('{"no_type":1}')).toBeNull();
  });
});
