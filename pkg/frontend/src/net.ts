// Websocket session: single state atom updated by network callbacks,
// reconnect with exponential backoff, canvas greyed while disconnected.

import { Bounds, FrameRecord, parseServerMessage } from "./protocol.js";

export interface SessionState {
  connected: boolean;
  bounds: Bounds | null;
  frame: FrameRecord | null;
  lastError: string;
}

export class Session {
  state: SessionState = { connected: false, bounds: null, frame: null, lastError: "" };
  private ws: WebSocket | null = null;
  private backoffMs = 500;

  constructor(
    private url: string,
    private onChange: (s: SessionState) => void,
  ) {}

  connect() {
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.addEventListener("open", () => {
      this.backoffMs = 500;
      this.state.connected = true;
      this.onChange(this.state);
    });
    ws.addEventListener("message", (ev) => {
      const msg = parseServerMessage(String(ev.data));
      if (!msg) return;
      if (msg.type === "bounds") {
        this.state.bounds = { params: msg.params, push: msg.push, units: msg.units };
      } else if (msg.type === "frame") {
        this.state.frame = msg;
      } else if (msg.type === "error") {
        this.state.lastError = msg.detail;
      }
      this.onChange(this.state);
    });
    ws.addEventListener("close", () => this.dropped());
    ws.addEventListener("error", () => ws.close());
  }

  private dropped() {
    this.state.connected = false;
    this.onChange(this.state);
    setTimeout(() => this.connect(), this.backoffMs);
    this.backoffMs = Math.min(this.backoffMs * 2, 8000);
  }

  send(msg: unknown) {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(JSON.stringify(msg));
    }
  }
}
