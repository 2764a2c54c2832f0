// Replay-service client: owns the socket and the pure state, queues
// network messages and applies them in arrival order.

import type { ClientMessage, ModeName, ServerMessage } from "./protocol.js";
import { parseServerMessage } from "./protocol.js";
import { applyConnection, applyLocalMode, applyLocalRate, applyRaw, ClientState, initialState } from "./state.js";

// minimal socket surface shared by the browser WebSocket and the ws package
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientEvents {
  onState?: (state: ClientState) => void;
  onMessage?: (msg: ServerMessage) => void;
  onOpen?: () => void;
  onClose?: () => void;
}

export class ReplayClient {
  state: ClientState = initialState();
  private socket: SocketLike | null = null;

  constructor(
    private readonly url: string,
    private readonly factory: SocketFactory,
    private readonly events: ClientEvents = {},
  ) {}

  connect(): void {
    this.state = applyConnection(initialState(), "connecting");
    this.emitState();
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.state = applyConnection(this.state, "open");
      this.emitState();
      this.events.onOpen?.();
    };
    socket.onmessage = (ev) => {
      const parsed = parseServerMessage(String(ev.data));
      this.state = applyRaw(this.state, parsed);
      this.emitState();
      if (parsed) {
        this.events.onMessage?.(parsed);
      }
    };
    socket.onclose = () => {
      this.state = applyConnection(this.state, "closed");
      this.emitState();
      this.events.onClose?.();
    };
    socket.onerror = () => {
      // onclose follows; nothing else to do
    };
  }

  disconnect(): void {
    this.socket?.close();
    this.socket = null;
  }

  get connected(): boolean {
    return this.state.connection === "open";
  }

  send(msg: ClientMessage): void {
    if (!this.socket || !this.connected) {
      return;
    }
    this.socket.send(JSON.stringify(msg));
  }

  subscribe(sessionId: string, mode: ModeName): void {
    this.state = applyLocalMode(this.state, mode);
    this.send({ type: "subscribe", session_id: sessionId, mode });
  }

  setMode(mode: ModeName): void {
    this.state = applyLocalMode(this.state, mode);
    this.emitState();
    this.send({ type: "set_mode", mode });
  }

  seek(frame: number): void {
    this.send({ type: "seek", frame });
  }

  setRate(rate: number): void {
    this.state = applyLocalRate(this.state, rate);
    this.emitState();
    this.send({ type: "set_rate", rate });
  }

  private emitState(): void {
    this.events.onState?.(this.state);
  }
}
