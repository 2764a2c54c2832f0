// Client session state: a pure function of server messages plus local
// input, so reconnecting and replaying hello + frame rebuilds the render
// state exactly.

import type {
  FrameMessage,
  HapticEventMsg,
  KeypointTriple,
  Manifest,
  ModeName,
  ScoreMessage,
  ServerMessage,
} from "./protocol.js";

export type ConnectionState = "idle" | "connecting" | "open" | "closed";

export interface ActiveHaptic {
  event: HapticEventMsg;
}

export interface ClientState {
  connection: ConnectionState;
  manifest: Manifest | null;
  frame: FrameMessage | null;
  mode: ModeName;
  rate: number;
  scores: ScoreMessage[];
  lastError: string | null;
  errorBanner: string | null;
  activeHaptics: ActiveHaptic[];
  // last expert right arm seen in a frame message; mode D must never render it
  cachedExpertRightArm: KeypointTriple[] | null;
  schemaMismatches: number;
}

export function initialState(): ClientState {
  return {
    connection: "idle",
    manifest: null,
    frame: null,
    mode: "A",
    rate: 1,
    scores: [],
    lastError: null,
    errorBanner: null,
    activeHaptics: [],
    cachedExpertRightArm: null,
    schemaMismatches: 0,
  };
}

function frameSchemaOk(msg: FrameMessage): boolean {
  return (
    typeof msg.frame === "number" &&
    typeof msg.keypoints === "object" &&
    msg.keypoints !== null &&
    Array.isArray(msg.overlays) &&
    Array.isArray(msg.haptics)
  );
}

function pruneHaptics(active: ActiveHaptic[], frame: number): ActiveHaptic[] {
  return active.filter(
    (a) => frame < a.event.start_frame + a.event.duration_frames && frame >= a.event.start_frame,
  );
}

export function applyConnection(state: ClientState, connection: ConnectionState): ClientState {
  return { ...state, connection };
}

export function applyLocalMode(state: ClientState, mode: ModeName): ClientState {
  return { ...state, mode };
}

export function applyLocalRate(state: ClientState, rate: number): ClientState {
  return { ...state, rate };
}

export function applyServerMessage(state: ClientState, msg: ServerMessage): ClientState {
  switch (msg.type) {
    case "hello":
      return {
        ...state,
        manifest: msg.manifest,
        frame: null,
        scores: [],
        activeHaptics: [],
        cachedExpertRightArm: null,
        errorBanner: null,
      };
    case "frame": {
      if (!frameSchemaOk(msg)) {
        // visible banner, connection retained, frame dropped
        return {
          ...state,
          errorBanner: "frame message failed schema check",
          schemaMismatches: state.schemaMismatches + 1,
        };
      }
      const active = pruneHaptics(
        state.activeHaptics.concat(msg.haptics.map((event) => ({ event }))),
        msg.frame,
      );
      return {
        ...state,
        frame: msg,
        activeHaptics: active,
        cachedExpertRightArm: msg.keypoints.right_arm ?? state.cachedExpertRightArm,
        errorBanner: null,
      };
    }
    case "seek_ack":
      // ordering barrier only; frame follows separately
      return { ...state, activeHaptics: [] };
    case "score":
      return { ...state, scores: [...state.scores, msg] };
    case "error":
      return { ...state, lastError: `${msg.code}: ${msg.detail}` };
    default:
      return {
        ...state,
        errorBanner: "unknown message type",
        schemaMismatches: state.schemaMismatches + 1,
      };
  }
}

export function applyRaw(state: ClientState, parsed: ServerMessage | null): ClientState {
  if (parsed === null) {
    return {
      ...state,
      errorBanner: "undecodable server message",
      schemaMismatches: state.schemaMismatches + 1,
    };
  }
  return applyServerMessage(state, parsed);
}

// Expert right-arm keypoints that are allowed to render: mode D hides
// them even when a cached copy exists from earlier frames.
export function renderableExpertRightArm(state: ClientState): KeypointTriple[] | null {
  if (state.mode === "D") {
    return null;
  }
  return state.frame?.keypoints.right_arm ?? null;
}
