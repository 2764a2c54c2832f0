// Wire protocol for the replay service. Field names match the server
// exactly; one JSON object per WebSocket text message.

export type ModeName = "A" | "B" | "C" | "D";

export type KeypointTriple = [number, number, number]; // x, y, confidence

export interface DogKeypoints {
  ears: KeypointTriple[];
  neck: KeypointTriple;
  scapula: KeypointTriple;
  forelimbs: KeypointTriple[];
  waist: KeypointTriple;
}

export interface FrameKeypoints {
  left_arm?: KeypointTriple[];
  right_arm?: KeypointTriple[];
  dog?: DogKeypoints;
  marker?: KeypointTriple[];
}

export interface ViewParams {
  theta_deg: number;
  phi_deg: number;
  fov_deg: number;
  pano_width: number;
  pano_height: number;
}

export interface Manifest {
  session_id: string;
  dataset_name: string;
  fps: number;
  frame_count: number;
  frame_width: number;
  frame_height: number;
  view: ViewParams;
  ground_truth_command_count?: number;
  background?: string; // optional media asset path; absent in shipped sessions
}

export interface OverlaySpec {
  kind: "PointSet" | "Segment" | "AngleArc" | "MaskRegion" | "Label";
  style_tag: string;
  points: [number, number][];
  text?: string;
  radius?: number;
  from_deg?: number;
  to_deg?: number;
}

export interface HapticEventMsg {
  hand: "Left" | "Right";
  start_frame: number;
  duration_frames: number;
  frequency_hz: number;
  amplitude: number;
}

// server -> client

export interface HelloMessage {
  type: "hello";
  manifest: Manifest;
}

export interface FrameMessage {
  type: "frame";
  frame: number;
  keypoints: FrameKeypoints;
  overlays: OverlaySpec[];
  haptics: HapticEventMsg[];
}

export interface SeekAckMessage {
  type: "seek_ack";
  frame: number;
}

export interface ScoreMessage {
  type: "score";
  epoch_id: number | null;
  timing_offset_ms: number | null;
  yaw_error_deg: number | null;
  pitch_error_deg: number | null;
  velocity_error_deg_s: number | null;
  category_match: boolean;
  composite: number;
}

export interface ErrorMessage {
  type: "error";
  code: string;
  detail: string;
}

export type ServerMessage =
  | HelloMessage
  | FrameMessage
  | SeekAckMessage
  | ScoreMessage
  | ErrorMessage;

// client -> server

export interface SubscribeMessage {
  type: "subscribe";
  session_id: string;
  mode: ModeName;
}

export interface SetModeMessage {
  type: "set_mode";
  mode: ModeName;
}

export interface SeekMessage {
  type: "seek";
  frame: number;
}

export interface SetRateMessage {
  type: "set_rate";
  rate: number;
}

export interface PracticePoseMessage {
  type: "practice_pose";
  frame: number;
  seq: number;
  right_arm: KeypointTriple[];
}

export type ClientMessage =
  | SubscribeMessage
  | SetModeMessage
  | SeekMessage
  | SetRateMessage
  | PracticePoseMessage;

export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null || typeof (data as any).type !== "string") {
    return null;
  }
  return data as ServerMessage;
}
