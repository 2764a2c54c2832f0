// Frame rendering split in two: planFrame builds a draw-op list from the
// client state (pure, unit-testable), drawOps paints it onto a canvas.

import type { KeypointTriple, OverlaySpec } from "./protocol.js";
import { ClientState, renderableExpertRightArm } from "./state.js";

export type Point = [number, number];

export type DrawOp =
  | { op: "clear"; width: number; height: number }
  | { op: "grid"; width: number; height: number; spacing: number }
  | { op: "polyline"; points: Point[]; style: string }
  | { op: "points"; points: Point[]; style: string; radius: number }
  | { op: "polygon"; points: Point[]; style: string; fill: boolean }
  | { op: "arc"; center: Point; radius: number; fromDeg: number; toDeg: number; style: string }
  | { op: "label"; at: Point; text: string; style: string }
  | { op: "pulse"; hand: string; frequencyHz: number; amplitude: number };

const STYLE_COLORS: Record<string, string> = {
  "expert-skeleton": "#9be09b",
  "expert-dog": "#e0d59b",
  "expert-marker": "#8899aa",
  "standard-pose": "#ffd24d",
  "command-category": "#ffd24d",
  "command-range": "#ffb347",
  "dog-head": "#7fd4ff",
  "dog-status": "#7fd4ff",
  "dog-status-range": "#4aa3d8",
  "practice-pose": "#ff7f9f",
  "relaxed-arm-mask": "rgba(40, 44, 52, 0.92)",
  "relaxed-arm": "#c0c8d0",
};

export function styleColor(tag: string): string {
  return STYLE_COLORS[tag] ?? "#dddddd";
}

function xy(points: KeypointTriple[]): Point[] {
  return points.map((p) => [p[0], p[1]]);
}

function overlayOps(overlay: OverlaySpec): DrawOp[] {
  switch (overlay.kind) {
    case "PointSet":
      return [{ op: "points", points: overlay.points, style: overlay.style_tag, radius: 4 }];
    case "Segment":
      return [{ op: "polyline", points: overlay.points, style: overlay.style_tag }];
    case "MaskRegion":
      return [{ op: "polygon", points: overlay.points, style: overlay.style_tag, fill: true }];
    case "AngleArc":
      return [
        {
          op: "arc",
          center: overlay.points[0],
          radius: overlay.radius ?? 40,
          fromDeg: overlay.from_deg ?? 0,
          toDeg: overlay.to_deg ?? 0,
          style: overlay.style_tag,
        },
      ];
    case "Label":
      return [
        { op: "label", at: overlay.points[0], text: overlay.text ?? "", style: overlay.style_tag },
      ];
    default:
      return [];
  }
}

export function planFrame(state: ClientState): DrawOp[] {
  const width = state.manifest?.frame_width ?? 640;
  const height = state.manifest?.frame_height ?? 640;
  const ops: DrawOp[] = [
    { op: "clear", width, height },
    { op: "grid", width, height, spacing: 64 },
  ];
  const frame = state.frame;
  if (!frame) {
    return ops;
  }

  const kp = frame.keypoints;
  if (kp.left_arm) {
    ops.push({ op: "polyline", points: xy(kp.left_arm), style: "expert-skeleton" });
    ops.push({ op: "points", points: xy(kp.left_arm), style: "expert-skeleton", radius: 3 });
  }
  const rightArm = renderableExpertRightArm(state);
  if (rightArm) {
    ops.push({ op: "polyline", points: xy(rightArm), style: "expert-skeleton" });
    ops.push({ op: "points", points: xy(rightArm), style: "expert-skeleton", radius: 3 });
  }
  if (kp.dog) {
    const earMid: Point = [
      (kp.dog.ears[0][0] + kp.dog.ears[1][0]) / 2,
      (kp.dog.ears[0][1] + kp.dog.ears[1][1]) / 2,
    ];
    ops.push({ op: "points", points: xy([...kp.dog.ears, kp.dog.neck, kp.dog.scapula, ...kp.dog.forelimbs, kp.dog.waist]), style: "expert-dog", radius: 3 });
    ops.push({ op: "polyline", points: [earMid, [kp.dog.neck[0], kp.dog.neck[1]]], style: "expert-dog" });
    ops.push({
      op: "polyline",
      points: [
        [(kp.dog.forelimbs[0][0] + kp.dog.forelimbs[1][0]) / 2, (kp.dog.forelimbs[0][1] + kp.dog.forelimbs[1][1]) / 2],
        [kp.dog.waist[0], kp.dog.waist[1]],
      ],
      style: "expert-dog",
    });
  }
  if (kp.marker) {
    const pts = xy(kp.marker);
    ops.push({ op: "polygon", points: pts, style: "expert-marker", fill: false });
  }

  for (const overlay of frame.overlays) {
    ops.push(...overlayOps(overlay));
  }

  for (const active of state.activeHaptics) {
    ops.push({
      op: "pulse",
      hand: active.event.hand,
      frequencyHz: active.event.frequency_hz,
      amplitude: active.event.amplitude,
    });
  }
  return ops;
}

export function drawOps(ctx: CanvasRenderingContext2D, ops: DrawOp[], panX = 0, panY = 0): void {
  for (const item of ops) {
    switch (item.op) {
      case "clear":
        ctx.setTransform(1, 0, 0, 1, 0, 0);
        ctx.fillStyle = "#1b1e24";
        ctx.fillRect(0, 0, item.width, item.height);
        ctx.setTransform(1, 0, 0, 1, panX, panY);
        break;
      case "grid":
        ctx.strokeStyle = "#2a2f38";
        ctx.lineWidth = 1;
        for (let x = 0; x <= item.width; x += item.spacing) {
          ctx.beginPath();
          ctx.moveTo(x, 0);
          ctx.lineTo(x, item.height);
          ctx.stroke();
        }
        for (let y = 0; y <= item.height; y += item.spacing) {
          ctx.beginPath();
          ctx.moveTo(0, y);
          ctx.lineTo(item.width, y);
          ctx.stroke();
        }
        break;
      case "polyline":
        ctx.strokeStyle = styleColor(item.style);
        ctx.lineWidth = 2;
        ctx.beginPath();
        item.points.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
        ctx.stroke();
        break;
      case "points":
        ctx.fillStyle = styleColor(item.style);
        for (const [x, y] of item.points) {
          ctx.beginPath();
          ctx.arc(x, y, item.radius, 0, Math.PI * 2);
          ctx.fill();
        }
        break;
      case "polygon":
        ctx.beginPath();
        item.points.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
        ctx.closePath();
        if (item.fill) {
          ctx.fillStyle = styleColor(item.style);
          ctx.fill();
        } else {
          ctx.strokeStyle = styleColor(item.style);
          ctx.lineWidth = 1.5;
          ctx.stroke();
        }
        break;
      case "arc":
        ctx.strokeStyle = styleColor(item.style);
        ctx.lineWidth = 2;
        ctx.beginPath();
        ctx.arc(
          item.center[0],
          item.center[1],
          item.radius,
          (item.fromDeg * Math.PI) / 180,
          (item.toDeg * Math.PI) / 180,
        );
        ctx.stroke();
        break;
      case "label":
        ctx.fillStyle = styleColor(item.style);
        ctx.font = "13px sans-serif";
        ctx.fillText(item.text, item.at[0] + 6, item.at[1] - 6);
        break;
      case "pulse":
        // painted by the dedicated widget, not the frame canvas
        break;
    }
  }
}
