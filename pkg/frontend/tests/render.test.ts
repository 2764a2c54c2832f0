import { describe, expect, test } from "vitest";

import type { FrameMessage, HelloMessage } from "../src/protocol.js";
import { planFrame } from "../src/render.js";
import { applyLocalMode, applyServerMessage, initialState } from "../src/state.js";
import { PracticeDriver } from "../src/practice.js";

const HELLO: HelloMessage = {
  type: "hello",
  manifest: {
    session_id: "s1",
    dataset_name: "unit",
    fps: 30,
    frame_count: 100,
    frame_width: 640,
    frame_height: 640,
    view: { theta_deg: 0, phi_deg: 0, fov_deg: 90, pano_width: 3840, pano_height: 1920 },
  },
};

const FRAME: FrameMessage = {
  type: "frame",
  frame: 7,
  keypoints: {
    right_arm: [[400, 300, 1], [350, 320, 1], [300, 340, 1]],
    left_arm: [[250, 330, 1], [200, 330, 1], [200, 260, 1]],
    marker: [[500, 380, 1], [560, 380, 1], [560, 440, 1], [500, 440, 1]],
  },
  overlays: [
    { kind: "Segment", style_tag: "standard-pose", points: [[400, 300], [300, 340]] },
    { kind: "Label", style_tag: "command-category", points: [[300, 340]], text: "MovementControl" },
    { kind: "AngleArc", style_tag: "command-range", points: [[300, 340]], radius: 40, from_deg: 110, to_deg: 130 },
    { kind: "MaskRegion", style_tag: "relaxed-arm-mask", points: [[290, 290], [420, 290], [420, 360]] },
  ],
  haptics: [
    { hand: "Right", start_frame: 7, duration_frames: 5, frequency_hz: 180, amplitude: 0.7 },
  ],
};

function stateWithFrame(mode: "A" | "D" = "A") {
  let state = applyServerMessage(initialState(), HELLO);
  state = applyLocalMode(state, mode);
  return applyServerMessage(state, FRAME);
}

describe("planFrame", () => {
  test("renders skeletons, overlays and the haptic pulse", () => {
    const ops = planFrame(stateWithFrame("A"));
    const kinds = ops.map((o) => o.op);
    expect(kinds).toContain("polyline");
    expect(kinds).toContain("arc");
    expect(kinds).toContain("label");
    expect(kinds).toContain("polygon");
    const pulse = ops.find((o) => o.op === "pulse");
    expect(pulse).toMatchObject({ frequencyHz: 180, amplitude: 0.7, hand: "Right" });
  });

  test("only server-sent overlays are rendered", () => {
    const ops = planFrame(stateWithFrame("A"));
    const labels = ops.filter((o) => o.op === "label");
    expect(labels).toHaveLength(1);
    expect((labels[0] as { text: string }).text).toBe("MovementControl");
  });

  test("mode D drops the expert right arm from the plan", () => {
    const opsA = planFrame(stateWithFrame("A"));
    const opsD = planFrame(stateWithFrame("D"));
    const countPolylines = (ops: typeof opsA, style: string) =>
      ops.filter((o) => o.op === "polyline" && (o as { style: string }).style === style).length;
    // A draws left arm + right arm skeletons; D draws only the left arm
    expect(countPolylines(opsA, "expert-skeleton")).toBe(2);
    expect(countPolylines(opsD, "expert-skeleton")).toBe(1);
  });

  test("empty state still yields the background", () => {
    const ops = planFrame(initialState());
    expect(ops.map((o) => o.op)).toEqual(["clear", "grid"]);
  });
});

describe("practice driver", () => {
  test("poses carry a monotone sequence", () => {
    const driver = new PracticeDriver();
    driver.enabled = true;
    const seqs = [driver.poseMessage(0)!.seq, driver.poseMessage(1)!.seq, driver.poseMessage(1)!.seq];
    expect(seqs).toEqual([0, 1, 2]);
  });

  test("paused cursor keeps tagging the same frame", () => {
    const driver = new PracticeDriver();
    driver.enabled = true;
    const a = driver.poseMessage(42)!;
    const b = driver.poseMessage(42)!;
    expect(a.frame).toBe(42);
    expect(b.frame).toBe(42);
    expect(b.seq).toBeGreaterThan(a.seq);
  });

  test("disabled driver emits nothing", () => {
    const driver = new PracticeDriver();
    expect(driver.poseMessage(0)).toBeNull();
  });

  test("drag moves one joint and pose reflects it", () => {
    const driver = new PracticeDriver();
    driver.enabled = true;
    driver.dragJoint("finger", 111, 222);
    const pose = driver.poseMessage(0)!;
    expect(pose.right_arm[0]).toEqual([111, 222, 1.0]);
    expect(pose.right_arm).toHaveLength(3);
  });

  test("jointNear finds draggable joints", () => {
    const driver = new PracticeDriver({ finger: [100, 100], wrist: [200, 200], elbow: [300, 300] });
    expect(driver.jointNear(104, 102)).toBe("finger");
    expect(driver.jointNear(500, 500)).toBeNull();
  });
});
