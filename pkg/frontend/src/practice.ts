// Practice input: three draggable right-arm joints (finger, wrist, elbow)
// emitted as practice_pose messages with a monotone sequence number.

import type { KeypointTriple, PracticePoseMessage } from "./protocol.js";

export type JointName = "finger" | "wrist" | "elbow";

export interface PracticeJoints {
  finger: [number, number];
  wrist: [number, number];
  elbow: [number, number];
}

export class PracticeDriver {
  joints: PracticeJoints;
  enabled = false;
  private seq = 0;

  constructor(joints?: Partial<PracticeJoints>) {
    this.joints = {
      finger: joints?.finger ?? [420, 300],
      wrist: joints?.wrist ?? [370, 320],
      elbow: joints?.elbow ?? [320, 340],
    };
  }

  dragJoint(name: JointName, x: number, y: number): void {
    this.joints[name] = [x, y];
  }

  jointNear(x: number, y: number, radius = 14): JointName | null {
    for (const name of ["finger", "wrist", "elbow"] as JointName[]) {
      const [jx, jy] = this.joints[name];
      if (Math.hypot(jx - x, jy - y) <= radius) {
        return name;
      }
    }
    return null;
  }

  rightArm(): KeypointTriple[] {
    return [
      [...this.joints.finger, 1.0],
      [...this.joints.wrist, 1.0],
      [...this.joints.elbow, 1.0],
    ];
  }

  // One pose per replay tick; while paused the caller keeps passing the
  // paused cursor frame, so poses stay tagged with it.
  poseMessage(cursorFrame: number): PracticePoseMessage | null {
    if (!this.enabled) {
      return null;
    }
    return {
      type: "practice_pose",
      frame: cursorFrame,
      seq: this.seq++,
      right_arm: this.rightArm(),
    };
  }
}
