// Browser entry point: DOM wiring for the replay client.

import { ReplayClient } from "./client.js";
import { PracticeDriver } from "./practice.js";
import type { ModeName } from "./protocol.js";
import { drawOps, planFrame, styleColor } from "./render.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing #${id}`);
  }
  return node as T;
}

const canvas = el<HTMLCanvasElement>("frame-canvas");
const ctx = canvas.getContext("2d")!;
const addrInput = el<HTMLInputElement>("server-addr");
const sessionInput = el<HTMLInputElement>("session-id");
const connectBtn = el<HTMLButtonElement>("connect");
const modeSelect = el<HTMLSelectElement>("mode");
const rateSelect = el<HTMLSelectElement>("rate");
const seekSlider = el<HTMLInputElement>("seek");
const frameLabel = el<HTMLSpanElement>("frame-label");
const banner = el<HTMLDivElement>("banner");
const scoreList = el<HTMLUListElement>("scores");
const pulseCanvas = el<HTMLCanvasElement>("pulse-canvas");
const pulseCtx = pulseCanvas.getContext("2d")!;
const pulseLabel = el<HTMLSpanElement>("pulse-label");
const practiceToggle = el<HTMLInputElement>("practice-enabled");

const practice = new PracticeDriver();
let client: ReplayClient | null = null;
let panX = 0;
let panY = 0;
let pulsePhase = 0;

function render(): void {
  if (!client) {
    return;
  }
  const state = client.state;
  const ops = planFrame(state);
  drawOps(ctx, ops, panX, panY);

  if (practice.enabled) {
    ctx.strokeStyle = styleColor("practice-pose");
    ctx.lineWidth = 2;
    const pts = [practice.joints.finger, practice.joints.wrist, practice.joints.elbow];
    ctx.beginPath();
    pts.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
    ctx.stroke();
    ctx.fillStyle = styleColor("practice-pose");
    for (const [x, y] of pts) {
      ctx.beginPath();
      ctx.arc(x, y, 6, 0, Math.PI * 2);
      ctx.fill();
    }
  }

  const pulse = ops.filter((o) => o.op === "pulse");
  pulseCtx.setTransform(1, 0, 0, 1, 0, 0);
  pulseCtx.fillStyle = "#1b1e24";
  pulseCtx.fillRect(0, 0, pulseCanvas.width, pulseCanvas.height);
  if (pulse.length > 0) {
    const strongest = pulse.reduce((a, b) => (a.amplitude >= b.amplitude ? a : b));
    pulsePhase += strongest.frequencyHz / 30.0;
    const throb = 0.5 + 0.5 * Math.sin(pulsePhase);
    const radius = 8 + 22 * strongest.amplitude * throb;
    pulseCtx.beginPath();
    pulseCtx.arc(pulseCanvas.width / 2, pulseCanvas.height / 2, radius, 0, Math.PI * 2);
    pulseCtx.fillStyle = strongest.hand === "Right" ? "#ffb347" : "#7fd4ff";
    pulseCtx.fill();
    pulseLabel.textContent = `${strongest.hand} ${strongest.frequencyHz.toFixed(0)} Hz amp ${strongest.amplitude.toFixed(2)}`;
  } else {
    pulseLabel.textContent = "idle";
  }

  banner.textContent = state.errorBanner ?? state.lastError ?? "";
  banner.style.display = banner.textContent ? "block" : "none";
  if (state.frame) {
    frameLabel.textContent = `frame ${state.frame.frame} / ${state.manifest?.frame_count ?? "?"}`;
    seekSlider.max = String((state.manifest?.frame_count ?? 1) - 1);
    if (document.activeElement !== seekSlider) {
      seekSlider.value = String(state.frame.frame);
    }
  }
}

function renderScores(): void {
  if (!client) {
    return;
  }
  scoreList.innerHTML = "";
  for (const score of client.state.scores.slice(-12).reverse()) {
    const item = document.createElement("li");
    const id = score.epoch_id === null ? "unmatched" : `epoch ${score.epoch_id}`;
    item.textContent = `${id}: composite ${score.composite.toFixed(2)}${
      score.category_match ? "" : " (category mismatch)"
    }`;
    scoreList.appendChild(item);
  }
}

connectBtn.addEventListener("click", () => {
  client?.disconnect();
  const url = `ws://${addrInput.value}/replay`;
  client = new ReplayClient(url, (u) => new WebSocket(u) as never, {
    onState: () => {
      render();
      renderScores();
    },
    onOpen: () => {
      client!.subscribe(sessionInput.value, modeSelect.value as ModeName);
      practice.enabled = practiceToggle.checked;
    },
    onClose: () => {
      practice.enabled = false; // disconnect disables input
      render();
    },
    onMessage: (msg) => {
      if (msg.type === "frame" && practice.enabled) {
        const pose = practice.poseMessage(msg.frame);
        if (pose) {
          client!.send(pose);
        }
      }
    },
  });
  client.connect();
});

modeSelect.addEventListener("change", () => client?.setMode(modeSelect.value as ModeName));
rateSelect.addEventListener("change", () => client?.setRate(Number(rateSelect.value)));
seekSlider.addEventListener("change", () => client?.seek(Number(seekSlider.value)));
practiceToggle.addEventListener("change", () => {
  practice.enabled = practiceToggle.checked && (client?.connected ?? false);
});

let dragging: ReturnType<PracticeDriver["jointNear"]> = null;
let panning = false;
let panStart: [number, number] = [0, 0];

canvas.addEventListener("pointerdown", (ev) => {
  const rect = canvas.getBoundingClientRect();
  const x = ev.clientX - rect.left - panX;
  const y = ev.clientY - rect.top - panY;
  dragging = practice.enabled ? practice.jointNear(x, y) : null;
  if (!dragging) {
    panning = true;
    panStart = [ev.clientX - panX, ev.clientY - panY];
  }
});

canvas.addEventListener("pointermove", (ev) => {
  const rect = canvas.getBoundingClientRect();
  if (dragging) {
    practice.dragJoint(dragging, ev.clientX - rect.left - panX, ev.clientY - rect.top - panY);
    if (client && client.connected && client.state.frame && client.state.rate === 0) {
      // paused: poses keep flowing, tagged with the paused cursor frame
      const pose = practice.poseMessage(client.state.frame.frame);
      if (pose) {
        client.send(pose);
      }
    }
    render();
  } else if (panning) {
    panX = ev.clientX - panStart[0];
    panY = ev.clientY - panStart[1];
    render();
  }
});

canvas.addEventListener("pointerup", () => {
  dragging = null;
  panning = false;
});

render();
