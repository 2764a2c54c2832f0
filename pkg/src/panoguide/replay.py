"""Bidirectional replay streaming over WebSocket.

One replay loop per connection: frame messages tick at wall-clock cadence
(fps x rate), client commands apply between ticks, and practice poses flow
through the live scoring pipeline without ever blocking the tick.  Session
data is shared read-only across connections; every mutable piece of state
is owned by exactly one connection.
"""

from __future__ import annotations

import asyncio
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .analysis import SessionAnalysis, analyze_session
from .config import PipelineConfig
from .cues import Mode, build_overlays
from .errors import PanoguideError
from .scoring import LiveAnnotator, PracticePose, PracticeScorer
from .session import (
    ArmKeypoints,
    Keypoint,
    Session,
    frame_record_to_json_dict,
    load_session,
)

log = logging.getLogger(__name__)

ALLOWED_RATES = (0.0, 0.25, 0.5, 1.0, 2.0)


@dataclass
class SessionEntry:
    session: Session
    analysis: SessionAnalysis


class SessionStore:
    """Read-only registry of loaded and analyzed sessions."""

    def __init__(self, config: PipelineConfig | None = None):
        self.config = config or PipelineConfig()
        self._entries: dict[str, SessionEntry] = {}

    def add_session(self, session: Session) -> SessionEntry:
        entry = SessionEntry(session=session, analysis=analyze_session(session, self.config))
        self._entries[session.manifest.session_id] = entry
        return entry

    def add_directory(self, path: str | Path) -> SessionEntry:
        return self.add_session(load_session(path, self.config.loader.confidence_floor))

    def get(self, session_id: str) -> SessionEntry | None:
        return self._entries.get(session_id)

    def session_ids(self) -> list[str]:
        return sorted(self._entries)

    def __len__(self) -> int:
        return len(self._entries)


@dataclass
class ReplayState:
    session_id: str = ""
    mode: Mode = Mode.A_BOTH
    cursor: int = 0
    rate: float = 1.0
    client_id: str = ""
    finished: bool = False


def _parse_right_arm(raw) -> ArmKeypoints:
    if not isinstance(raw, list) or len(raw) != 3:
        raise ValueError("right_arm must be [[x, y, c] x 3]")
    points = tuple(Keypoint(float(p[0]), float(p[1]), float(p[2])) for p in raw)
    return ArmKeypoints(side="Right", points=points)


class Connection:
    """State machine for one client connection."""

    def __init__(self, ws: WebSocket, store: SessionStore, client_id: str):
        self.ws = ws
        self.store = store
        self.state = ReplayState(client_id=client_id)
        self.entry: SessionEntry | None = None
        self.annotator: LiveAnnotator | None = None
        self.scorer: PracticeScorer | None = None
        self.latest_practice: PracticePose | None = None
        self._deadline: float | None = None

    # -- messaging ---------------------------------------------------

    async def send(self, payload: dict) -> None:
        await self.ws.send_text(json.dumps(payload))

    async def send_error(self, code: str, detail: str) -> None:
        await self.send({"type": "error", "code": code, "detail": detail})

    def _frame_payload(self, frame: int) -> dict:
        assert self.entry is not None
        analysis = self.entry.analysis
        record = self.entry.session.frame_at(frame)
        keypoints: dict = {}
        if record is not None:
            keypoints = frame_record_to_json_dict(record)
            keypoints.pop("frame_index", None)
            if self.state.mode is Mode.D_EVALUATION:
                # evaluation must not leak the expert arm
                keypoints.pop("right_arm", None)
        overlays = build_overlays(frame, self.state.mode, analysis, self.latest_practice)
        haptics = [e.to_json_dict() for e in analysis.haptic_track if e.start_frame == frame]
        return {
            "type": "frame",
            "frame": frame,
            "keypoints": keypoints,
            "overlays": [o.to_json_dict() for o in overlays],
            "haptics": haptics,
        }

    async def send_frame(self) -> None:
        await self.send(self._frame_payload(self.state.cursor))

    # -- command handling ----------------------------------------------

    async def handle_message(self, text: str) -> None:
        try:
            msg = json.loads(text)
            if not isinstance(msg, dict) or "type" not in msg:
                raise ValueError("expected an object with a type field")
        except (json.JSONDecodeError, ValueError) as exc:
            await self.send_error("malformed_message", str(exc))
            return

        msg_type = msg["type"]
        try:
            if msg_type == "subscribe":
                await self._handle_subscribe(msg)
            elif msg_type == "set_mode":
                await self._handle_set_mode(msg)
            elif msg_type == "seek":
                await self._handle_seek(msg)
            elif msg_type == "set_rate":
                await self._handle_set_rate(msg)
            elif msg_type == "practice_pose":
                await self._handle_practice_pose(msg)
            else:
                await self.send_error("malformed_message", f"unknown type {msg_type!r}")
        except (KeyError, ValueError, TypeError) as exc:
            await self.send_error("malformed_message", f"{msg_type}: {exc}")

    async def _handle_subscribe(self, msg: dict) -> None:
        session_id = str(msg["session_id"])
        entry = self.store.get(session_id)
        if entry is None:
            await self.send_error("unknown_session", f"no session {session_id!r}")
            return
        self.entry = entry
        self.state.session_id = session_id
        self.state.mode = Mode(msg.get("mode", "A"))
        self.state.cursor = 0
        self.state.finished = False
        self.annotator = LiveAnnotator(entry.analysis)
        self.scorer = PracticeScorer(entry.analysis)
        self.latest_practice = None
        await self.send({"type": "hello", "manifest": entry.session.manifest.to_json_dict()})
        await self.send_frame()
        self._arm_ticker(reset=True)

    async def _handle_set_mode(self, msg: dict) -> None:
        if self.entry is None:
            await self.send_error("not_subscribed", "subscribe before set_mode")
            return
        self.state.mode = Mode(str(msg["mode"]))  # takes effect next tick

    async def _handle_seek(self, msg: dict) -> None:
        if self.entry is None:
            await self.send_error("not_subscribed", "subscribe before seek")
            return
        frame = int(msg["frame"])
        count = self.entry.session.manifest.frame_count
        if not 0 <= frame < count:
            await self.send_error(
                "seek_out_of_range", f"frame {frame} outside [0, {count})"
            )
            return
        self.state.cursor = frame
        self.state.finished = False
        await self.send({"type": "seek_ack", "frame": frame})
        await self.send_frame()
        self._arm_ticker(reset=True)

    async def _handle_set_rate(self, msg: dict) -> None:
        if self.entry is None:
            await self.send_error("not_subscribed", "subscribe before set_rate")
            return
        rate = float(msg["rate"])
        if rate not in ALLOWED_RATES:
            await self.send_error("bad_rate", f"rate must be one of {ALLOWED_RATES}")
            return
        self.state.rate = rate
        self._arm_ticker(reset=True)

    async def _handle_practice_pose(self, msg: dict) -> None:
        if self.entry is None or self.annotator is None or self.scorer is None:
            await self.send_error("not_subscribed", "subscribe before practice_pose")
            return
        pose = PracticePose(
            frame_index=int(msg["frame"]),
            right_arm=_parse_right_arm(msg["right_arm"]),
            received_seq=int(msg["seq"]),
        )
        update = self.annotator.feed_pose(pose)
        if update.dropped:
            await self.send_error(
                "out_of_order_pose",
                f"seq {pose.received_seq} at frame {pose.frame_index} dropped",
            )
            return
        self.latest_practice = pose
        for epoch in update.finalized:
            score = self.scorer.score_epoch(epoch)
            await self.send({"type": "score", **score.to_json_dict()})

    # -- replay ticking -------------------------------------------------

    def _period(self) -> float | None:
        if self.entry is None or self.state.rate <= 0 or self.state.finished:
            return None
        return 1.0 / (self.entry.session.manifest.fps * self.state.rate)

    def _arm_ticker(self, reset: bool = False) -> None:
        period = self._period()
        if period is None:
            self._deadline = None
        elif reset or self._deadline is None:
            self._deadline = time.monotonic() + period

    def _tick_timeout(self) -> float | None:
        if self._deadline is None:
            return None
        return max(0.0, self._deadline - time.monotonic())

    async def _tick(self) -> None:
        period = self._period()
        if period is None or self._deadline is None:
            return
        if self.state.cursor + 1 >= self.entry.session.manifest.frame_count:
            self.state.finished = True
            self._deadline = None
            return
        self.state.cursor += 1
        await self.send_frame()
        self._deadline += period
        now = time.monotonic()
        if self._deadline < now - period:  # fell behind: resync, no bursts
            self._deadline = now + period

    async def run(self) -> None:
        recv = asyncio.ensure_future(self.ws.receive_text())
        try:
            while True:
                timeout = self._tick_timeout()
                done, _ = await asyncio.wait({recv}, timeout=timeout)
                if recv in done:
                    try:
                        text = recv.result()
                    except WebSocketDisconnect:
                        break
                    await self.handle_message(text)
                    recv = asyncio.ensure_future(self.ws.receive_text())
                if self._deadline is not None and time.monotonic() >= self._deadline:
                    await self._tick()
        finally:
            recv.cancel()


def build_app(store: SessionStore) -> FastAPI:
    app = FastAPI(title="panoguide replay service")
    app.state.store = store
    counter = {"clients": 0}

    @app.websocket("/replay")
    async def replay_endpoint(ws: WebSocket):
        await ws.accept()
        counter["clients"] += 1
        conn = Connection(ws, store, client_id=f"client-{counter['clients']}")
        try:
            await conn.run()
        except WebSocketDisconnect:
            pass
        except PanoguideError as exc:
            log.warning("connection %s closed on error: %s", conn.state.client_id, exc)

    return app


def serve(store: SessionStore, host: str = "127.0.0.1", port: int = 8765) -> None:
    """Run the replay service until interrupted."""
    import uvicorn

    app = build_app(store)
    log.info("serving %d session(s): %s", len(store), ", ".join(store.session_ids()))
    uvicorn.run(app, host=host, port=port, log_level="warning")
