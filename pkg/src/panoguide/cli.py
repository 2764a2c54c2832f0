"""Operator command line for the whole pipeline.

Exit codes: 0 ok, 1 validation failure, 2 bad arguments, 3 I/O,
4 internal.  Failures also emit one machine-readable JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .analysis import SessionAnalysis, analyze_session
from .analytics import render_report, session_report
from .config import PipelineConfig
from .errors import (
    DimensionMismatch,
    IoFailure,
    MalformedRecord,
    MissingManifest,
    NonMonotonicFrameIndex,
    PanoguideError,
)
from .fixtures import FixtureSpec, dataset_fixture_specs, write_fixture
from .kinematics import Measure, Subject
from .scoring import LiveAnnotator, PracticePose, score_session
from .session import (
    ArmKeypoints,
    Keypoint,
    collect_violations,
    load_session,
    save_derived,
    save_json,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_INTERNAL = 4


def _machine_error(code: str, detail: str) -> None:
    print(json.dumps({"error": code, "detail": detail}), file=sys.stderr)


def _load_config(args) -> PipelineConfig:
    config = (
        PipelineConfig.from_file(args.config)
        if getattr(args, "config", None)
        else PipelineConfig()
    )
    for override in getattr(args, "set", None) or []:
        key, _, value = override.partition("=")
        if not _:
            raise ValueError(f"--set expects key.path=value, got {override!r}")
        config.apply_override(key, value)
    return config


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file with pipeline thresholds")
    parser.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override one config value by dotted path (repeatable)",
    )


def _analyze(args) -> tuple[SessionAnalysis, PipelineConfig]:
    config = _load_config(args)
    session = load_session(args.session_dir, config.loader.confidence_floor)
    return analyze_session(session, config), config


def _series_cache(analysis: SessionAnalysis) -> dict:
    def dump(values) -> list:
        return [None if math.isnan(v) else float(v) for v in values]

    return {
        "fps": analysis.session.manifest.fps,
        "raw": {
            f"{subject.value}.{measure.value}": dump(series.values)
            for (subject, measure), series in analysis.raw_series.items()
        },
        "smoothed": {
            "RightArm.yaw": dump(analysis.smoothed_right_yaw.values),
            "DogHead.yaw": dump(analysis.smoothed_head.values),
        },
        "velocity": {"RightArm.yaw": dump(analysis.right_velocity.values)},
        "rest_level_deg": analysis.rest_level_deg,
    }


def cmd_gen(args) -> int:
    if args.preset:
        presets = {s.dataset_name: s for s in dataset_fixture_specs(args.noise or 0.0)}
        if args.preset not in presets:
            _machine_error("bad_arguments", f"unknown preset {args.preset!r}")
            return EXIT_USAGE
        spec = presets[args.preset]
    elif args.spec:
        with open(args.spec, "r", encoding="utf-8") as fh:
            spec = FixtureSpec.from_json_dict(json.load(fh))
        if args.noise is not None:
            spec.noise_sigma_deg = args.noise
    else:
        _machine_error("bad_arguments", "gen needs --spec FILE or --preset NAME")
        return EXIT_USAGE
    session, truth = write_fixture(spec, args.out)
    print(
        f"wrote session {session.manifest.session_id} "
        f"({session.manifest.frame_count} frames, "
        f"{len(truth.annotations)} planted epochs) to {args.out}"
    )
    return EXIT_OK


def cmd_validate(args) -> int:
    config = _load_config(args)
    problems = collect_violations(args.session_dir, config.loader.confidence_floor)
    for problem in problems:
        print(problem)
    if problems:
        _machine_error("validation_failed", f"{len(problems)} violation(s)")
        return EXIT_VALIDATION
    print("ok")
    return EXIT_OK


def cmd_analyze(args) -> int:
    analysis, _ = _analyze(args)
    out = Path(args.session_dir)
    save_derived(analysis.session.manifest.session_id, analysis.epochs, out / "epochs.jsonl")
    save_derived(analysis.session.manifest.session_id, analysis.triggers, out / "triggers.jsonl")
    save_json(_series_cache(analysis), out / "series.json")
    print(f"epochs: {len(analysis.epochs)}")
    print(f"triggers: {len(analysis.triggers)}")
    print(f"rest_level_deg: {analysis.rest_level_deg:.3f}")
    if analysis.status_thresholds is not None:
        print(
            f"status_splits_deg: {analysis.status_thresholds.low_high_split:.3f} "
            f"{analysis.status_thresholds.mid_high_split:.3f}"
        )
    return EXIT_OK


def cmd_report(args) -> int:
    analysis, _ = _analyze(args)
    report = session_report(analysis)
    out = Path(args.session_dir)
    save_derived(analysis.session.manifest.session_id, report, out / "report.json")
    print(render_report(report))
    return EXIT_OK


def cmd_haptics(args) -> int:
    analysis, _ = _analyze(args)
    out = Path(args.session_dir)
    save_derived(analysis.session.manifest.session_id, analysis.haptic_track, out / "haptics.jsonl")
    print(f"haptic events: {len(analysis.haptic_track)}")
    return EXIT_OK


def _read_practice_stream(path: str) -> list[PracticePose]:
    poses = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            data = json.loads(line)
            points = tuple(
                Keypoint(float(x), float(y), float(c)) for x, y, c in data["right_arm"]
            )
            poses.append(
                PracticePose(
                    frame_index=int(data["frame"]),
                    right_arm=ArmKeypoints(side="Right", points=points),
                    received_seq=int(data["seq"]),
                )
            )
    return poses


def cmd_score(args) -> int:
    analysis, _ = _analyze(args)
    poses = _read_practice_stream(args.practice)
    annotator = LiveAnnotator(analysis)
    practice_epochs = []
    for pose in poses:
        practice_epochs.extend(annotator.feed_pose(pose).finalized)
    practice_epochs.extend(annotator.finish())
    scores = score_session(analysis, practice_epochs)
    out = Path(args.session_dir)
    save_derived(analysis.session.manifest.session_id, scores, out / "scores.jsonl")
    if annotator.dropped_count:
        print(f"dropped out-of-order poses: {annotator.dropped_count}")
    for score in scores:
        print(
            f"epoch {score.epoch_id}: composite {score.composite:.3f}"
            + ("" if score.timing_offset_ms is not None else " (miss)")
        )
    return EXIT_OK


def cmd_serve(args) -> int:
    from .replay import SessionStore, serve

    config = _load_config(args)
    store = SessionStore(config)
    for directory in args.sessions:
        entry = store.add_directory(directory)
        print(f"loaded {entry.session.manifest.session_id} from {directory}")
    host, _, port = args.addr.rpartition(":")
    if not host or not port.isdigit():
        _machine_error("bad_arguments", f"--addr must be HOST:PORT, got {args.addr!r}")
        return EXIT_USAGE
    print(f"serving on ws://{args.addr}/replay")
    serve(store, host=host, port=int(port))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="panoguide",
        description="guide-dog training session analytics, haptics and replay",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic fixture session")
    p.add_argument("--spec", help="FixtureSpec JSON file")
    p.add_argument(
        "--preset",
        help="built-in dataset mirror (Hybrid1-synth, Hybrid2-synth, Room1-synth, Room2-synth)",
    )
    p.add_argument("--noise", type=float, default=None, help="angular noise sigma in degrees")
    p.add_argument("--out", required=True, help="output session directory")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("validate", help="list invariant violations in a session")
    p.add_argument("session_dir")
    _add_config_args(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("analyze", help="write angle caches, epochs and triggers")
    p.add_argument("session_dir")
    _add_config_args(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("report", help="write the distribution report and print tables")
    p.add_argument("session_dir")
    _add_config_args(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("haptics", help="synthesize the dual-hand haptic track")
    p.add_argument("session_dir")
    _add_config_args(p)
    p.set_defaults(func=cmd_haptics)

    p = sub.add_parser("score", help="score a practice stream against the session")
    p.add_argument("session_dir")
    p.add_argument("--practice", required=True, help="practice pose JSONL file")
    _add_config_args(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("serve", help="run the replay streaming service")
    p.add_argument("--sessions", nargs="+", required=True, help="session directories")
    p.add_argument("--addr", default="127.0.0.1:8765", help="HOST:PORT to bind")
    _add_config_args(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MalformedRecord, NonMonotonicFrameIndex, DimensionMismatch) as exc:
        _machine_error(type(exc).__name__, str(exc))
        return EXIT_VALIDATION
    except (MissingManifest, IoFailure, FileNotFoundError, OSError) as exc:
        _machine_error("io_failure", str(exc))
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        _machine_error("bad_arguments", str(exc))
        return EXIT_USAGE
    except PanoguideError as exc:
        _machine_error(type(exc).__name__, str(exc))
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
