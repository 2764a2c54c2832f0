import json

import pytest

from panoguide.commands import CommandCategory, CommandEpoch
from panoguide.errors import (
    DimensionMismatch,
    MalformedRecord,
    MissingManifest,
    NonMonotonicFrameIndex,
)
from panoguide.fixtures import evenly_planted_spec, write_fixture
from panoguide.kinematics import PoseAngles
from panoguide.session import (
    Keypoint,
    SessionManifest,
    load_jsonl,
    load_session,
    parse_frame_record,
    save_derived,
    validate_frame,
    write_session,
)

MANIFEST = {
    "session_id": "t1",
    "dataset_name": "unit",
    "fps": 30,
    "frame_count": 4,
    "frame_width": 640,
    "frame_height": 640,
    "view": {
        "theta_deg": 0.0,
        "phi_deg": 0.0,
        "fov_deg": 90.0,
        "pano_width": 3840,
        "pano_height": 1920,
    },
}

ARM = [[100.0, 100.0, 0.9], [120.0, 140.0, 0.9], [140.0, 180.0, 0.9]]
MARKER = [[500, 380, 1.0], [560, 380, 1.0], [560, 440, 1.0], [500, 440, 1.0]]


def write_dir(tmp_path, manifest, lines, annotations=None):
    d = tmp_path / "sess"
    d.mkdir()
    (d / "manifest.json").write_text(json.dumps(manifest))
    (d / "keypoints.jsonl").write_text("\n".join(json.dumps(l) for l in lines) + "\n")
    if annotations is not None:
        (d / "annotations.jsonl").write_text(
            "\n".join(json.dumps(a) for a in annotations) + "\n"
        )
    return d


class TestLoadSession:
    def test_minimal_two_frames(self, tmp_path):
        manifest = dict(MANIFEST, frame_count=2)
        d = write_dir(
            tmp_path,
            manifest,
            [
                {"frame_index": 0, "right_arm": ARM, "marker": MARKER},
                {"frame_index": 1, "right_arm": ARM},
            ],
        )
        session = load_session(d)
        assert session.manifest.frame_count == 2
        assert len(session.frames) == 2
        assert session.frames[0].right_arm is not None
        assert session.frames[0].right_arm.side == "Right"
        # absent groups stay absent, never zero-filled
        assert session.frames[0].dog is None
        assert session.frames[1].marker is None

    def test_non_monotonic_index(self, tmp_path):
        d = write_dir(
            tmp_path,
            MANIFEST,
            [{"frame_index": 0, "right_arm": ARM}, {"frame_index": 0, "right_arm": ARM}],
        )
        with pytest.raises(NonMonotonicFrameIndex):
            load_session(d)

    def test_missing_manifest(self, tmp_path):
        d = tmp_path / "empty"
        d.mkdir()
        (d / "keypoints.jsonl").write_text("")
        with pytest.raises(MissingManifest):
            load_session(d)

    def test_malformed_line_number(self, tmp_path):
        d = write_dir(tmp_path, MANIFEST, [{"frame_index": 0, "right_arm": ARM}])
        with open(d / "keypoints.jsonl", "a") as fh:
            fh.write("{not json\n")
        with pytest.raises(MalformedRecord) as err:
            load_session(d)
        assert err.value.line_number == 2

    def test_out_of_frame_keypoint(self, tmp_path):
        bad_arm = [[650.0, 10.0, 0.9], [120.0, 140.0, 0.9], [140.0, 180.0, 0.9]]
        d = write_dir(tmp_path, MANIFEST, [{"frame_index": 0, "right_arm": bad_arm}])
        with pytest.raises(DimensionMismatch):
            load_session(d)

    def test_ground_truth_count_surfaced(self, tmp_path):
        manifest = dict(MANIFEST, frame_count=2, ground_truth_command_count=2)
        annotations = [
            {"start_frame": 0, "peak_frame": 0, "end_frame": 1, "category": "MovementControl"},
            {"start_frame": 1, "peak_frame": 1, "end_frame": 1, "category": "MovementControl"},
        ]
        d = write_dir(
            tmp_path,
            manifest,
            [{"frame_index": 0, "right_arm": ARM}, {"frame_index": 1}],
            annotations,
        )
        session = load_session(d)
        assert session.manifest.ground_truth_command_count == 2
        assert len(session.annotations) == 2

    def test_ground_truth_count_mismatch(self, tmp_path):
        manifest = dict(MANIFEST, frame_count=2, ground_truth_command_count=3)
        annotations = [
            {"start_frame": 0, "peak_frame": 0, "end_frame": 1, "category": "MovementControl"}
        ]
        d = write_dir(tmp_path, manifest, [{"frame_index": 0}], annotations)
        with pytest.raises(MalformedRecord):
            load_session(d)

    def test_confidence_floor_drops_group(self):
        record = parse_frame_record(
            {"frame_index": 0, "right_arm": [[1, 1, 0.3], [2, 2, 0.9], [3, 3, 0.9]]},
            fps=30.0,
        )
        assert record.right_arm is None

    def test_timestamps_arithmetic(self, tmp_path):
        d = write_dir(
            tmp_path,
            MANIFEST,
            [{"frame_index": i} for i in range(4)],
        )
        session = load_session(d)
        for record in session.frames:
            assert record.timestamp_s == record.frame_index / 30.0


class TestValidateFrame:
    def setup_method(self):
        self.manifest = SessionManifest.from_json_dict(MANIFEST)

    def test_x_out_of_bounds(self):
        record = parse_frame_record(
            {"frame_index": 0, "right_arm": [[650, 10, 0.9], [1, 1, 0.9], [2, 2, 0.9]]},
            fps=30.0,
        )
        violations = validate_frame(record, self.manifest)
        assert len(violations) == 1
        assert "right_arm[0].x" in violations[0]

    def test_confidence_out_of_range(self):
        record = parse_frame_record(
            {"frame_index": 0, "right_arm": [[1, 1, 1.2], [2, 2, 1.0], [3, 3, 1.0]]},
            fps=30.0,
            confidence_floor=0.0,
        )
        violations = validate_frame(record, self.manifest)
        assert len(violations) == 1
        assert "confidence" in violations[0]

    def test_valid_record(self):
        record = parse_frame_record(
            {"frame_index": 0, "right_arm": ARM, "marker": MARKER}, fps=30.0
        )
        assert validate_frame(record, self.manifest) == []

    def test_self_intersecting_marker(self):
        # bowtie: top-left, top-right, bottom-left, bottom-right order
        marker = [[0, 0, 1], [10, 0, 1], [0, 10, 1], [10, 10, 1]]
        record = parse_frame_record({"frame_index": 0, "marker": marker}, fps=30.0)
        violations = validate_frame(record, self.manifest)
        assert any("self-intersecting" in v for v in violations)


class TestDerivedArtifacts:
    def _epochs(self):
        return [
            CommandEpoch(
                start_frame=10 * i,
                peak_frame=10 * i + 3,
                end_frame=10 * i + 6,
                peak_angles=PoseAngles(yaw_deg=100.0 + i, pitch_deg=10.0 + i),
                peak_velocity_deg_s=50.0 + i,
                category=CommandCategory.ATTENTION_OR_RIGHT_TURN,
            )
            for i in range(3)
        ]

    def test_empty_epoch_list_round_trip(self, tmp_path):
        path = tmp_path / "epochs.jsonl"
        save_derived("t1", [], path)
        assert path.read_text() == ""
        assert load_jsonl(path, CommandEpoch) == []

    def test_three_epochs_order_preserved(self, tmp_path):
        epochs = self._epochs()
        path = tmp_path / "epochs.jsonl"
        save_derived("t1", epochs, path)
        loaded = load_jsonl(path, CommandEpoch)
        assert loaded == epochs

    def test_report_round_trip_bit_exact(self, tmp_path, small_analysis):
        from panoguide.analytics import SessionReport, session_report
        from panoguide.session import load_json

        report = session_report(small_analysis)
        path = tmp_path / "report.json"
        save_derived("t1", report, path)
        loaded = load_json(path, SessionReport)
        assert loaded == report
        assert loaded.yaw_hist.counts == report.yaw_hist.counts


def test_session_write_load_round_trip(tmp_path, small_fixture):
    _, session, _ = small_fixture
    d = tmp_path / "roundtrip"
    write_session(session, d)
    loaded = load_session(d)
    assert loaded.manifest == session.manifest
    assert len(loaded.frames) == len(session.frames)
    assert loaded.frames == session.frames
    assert loaded.annotations == session.annotations


def test_fixture_generation_deterministic(tmp_path):
    spec = evenly_planted_spec(seed=3, epoch_count=3, noise_sigma_deg=1.5)
    d1 = tmp_path / "a"
    d2 = tmp_path / "b"
    write_fixture(spec, d1)
    write_fixture(spec, d2)
    for name in ("manifest.json", "keypoints.jsonl", "annotations.jsonl", "planted.json"):
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes()
