import pytest

from panoguide.analysis import analyze_session
from panoguide.commands import category_band
from panoguide.config import CueConfig
from panoguide.cues import Mode, OverlayKind, build_overlays, mask_right_arm
from panoguide.errors import AnalysisMissing, ArmAbsent
from panoguide.fixtures import FixtureSpec, PlantedEpoch, evenly_planted_spec, generate
from panoguide.session import ArmKeypoints, Keypoint

TEMPLATE = ((10.0, 95.0), (5.0, 55.0), (0.0, 0.0))


def arm(points):
    return ArmKeypoints(side="Right", points=tuple(Keypoint(x, y, 1.0) for x, y in points))


def point_in_polygon(point, polygon):
    x, y = point
    inside = False
    n = len(polygon)
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            t = (y - y1) / (y2 - y1)
            if x < x1 + t * (x2 - x1):
                inside = not inside
    return inside


class TestMaskRightArm:
    def test_hull_contains_joints(self):
        joints = [(200.0, 150.0), (240.0, 220.0), (300.0, 260.0)]
        mask, _segment = mask_right_arm(0, arm(joints), TEMPLATE)
        assert mask.kind is OverlayKind.MASK_REGION
        for joint in joints:
            assert point_in_polygon(joint, mask.points)

    def test_template_anchored_at_elbow(self):
        joints = [(200.0, 150.0), (240.0, 220.0), (100.0, 100.0)]
        _mask, segment = mask_right_arm(0, arm(joints), TEMPLATE)
        assert segment.points[-1] == (100.0, 100.0)
        assert segment.points[0] == (110.0, 195.0)

    def test_arm_absent(self):
        with pytest.raises(ArmAbsent):
            mask_right_arm(0, None, TEMPLATE)

    def test_collinear_joints_fallback(self):
        joints = [(100.0, 100.0), (150.0, 150.0), (200.0, 200.0)]
        mask, _ = mask_right_arm(0, arm(joints), TEMPLATE)
        for joint in joints:
            assert point_in_polygon(joint, mask.points)

    def test_coordinates_clipped(self):
        joints = [(630.0, 10.0), (620.0, 40.0), (610.0, 5.0)]
        mask, segment = mask_right_arm(0, arm(joints), TEMPLATE, frame_width=640, frame_height=640)
        for x, y in (*mask.points, *segment.points):
            assert 0.0 <= x <= 640.0
            assert 0.0 <= y <= 640.0


@pytest.fixture(scope="module")
def fixture_analysis():
    spec = evenly_planted_spec(seed=13, epoch_count=8)
    session, truth = generate(spec)
    return analyze_session(session), truth


def overlay_set(frame, mode, analysis, practice=None):
    return set(build_overlays(frame, mode, analysis, practice))


class TestBuildOverlays:
    def test_outside_epoch_empty_or_practice_only(self, fixture_analysis):
        analysis, _ = fixture_analysis
        quiet_frame = 10  # before the first epoch lead window
        assert build_overlays(quiet_frame, Mode.B_COMMAND_ONLY, analysis) == []
        practice = arm([(100, 100), (120, 140), (140, 180)])
        overlays = build_overlays(quiet_frame, Mode.B_COMMAND_ONLY, analysis, practice)
        assert len(overlays) == 1
        assert overlays[0].style_tag == "practice-pose"

    def test_mode_b_inside_epoch_arc_matches_band(self, fixture_analysis):
        analysis, _ = fixture_analysis
        epoch = analysis.epochs[0]
        overlays = build_overlays(epoch.peak_frame, Mode.B_COMMAND_ONLY, analysis)
        arcs = [o for o in overlays if o.kind is OverlayKind.ANGLE_ARC]
        assert len(arcs) == 1
        band = category_band(epoch.category)
        assert (arcs[0].from_deg, arcs[0].to_deg) == band
        kinds = {o.kind for o in overlays}
        assert OverlayKind.POINT_SET in kinds
        assert OverlayKind.SEGMENT in kinds
        labels = [o for o in overlays if o.kind is OverlayKind.LABEL]
        assert labels[0].text == epoch.category.value

    def test_lead_window_shows_upcoming_epoch(self, fixture_analysis):
        analysis, _ = fixture_analysis
        epoch = analysis.epochs[0]
        lead = analysis.config.cues.lead_frames
        overlays = build_overlays(epoch.start_frame - lead, Mode.B_COMMAND_ONLY, analysis)
        assert overlays
        assert build_overlays(epoch.start_frame - lead - 1, Mode.B_COMMAND_ONLY, analysis) == []

    def test_mode_c_trigger_cues(self, fixture_analysis):
        analysis, _ = fixture_analysis
        trigger = analysis.triggers[0]
        overlays = build_overlays(trigger.frame, Mode.C_DOG_ONLY, analysis)
        kinds = {o.kind for o in overlays}
        assert OverlayKind.POINT_SET in kinds
        assert OverlayKind.LABEL in kinds
        tags = {o.style_tag for o in overlays}
        assert "dog-head" in tags
        assert "dog-status-range" in tags

    def test_mode_a_is_union_of_b_and_c(self, fixture_analysis):
        analysis, _ = fixture_analysis
        practice = arm([(100, 100), (120, 140), (140, 180)])
        for frame in range(0, analysis.frame_count, 7):
            a = overlay_set(frame, Mode.A_BOTH, analysis, practice)
            b = overlay_set(frame, Mode.B_COMMAND_ONLY, analysis, practice)
            c = overlay_set(frame, Mode.C_DOG_ONLY, analysis, practice)
            assert a == b | c

    def test_mode_d_never_leaks_categories(self, fixture_analysis):
        analysis, _ = fixture_analysis
        for frame in range(0, analysis.frame_count, 5):
            overlays = build_overlays(frame, Mode.D_EVALUATION, analysis)
            for o in overlays:
                assert o.kind is not OverlayKind.LABEL
                assert o.style_tag not in ("standard-pose", "command-range", "command-category")

    def test_mode_d_masks_arm(self, fixture_analysis):
        analysis, _ = fixture_analysis
        epoch = analysis.epochs[0]
        overlays = build_overlays(epoch.peak_frame, Mode.D_EVALUATION, analysis)
        kinds = [o.kind for o in overlays]
        assert OverlayKind.MASK_REGION in kinds
        record = analysis.session.frame_at(epoch.peak_frame)
        mask = next(o for o in overlays if o.kind is OverlayKind.MASK_REGION)
        for p in record.right_arm.points:
            assert point_in_polygon((p.x, p.y), mask.points)

    def test_coordinates_within_frame(self, fixture_analysis):
        analysis, _ = fixture_analysis
        w = analysis.session.manifest.frame_width
        h = analysis.session.manifest.frame_height
        for frame in range(0, analysis.frame_count, 11):
            for mode in Mode:
                for o in build_overlays(frame, mode, analysis):
                    for x, y in o.points:
                        assert 0.0 <= x <= w
                        assert 0.0 <= y <= h

    def test_analysis_missing(self):
        with pytest.raises(AnalysisMissing):
            build_overlays(0, Mode.A_BOTH, None)

    def test_practice_segment_in_every_mode(self, fixture_analysis):
        analysis, _ = fixture_analysis
        practice = arm([(100, 100), (120, 140), (140, 180)])
        for mode in Mode:
            overlays = build_overlays(0, mode, analysis, practice)
            assert any(o.style_tag == "practice-pose" for o in overlays)


def test_mode_d_survives_absent_arm():
    spec = FixtureSpec(seed=4, frame_count=200, planted_epochs=[PlantedEpoch(60, 72, 84, 120.0, 30.0)])
    session, _ = generate(spec)
    # drop the right arm from one frame
    record = session.frames[10]
    object.__setattr__(record, "right_arm", None)
    analysis = analyze_session(session)
    overlays = build_overlays(10, Mode.D_EVALUATION, analysis)
    assert all(o.kind is not OverlayKind.MASK_REGION for o in overlays)
