import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaport.traces import (
    InsufficientHistory,
    Pose,
    PortionSpec,
    build_matrices,
    bundled_trace,
    coverage,
    default_portions,
    delivery,
    predict_pose,
    read_bandwidth_csv,
    read_matrices_csv,
    read_pose_csv,
    synthesize_bandwidth_trace,
    synthesize_pose_trace,
    wrap_yaw,
    write_bandwidth_csv,
    write_matrices_csv,
    write_pose_csv,
    yaw_error,
)

P102 = PortionSpec(102, 91, 1.0)
P108 = PortionSpec(108, 94, 1.0)


class TestPredictPose:
    def test_stationary(self):
        assert predict_pose([Pose(30, -10)] * 3) == Pose(30, -10)

    def test_linear(self):
        got = predict_pose([Pose(10, 0), Pose(20, 1), Pose(30, 2)])
        assert got.yaw == pytest.approx(40) and got.pitch == pytest.approx(3)

    def test_across_seam(self):
        got = predict_pose([Pose(170, 0), Pose(179, 0), Pose(-172, 0)])
        assert got.yaw == pytest.approx(-163)

    def test_pitch_clamped(self):
        assert predict_pose([Pose(0, 70), Pose(0, 80), Pose(0, 89)]).pitch == 90.0

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-180, 179.9), st.lists(st.floats(-30, 30), min_size=2, max_size=2),
           st.lists(st.floats(-60, 60), min_size=3, max_size=3))
    def test_matches_polyfit(self, yaw0, steps, pitches):
        unwrapped = np.array([yaw0, yaw0 + steps[0], yaw0 + steps[0] + steps[1]])
        hist = [Pose(float(wrap_yaw(y)), p) for y, p in zip(unwrapped, pitches)]
        got = predict_pose(hist)
        t = np.arange(3)
        want_yaw = np.polyval(np.polyfit(t, unwrapped, 1), 3)
        want_pitch = np.clip(np.polyval(np.polyfit(t, pitches, 1), 3), -90, 90)
        assert abs(yaw_error(got.yaw, float(want_yaw))) < 1e-8
        assert got.pitch == pytest.approx(want_pitch, abs=1e-8)

    @pytest.mark.parametrize("n", [0, 1, 2])
    def test_insufficient_history(self, n):
        with pytest.raises(InsufficientHistory):
            predict_pose([Pose(0, 0)] * n)

    def test_too_much_history(self):
        with pytest.raises(ValueError):
            predict_pose([Pose(0, 0)] * 4)


class TestCoverage:
    def test_examples(self):
        actual, predicted = Pose(1.5, 0), Pose(0, 0)
        assert coverage(actual, predicted, P102) == 0
        assert coverage(actual, predicted, P108) == 1

    def test_seam(self):
        assert yaw_error(-179, 179) == pytest.approx(2)
        assert coverage(Pose(-179, 0), Pose(179, 0), P102) == 0
        assert coverage(Pose(-179, 0), Pose(179, 0), P108) == 1

    def test_exact_prediction_always_covers(self):
        for p in default_portions():
            assert coverage(Pose(12, 3), Pose(12, 3), p) == 1

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-180, 180), st.floats(-90, 90), st.floats(-180, 180), st.floats(-90, 90),
           st.integers(-3, 3))
    def test_symmetry_and_period(self, ay, ap, py, pp, k):
        for portion in default_portions():
            c = coverage(Pose(ay, ap), Pose(py, pp), portion)
            assert c == coverage(Pose(py, pp), Pose(ay, ap), portion)
            assert c == coverage(Pose(ay + 360 * k, ap), Pose(py, pp), portion)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-180, 180), st.floats(-90, 90), st.floats(-180, 180), st.floats(-90, 90))
    def test_nested_portions(self, ay, ap, py, pp):
        cs = [coverage(Pose(ay, ap), Pose(py, pp), p) for p in default_portions()]
        assert cs == sorted(cs)


class TestDelivery:
    @pytest.mark.parametrize("size, rate, want", [(1.0, 150, 1), (2.0, 150, 0), (1.0, 0, 0), (1.0, 100, 1),
                                                  (1.01, 100, 0)])
    def test_examples(self, size, rate, want):
        assert delivery(PortionSpec(100, 90, size), rate) == want

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.1, 5), st.floats(0, 500), st.floats(0, 100))
    def test_monotone(self, size, rate, extra):
        small, big = PortionSpec(100, 90, size), PortionSpec(100, 90, size + 0.5)
        assert delivery(small, rate) >= delivery(big, rate)
        assert delivery(small, rate + extra) >= delivery(small, rate)

    def test_invalid(self):
        with pytest.raises(ValueError):
            delivery(P102, -1)
        with pytest.raises(ValueError):
            delivery(P102, 10, interval_s=0)


class TestPortions:
    def test_default_sizes(self):
        sizes = [p.size_megabits for p in default_portions()]
        np.testing.assert_allclose(sizes, [0.9, 0.9282, 1.0152, 1.2])

    def test_too_small(self):
        with pytest.raises(ValueError):
            PortionSpec(90, 90, 1.0)


class TestBuildMatrices:
    def test_perfect_conditions(self):
        m = build_matrices([Pose(5, 5)] * 10, [1000.0] * 7, default_portions(), 25)
        assert m.t_count == 25 and np.all(m.x == 1) and np.all(m.y == 1)

    def test_starved_link(self):
        m = build_matrices([Pose(0, 0)], [0.0], default_portions(), 5)
        assert np.all(m.y == 0)

    def test_first_slots_fallback(self):
        poses = [Pose(0, 0), Pose(3, 0), Pose(6, 0), Pose(9, 0), Pose(12, 0)]
        m = build_matrices(poses, [1000.0], default_portions(), 5)
        np.testing.assert_array_equal(m.x[0], [1, 1, 1, 1])
        # slot 1 predicts the previous pose: a 3 degree error only fits 108 and 120 wide portions
        np.testing.assert_array_equal(m.x[1], [0, 0, 1, 1])
        # from slot 3 on the regression extrapolates the constant turn exactly
        assert np.all(m.x[3:] == 1)

    def test_nested_and_deterministic(self):
        poses, bw = synthesize_pose_trace(500, seed=1), synthesize_bandwidth_trace(300, 100, seed=2)
        a = build_matrices(poses, bw, default_portions(), 800)
        b = build_matrices(poses, bw, default_portions(), 800)
        assert a.is_nested()
        np.testing.assert_array_equal(a.x, b.x)
        np.testing.assert_array_equal(a.y, b.y)

    def test_empty_traces(self):
        with pytest.raises(ValueError):
            build_matrices([], [1.0], default_portions(), 5)
        with pytest.raises(ValueError):
            build_matrices([Pose(0, 0)], [], default_portions(), 5)

    def test_unordered_portions(self):
        with pytest.raises(ValueError):
            build_matrices([Pose(0, 0)], [1.0], default_portions()[::-1], 5)


class TestCsv:
    def test_pose_round_trip(self, tmp_path):
        poses = synthesize_pose_trace(50, seed=3)
        write_pose_csv(poses, tmp_path / "p.csv")
        back = read_pose_csv(tmp_path / "p.csv")
        np.testing.assert_allclose(np.array(back), np.array(poses), atol=1e-4)

    def test_bandwidth_round_trip(self, tmp_path):
        bw = synthesize_bandwidth_trace(50, 150, seed=3)
        write_bandwidth_csv(bw, tmp_path / "b.csv")
        np.testing.assert_allclose(read_bandwidth_csv(tmp_path / "b.csv"), bw, atol=1e-3)

    def test_matrices_round_trip(self, tmp_path):
        m = build_matrices(synthesize_pose_trace(200, 4), synthesize_bandwidth_trace(200, 100, 4),
                           default_portions(), 200)
        write_matrices_csv(m, tmp_path / "m.csv")
        back = read_matrices_csv(tmp_path / "m.csv")
        np.testing.assert_array_equal(back.x, m.x)
        np.testing.assert_array_equal(back.y, m.y)

    def test_missing_header(self, tmp_path):
        (tmp_path / "b.csv").write_text("0,100\n1,100\n")
        with pytest.raises(ValueError):
            read_bandwidth_csv(tmp_path / "b.csv")

    def test_non_increasing_time(self, tmp_path):
        (tmp_path / "b.csv").write_text("t,throughput_mbps\n1,100\n1,100\n")
        with pytest.raises(ValueError):
            read_bandwidth_csv(tmp_path / "b.csv")

    def test_pose_normalised(self, tmp_path):
        (tmp_path / "p.csv").write_text("t,yaw_deg,pitch_deg\n0,190,95\n")
        assert read_pose_csv(tmp_path / "p.csv")[0] == Pose(-170.0, 90.0)


class TestBundled:
    @pytest.mark.parametrize("rate", ["100", "150"])
    def test_loads(self, rate):
        poses, bw = bundled_trace(rate)
        assert len(poses) == 3000 and len(bw) > 0
        assert np.all(bw >= 0) and bw.max() <= float(rate)

    def test_unknown_rate(self):
        with pytest.raises(ValueError):
            bundled_trace("200")

    def test_synthesis_deterministic(self):
        assert synthesize_pose_trace(100, 5) == synthesize_pose_trace(100, 5)
        np.testing.assert_array_equal(synthesize_bandwidth_trace(100, 100, 5),
                                      synthesize_bandwidth_trace(100, 100, 5))
