import numpy as np
import pytest

from pipeloc.calib import CalibConfig, calibrate_encoders, calibrate_segment, select_anchors
from pipeloc.errors import DegenerateSegment, MismatchedLengths, NoValidReadings
from pipeloc.filter import FilterConfig, FilterResult, filter_rangefinder
from pipeloc.model import SensorLog
from pipeloc.sim import SimConfig, SpeedProfile, generate_run


def make_filter_result(ranges, verdicts=None) -> FilterResult:
    ranges = np.asarray(ranges, dtype=float)
    if verdicts is None:
        verdicts = np.ones(ranges.size, dtype=bool)
    return FilterResult(ranges, verdicts, ranges, ranges, np.arange(ranges.size, dtype=float))


def make_sim_config(length=120.0, **overrides) -> SimConfig:
    params = dict(
        pipe_length=length,
        pipe_diameter=30.0,
        speed_profile=SpeedProfile.out_and_back(length, 10.0, 2.0),
        counts_per_inch=50.0,
        encoder_bias=0.0,
        encoder_slip_std=0.0,
        steering_counts_std=0.0,
        range_noise_std=0.0,
        false_rate_max=0.0,
        block_count=0,
    )
    params.update(overrides)
    return SimConfig(**params)


# --- select_anchors ---


def test_anchors_step_past_dist_step_on_the_way_in():
    ranges = np.arange(0.0, 145.0, 12.0)  # 0, 12, ..., 144

    anchors = select_anchors(make_filter_result(ranges), CalibConfig(dist_step=36.0))

    assert anchors == [0, 4, 8, 12]
    assert ranges[anchors].tolist() == [0.0, 48.0, 96.0, 144.0]


def test_anchors_on_the_way_out_step_downwards():
    ranges = np.concatenate((np.arange(0.0, 145.0, 12.0), np.arange(132.0, -1.0, -12.0)))

    anchors = select_anchors(make_filter_result(ranges), CalibConfig(dist_step=36.0))

    assert anchors == [0, 4, 8, 12, 16, 20, 24]
    assert ranges[anchors[4:]].tolist() == [96.0, 48.0, 0.0]


def test_backward_leg_steps_from_the_last_forward_anchor():
    """Tests the anchor spacing across a turnaround that is not itself an anchor."""
    # --- Arrange ---
    ranges = np.concatenate((np.arange(0.0, 133.0, 12.0), np.arange(120.0, -1.0, -12.0)))

    # --- Act ---
    anchors = select_anchors(make_filter_result(ranges), CalibConfig(dist_step=36.0))

    # --- Assert ---
    assert ranges[anchors].tolist() == [0.0, 48.0, 96.0, 48.0, 0.0]
    assert np.all(np.abs(np.diff(ranges[anchors])) > 36.0)


def test_simulated_anchors_are_spaced_more_than_dist_step_apart():
    run = generate_run(make_sim_config(length=1200.0, encoder_bias=0.005, range_noise_std=0.02, seed=3))
    fr = filter_rangefinder(run.log, FilterConfig(counts_per_inch=50.0))

    anchors = select_anchors(fr, CalibConfig(dist_step=36.0))

    readings = fr.ranges[anchors]
    assert np.all(fr.verdicts[anchors])
    assert np.all(np.abs(np.diff(readings)) > 36.0)


def test_false_sample_at_the_step_defers_the_anchor():
    ranges = np.arange(0.0, 145.0, 12.0)
    verdicts = np.ones(ranges.size, dtype=bool)
    verdicts[4] = False

    anchors = select_anchors(make_filter_result(ranges, verdicts), CalibConfig(dist_step=36.0))

    assert anchors[:3] == [0, 5, 9]


def test_no_valid_reading_beyond_the_origin():
    ranges = np.arange(0.0, 100.0, 10.0)
    verdicts = np.zeros(ranges.size, dtype=bool)
    verdicts[0] = True

    with pytest.raises(NoValidReadings):
        select_anchors(make_filter_result(ranges, verdicts), CalibConfig())


# --- calibrate_segment ---


def test_segment_already_on_its_anchors_is_unchanged():
    positions = np.array([0.0, 12.0, 24.0, 36.0])

    out, scale = calibrate_segment(positions, 0.0, 36.0)

    assert scale == 1.0
    np.testing.assert_array_equal(out, positions)


def test_segment_is_stretched_onto_its_anchors():
    positions = np.linspace(10.0, 45.0, 8)  # encoder says 35 in

    out, scale = calibrate_segment(positions, 10.0, 46.0)

    assert scale == pytest.approx(36.0 / 35.0)
    assert out[0] == 10.0
    assert out[-1] == 46.0
    assert np.all(np.diff(out) > 0)


@pytest.mark.parametrize(
    "positions, anchor_j, anchor_k",
    [
        ([5.0, 5.0, 5.0], 0.0, 36.0),  # encoder did not move
        ([0.0, 10.0], 5.0, 0.0),  # encoder and anchors disagree on direction
        ([1.0], 0.0, 1.0),
    ],
)
def test_degenerate_segments_are_reported(positions, anchor_j, anchor_k):
    with pytest.raises(DegenerateSegment):
        calibrate_segment(positions, anchor_j, anchor_k)


def test_randomized_segments_land_exactly_on_their_anchors():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        # --- Arrange ---
        direction = rng.choice([-1.0, 1.0])
        size = int(rng.integers(2, 60))
        positions = rng.uniform(-500.0, 500.0) + direction * np.cumsum(rng.uniform(0.01, 2.0, size))
        anchor_j = rng.uniform(0.0, 1200.0)
        anchor_k = anchor_j + direction * rng.uniform(1.0, 50.0)

        # --- Act ---
        out, scale = calibrate_segment(positions, anchor_j, anchor_k)

        # --- Assert ---
        assert abs(out[0] - anchor_j) <= 1e-9
        assert abs(out[-1] - anchor_k) <= 1e-9
        expected = anchor_j + (positions - positions[0]) * (anchor_k - anchor_j) / (positions[-1] - positions[0])
        np.testing.assert_allclose(out, expected, rtol=0.0, atol=1e-9)
        assert scale > 0


# --- calibrate_encoders ---


def test_noiseless_calibration_equals_truth():
    run = generate_run(make_sim_config())
    fr = filter_rangefinder(run.log, FilterConfig(counts_per_inch=50.0))

    calib = calibrate_encoders(fr, run.log, CalibConfig(counts_per_inch=50.0))

    np.testing.assert_allclose(calib.positions, run.truth.positions, atol=1e-9)
    assert calib.anchors[0] == (0, 0.0)
    assert calib.warnings == ()
    for index, value in calib.anchors:
        assert calib.positions[index] == pytest.approx(value, abs=1e-9)


def test_biased_encoder_drift_is_confined_to_one_segment():
    # --- Arrange ---
    bias, noise = 0.005, 0.02
    run = generate_run(make_sim_config(length=1200.0, encoder_bias=bias, range_noise_std=noise, seed=5))
    fr = filter_rangefinder(run.log, FilterConfig(counts_per_inch=50.0))

    # --- Act ---
    calib = calibrate_encoders(fr, run.log, CalibConfig(dist_step=36.0, counts_per_inch=50.0))

    # --- Assert ---
    error = np.abs(calib.positions - run.truth.positions)
    raw_error = np.abs(calib.raw_positions - run.truth.positions)
    assert error.max() <= 36.0 * bias + 6 * noise
    assert raw_error.max() > 5.0
    forward = [index for index, _ in calib.anchors[1:] if index <= calib.apex_index]
    assert len(forward) >= 30
    assert all(scale == pytest.approx(1.0 / (1.0 + bias), rel=0.01) for scale in calib.segment_scales)


def test_calibration_without_anchors_can_fall_back_to_raw_odometry():
    counts = np.arange(10.0) * 50.0
    log = SensorLog(np.arange(10.0), counts, counts, [0.0] + [500.0] * 9)
    fr = filter_rangefinder(log, FilterConfig(counts_per_inch=50.0))

    with pytest.raises(NoValidReadings):
        calibrate_encoders(fr, log, CalibConfig(counts_per_inch=50.0))

    calib = calibrate_encoders(fr, log, CalibConfig(counts_per_inch=50.0), allow_uncalibrated=True)
    np.testing.assert_allclose(calib.positions, np.arange(10.0))
    assert calib.anchors == ((0, 0.0),)
    assert "calibration skipped" in calib.warnings[0]


def test_calibration_rejects_a_foreign_filter_result():
    run = generate_run(make_sim_config())
    fr = filter_rangefinder(run.log.subset(range(50)), FilterConfig(counts_per_inch=50.0))

    with pytest.raises(MismatchedLengths):
        calibrate_encoders(fr, run.log, CalibConfig(counts_per_inch=50.0))
