import numpy as np
import pytest

from pipeloc.errors import BlocksExceedPipe, InvalidConfig
from pipeloc.sim import FalseRateCurve, SimConfig, SpeedProfile, generate_run, generate_runs, place_blocks

NOISELESS = dict(
    encoder_bias=0.0,
    encoder_slip_std=0.0,
    steering_counts_std=0.0,
    range_noise_std=0.0,
    false_rate_max=0.0,
)


def make_config(length=120.0, speed=10.0, dwell=2.0, **overrides) -> SimConfig:
    params = dict(
        pipe_length=length,
        pipe_diameter=30.0,
        speed_profile=SpeedProfile.out_and_back(length, speed, dwell),
        counts_per_inch=50.0,
        block_spacing=24.0,
        block_count=0,
    )
    params.update(overrides)
    return SimConfig(**params)


@pytest.mark.parametrize(
    "t, expected",
    [(0.0, 0.0), (5.0, 50.0), (10.0, 100.0), (11.0, 100.0), (17.0, 50.0), (22.0, 0.0)],
)
def test_out_and_back_truth(t, expected):
    profile = SpeedProfile.out_and_back(100.0, 10.0, 2.0)
    assert profile.duration == 22.0
    assert profile.truth_at(t) == pytest.approx(expected)


def test_noiseless_run_counts_match_truth_and_labels_are_valid():
    run = generate_run(make_config(**NOISELESS))

    np.testing.assert_allclose(run.log.encoder_positions(50.0), run.truth.positions, atol=1e-9)
    np.testing.assert_allclose(run.log.range, run.truth.positions, atol=1e-12)
    assert run.range_valid.all()
    assert run.log.t[0] == 0.0
    assert run.log.t[-1] == pytest.approx(26.0)


def test_full_length_run_is_v_shaped():
    config = make_config(length=1210.0, speed=1.96, block_count=25, block_spacing=48.0)

    run = generate_run(config)

    assert run.truth.t[-1] == pytest.approx(1236.6, abs=0.2)
    assert run.truth.positions.max() == pytest.approx(1210.0, abs=0.2)
    apex = run.truth.apex_index
    assert np.all(np.diff(run.truth.positions[: apex + 1]) >= 0)
    assert np.all(np.diff(run.truth.positions[apex:]) <= 0)
    assert len(run.block_events) == 25


def test_same_seed_is_bit_identical_and_seeds_differ():
    config = make_config(seed=11, steering_counts_std=0.5)

    first, second = generate_runs(config, [11, 11])
    other = generate_run(make_config(seed=12, steering_counts_std=0.5))

    for name in ("t", "left", "right", "range"):
        assert np.array_equal(getattr(first.log, name), getattr(second.log, name))
    assert np.array_equal(first.range_valid, second.range_valid)
    assert not np.array_equal(first.log.left, other.log.left)


def test_encoder_never_reads_less_than_true_travel_on_the_way_in():
    run = generate_run(make_config(seed=4, encoder_bias=0.01, encoder_slip_std=0.005, steering_counts_std=0.5))

    apex = run.truth.apex_index
    encoder = run.log.encoder_positions(50.0)
    assert np.all(encoder[: apex + 1] >= run.truth.positions[: apex + 1] - 1e-9)


def test_false_returns_lie_on_the_shift_lines():
    # --- Arrange ---
    config = make_config(
        seed=7,
        range_noise_std=0.01,
        false_shift_set=(10.0, 30.0),
        false_rate_curve=FalseRateCurve((0.0, 120.0), (0.5, 0.5)),
    )

    # --- Act ---
    run = generate_run(config)

    # --- Assert ---
    false = ~run.range_valid
    assert false.any()
    offsets = run.truth.positions[false] - run.log.range[false]
    nearest = np.min(np.abs(offsets[:, None] - np.array([10.0, 30.0])[None, :]), axis=1)
    assert np.all(nearest < 0.1)
    # a shift can only appear once the robot is deeper than the shift
    assert np.all(run.truth.positions[false] > 10.0)
    assert run.false_shifts == (10.0, 30.0)


def test_false_label_frequency_follows_the_curve():
    config = make_config(
        speed=1.0,
        seed=3,
        false_shift_set=(1.0,),
        false_rate_curve=FalseRateCurve((0.0, 60.0, 120.0), (0.2, 0.2, 0.6)),
    )

    run = generate_run(config)

    truth = run.truth.positions
    for low, high in [(2.0, 30.0), (90.0, 120.0)]:
        in_bin = (truth > low) & (truth <= high)
        expected = float(np.mean(config.false_rate_curve(truth[in_bin])))
        observed = float(np.mean(~run.range_valid[in_bin]))
        sigma = np.sqrt(expected * (1 - expected) / in_bin.sum())
        assert abs(observed - expected) <= 3 * sigma


def test_valid_readings_stay_within_six_sigma_of_the_truth():
    noise = 0.5
    config = make_config(length=600.0, speed=2.0, range_noise_std=noise, validity_horizon=300.0)
    for run in generate_runs(config, range(5)):
        valid = run.range_valid

        assert (~valid).any()
        assert np.all(np.abs(run.log.range[valid] - run.truth.positions[valid]) <= 6 * noise)


def test_logistic_false_rate_curve():
    curve = FalseRateCurve.logistic(840.0, 1210.0, p_max=0.9)

    assert curve(0.0) == 0.0
    assert curve(0.7 * 840.0) == pytest.approx(0.0)
    assert curve(1210.0) == pytest.approx(0.9)
    assert np.all(np.diff(curve(np.linspace(0.0, 1210.0, 200))) >= 0)


def test_place_blocks_constant_speed_is_symmetric_about_the_apex():
    config = make_config()

    blocks = place_blocks(config, 24.0, 5)

    assert [b.block_id for b in blocks] == [1, 2, 3, 4, 5]
    for block in blocks:
        assert block.t_f == pytest.approx(block.true_position / 10.0)
        assert block.t_f + block.t_b == pytest.approx(26.0)
        assert block.t_f <= block.t_b


def test_place_blocks_every_48_inches():
    config = make_config(length=1200.0, block_spacing=48.0, block_count=25)

    blocks = place_blocks(config, 48.0, 25)

    assert [b.true_position for b in blocks] == [48.0 * n for n in range(1, 26)]
    assert place_blocks(config, 48.0, 0) == []


def test_place_blocks_rejects_layouts_past_the_pipe_or_the_apex():
    with pytest.raises(BlocksExceedPipe):
        place_blocks(make_config(), 24.0, 6)

    short_trip = make_config(speed_profile=SpeedProfile.out_and_back(100.0, 10.0))
    with pytest.raises(BlocksExceedPipe):
        place_blocks(short_trip, 24.0, 5)


@pytest.mark.parametrize(
    "overrides, field",
    [
        ({"speed_profile": SpeedProfile((10.0,), (5.0,))}, "speed_profile"),
        ({"speed_profile": SpeedProfile((10.0, 10.0), (20.0, -20.0))}, "speed_profile"),
        ({"encoder_bias": -0.1}, "encoder_bias"),
        ({"false_rate_max": 1.5}, "false_rate_max"),
        ({"block_count": 6}, "block_count"),
    ],
)
def test_sim_config_validation_names_the_field(overrides, field):
    with pytest.raises(InvalidConfig) as excinfo:
        make_config(**overrides)
    assert excinfo.value.field == field
