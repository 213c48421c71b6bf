import numpy as np
import pytest

from pipeloc.errors import EmptyInput, MismatchedLengths, TimestampOutOfRange
from pipeloc.eval import (
    RunReport,
    SummaryStats,
    encoder_baseline_error,
    ground_truth_error,
    render_text,
    summarize_reports,
    summarize_runs,
    zippering_error,
)
from pipeloc.sim import BlockEvent, GroundTruth, SimConfig, SpeedProfile, generate_run
from pipeloc.smoother import Trajectory

# Seven runs of a ground-truth test: max, mean, var, std (inch).
GROUND_TRUTH_RUNS = [
    (0.96, 0.10, 0.0107, 0.10),
    (1.07, 0.11, 0.0155, 0.12),
    (0.99, 0.12, 0.0245, 0.16),
    (0.94, 0.12, 0.0125, 0.11),
    (1.17, 0.11, 0.0116, 0.11),
    (1.14, 0.14, 0.0259, 0.16),
    (1.59, 0.13, 0.0276, 0.17),
]


def as_trajectory(t, positions) -> Trajectory:
    positions = np.asarray(positions, dtype=float)
    return Trajectory(t, positions, np.zeros_like(positions))


def two_pass_stats(values):
    """Independent reference: explicit loops, mean first then squared deviations."""
    values = [float(v) for v in values]
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    return max(values), mean, var, var**0.5


def test_perfect_trajectory_has_zero_error():
    t = np.arange(5.0)
    truth = GroundTruth(t, [0.0, 1.0, 2.0, 1.0, 0.0], 2)

    series = ground_truth_error(as_trajectory(t, truth.positions), truth)

    assert series.values.tolist() == [0.0] * 5
    assert series.stats == SummaryStats(0.0, 0.0, 0.0, 0.0)


def test_constant_offset():
    t = np.arange(10.0)
    truth = GroundTruth(t, np.linspace(0.0, 9.0, 10), 9)

    series = ground_truth_error(as_trajectory(t, truth.positions + 0.1), truth)

    assert series.stats.max == pytest.approx(0.1)
    assert series.stats.mean == pytest.approx(0.1)
    assert series.stats.var == pytest.approx(0.0, abs=1e-12)


def test_stats_match_an_independent_recomputation():
    rng = np.random.default_rng(1)
    t = np.arange(500.0)
    truth = GroundTruth(t, rng.uniform(0, 1200, 500), 0)
    traj = as_trajectory(t, truth.positions + rng.normal(0.0, 0.2, 500))

    stats = ground_truth_error(traj, truth).stats

    expected = two_pass_stats(np.abs(traj.positions - truth.positions))
    assert (stats.max, stats.mean, stats.var, stats.std) == pytest.approx(expected, rel=1e-9)


def test_ground_truth_error_rejects_misaligned_series():
    t = np.arange(4.0)
    truth = GroundTruth(t, np.zeros(4), 0)

    with pytest.raises(MismatchedLengths):
        ground_truth_error(as_trajectory(t[:3], np.zeros(3)), truth)
    with pytest.raises(MismatchedLengths):
        ground_truth_error(as_trajectory(t + 0.5, np.zeros(4)), truth)


def test_zippering_on_simulator_truth_is_zero():
    config = SimConfig(
        120.0,
        30.0,
        SpeedProfile.out_and_back(120.0, 10.0, 2.0),
        50.0,
        block_spacing=24.0,
        block_count=5,
    )
    run = generate_run(config)

    report = zippering_error(as_trajectory(run.truth.t, run.truth.positions), run.block_events)

    assert [row.block_id for row in report.per_block] == [1, 2, 3, 4, 5]
    assert np.max(np.abs(report.e2)) <= 1e-9
    for row, block in zip(report.per_block, run.block_events):
        assert row.forward_loc == pytest.approx(block.true_position)


def test_zippering_reports_signed_and_absolute_statistics():
    t = np.linspace(0.0, 100.0, 1001)
    positions = np.minimum(t, 100.0 - t) * 24.0  # apex at t=50
    blocks = [BlockEvent(n, n * 2.0, 100.0 - n * 2.0, n * 48.0) for n in range(24, 0, -1)]
    # forward leg reads 0.3 in long, backward leg 0.1 in long
    shift = np.where(t < 50.0, 0.3, 0.1)
    traj = as_trajectory(t, positions + shift)

    report = zippering_error(traj, blocks)

    assert [row.block_id for row in report.per_block] == list(range(1, 25))
    np.testing.assert_allclose(report.e2, 0.2, atol=1e-9)
    assert report.stats.mean == pytest.approx(0.2)
    assert report.signed_stats.mean == pytest.approx(0.2)


def test_zippering_rejects_detections_outside_the_trajectory():
    t = np.arange(11.0)
    traj = as_trajectory(t, np.minimum(t, 10.0 - t))

    with pytest.raises(TimestampOutOfRange) as excinfo:
        zippering_error(traj, [BlockEvent(1, 1.0, 9.0, 1.0), BlockEvent(2, 2.0, 12.0, 2.0)])
    assert excinfo.value.block_id == 2


def test_single_run_aggregates_to_itself():
    row = SummaryStats(0.5, 0.1, 0.01, 0.1)

    table = summarize_runs([row])

    assert table.max_row == row
    assert table.ave_row == row
    assert table.rows == (("1", row),)


def test_seven_run_table_aggregate_rows():
    table = summarize_runs([SummaryStats(*row) for row in GROUND_TRUTH_RUNS])

    ave = table.ave_row
    assert (round(ave.max, 2), round(ave.mean, 2), round(ave.var, 4), round(ave.std, 2)) == (
        1.12,
        0.12,
        0.0183,
        0.13,
    )
    assert table.max_row == SummaryStats(1.59, 0.14, 0.0276, 0.17)


def test_aggregate_matches_column_wise_recomputation():
    rng = np.random.default_rng(8)
    t = np.arange(50.0)
    truth = GroundTruth(t, np.zeros(50), 0)
    series = [ground_truth_error(as_trajectory(t, rng.normal(0, 0.3, 50)), truth) for _ in range(7)]

    table = summarize_runs(series, [f"run {i}" for i in range(7)])

    columns = list(zip(*[(s.stats.max, s.stats.mean, s.stats.var, s.stats.std) for s in series]))
    assert (table.max_row.max, table.max_row.mean, table.max_row.var, table.max_row.std) == tuple(
        max(c) for c in columns
    )
    expected_ave = tuple(sum(c) / 7 for c in columns)
    assert (table.ave_row.max, table.ave_row.mean, table.ave_row.var, table.ave_row.std) == pytest.approx(
        expected_ave
    )
    assert table.rows[0][0] == "run 0"


def test_aggregate_rows_do_not_depend_on_run_order():
    rows = [SummaryStats(*row) for row in GROUND_TRUTH_RUNS]
    rng = np.random.default_rng(17)

    table = summarize_runs(rows)
    for _ in range(10):
        shuffled = summarize_runs([rows[i] for i in rng.permutation(len(rows))])

        assert shuffled.max_row == table.max_row
        assert shuffled.ave_row.max == pytest.approx(table.ave_row.max, rel=1e-12)
        assert shuffled.ave_row.mean == pytest.approx(table.ave_row.mean, rel=1e-12)
        assert shuffled.ave_row.var == pytest.approx(table.ave_row.var, rel=1e-12)
        assert shuffled.ave_row.std == pytest.approx(table.ave_row.std, rel=1e-12)


def test_summarize_runs_needs_at_least_one_run():
    with pytest.raises(EmptyInput):
        summarize_runs([])


def test_rendered_table_has_aggregate_rows_and_feet():
    table = summarize_runs([SummaryStats(*row) for row in GROUND_TRUTH_RUNS], title="E1 (inch)")

    text = render_text([(table, "E1")])

    assert "Test Run" in text
    assert "Max." in text
    assert "Ave." in text
    assert "1.590" in text
    assert f"{1.59 / 12:.4f}" in text
    assert table.to_dict()["ave"]["max"] == pytest.approx(1.122857, abs=1e-6)


def test_encoder_baseline_and_batch_summary():
    config = SimConfig(
        240.0, 30.0, SpeedProfile.out_and_back(240.0, 10.0, 2.0), 50.0, encoder_bias=0.01, block_count=0
    )
    run = generate_run(config)

    baseline = encoder_baseline_error(run.log, run.truth, 50.0)
    perfect = ground_truth_error(as_trajectory(run.truth.t, run.truth.positions), run.truth)
    summary = summarize_reports([RunReport("1", perfect, None, baseline)])

    assert baseline.stats.max > 2.0
    assert summary.e2 is None
    assert summary.baseline_e1.max_row.max == baseline.stats.max
    assert summary.labels == ("1",)
