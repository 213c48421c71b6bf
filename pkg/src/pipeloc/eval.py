# Copyright (c) 2025 mrbooo895.
#
# This software is released under the MIT License.
# https://opensource.org/licenses/MIT

"""
Accuracy metrics for localized runs.

Two metrics are supported. The ground-truth error E1(t) = |Loc(t) - Gt(t)|
compares the trajectory with surveyed (here: simulated) truth at every
timestamp. The zippering error E2(n) = Loc(t_f(n)) - Loc(t_b(n)) compares
where the trajectory places block ``n`` on the way in and on the way out;
it needs no ground truth at all. Per-run statistics are laid out as
"Test Run" rows followed by column-wise "Max." and "Ave." rows.
"""

import io
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np
from rich.console import Console
from rich.table import Table

from .errors import EmptyInput, MismatchedLengths, TimestampOutOfRange
from .model import SensorLog, feet
from .sim import BlockEvent, GroundTruth
from .smoother import Trajectory


@dataclass(frozen=True)
class SummaryStats:
    """Max, mean, population variance and standard deviation, in inches."""

    max: float
    mean: float
    var: float
    std: float

    @classmethod
    def of(cls, values) -> "SummaryStats":
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            return cls(0.0, 0.0, 0.0, 0.0)
        var = float(np.var(values))
        return cls(float(values.max()), float(values.mean()), var, float(np.sqrt(var)))


@dataclass(frozen=True)
class ErrorSeries:
    values: np.ndarray
    stats: SummaryStats
    t: np.ndarray | None = None

    def __len__(self) -> int:
        return int(np.asarray(self.values).shape[0])


@dataclass(frozen=True)
class BlockZip:
    block_id: int
    forward_loc: float
    backward_loc: float
    e2: float


@dataclass(frozen=True)
class ZipperingReport:
    """
    :ivar stats: Statistics of ``|e2|``, as tabulated.
    :ivar signed_stats: Statistics of the signed ``e2`` values.
    """

    per_block: tuple[BlockZip, ...]
    stats: SummaryStats
    signed_stats: SummaryStats

    @property
    def e2(self) -> np.ndarray:
        return np.array([row.e2 for row in self.per_block])


@dataclass(frozen=True)
class RunReport:
    """Everything measured on one run."""

    label: str
    e1: ErrorSeries
    zippering: ZipperingReport | None = None
    baseline_e1: ErrorSeries | None = None


@dataclass(frozen=True)
class RunTable:
    rows: tuple[tuple[str, SummaryStats], ...]
    max_row: SummaryStats
    ave_row: SummaryStats
    title: str = ""

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "runs": [{"run": label, **asdict(stats)} for label, stats in self.rows],
            "max": asdict(self.max_row),
            "ave": asdict(self.ave_row),
        }


def ground_truth_error(traj: Trajectory, truth: GroundTruth) -> ErrorSeries:
    """
    Absolute error of the trajectory against ground truth at every timestamp.

    :param Trajectory traj: Localization result.
    :param GroundTruth truth: True positions on the same timestamps.
    :return: The E1 series and its statistics.
    :rtype: ErrorSeries
    :raises MismatchedLengths: If the two series differ in length.
    """
    if len(traj) != len(truth):
        raise MismatchedLengths(f"trajectory has {len(traj)} samples, ground truth has {len(truth)}")
    if not np.allclose(traj.t, truth.t, rtol=0.0, atol=1e-6):
        raise MismatchedLengths("trajectory and ground truth are not sampled at the same timestamps")
    values = np.abs(traj.positions - truth.positions)
    return ErrorSeries(values, SummaryStats.of(values), traj.t)


def encoder_baseline_error(log: SensorLog, truth: GroundTruth, counts_per_inch: float) -> ErrorSeries:
    """E1 of raw dead-reckoning odometry, the drift the fusion has to remove."""
    raw = log.encoder_positions(counts_per_inch)
    return ground_truth_error(Trajectory(log.t, raw, np.zeros_like(raw)), truth)


def zippering_error(traj: Trajectory, blocks: Iterable[BlockEvent]) -> ZipperingReport:
    """
    Forward-minus-backward location of every block.

    Detection times fall between trajectory timestamps, so the trajectory is
    linearly interpolated at ``t_f`` and ``t_b``.

    :param Trajectory traj: Localization result.
    :param blocks: Block detection events.
    :return: Per-block rows sorted by block id, with statistics of ``|e2|``.
    :rtype: ZipperingReport
    :raises TimestampOutOfRange: If a detection time lies outside the
                                 trajectory time span.
    """
    span = (float(traj.t[0]), float(traj.t[-1]))
    rows = []
    for block in sorted(blocks, key=lambda b: b.block_id):
        for t in (block.t_f, block.t_b):
            if not span[0] <= t <= span[1]:
                raise TimestampOutOfRange(block.block_id, t, span)
        forward = float(np.interp(block.t_f, traj.t, traj.positions))
        backward = float(np.interp(block.t_b, traj.t, traj.positions))
        rows.append(BlockZip(block.block_id, forward, backward, forward - backward))
    signed = np.array([row.e2 for row in rows])
    return ZipperingReport(tuple(rows), SummaryStats.of(np.abs(signed)), SummaryStats.of(signed))


def _row_stats(report) -> SummaryStats:
    if isinstance(report, SummaryStats):
        return report
    return report.stats


def summarize_runs(reports: Sequence, labels: Sequence[str] | None = None, title: str = "") -> RunTable:
    """
    Tabulates per-run statistics with column-wise Max. and Ave. rows.

    :param reports: `ErrorSeries`, `ZipperingReport` or `SummaryStats`
                    values, one per run.
    :param labels: Optional run labels; runs are numbered from 1 otherwise.
    :param str title: Table title.
    :return: The multi-run table.
    :rtype: RunTable
    :raises EmptyInput: If no report is given.
    """
    if not reports:
        raise EmptyInput("cannot summarize zero runs")
    stats = [_row_stats(report) for report in reports]
    if labels is None:
        labels = [str(i) for i in range(1, len(stats) + 1)]
    columns = np.array([[s.max, s.mean, s.var, s.std] for s in stats])
    max_row = SummaryStats(*columns.max(axis=0).tolist())
    ave_row = SummaryStats(*columns.mean(axis=0).tolist())
    return RunTable(tuple(zip(labels, stats)), max_row, ave_row, title)


def render_table(table: RunTable, metric: str = "E") -> Table:
    """Builds a rich table in the "Test Run / Max / Mean / Var / Std" layout."""
    rich_table = Table(title=table.title or None)
    rich_table.add_column("Test Run")
    for name in ("Max", "Mean", "Var", "Std"):
        rich_table.add_column(f"{name}({metric}) in", justify="right")
    rich_table.add_column(f"Max({metric}) ft", justify="right")

    def cells(stats: SummaryStats) -> list[str]:
        return [
            f"{stats.max:.3f}",
            f"{stats.mean:.3f}",
            f"{stats.var:.4f}",
            f"{stats.std:.3f}",
            f"{feet(stats.max):.4f}",
        ]

    for label, stats in table.rows:
        rich_table.add_row(label, *cells(stats))
    rich_table.add_section()
    rich_table.add_row("Max.", *cells(table.max_row))
    rich_table.add_row("Ave.", *cells(table.ave_row))
    return rich_table


def render_text(tables: Sequence[tuple[RunTable, str]]) -> str:
    """Renders ``(table, metric)`` pairs to plain text for the report file."""
    console = Console(file=io.StringIO(), record=True, width=100, color_system=None)
    for table, metric in tables:
        console.print(render_table(table, metric))
    return console.export_text()


@dataclass(frozen=True)
class BatchSummary:
    """Multi-run tables for every metric measured in a batch."""

    e1: RunTable
    e2: RunTable | None = None
    baseline_e1: RunTable | None = None
    labels: tuple[str, ...] = field(default_factory=tuple)


def summarize_reports(reports: Sequence[RunReport]) -> BatchSummary:
    """Builds the E1, E2 and encoder-only baseline tables for a set of runs."""
    if not reports:
        raise EmptyInput("cannot summarize zero runs")
    labels = [r.label for r in reports]
    e1 = summarize_runs([r.e1 for r in reports], labels, "Ground-truth error E1 (inch)")
    e2 = None
    if all(r.zippering is not None for r in reports):
        e2 = summarize_runs([r.zippering for r in reports], labels, "Zippering error |E2| (inch)")
    baseline = None
    if all(r.baseline_e1 is not None for r in reports):
        baseline = summarize_runs(
            [r.baseline_e1 for r in reports], labels, "Encoder-only odometry error (inch)"
        )
    return BatchSummary(e1, e2, baseline, tuple(labels))
