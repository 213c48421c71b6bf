# Copyright (c) 2025 mrbooo895.
#
# This software is released under the MIT License.
# https://opensource.org/licenses/MIT

"""
Implements the 'evaluate' command for the pipeloc command-line tool.

Scores a trajectory against ground truth (E1) and, when block detection
events are given, by the zippering error between the forward and backward
passes (E2). Writes a machine-readable report, the same statistics as a
plain-text table, and the per-sample/per-block plot data as CSV.
"""

from dataclasses import asdict
from pathlib import Path

from .eval import (
    RunReport,
    SummaryStats,
    ground_truth_error,
    render_table,
    render_text,
    summarize_runs,
    zippering_error,
)
from .records import (
    E1_CSV_FILE,
    E2_CSV_FILE,
    REPORT_JSON_FILE,
    REPORT_TEXT_FILE,
    read_blocks,
    read_trajectory,
    read_truth,
    write_e1_csv,
    write_e2_csv,
)
from .utils import atomic_write_text, console, round_float, write_json
from .wrappers import error_handling


def stats_to_dict(stats: SummaryStats) -> dict:
    return {name: round_float(value) for name, value in asdict(stats).items()}


def report_to_dict(report: RunReport) -> dict:
    data = {"label": report.label, "e1": stats_to_dict(report.e1.stats), "e2": None}
    if report.zippering is not None:
        data["e2"] = {
            "abs": stats_to_dict(report.zippering.stats),
            "signed": stats_to_dict(report.zippering.signed_stats),
            "blocks": [
                {
                    "block_id": row.block_id,
                    "forward_loc_in": round_float(row.forward_loc),
                    "backward_loc_in": round_float(row.backward_loc),
                    "e2_in": round_float(row.e2),
                }
                for row in report.zippering.per_block
            ],
        }
    if report.baseline_e1 is not None:
        data["baseline_e1"] = stats_to_dict(report.baseline_e1.stats)
    return data


def report_tables(report: RunReport) -> list:
    tables = [(summarize_runs([report.e1], [report.label], "Ground-truth error E1 (inch)"), "E1")]
    if report.zippering is not None:
        tables.append(
            (summarize_runs([report.zippering], [report.label], "Zippering error |E2| (inch)"), "E2")
        )
    return tables


def evaluate_run(
    trajectory_path: Path,
    truth_path: Path,
    blocks_path: Path | None,
    out_dir: Path,
    label: str = "1",
) -> RunReport:
    """
    Scores one trajectory and writes the report files.

    :param Path trajectory_path: Trajectory written by 'localize'.
    :param Path truth_path: Ground truth on the same timestamps.
    :param Path blocks_path: Block detection events, or None to skip E2.
    :param Path out_dir: Output directory; created if missing.
    :param str label: Run label used in the tables.
    :return: The E1 series and, with blocks, the zippering report.
    :rtype: RunReport
    :raises LogParseError: If an input file cannot be parsed.
    :raises MismatchedLengths: If trajectory and truth do not align.
    :raises TimestampOutOfRange: If a block lies outside the trajectory.
    """
    out_dir = Path(out_dir)
    trajectory = read_trajectory(trajectory_path)
    truth = read_truth(truth_path)
    e1 = ground_truth_error(trajectory, truth)
    zippering = None
    if blocks_path is not None:
        zippering = zippering_error(trajectory, read_blocks(blocks_path))
    report = RunReport(label, e1, zippering)

    write_json(out_dir / REPORT_JSON_FILE, report_to_dict(report))
    atomic_write_text(out_dir / REPORT_TEXT_FILE, render_text(report_tables(report)))
    write_e1_csv(out_dir / E1_CSV_FILE, e1)
    if zippering is not None:
        write_e2_csv(out_dir / E2_CSV_FILE, zippering)
    return report


@error_handling
def cmd_evaluate(
    trajectory_path: Path,
    truth_path: Path,
    blocks_path: Path | None,
    out_dir: Path,
    label: str = "1",
) -> RunReport:
    """Entry point of 'pipeloc evaluate'."""
    console.print(f"[bold green]    Evaluating[/bold green] '{Path(trajectory_path).name}'")
    report = evaluate_run(trajectory_path, truth_path, blocks_path, out_dir, label)
    for table, metric in report_tables(report):
        console.print(render_table(table, metric))
    console.print(f"\n[bold green]Successfully[/bold green] wrote report to '{Path(out_dir) / REPORT_JSON_FILE}'.")
    return report
