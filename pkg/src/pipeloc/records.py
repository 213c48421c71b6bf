# Copyright (c) 2025 mrbooo895.
#
# This software is released under the MIT License.
# https://opensource.org/licenses/MIT

"""
Reading and writing of run artifacts.

Every artifact is JSON-lines with unit-suffixed field names, one record per
sample (or per block), floats rounded to `utils.FLOAT_DECIMALS` places.
Plot data for the error figures is written as CSV.
"""

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import LogParseError, PipelocError
from .eval import ErrorSeries, ZipperingReport
from .model import RunMeta, SensorLog, feet
from .sim import BlockEvent, GroundTruth
from .smoother import Trajectory
from .utils import atomic_write_text, read_jsonl, round_float, write_jsonl

LOG_FIELDS = ("t_s", "left_counts", "right_counts", "range_in")
TRUTH_FIELDS = ("t_s", "position_in")
BLOCK_FIELDS = ("block_id", "t_f_s", "t_b_s", "true_position_in")
TRAJECTORY_FIELDS = ("t_s", "position_in", "marginal_std_in")

VALID = "valid"
FALSE = "false"

# --- Bundle layout ---
LOG_FILE = "log.jsonl"
LABELS_FILE = "labels.jsonl"
TRUTH_FILE = "truth.jsonl"
BLOCKS_FILE = "blocks.jsonl"
MANIFEST_FILE = "manifest.toml"
TRAJECTORY_FILE = "trajectory.jsonl"
DIAGNOSTICS_FILE = "diagnostics.json"
REPORT_JSON_FILE = "report.json"
REPORT_TEXT_FILE = "report.txt"
E1_CSV_FILE = "e1.csv"
E2_CSV_FILE = "e2.csv"


@dataclass(frozen=True)
class RunArtifactBundle:
    """
    Files belonging to one run directory.

    The manifest records the resolved configuration, its hash and the seed,
    which is everything needed to regenerate the other files.
    """

    root: Path
    seed: int
    config_hash: str

    @property
    def log(self) -> Path:
        return self.root / LOG_FILE

    @property
    def labels(self) -> Path:
        return self.root / LABELS_FILE

    @property
    def truth(self) -> Path:
        return self.root / TRUTH_FILE

    @property
    def blocks(self) -> Path:
        return self.root / BLOCKS_FILE

    @property
    def manifest(self) -> Path:
        return self.root / MANIFEST_FILE

    @property
    def trajectory(self) -> Path:
        return self.root / TRAJECTORY_FILE

    @property
    def report(self) -> Path:
        return self.root / REPORT_JSON_FILE


def _columns(records: list[dict], fields) -> list[np.ndarray]:
    return [np.array([record[name] for record in records], dtype=float) for name in fields]


def write_log(path: Path, log: SensorLog):
    write_jsonl(
        path,
        (
            {
                "t_s": round_float(t),
                "left_counts": round_float(left),
                "right_counts": round_float(right),
                "range_in": round_float(rng),
            }
            for t, left, right, rng in zip(
                log.t.tolist(), log.left.tolist(), log.right.tolist(), log.range.tolist()
            )
        ),
    )


def read_log(path: Path, meta: RunMeta | None = None) -> SensorLog:
    """
    Loads a sensor log written by `write_log`.

    :raises LogParseError: If the file is unreadable or its samples violate
                           the log invariants (ordering, finiteness).
    """
    t, left, right, ranges = _columns(read_jsonl(path, LOG_FIELDS), LOG_FIELDS)
    try:
        return SensorLog(t, left, right, ranges, meta)
    except (PipelocError, ValueError) as e:
        raise LogParseError(f"'{Path(path).name}' is not a valid sensor log: {e}") from e


def write_labels(path: Path, log: SensorLog, range_valid):
    write_jsonl(
        path,
        (
            {"t_s": round_float(t), "label": VALID if valid else FALSE}
            for t, valid in zip(log.t.tolist(), np.asarray(range_valid).tolist())
        ),
    )


def read_labels(path: Path) -> np.ndarray:
    """Returns the labels as a boolean array, True for valid."""
    records = read_jsonl(path, ("t_s",), ("label",))
    labels = [record["label"] for record in records]
    unknown = sorted(set(labels) - {VALID, FALSE})
    if unknown:
        raise LogParseError(f"'{Path(path).name}' has unknown label(s) {', '.join(unknown)}")
    return np.array([label == VALID for label in labels])


def write_truth(path: Path, truth: GroundTruth):
    write_jsonl(
        path,
        (
            {"t_s": round_float(t), "position_in": round_float(p)}
            for t, p in zip(truth.t.tolist(), truth.positions.tolist())
        ),
    )


def read_truth(path: Path) -> GroundTruth:
    t, positions = _columns(read_jsonl(path, TRUTH_FIELDS), TRUTH_FIELDS)
    return GroundTruth(t, positions, int(np.argmax(positions)))


def write_blocks(path: Path, blocks):
    write_jsonl(
        path,
        (
            {
                "block_id": block.block_id,
                "t_f_s": round_float(block.t_f),
                "t_b_s": round_float(block.t_b),
                "true_position_in": round_float(block.true_position),
            }
            for block in blocks
        ),
    )


def read_blocks(path: Path) -> list[BlockEvent]:
    """A run simulated with ``block_count = 0`` has an empty blocks file."""
    return [
        BlockEvent(int(r["block_id"]), float(r["t_f_s"]), float(r["t_b_s"]), float(r["true_position_in"]))
        for r in read_jsonl(path, BLOCK_FIELDS, allow_empty=True)
    ]


def write_trajectory(path: Path, traj: Trajectory):
    write_jsonl(
        path,
        (
            {"t_s": round_float(t), "position_in": round_float(p), "marginal_std_in": round_float(s)}
            for t, p, s in zip(traj.t.tolist(), traj.positions.tolist(), traj.marginal_std.tolist())
        ),
    )


def read_trajectory(path: Path) -> Trajectory:
    t, positions, std = _columns(read_jsonl(path, TRAJECTORY_FIELDS), TRAJECTORY_FIELDS)
    if t.size > 1 and not np.all(np.diff(t) > 0):
        raise LogParseError(f"'{Path(path).name}' timestamps are not strictly increasing")
    return Trajectory(t, positions, std)


def _write_csv(path: Path, header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    atomic_write_text(path, buffer.getvalue())


def write_e1_csv(path: Path, series: ErrorSeries):
    """E1 against time, in inches and feet."""
    _write_csv(
        path,
        ("t_s", "e1_in", "e1_ft"),
        (
            (round_float(t), round_float(e), round_float(feet(e)))
            for t, e in zip(np.asarray(series.t).tolist(), np.asarray(series.values).tolist())
        ),
    )


def write_e2_csv(path: Path, report: ZipperingReport):
    """Signed E2 against block id."""
    _write_csv(
        path,
        ("block_id", "forward_loc_in", "backward_loc_in", "e2_in"),
        (
            (row.block_id, round_float(row.forward_loc), round_float(row.backward_loc), round_float(row.e2))
            for row in report.per_block
        ),
    )
