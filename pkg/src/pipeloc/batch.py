# Copyright (c) 2025 mrbooo895.
#
# This software is released under the MIT License.
# https://opensource.org/licenses/MIT

"""
Implements the 'batch' command for the pipeloc command-line tool.

Runs simulate, localize and evaluate for a range of seeds, one `run_XX`
directory per seed, and tabulates the runs the way multi-run results are
reported: one row per test run followed by column-wise "Max." and "Ave."
rows, for E1, |E2| and the encoder-only baseline.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import load_config
from .eval import (
    BatchSummary,
    RunReport,
    encoder_baseline_error,
    render_table,
    render_text,
    summarize_reports,
)
from .evaluate import evaluate_run
from .localize import localize_run
from .model import RunMeta
from .records import read_log, read_truth
from .simulate import simulate_run
from .utils import atomic_write_text, config_hash, console, write_json
from .wrappers import error_handling

logger = logging.getLogger(__name__)

SUMMARY_JSON_FILE = "summary.json"
SUMMARY_TEXT_FILE = "summary.txt"


def run_dir_name(index: int) -> str:
    return f"run_{index:02d}"


def process_run(config: dict, seed: int, run_dir: Path, label: str) -> RunReport:
    """Simulates, localizes and evaluates one seed inside ``run_dir``."""
    bundle = simulate_run(config, seed, run_dir)
    localize_run(config, bundle.log, run_dir)
    report = evaluate_run(bundle.trajectory, bundle.truth, bundle.blocks, bundle.root, label)
    logger.debug("run %s scored, report at %s", label, bundle.report)

    meta = RunMeta(
        float(config["pipe_diameter_in"]),
        float(config["pipe_length_in"]),
        float(config["counts_per_inch"]),
    )
    baseline = encoder_baseline_error(
        read_log(bundle.log, meta), read_truth(bundle.truth), float(config["counts_per_inch"])
    )
    return RunReport(report.label, report.e1, report.zippering, baseline)


def _process_run_star(args) -> RunReport:
    return process_run(*args)


def summary_tables(summary: BatchSummary) -> list:
    tables = [(summary.e1, "E1")]
    if summary.e2 is not None:
        tables.append((summary.e2, "E2"))
    if summary.baseline_e1 is not None:
        tables.append((summary.baseline_e1, "E1"))
    return tables


def run_batch(config: dict, seed: int, runs: int, out_dir: Path, jobs: int = 1) -> BatchSummary:
    """
    Processes ``runs`` seeds starting at ``seed`` and writes the summary.

    Results do not depend on ``jobs``: every run is fully determined by its
    seed and the summary keeps seed order.

    :param dict config: Resolved configuration.
    :param int seed: First seed; run ``i`` uses ``seed + i``.
    :param int runs: Number of runs, at least 1.
    :param Path out_dir: Batch directory.
    :param int jobs: Worker processes; 1 runs everything in this process.
    :return: The multi-run tables.
    :rtype: BatchSummary
    """
    if runs < 1:
        raise ValueError(f"--runs must be at least 1, got {runs}")
    if jobs < 1:
        raise ValueError(f"--jobs must be at least 1, got {jobs}")
    out_dir = Path(out_dir)
    tasks = [
        (config, seed + i, out_dir / run_dir_name(i + 1), str(i + 1)) for i in range(runs)
    ]

    if jobs == 1:
        reports = [_process_run_star(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, runs)) as pool:
            reports = list(pool.map(_process_run_star, tasks))

    summary = summarize_reports(reports)
    write_json(
        out_dir / SUMMARY_JSON_FILE,
        {
            "config_hash": config_hash(config),
            "seeds": [task[1] for task in tasks],
            "e1": summary.e1.to_dict(),
            "e2": summary.e2.to_dict() if summary.e2 is not None else None,
            "baseline_e1": summary.baseline_e1.to_dict() if summary.baseline_e1 is not None else None,
        },
    )
    atomic_write_text(out_dir / SUMMARY_TEXT_FILE, render_text(summary_tables(summary)))
    logger.info("batch of %d runs written to %s", runs, out_dir)
    return summary


@error_handling
def cmd_batch(
    config_path: Path | None, seed: int, runs: int, out_dir: Path, jobs: int = 1
) -> BatchSummary:
    """Entry point of 'pipeloc batch'."""
    config = load_config(config_path)
    console.print(
        f"[bold green]    Processing[/bold green] {runs} runs, seeds {seed}..{seed + runs - 1}"
    )
    summary = run_batch(config, seed, runs, out_dir, jobs)
    for table, metric in summary_tables(summary):
        console.print(render_table(table, metric))
    console.print(f"\n[bold green]Successfully[/bold green] wrote summary to '{Path(out_dir) / SUMMARY_JSON_FILE}'.")
    return summary
