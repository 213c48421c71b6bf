# Copyright (c) 2025 mrbooo895.
#
# This software is released under the MIT License.
# https://opensource.org/licenses/MIT

"""
Implements the 'localize' command for the pipeloc command-line tool.

Reads a synced sensor log, runs the rangefinder filter, the encoder
recalibration and the factor-graph smoother on it, and writes the smoothed
trajectory together with diagnostics about each stage.
"""

import logging
from pathlib import Path

from .config import load_config, pipeline_configs_from
from .model import RunMeta
from .records import DIAGNOSTICS_FILE, TRAJECTORY_FILE, read_log, write_trajectory
from .smoother import PipelineResult, run_pipeline
from .utils import config_hash, console, round_float, write_json
from .wrappers import error_handling

logger = logging.getLogger(__name__)


def diagnostics_of(result: PipelineResult, config: dict) -> dict:
    """Summarizes what each pipeline stage did, for `diagnostics.json`."""
    fr = result.filter_result
    calib = result.calibration
    return {
        "config_hash": config_hash(config),
        "samples": len(fr),
        "verdicts": {"valid": fr.valid_count, "false": fr.false_count},
        "apex_index": calib.apex_index,
        "anchor_count": len(calib.anchors),
        "anchor_indices": [index for index, _ in calib.anchors],
        "segment_scales": [round_float(s) for s in calib.segment_scales],
        "range_factor_count": int(result.graph.range_nodes.size),
        "warnings": list(result.warnings),
    }


def localize_run(
    config: dict, log_path: Path, out_dir: Path, allow_uncalibrated: bool = False
) -> PipelineResult:
    """
    Localizes one logged run and writes the trajectory and diagnostics.

    :param dict config: Resolved configuration.
    :param Path log_path: JSON-lines sensor log.
    :param Path out_dir: Output directory; created if missing.
    :param bool allow_uncalibrated: Degrade to raw encoder odometry instead
                                    of failing when nothing can anchor it.
    :return: The trajectory and every intermediate product.
    :rtype: PipelineResult
    :raises LogParseError: If the log cannot be parsed.
    :raises NoValidReadings: If no range reading anchors the encoders.
    """
    out_dir = Path(out_dir)
    f_cfg, c_cfg, fusion = pipeline_configs_from(config)
    meta = RunMeta(
        float(config["pipe_diameter_in"]),
        float(config["pipe_length_in"]),
        float(config["counts_per_inch"]),
    )
    log = read_log(log_path, meta)
    result = run_pipeline(log, f_cfg, c_cfg, fusion, allow_uncalibrated)

    write_trajectory(out_dir / TRAJECTORY_FILE, result.trajectory)
    write_json(out_dir / DIAGNOSTICS_FILE, diagnostics_of(result, config))
    logger.info(
        "%d samples, %d accepted, %d anchors",
        len(log),
        result.filter_result.valid_count,
        len(result.calibration.anchors),
    )
    return result


@error_handling
def cmd_localize(
    log_path: Path, config_path: Path | None, out_dir: Path, allow_uncalibrated: bool = False
) -> PipelineResult:
    """
    Entry point of 'pipeloc localize'.

    :param Path log_path: JSON-lines sensor log.
    :param Path config_path: Configuration file, or None for the defaults.
    :param Path out_dir: Output directory.
    :param bool allow_uncalibrated: See `localize_run`.
    """
    config = load_config(config_path)
    console.print(f"[bold green]    Localizing[/bold green] '{Path(log_path).name}'")
    result = localize_run(config, log_path, out_dir, allow_uncalibrated)

    fr = result.filter_result
    console.print(
        f"[bold green]     Filtered[/bold green] {fr.valid_count} valid and {fr.false_count} false readings"
    )
    console.print(
        f"[bold green]   Calibrated[/bold green] {len(result.calibration.segment_scales)} segments "
        f"on {len(result.calibration.anchors)} anchors"
    )
    for message in result.warnings:
        console.print(f"[bold yellow][INFO][/bold yellow] {message}")
    console.print(f"\n[bold green]Successfully[/bold green] wrote trajectory to '{Path(out_dir) / TRAJECTORY_FILE}'.")
    return result
