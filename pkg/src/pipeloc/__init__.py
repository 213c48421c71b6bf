"""
pipeloc - Reciprocal encoder/rangefinder localization for in-pipe robots

"""

__version__ = "0.1.0"
from .batch import cmd_batch, run_batch
from .calib import CalibConfig, CalibratedOdometry, calibrate_encoders, calibrate_segment, select_anchors
from .eval import ground_truth_error, summarize_runs, zippering_error
from .evaluate import cmd_evaluate, evaluate_run
from .filter import FilterConfig, FilterResult, filter_rangefinder, predict_step
from .localize import cmd_localize, localize_run
from .model import (
    EncoderSample,
    RangeSample,
    RunMeta,
    SensorLog,
    SyncPolicy,
    average_encoders,
    counts_to_distance,
    sync_streams,
)
from .sim import SimConfig, SpeedProfile, generate_run, place_blocks
from .simulate import cmd_simulate, simulate_run
from .smoother import (
    FactorGraph1D,
    FusionConfig,
    Trajectory,
    build_graph,
    estimate_trajectory,
    solve_map,
)
from .wrappers import error_handling

__all__ = [
    "EncoderSample",
    "RangeSample",
    "RunMeta",
    "SensorLog",
    "SyncPolicy",
    "average_encoders",
    "counts_to_distance",
    "sync_streams",
    "SimConfig",
    "SpeedProfile",
    "generate_run",
    "place_blocks",
    "FilterConfig",
    "FilterResult",
    "predict_step",
    "filter_rangefinder",
    "CalibConfig",
    "CalibratedOdometry",
    "select_anchors",
    "calibrate_segment",
    "calibrate_encoders",
    "FusionConfig",
    "FactorGraph1D",
    "Trajectory",
    "build_graph",
    "solve_map",
    "estimate_trajectory",
    "ground_truth_error",
    "zippering_error",
    "summarize_runs",
    "simulate_run",
    "localize_run",
    "evaluate_run",
    "run_batch",
    "cmd_simulate",
    "cmd_localize",
    "cmd_evaluate",
    "cmd_batch",
    "error_handling",
]
