# Copyright (c) 2025 mrbooo895.
#
# This software is released under the MIT License.
# https://opensource.org/licenses/MIT

"""
Rangefinder-anchored recalibration of encoder odometry.

Accepted rangefinder readings spaced roughly ``dist_step`` apart serve as
landmarks. Between two consecutive landmarks the raw encoder odometry is
mapped affinely so that it passes through both readings exactly, which
confines encoder drift to a single short segment. The forward and backward
legs of a run are calibrated separately and joined at the turnaround.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSegment, InvalidConfig, MismatchedLengths, NoValidReadings
from .filter import FilterResult
from .model import SensorLog

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CalibConfig:
    """
    :ivar dist_step: Target anchor spacing in inches.
    :ivar counts_per_inch: Encoder coefficient C.
    :ivar min_segment: Smallest encoder displacement a segment may have.
    """

    dist_step: float = 36.0
    counts_per_inch: float = 1.0
    min_segment: float = 1e-6

    def __post_init__(self):
        if not self.dist_step > 0:
            raise InvalidConfig("dist_step", "must be positive")
        if not self.counts_per_inch > 0:
            raise InvalidConfig("counts_per_inch", "must be positive")
        if not self.min_segment > 0:
            raise InvalidConfig("min_segment", "must be positive")


@dataclass(frozen=True)
class CalibratedOdometry:
    """
    :ivar positions: Calibrated position per sample, inches.
    :ivar anchors: ``(index, anchor_range)`` pairs, origin first.
    :ivar segment_scales: Scale applied to each anchor-to-anchor segment.
    :ivar raw_positions: Uncalibrated encoder odometry.
    """

    positions: np.ndarray
    anchors: tuple[tuple[int, float], ...]
    segment_scales: tuple[float, ...]
    raw_positions: np.ndarray
    apex_index: int
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        for name in ("positions", "raw_positions"):
            array = np.array(getattr(self, name), dtype=float)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    def __len__(self) -> int:
        return int(self.positions.shape[0])


def _walk_anchors(ranges, verdicts, indices, reference: float, dist_step: float, direction: float) -> list[int]:
    anchors = []
    for k in indices:
        if verdicts[k] and (ranges[k] - reference) * direction > dist_step:
            anchors.append(k)
            reference = ranges[k]
    return anchors


def select_anchors(filter_result: FilterResult, cfg: CalibConfig) -> list[int]:
    """
    Picks the accepted readings that anchor the encoder calibration.

    The origin (index 0, the launch point) is always the first anchor. On
    each leg the search moves forward in time and takes the first valid
    sample whose reading lies more than ``dist_step`` beyond the previous
    anchor in the leg's direction of travel; a false sample at the step
    boundary simply defers the anchor to the next valid one. The backward
    leg continues from the last forward anchor, so consecutive anchors are
    more than ``dist_step`` apart across the turnaround as well. Without a
    forward anchor it starts from the filter estimate at the turnaround.

    :param FilterResult filter_result: Output of the rangefinder filter.
    :param CalibConfig cfg: Anchor spacing.
    :return: Sorted anchor indices, starting with 0.
    :rtype: list[int]
    :raises NoValidReadings: If no valid reading qualifies beyond the origin.
    """
    n = len(filter_result)
    if n == 0:
        raise NoValidReadings("filter result is empty")
    ranges = filter_result.ranges.tolist()
    verdicts = filter_result.verdicts.tolist()
    apex = filter_result.apex_index

    forward = _walk_anchors(ranges, verdicts, range(1, apex + 1), 0.0, cfg.dist_step, 1.0)
    reference = ranges[forward[-1]] if forward else float(filter_result.loc_est[apex])
    backward = _walk_anchors(ranges, verdicts, range(apex + 1, n), reference, cfg.dist_step, -1.0)
    if not forward and not backward:
        raise NoValidReadings(
            f"no accepted range reading lies more than {cfg.dist_step} in from the origin "
            f"({filter_result.valid_count} of {n} readings accepted)"
        )
    return [0] + forward + backward


def calibrate_segment(positions, anchor_j: float, anchor_k: float, min_segment: float = 1e-6):
    """
    Maps one segment of encoder odometry onto its two anchor readings.

    :param positions: Encoder positions over ``[j..k]`` (inclusive), inches.
    :param float anchor_j: Anchor reading at the first sample.
    :param float anchor_k: Anchor reading at the last sample.
    :param float min_segment: Smallest acceptable encoder displacement.
    :return: The rescaled positions and the segment scale.
    :rtype: tuple[numpy.ndarray, float]
    :raises DegenerateSegment: If the encoder displacement is below
                               ``min_segment`` or the scale is not positive.
    """
    positions = np.asarray(positions, dtype=float)
    if positions.size < 2:
        raise DegenerateSegment("a segment needs at least two samples")
    travelled = positions[-1] - positions[0]
    if abs(travelled) < min_segment:
        raise DegenerateSegment(f"encoder displacement {travelled:.3g} in is below {min_segment:.3g} in")
    scale = (anchor_k - anchor_j) / travelled
    if not scale > 0:
        raise DegenerateSegment(
            f"encoder moved {travelled:.3f} in while anchors moved {anchor_k - anchor_j:.3f} in"
        )
    out = anchor_j + (positions - positions[0]) * scale
    out[0] = anchor_j
    out[-1] = anchor_k
    return out, float(scale)


def _calibrate_leg(raw, out, start, start_value, anchors, values, scale, min_segment, scales):
    """Calibrates ``raw[start:]`` up to the last anchor; returns the carry-over state."""
    j, value_j = start, start_value
    for k, value_k in zip(anchors, values):
        out[j : k + 1], scale = calibrate_segment(raw[j : k + 1], value_j, value_k, min_segment)
        scales.append(scale)
        j, value_j = k, value_k
    return j, value_j, scale


def calibrate_encoders(
    filter_result: FilterResult,
    log: SensorLog,
    cfg: CalibConfig,
    allow_uncalibrated: bool = False,
) -> CalibratedOdometry:
    """
    Forces encoder odometry through the accepted readings segment by segment.

    Each leg is cut at its anchors and every segment is mapped with
    `calibrate_segment`. Samples after a leg's last anchor keep that leg's
    last scale; the backward leg starts from the calibrated turnaround
    position so the result is continuous.

    :param FilterResult filter_result: Verdicts for ``log``.
    :param SensorLog log: The synced sensor log.
    :param CalibConfig cfg: Anchor spacing and encoder coefficient.
    :param bool allow_uncalibrated: Fall back to raw odometry, with a warning,
                                    when there is no anchor beyond the origin.
    :return: The calibrated odometry.
    :rtype: CalibratedOdometry
    :raises MismatchedLengths: If the filter result does not match the log.
    :raises NoValidReadings: If there is nothing to anchor to.
    :raises DegenerateSegment: If a segment cannot be rescaled.
    """
    if len(filter_result) != len(log):
        raise MismatchedLengths(f"filter result has {len(filter_result)} samples, log has {len(log)}")
    raw = log.encoder_positions(cfg.counts_per_inch)
    apex = filter_result.apex_index

    try:
        anchors = select_anchors(filter_result, cfg)
    except NoValidReadings as e:
        if not allow_uncalibrated:
            raise
        message = f"calibration skipped, using raw encoder odometry: {e}"
        logger.warning(message)
        return CalibratedOdometry(raw, ((0, 0.0),), (), raw, apex, (message,))

    ranges = filter_result.ranges
    forward = [k for k in anchors[1:] if k <= apex]
    backward = [k for k in anchors[1:] if k > apex]
    out = np.empty_like(raw)
    out[0] = 0.0
    scales: list[float] = []
    warnings = []

    j, value_j, scale = _calibrate_leg(
        raw, out, 0, 0.0, forward, [float(ranges[k]) for k in forward], 1.0, cfg.min_segment, scales
    )
    out[j : apex + 1] = value_j + (raw[j : apex + 1] - raw[j]) * scale
    if not forward:
        warnings.append("no anchor on the forward leg; carried raw encoder odometry to the turnaround")

    j, value_j, scale = _calibrate_leg(
        raw, out, apex, float(out[apex]), backward, [float(ranges[k]) for k in backward],
        scale, cfg.min_segment, scales,
    )
    out[j:] = value_j + (raw[j:] - raw[j]) * scale
    if not backward and apex < len(raw) - 1:
        warnings.append("no anchor on the backward leg; carried the last forward scale to the end")

    for message in warnings:
        logger.warning(message)
    anchor_pairs = ((0, 0.0),) + tuple((k, float(ranges[k])) for k in forward + backward)
    logger.debug(
        "calibrated %d segments, scales %.5f..%.5f",
        len(scales),
        min(scales, default=1.0),
        max(scales, default=1.0),
    )
    return CalibratedOdometry(out, anchor_pairs, tuple(scales), raw, apex, tuple(warnings))
