# Copyright (c) 2025 mrbooo895.
#
# This software is released under the MIT License.
# https://opensource.org/licenses/MIT

"""
Labeled synthetic sensor logs for out-and-back in-pipe runs.

The simulator drives a 1-D robot into a pipe and back along a
piecewise-constant speed profile, then synthesizes what its sensors report:
track encoders that over-count because of slip and steering, and a
rangefinder that mostly reads the distance back to the launch rig but, deep
in the pipe, increasingly returns reflections off the wall. Those false
returns sit on a handful of parallel lines below the true trajectory. Every
range sample is labeled, and block detection times for the zippering test are
computed from the exact ground truth.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .errors import BlocksExceedPipe, InvalidConfig
from .model import EncoderSample, RangeSample, RunMeta, SensorLog, SyncPolicy, sync_streams

logger = logging.getLogger(__name__)

# Fraction of the validity horizon below which every return is valid.
CLEAN_ZONE_FRACTION = 0.7


@dataclass(frozen=True)
class SpeedProfile:
    """
    Piecewise-constant speed profile.

    :ivar durations: Segment durations in seconds.
    :ivar speeds: Segment speeds in inches/second (negative drives back out).
    """

    durations: tuple[float, ...]
    speeds: tuple[float, ...]

    @classmethod
    def out_and_back(cls, length: float, speed: float, dwell: float = 0.0) -> "SpeedProfile":
        leg = length / speed
        if dwell > 0:
            return cls((leg, dwell, leg), (speed, 0.0, -speed))
        return cls((leg, leg), (speed, -speed))

    @property
    def duration(self) -> float:
        return float(sum(self.durations))

    def breakpoints(self) -> tuple[np.ndarray, np.ndarray]:
        """Times and positions at the segment boundaries, starting at (0, 0)."""
        durations = np.asarray(self.durations, dtype=float)
        steps = durations * np.asarray(self.speeds, dtype=float)
        times = np.concatenate(([0.0], np.cumsum(durations)))
        positions = np.concatenate(([0.0], np.cumsum(steps)))
        return times, positions

    def truth_at(self, t) -> np.ndarray:
        times, positions = self.breakpoints()
        return np.interp(t, times, positions)


@dataclass(frozen=True)
class FalseRateCurve:
    """Probability of a false rangefinder return as a function of true distance."""

    distances: tuple[float, ...]
    probabilities: tuple[float, ...]

    def __call__(self, distance):
        return np.interp(distance, self.distances, self.probabilities)

    @classmethod
    def logistic(
        cls, validity_horizon: float, pipe_length: float, p_max: float = 0.9, knots: int = 64
    ) -> "FalseRateCurve":
        """
        Zero up to 0.7 of the validity horizon, then a logistic rise that
        reaches ``p_max`` at the pipe end.
        """
        start = CLEAN_ZONE_FRACTION * validity_horizon
        if start >= pipe_length:
            return cls((0.0, pipe_length), (0.0, 0.0))
        mid = 0.5 * (start + pipe_length)
        width = (pipe_length - start) / 10.0

        def sigmoid(x):
            return 1.0 / (1.0 + np.exp(-(x - mid) / width))

        rise = np.linspace(start, pipe_length, knots)
        scaled = (sigmoid(rise) - sigmoid(start)) / (sigmoid(pipe_length) - sigmoid(start))
        distances = np.concatenate(([0.0], rise))
        probabilities = np.concatenate(([0.0], p_max * scaled))
        return cls(tuple(distances.tolist()), tuple(probabilities.tolist()))


@dataclass(frozen=True)
class SimConfig:
    """
    Parameters of one simulated run. Distances in inches, times in seconds.

    ``false_shift_set`` and ``false_rate_curve`` may be left as None, in which
    case the shifts are drawn per run from ``false_shift_count`` /
    ``false_shift_bounds`` and the curve is the default logistic rise.
    """

    pipe_length: float
    pipe_diameter: float
    speed_profile: SpeedProfile
    counts_per_inch: float
    encoder_bias: float = 0.005
    encoder_slip_std: float = 0.002
    steering_counts_std: float = 0.0
    range_noise_std: float = 0.05
    validity_horizon: float = 840.0
    false_shift_set: tuple[float, ...] | None = None
    false_rate_curve: FalseRateCurve | None = None
    seed: int = 0
    encoder_rate_hz: float = 50.0
    range_rate_hz: float = 10.0
    false_shift_count: tuple[int, int] = (3, 6)
    false_shift_bounds: tuple[float, float] = (24.0, 600.0)
    false_rate_max: float = 0.9
    block_spacing: float = 48.0
    block_count: int = 25

    def __post_init__(self):
        self._validate()

    def _validate(self):
        for name in ("pipe_length", "pipe_diameter", "counts_per_inch", "validity_horizon"):
            if not getattr(self, name) > 0:
                raise InvalidConfig(name, "must be positive")
        for name in ("encoder_rate_hz", "range_rate_hz"):
            if not getattr(self, name) > 0:
                raise InvalidConfig(name, "must be positive")
        for name in ("encoder_bias", "encoder_slip_std", "steering_counts_std", "range_noise_std"):
            if not getattr(self, name) >= 0:
                raise InvalidConfig(name, "must be non-negative")
        if not 0.0 <= self.false_rate_max <= 1.0:
            raise InvalidConfig("false_rate_max", "must lie in [0, 1]")

        profile = self.speed_profile
        if len(profile.durations) != len(profile.speeds) or not profile.durations:
            raise InvalidConfig("speed_profile", "durations and speeds must be non-empty and paired")
        if any(d <= 0 for d in profile.durations):
            raise InvalidConfig("speed_profile", "segment durations must be positive")
        # forward first, then back: no negative speed may precede a positive one
        seen_backward = False
        for speed in profile.speeds:
            if speed < 0:
                seen_backward = True
            elif speed > 0 and seen_backward:
                raise InvalidConfig("speed_profile", "profile must be a single out-and-back")
        _, positions = profile.breakpoints()
        tolerance = 1e-6 * self.pipe_length
        if positions.max() > self.pipe_length + tolerance:
            raise InvalidConfig("speed_profile", "profile drives past the pipe end")
        if positions.max() <= 0:
            raise InvalidConfig("speed_profile", "profile never enters the pipe")
        if abs(positions[-1]) > tolerance:
            raise InvalidConfig("speed_profile", "profile does not return to the launch point")

        if self.false_shift_set is not None:
            if not self.false_shift_set or any(s <= 0 for s in self.false_shift_set):
                raise InvalidConfig("false_shift_set", "shifts must be positive")
        low_count, high_count = self.false_shift_count
        if not 1 <= low_count <= high_count:
            raise InvalidConfig("false_shift_count", "need 1 <= min <= max")
        low_shift, high_shift = self.false_shift_bounds
        if not 0 < low_shift <= high_shift:
            raise InvalidConfig("false_shift_bounds", "need 0 < min <= max")
        if self.false_rate_curve is not None:
            curve = self.false_rate_curve
            if len(curve.distances) != len(curve.probabilities) or not curve.distances:
                raise InvalidConfig("false_rate_curve", "distances and probabilities must be paired")
            if any(not 0.0 <= p <= 1.0 for p in curve.probabilities):
                raise InvalidConfig("false_rate_curve", "probabilities must lie in [0, 1]")
            if any(b <= a for a, b in zip(curve.distances, curve.distances[1:])):
                raise InvalidConfig("false_rate_curve", "distances must be strictly increasing")
        if self.block_spacing <= 0:
            raise InvalidConfig("block_spacing", "must be positive")
        if self.block_count < 0:
            raise InvalidConfig("block_count", "must be non-negative")
        if self.block_spacing * self.block_count > positions.max() + tolerance:
            raise InvalidConfig("block_count", "blocks extend past the turnaround point")

    @property
    def meta(self) -> RunMeta:
        return RunMeta(self.pipe_diameter, self.pipe_length, self.counts_per_inch)

    def resolved_false_rate_curve(self) -> FalseRateCurve:
        if self.false_rate_curve is not None:
            return self.false_rate_curve
        return FalseRateCurve.logistic(self.validity_horizon, self.pipe_length, self.false_rate_max)


@dataclass(frozen=True)
class GroundTruth:
    """True robot position at every synced timestamp."""

    t: np.ndarray
    positions: np.ndarray
    apex_index: int

    def __post_init__(self):
        for name in ("t", "positions"):
            array = np.array(getattr(self, name), dtype=float)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    def __len__(self) -> int:
        return int(self.positions.shape[0])


@dataclass(frozen=True)
class BlockEvent:
    """Forward and backward detection times of one block."""

    block_id: int
    t_f: float
    t_b: float
    true_position: float


@dataclass(frozen=True)
class LabeledLog:
    """
    A simulated log with its ground truth.

    :ivar range_valid: True where the range sample is a valid return.
    """

    log: SensorLog
    truth: GroundTruth
    range_valid: np.ndarray
    block_events: tuple[BlockEvent, ...] = field(default_factory=tuple)
    false_shifts: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        valid = np.array(self.range_valid, dtype=bool)
        valid.setflags(write=False)
        object.__setattr__(self, "range_valid", valid)
        if valid.shape != (len(self.log),) or len(self.truth) != len(self.log):
            raise ValueError("labels and truth must align with the log")


def _sample_times(duration: float, rate_hz: float) -> np.ndarray:
    count = int(math.floor(duration * rate_hz + 1e-9)) + 1
    # index / rate keeps the range grid bit-identical to its encoder counterparts
    return np.arange(count) / rate_hz


def _draw_false_shifts(cfg: SimConfig, rng: np.random.Generator) -> np.ndarray:
    if cfg.false_shift_set is not None:
        return np.sort(np.asarray(cfg.false_shift_set, dtype=float))
    low_count, high_count = cfg.false_shift_count
    count = int(rng.integers(low_count, high_count + 1))
    low, high = cfg.false_shift_bounds
    return np.sort(rng.uniform(low, high, count))


def generate_run(cfg: SimConfig) -> LabeledLog:
    """
    Generates one labeled out-and-back run.

    The encoder stream is sampled at ``encoder_rate_hz`` and the rangefinder
    at ``range_rate_hz``; the two are merged with `sync_streams`, so the
    returned log has one row per rangefinder sample.

    :param SimConfig cfg: Simulation parameters, including the seed.
    :return: The synthetic log, its ground truth, labels and block events.
    :rtype: LabeledLog
    """
    rng = np.random.default_rng(cfg.seed)
    profile = cfg.speed_profile
    shifts = _draw_false_shifts(cfg, rng)

    # --- Encoders ---
    enc_t = _sample_times(profile.duration, cfg.encoder_rate_hz)
    enc_truth = profile.truth_at(enc_t)
    steps = np.diff(enc_truth)
    # slip and steering only ever lengthen the measured path
    factor = np.maximum(1.0, 1.0 + cfg.encoder_bias + rng.normal(0.0, cfg.encoder_slip_std, steps.size))
    excess = np.concatenate(([0.0], np.cumsum(steps * (factor - 1.0))))
    center = (enc_truth + excess) * cfg.counts_per_inch
    steering = np.concatenate(([0.0], np.cumsum(rng.normal(0.0, cfg.steering_counts_std, steps.size))))
    left = center + steering
    right = center - steering

    # --- Rangefinder ---
    rng_t = _sample_times(profile.duration, cfg.range_rate_hz)
    rng_t = rng_t[rng_t <= enc_t[-1]]
    truth = profile.truth_at(rng_t)
    p_false = cfg.resolved_false_rate_curve()(truth)
    wants_false = rng.random(rng_t.size) < p_false
    noise = rng.normal(0.0, cfg.range_noise_std, rng_t.size)
    eligible = np.searchsorted(shifts, truth, side="left")
    pick = np.minimum((rng.random(rng_t.size) * eligible).astype(int), np.maximum(eligible - 1, 0))
    is_false = wants_false & (eligible > 0)
    ranges = np.where(is_false, truth - shifts[pick] + noise, truth + noise)
    ranges = np.maximum(ranges, 0.0)

    encoder_stream = [EncoderSample(t, l, r) for t, l, r in zip(enc_t.tolist(), left.tolist(), right.tolist())]
    range_stream = [RangeSample(t, r) for t, r in zip(rng_t.tolist(), ranges.tolist())]
    log = sync_streams(encoder_stream, range_stream, SyncPolicy.LINEAR, cfg.meta)

    ground_truth = GroundTruth(log.t, truth, int(np.argmax(truth)))
    blocks = tuple(place_blocks(cfg, cfg.block_spacing, cfg.block_count)) if cfg.block_count else ()

    logger.debug(
        "seed %d: %d samples, %d false returns, shifts %s",
        cfg.seed,
        len(log),
        int(is_false.sum()),
        np.round(shifts, 1).tolist(),
    )
    return LabeledLog(log, ground_truth, ~is_false, blocks, tuple(shifts.tolist()))


def generate_runs(cfg: SimConfig, seeds: Iterable[int]) -> list[LabeledLog]:
    return [generate_run(replace(cfg, seed=seed)) for seed in seeds]


def _crossing_time(times: np.ndarray, positions: np.ndarray, target: float) -> float:
    """First time a non-decreasing piecewise-linear path reaches ``target``."""
    idx = int(np.searchsorted(positions, target, side="left"))
    if positions[idx] == target or idx == 0:
        return float(times[idx])
    p0, p1 = positions[idx - 1], positions[idx]
    t0, t1 = times[idx - 1], times[idx]
    return float(t0 + (target - p0) / (p1 - p0) * (t1 - t0))


def place_blocks(cfg: SimConfig, spacing: float, count: int) -> list[BlockEvent]:
    """
    Places ``count`` blocks ``spacing`` inches apart and times their detection.

    Block ``n`` sits at ``n * spacing``. Its forward and backward detection
    times are the exact moments the ground-truth path crosses that position
    on each leg.

    :param SimConfig cfg: Simulation parameters (only the pipe and the speed
                          profile are used).
    :param float spacing: Distance between blocks in inches.
    :param int count: Number of blocks.
    :return: One event per block, sorted by block id.
    :rtype: list[BlockEvent]
    :raises BlocksExceedPipe: If the last block lies beyond the pipe or the
                              turnaround point.
    """
    if count == 0:
        return []
    if spacing <= 0 or count < 0:
        raise BlocksExceedPipe(f"invalid block layout: spacing={spacing}, count={count}")
    last = spacing * count
    if last > cfg.pipe_length:
        raise BlocksExceedPipe(f"{count} blocks at {spacing} in span {last} in, pipe is {cfg.pipe_length} in")

    times, positions = cfg.speed_profile.breakpoints()
    apex = positions.max()
    if last > apex:
        raise BlocksExceedPipe(f"last block at {last} in lies beyond the turnaround at {apex} in")
    first_apex = int(np.argmax(positions))
    last_apex = int(positions.size - 1 - np.argmax(positions[::-1]))
    forward_t, forward_p = times[: first_apex + 1], positions[: first_apex + 1]
    backward_t, backward_p = times[last_apex:][::-1], positions[last_apex:][::-1]

    events = []
    for n in range(1, count + 1):
        target = n * spacing
        events.append(
            BlockEvent(
                block_id=n,
                t_f=_crossing_time(forward_t, forward_p, target),
                t_b=_crossing_time(backward_t, backward_p, target),
                true_position=target,
            )
        )
    return events
