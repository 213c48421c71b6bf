# Copyright (c) 2025 mrbooo895.
#
# This software is released under the MIT License.
# https://opensource.org/licenses/MIT

"""
Shared domain types and unit conventions for pipeloc.

Distances are inches and times are seconds everywhere inside the library;
feet only appear when a report is rendered. A `SensorLog` stores its streams
column-wise as read-only numpy arrays, one row per synced timestamp.
"""

import enum
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import EmptyLog, EmptyOverlap, NonMonotoneInput, NonPositiveCoefficient

INCHES_PER_FOOT = 12.0


def feet(inches):
    """Converts inches to feet (scalar or array)."""
    return inches / INCHES_PER_FOOT


def _frozen(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class EncoderSample:
    t: float
    left: float
    right: float


@dataclass(frozen=True)
class RangeSample:
    t: float
    range: float


@dataclass(frozen=True)
class RunMeta:
    """Static description of the pipe and the drive train for one run."""

    pipe_diameter: float
    pipe_length: float
    counts_per_inch: float

    def __post_init__(self):
        for name in ("pipe_diameter", "pipe_length", "counts_per_inch"):
            if not getattr(self, name) > 0:
                raise ValueError(f"RunMeta.{name} must be positive")


class SyncPolicy(enum.Enum):
    """How encoder counts are resampled onto rangefinder timestamps."""

    LINEAR = "linear"
    NEAREST = "nearest"


@dataclass(frozen=True)
class SensorLog:
    """
    Timestamp-synced encoder and rangefinder streams for one run.

    :ivar t: Sample times in seconds, strictly increasing.
    :ivar left: Left-track encoder counts.
    :ivar right: Right-track encoder counts.
    :ivar range: Rangefinder readings in inches.
    :ivar meta: Pipe and drive-train description, if known.
    """

    t: np.ndarray
    left: np.ndarray
    right: np.ndarray
    range: np.ndarray
    meta: RunMeta | None = None

    def __post_init__(self):
        for name in ("t", "left", "right", "range"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        n = self.t.shape[0]
        if n == 0:
            raise EmptyLog("sensor log has no samples")
        if any(getattr(self, name).shape != (n,) for name in ("left", "right", "range")):
            raise ValueError("sensor log streams must be one-dimensional and aligned")
        if n > 1 and not np.all(np.diff(self.t) > 0):
            raise NonMonotoneInput("sensor log timestamps are not strictly increasing")
        if not (np.all(np.isfinite(self.left)) and np.all(np.isfinite(self.right))):
            raise ValueError("encoder counts must be finite")
        if not (np.all(np.isfinite(self.range)) and np.all(self.range >= 0)):
            raise ValueError("range readings must be finite and non-negative")

    def __len__(self) -> int:
        return int(self.t.shape[0])

    def samples(self) -> Iterator[tuple[float, EncoderSample, RangeSample]]:
        for t, left, right, rng in zip(
            self.t.tolist(), self.left.tolist(), self.right.tolist(), self.range.tolist()
        ):
            yield t, EncoderSample(t, left, right), RangeSample(t, rng)

    def average_counts(self) -> np.ndarray:
        """Track-averaged encoder counts, one value per sample."""
        return (self.left + self.right) / 2.0

    def encoder_positions(self, counts_per_inch: float) -> np.ndarray:
        """Raw encoder odometry in inches, zero at the first sample."""
        if counts_per_inch <= 0:
            raise NonPositiveCoefficient(f"counts per inch must be positive, got {counts_per_inch}")
        counts = self.average_counts()
        return (counts - counts[0]) / counts_per_inch

    def subset(self, indices: Sequence[int]) -> "SensorLog":
        indices = np.asarray(indices, dtype=int)
        return SensorLog(
            self.t[indices], self.left[indices], self.right[indices], self.range[indices], self.meta
        )


def average_encoders(sample: EncoderSample) -> float:
    """
    Averages the two track encoders into the robot-centre count.

    :param EncoderSample sample: Encoder counts of both tracks.
    :return: ``(left + right) / 2``.
    :rtype: float
    """
    return (sample.left + sample.right) / 2.0


def counts_to_distance(counts: float, counts_per_inch: float) -> float:
    """
    Converts encoder counts to inches.

    :param float counts: Encoder counts.
    :param float counts_per_inch: Drive-train coefficient C in counts/inch.
    :return: Distance in inches.
    :rtype: float
    :raises NonPositiveCoefficient: If C is zero or negative.
    """
    if counts_per_inch <= 0:
        raise NonPositiveCoefficient(f"counts per inch must be positive, got {counts_per_inch}")
    return counts / counts_per_inch


def _check_stream_times(times: np.ndarray, name: str):
    if times.size == 0:
        raise EmptyLog(f"{name} stream is empty")
    if times.size > 1 and not np.all(np.diff(times) > 0):
        raise NonMonotoneInput(f"{name} stream timestamps are not strictly increasing")


def sync_streams(
    encoder_stream: Sequence[EncoderSample],
    range_stream: Sequence[RangeSample],
    policy: SyncPolicy = SyncPolicy.LINEAR,
    meta: RunMeta | None = None,
) -> SensorLog:
    """
    Resamples the encoder stream onto the rangefinder timestamps.

    Rangefinder samples are kept verbatim; only those inside the time span
    covered by both streams survive. Encoder counts are never extrapolated.

    :param encoder_stream: Time-sorted encoder samples.
    :param range_stream: Time-sorted rangefinder samples.
    :param SyncPolicy policy: Resampling rule for the encoder counts.
    :param RunMeta meta: Optional run description attached to the log.
    :return: The synced log.
    :rtype: SensorLog
    :raises NonMonotoneInput: If either stream is not strictly increasing.
    :raises EmptyOverlap: If the two streams do not overlap in time.
    """
    enc_t = np.array([s.t for s in encoder_stream], dtype=float)
    enc_left = np.array([s.left for s in encoder_stream], dtype=float)
    enc_right = np.array([s.right for s in encoder_stream], dtype=float)
    rng_t = np.array([s.t for s in range_stream], dtype=float)
    rng_val = np.array([s.range for s in range_stream], dtype=float)

    _check_stream_times(enc_t, "encoder")
    _check_stream_times(rng_t, "range")

    keep = (rng_t >= enc_t[0]) & (rng_t <= enc_t[-1])
    if not keep.any():
        raise EmptyOverlap(
            f"encoder span [{enc_t[0]}, {enc_t[-1]}] s and range span "
            f"[{rng_t[0]}, {rng_t[-1]}] s do not overlap"
        )
    times = rng_t[keep]

    match policy:
        case SyncPolicy.LINEAR:
            left = np.interp(times, enc_t, enc_left)
            right = np.interp(times, enc_t, enc_right)
        case SyncPolicy.NEAREST:
            if enc_t.size == 1:
                nearest = np.zeros(times.size, dtype=int)
            else:
                upper = np.clip(np.searchsorted(enc_t, times, side="left"), 1, enc_t.size - 1)
                lower = upper - 1
                # ties resolve to the earlier encoder sample
                take_upper = (enc_t[upper] - times) < (times - enc_t[lower])
                nearest = np.where(take_upper, upper, lower)
            left = enc_left[nearest]
            right = enc_right[nearest]
        case _:
            raise ValueError(f"unknown sync policy {policy!r}")

    return SensorLog(times, left, right, rng_val[keep], meta)
