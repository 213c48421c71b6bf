# Copyright (c) 2025 mrbooo895.
#
# This software is released under the MIT License.
# https://opensource.org/licenses/MIT

"""
Encoder-referenced rangefinder filter.

Encoder odometry is a poor long-range position estimate but an excellent
short-range one. The filter walks the log once, propagating the last
position estimate with the encoder increment and then testing the
rangefinder reading against it: readings farther than ``thres`` from the
prediction are eliminated, the rest replace the estimate. Because each
accepted reading resets the estimate, encoder drift only accumulates across
the gap since the last valid reading.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyLog, InvalidConfig, NonPositiveCoefficient
from .model import RangeSample, SensorLog

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FilterConfig:
    """
    :ivar thres: Acceptance half-width in inches.
    :ivar counts_per_inch: Encoder coefficient C.
    :ivar max_consecutive_rejections: Length of a rejection run that triggers
                                      a divergence warning.
    """

    thres: float = 6.0
    counts_per_inch: float = 1.0
    max_consecutive_rejections: int = 500

    def __post_init__(self):
        if not self.thres > 0:
            raise InvalidConfig("thres", "must be positive")
        if not self.counts_per_inch > 0:
            raise InvalidConfig("counts_per_inch", "must be positive")
        if self.max_consecutive_rejections < 1:
            raise InvalidConfig("max_consecutive_rejections", "must be at least 1")


@dataclass(frozen=True)
class FilterResult:
    """
    :ivar loc_est: Reference position estimate per sample, inches.
    :ivar verdicts: True where the range sample was accepted as valid.
    :ivar predicted: Encoder-propagated estimate each sample was tested against.
    """

    loc_est: np.ndarray
    verdicts: np.ndarray
    predicted: np.ndarray
    ranges: np.ndarray
    t: np.ndarray
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        for name in ("loc_est", "verdicts", "predicted", "ranges", "t"):
            array = np.array(getattr(self, name), dtype=bool if name == "verdicts" else float)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    def __len__(self) -> int:
        return int(self.verdicts.shape[0])

    @property
    def accepted_indices(self) -> np.ndarray:
        return np.flatnonzero(self.verdicts)

    @property
    def accepted_ranges(self) -> list[RangeSample]:
        return [RangeSample(float(self.t[i]), float(self.ranges[i])) for i in self.accepted_indices]

    @property
    def valid_count(self) -> int:
        return int(self.verdicts.sum())

    @property
    def false_count(self) -> int:
        return len(self) - self.valid_count

    @property
    def apex_index(self) -> int:
        """Turnaround sample: the first maximum of the position estimate."""
        return int(np.argmax(self.loc_est))


def predict_step(loc_prev: float, ec_k: float, ec_prev: float, counts_per_inch: float) -> float:
    """
    Propagates the position estimate by one encoder increment.

    :param float loc_prev: Previous estimate in inches.
    :param float ec_k: Averaged encoder counts at the current sample.
    :param float ec_prev: Averaged encoder counts at the previous sample.
    :param float counts_per_inch: Encoder coefficient C.
    :return: ``loc_prev + (ec_k - ec_prev) / C``.
    :rtype: float
    :raises NonPositiveCoefficient: If C is zero or negative.
    """
    if counts_per_inch <= 0:
        raise NonPositiveCoefficient(f"counts per inch must be positive, got {counts_per_inch}")
    return loc_prev + (ec_k - ec_prev) / counts_per_inch


def filter_rangefinder(log: SensorLog, cfg: FilterConfig) -> FilterResult:
    """
    Classifies every range sample as valid or false in one pass over the log.

    ``loc_est[0]`` is 0 (the launch point). At each later sample the estimate
    is first propagated with `predict_step`; a reading within ``cfg.thres``
    of that prediction is accepted and becomes the new estimate, otherwise it
    is eliminated and the prediction is kept. The recursion does not care
    about the direction of travel, so the whole out-and-back log is processed
    at once.

    :param SensorLog log: Synced sensor log.
    :param FilterConfig cfg: Threshold and encoder coefficient.
    :return: Verdicts and the reference estimate series.
    :rtype: FilterResult
    :raises EmptyLog: If the log has no samples.
    """
    if len(log) == 0:
        raise EmptyLog("cannot filter an empty log")

    counts = log.average_counts().tolist()
    ranges = log.range.tolist()
    n = len(counts)
    thres = cfg.thres
    c = cfg.counts_per_inch

    loc_est = [0.0] * n
    predicted = [0.0] * n
    verdicts = [False] * n
    verdicts[0] = abs(ranges[0]) <= thres

    warnings = []
    run_start, run_length, longest_run = None, 0, 0
    for k in range(1, n):
        prediction = predict_step(loc_est[k - 1], counts[k], counts[k - 1], c)
        predicted[k] = prediction
        if abs(prediction - ranges[k]) > thres:
            loc_est[k] = prediction
            if run_length == 0:
                run_start = k
            run_length += 1
            if run_length == cfg.max_consecutive_rejections + 1:
                message = (
                    f"more than {cfg.max_consecutive_rejections} consecutive readings rejected "
                    f"from t={log.t[run_start]:.3f} s; encoder estimate may have run away"
                )
                logger.warning(message)
                warnings.append(message)
        else:
            loc_est[k] = ranges[k]
            verdicts[k] = True
            longest_run = max(longest_run, run_length)
            run_length = 0

    logger.debug(
        "filtered %d samples: %d valid, longest rejection run %d",
        n,
        sum(verdicts),
        max(longest_run, run_length),
    )
    return FilterResult(loc_est, verdicts, predicted, log.range, log.t, tuple(warnings))


def classification_scores(verdicts, labels_valid) -> dict[str, float]:
    """
    Precision and recall of the false class against reference labels.

    :param verdicts: Filter verdicts, True for valid.
    :param labels_valid: Reference labels, True for valid.
    :return: ``{"precision": ..., "recall": ...}``; a metric with an empty
             denominator is reported as 1.0.
    :rtype: dict[str, float]
    """
    flagged = ~np.asarray(verdicts, dtype=bool)
    actual = ~np.asarray(labels_valid, dtype=bool)
    true_positive = int(np.sum(flagged & actual))
    flagged_count = int(flagged.sum())
    actual_count = int(actual.sum())
    return {
        "precision": true_positive / flagged_count if flagged_count else 1.0,
        "recall": true_positive / actual_count if actual_count else 1.0,
    }
