# Copyright (c) 2025 mrbooo895.
#
# This software is released under the MIT License.
# https://opensource.org/licenses/MIT

"""
Exception types raised by the pipeloc library.

Every error carries the exit code the command-line tool reports for it, so
the command layer can translate a library failure into the documented exit
status without a lookup table of its own.
"""


class PipelocError(ValueError):
    """Base class for all pipeloc errors."""

    exit_code = 1


class InvalidConfig(PipelocError):
    """A configuration value is missing, mistyped or out of range."""

    exit_code = 2

    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"invalid config field '{field}': {reason}")


class LogParseError(PipelocError):
    """An input file could not be read or parsed."""

    exit_code = 3


class NoValidReadings(PipelocError):
    """No accepted rangefinder reading exists to anchor the encoders."""

    exit_code = 4


class MismatchedLengths(PipelocError):
    """Two series that must be index-aligned have different lengths."""

    exit_code = 5


class EmptyOverlap(PipelocError):
    """The encoder and rangefinder streams do not overlap in time."""


class NonMonotoneInput(PipelocError):
    """A stream's timestamps are not strictly increasing."""


class NonPositiveCoefficient(PipelocError):
    """The counts-per-inch coefficient is zero or negative."""


class BlocksExceedPipe(PipelocError):
    """Requested block layout does not fit the pipe or the trajectory."""


class EmptyLog(PipelocError):
    """An operation received a log with no samples."""


class DegenerateSegment(PipelocError):
    """An anchor segment has (near) zero or reversed encoder displacement."""


class SingularSystem(PipelocError):
    """The information matrix of a factor graph is not positive definite."""


class TimestampOutOfRange(PipelocError):
    """A block detection time lies outside the trajectory time span."""

    def __init__(self, block_id: int, t: float, span: tuple[float, float]):
        self.block_id = block_id
        super().__init__(
            f"block {block_id} detection time {t:.6f} s outside trajectory span "
            f"[{span[0]:.6f}, {span[1]:.6f}] s"
        )


class EmptyInput(PipelocError):
    """An aggregate was requested over zero runs."""
