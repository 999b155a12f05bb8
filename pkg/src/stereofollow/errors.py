"""Exception types raised across the package."""
from __future__ import annotations


class StereoFollowError(Exception):
    """Base class for every error raised by stereofollow."""


class ParameterError(StereoFollowError, ValueError):
    """A constructor or function argument is outside its valid range."""


class BehindCameraError(StereoFollowError, ValueError):
    """A point with non-positive depth cannot be projected."""


class BadMatchError(StereoFollowError):
    """Left and right observations cannot be the same physical point."""


class NonPositiveDisparityError(BadMatchError, ValueError):
    """u_left - u_right <= 0, i.e. depth at or beyond infinity."""


class EpipolarViolationError(BadMatchError):
    """Left and right centers differ vertically by more than the tolerance."""


class NoAppearanceDataError(StereoFollowError):
    """No pixels survived the saturation filter, so no histogram exists."""


class NoTorsoError(StereoFollowError):
    """Shoulder/hip keypoints are missing or below the confidence floor."""


class LogParseError(StereoFollowError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class SchemaError(LogParseError):
    """A record parsed as JSON but has the wrong shape (e.g. keypoint count)."""


class AlignmentError(StereoFollowError):
    def __init__(self, message: str, frame_index: int | None = None):
        self.frame_index = frame_index
        super().__init__(message)


class ScenarioValidationError(StereoFollowError):
    """Scenario config failed validation; ``problems`` lists (field, reason)."""

    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = list(problems)
        lines = "\n".join(f"  {field}: {reason}" for field, reason in self.problems)
        super().__init__(f"invalid scenario:\n{lines}")
