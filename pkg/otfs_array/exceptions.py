"""Exceptions for the otfs_array package."""
from __future__ import annotations


class OtfsArrayError(Exception):
    """Base error for the OTFS array simulator."""


class ConfigurationError(OtfsArrayError):
    """Error to indicate an invalid configuration."""

    def __init__(self, message: str, key: str | None = None) -> None:
        """Initialize the error with the offending config key, if any."""
        super().__init__(message if key is None else f"{key}: {message}")
        self.key = key


class SizeError(OtfsArrayError, ValueError):
    """Error to indicate mismatched dimensions or counts."""


class DomainError(OtfsArrayError, ValueError):
    """Error to indicate an argument outside its domain."""


class RankError(OtfsArrayError):
    """Error to indicate a rank-deficient channel matrix."""


class DegenerateCombineError(OtfsArrayError):
    """Error to indicate that branch combining has zero total gain."""


class OracleMismatchError(OtfsArrayError):
    """Error to indicate that two equivalent computations disagree."""


class TrialFailed(OtfsArrayError):
    """Error to indicate that a Monte-Carlo trial could not complete."""
