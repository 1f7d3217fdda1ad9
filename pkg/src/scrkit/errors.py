"""Exception and warning types shared across the package."""


class ScrKitError(Exception):
    """Base class for every error raised by this package."""


class ReportParseError(ScrKitError):
    """A report file row could not be parsed.

    Carries the 1-based line number of the offending row when known.
    """

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class DataValidationError(ScrKitError):
    """Parsed data violates a structural invariant (coverage, duplicates, pairing)."""


class DomainError(ScrKitError):
    """A numeric precondition does not hold (degenerate sample, zero normalizer, ...)."""


class ConfigurationError(ScrKitError):
    """Configuration is incomplete or inconsistent with the data it is applied to."""


class EstimationError(ScrKitError):
    """An estimation routine failed to converge or produced an inconsistent result."""


class ResolutionError(ScrKitError):
    """A numerical engine cannot meet its accuracy contract with the given settings."""


class UsageError(ScrKitError):
    """An operation was called with arguments it is not meant for."""


class DataQualityWarning(UserWarning):
    """Input is usable but suspicious (negative outstanding claims, missing premium, ...)."""
