"""Exception types raised across the toolkit."""


class RisdmError(Exception):
    """Base class for all toolkit errors."""


class UsageError(RisdmError, ValueError):
    """A caller passed arguments outside an operation's domain."""


class ConfigurationError(RisdmError, ValueError):
    """Inconsistent or invalid experiment configuration.

    ``key`` names the offending configuration entry when known.
    """

    def __init__(self, message, key=None):
        super().__init__(message if key is None else f"{key}: {message}")
        self.key = key
        self.reason = message


class InfeasibleAmplitudeError(RisdmError, ValueError):
    """Requested harmonic amplitude exceeds what 1-bit switching can produce."""


class FramingError(RisdmError, ValueError):
    """Bit or symbol stream length does not fit the requested framing."""


class SyncError(RisdmError, RuntimeError):
    """Frame synchronization could not find an unambiguous correlation peak."""


class EqualizationError(RisdmError, RuntimeError):
    """Pilot symbols carry no energy, so no channel gain can be estimated."""


class ScheduleParseError(RisdmError, ValueError):
    """Malformed schedule file. ``line`` is 1-based."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
