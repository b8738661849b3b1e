"""Exception types raised across the package."""


class ExpertMixError(ValueError):
    """Base class for all errors raised by expertmix."""


class ConfigurationError(ExpertMixError):
    """Invalid run configuration (bad N, D, dimension mismatch, bad scenario)."""


class InputError(ExpertMixError):
    """Bad per-round input: wrong count, wrong dimension or non-finite values."""

    def __init__(self, message, round_index=None):
        if round_index is not None:
            message = f"round {round_index}: {message}"
        super().__init__(message)
        self.round_index = round_index


class PreconditionError(ExpertMixError):
    """An operation was called outside its domain (empty input, eta <= 0, ...)."""


class InvariantViolation(ExpertMixError):
    """A value that must satisfy a structural invariant does not (e.g. off-simplex weights)."""


class StreamParseError(ExpertMixError):
    """Malformed stream file or run log."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
