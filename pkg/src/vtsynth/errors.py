"""Exception hierarchy shared across the package."""


class VtsynthError(Exception):
    """Base class for all errors raised by this package."""


class ModelError(VtsynthError):
    """Malformed or inconsistent model file."""


class DomainError(VtsynthError):
    """Invalid verdict-domain operation or value."""


class PipelineError(VtsynthError):
    """Invalid pipeline specification or stage precondition violation."""


class TraceError(VtsynthError):
    """Malformed observation trace or unknown action."""


class OutOfLanguage(VtsynthError):
    """Queried word is not accepted by the transition system."""
