"""Exception hierarchy shared by every module.

Each class carries a stable ``code`` used by the CLI as its exit status.
"""


class TXAIError(Exception):
    code = 1


class InputError(TXAIError, ValueError):
    code = 10


class DomainError(TXAIError, ValueError):
    code = 11


class ConfigurationError(TXAIError, ValueError):
    code = 12


class DegenerateDataError(TXAIError, ValueError):
    code = 13


class EmptySetError(TXAIError, ValueError):
    """Raised when an interval type-2 slice has no positive upper membership."""

    code = 14


class OrderingError(TXAIError, ValueError):
    code = 15


class StratificationError(TXAIError, ValueError):
    code = 16


class UndefinedTransitionError(TXAIError, ValueError):
    code = 17


class IngestError(TXAIError, ValueError):
    code = 18
