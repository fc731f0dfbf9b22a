"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes, so every failure raised by the library
should derive from :class:`FoldyLaxError`.
"""


class FoldyLaxError(Exception):
    """Base class for all library errors."""


class DomainError(FoldyLaxError, ValueError):
    """Invalid point, direction or parameter passed to a pure function."""


class ConfigError(FoldyLaxError, ValueError):
    """Invalid scenario, mesh or obstacle configuration."""


class NumericalError(FoldyLaxError, ArithmeticError):
    """A linear solve failed or was too ill-conditioned to trust."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class InvertibilityError(NumericalError):
    """The Foldy-Lax system could not be inverted reliably."""

    def __init__(self, message, condition=None, report=None):
        super().__init__(message, condition)
        self.report = report


class ConditionInapplicableError(FoldyLaxError):
    """A sufficient condition was requested where its premise fails (t <= 0)."""


class UsageError(FoldyLaxError, ValueError):
    """Caller misuse that is neither a config nor a numerical problem."""
