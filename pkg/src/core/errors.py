"""
Exception hierarchy for IO*Star.

Every error raised by the library derives from :class:`IOStarError` so
callers (and the command-line tool) can trap them in one place.
Rule violations found by analyses are reported as data, not raised.
"""

from typing import Any, List, Optional


class IOStarError(Exception):
    """Base class for all library errors."""


class StackUnderflow(IOStarError):
    """Pop or top of an empty invocation stack."""


class TagPoolExhausted(IOStarError):
    """A concurrent call needs a fresh tag but the object's pool is empty."""


class UnboundVariable(IOStarError):
    """Lookup of a variable the assignment does not bind."""

    def __init__(self, name: str):
        super().__init__(f"unbound variable '{name}'")
        self.name = name


class TypeMismatch(IOStarError):
    """An operator was applied to values of the wrong kind."""


class DomainOverflow(IOStarError):
    """A value left its declared domain, or arithmetic left the integer range."""


class ArityMismatch(IOStarError):
    """A pattern and a message agree on the name but not on argument count."""


class IllegalInput(IOStarError):
    """A message the communication model can never deliver in this state."""


class EmptyInitialSet(IOStarError):
    """The init predicate admits no attribute assignment."""


class UnknownReceiver(IOStarError):
    """A message is addressed to an object that is not configured."""


class ManifestError(IOStarError):
    """A run manifest refers to something that does not exist."""


class BudgetExceeded(IOStarError):
    """
    A state budget was hit before the search finished.

    Attributes:
        partial: The result computed so far (machine or report)
    """

    def __init__(self, message: str, partial: Any = None):
        super().__init__(message)
        self.partial = partial


class DivergenceAt(IOStarError):
    """
    Replay could not reproduce a recorded choice.

    Attributes:
        step: Delivery step at which the replay diverged
    """

    def __init__(self, step: int, reason: str):
        super().__init__(f"replay diverged at step {step}: {reason}")
        self.step = step
        self.reason = reason


class DslSyntaxError(IOStarError):
    """
    A behavior or manifest file failed to parse.

    Attributes:
        errors: Every ParseError found (the parser recovers and continues)
    """

    def __init__(self, errors: List[Any], source: Optional[str] = None):
        lines = [str(error) for error in errors]
        super().__init__("\n".join(lines) if lines else "syntax error")
        self.errors = list(errors)
        self.source = source
