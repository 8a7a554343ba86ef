"""Shared exception types, mapped to CLI exit codes."""


class PreconditionError(ValueError):
    """An input violates a documented precondition (CLI exit code 2)."""


class NumericalError(RuntimeError):
    """A computation failed for numerical reasons (CLI exit code 3)."""
