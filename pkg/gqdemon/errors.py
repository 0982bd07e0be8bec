"""Exception hierarchy for gqdemon.

The CLI maps these onto exit codes; library callers can catch `GQDemonError`.
"""

from typing import Optional


class GQDemonError(Exception):
    """Base class for all gqdemon errors."""


class ValidationError(GQDemonError, ValueError):
    """A value violates one of the documented invariants.

    Attributes:
        invariant: Short name of the violated invariant (e.g. "trace", "hermitian")
    """

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class LabelError(GQDemonError, KeyError):
    """Unknown, duplicated or colliding subsystem labels."""

    def __str__(self) -> str:
        # KeyError quotes its argument; keep messages readable
        return str(self.args[0]) if self.args else ""


class StateSpecError(GQDemonError, ValueError):
    """A state specification or matrix file could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        location = ""
        if line is not None:
            location = f"line {line}"
            if column is not None:
                location += f", column {column}"
            location += ": "
        super().__init__(f"{location}{message}")
        self.line = line
        self.column = column


class NumericalError(GQDemonError, ArithmeticError):
    """A numerical routine failed (e.g. the eigensolver did not converge)."""
