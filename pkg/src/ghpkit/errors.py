from __future__ import annotations


class GhpError(Exception):
    """Base class for library errors."""


class ValidationError(GhpError, ValueError):
    """An input violates a structural invariant.

    ``invariant`` names the violated rule and ``witness`` holds the offending
    indices (e.g. ``(i, j)`` for asymmetry, ``(i, j, k)`` for a triangle).
    """

    def __init__(self, invariant: str, witness=(), message: str | None = None):
        self.invariant = invariant
        self.witness = tuple(witness)
        if message is None:
            message = f"{invariant} at {self.witness}" if self.witness else invariant
        super().__init__(message)


class BudgetExceeded(GhpError):
    """An exact computation would exceed its enumeration budget."""

    def __init__(self, what: str, size: int, budget: int):
        self.what = what
        self.size = size
        self.budget = budget
        super().__init__(f"{what}: size {size} exceeds budget {budget}")
