"""Failure taxonomy shared across the package.

Plain parameter errors raise ValueError.  The two classes below cover the
remaining contract failures: blown enumeration guards and provers that
exceed a declared certificate budget.
"""

from __future__ import annotations


class GuardExceeded(RuntimeError):
    """A brute-force enumeration or retry loop would exceed its guard."""


class BudgetViolation(RuntimeError):
    """A prover returned more certificate bits than the declared cap."""
