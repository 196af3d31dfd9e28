"""Compute budgets and error types shared across the package.

All desk-scale guards live here.  The group-exponent ceiling can be raised
or lowered with the CLOSURELAB_BUDGET_EXP environment variable.
"""

from __future__ import annotations

import os

DEFAULT_MAX_GROUP_EXPONENT = 24
DEFAULT_ENUMERATION_BUDGET = 2**24
DEFAULT_WITNESS_BUDGET = 2**24


class ClosureLabError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(ClosureLabError):
    """Operands live in different ambient spaces."""


class BudgetExceeded(ClosureLabError):
    """A desk-scale guard refused the computation."""


class DensityTooLow(ClosureLabError):
    """An input set is below the density its caller promised."""


class VerificationFailure(ClosureLabError):
    """A theorem-backed internal check failed; indicates a bug, not data."""


class IntegerOverflowGuard(ClosureLabError):
    """Exact integer arithmetic would not fit the fast signed-64 path."""


def max_group_exponent() -> int:
    """Maximum n for dense 2^n work, possibly overridden by environment."""
    raw = os.environ.get("CLOSURELAB_BUDGET_EXP")
    if raw is None:
        return DEFAULT_MAX_GROUP_EXPONENT
    try:
        value = int(raw)
    except ValueError as exc:
        raise ClosureLabError(f"CLOSURELAB_BUDGET_EXP not an integer: {raw!r}") from exc
    if value < 1:
        raise ClosureLabError(f"CLOSURELAB_BUDGET_EXP must be positive: {value}")
    return value


def check_group_exponent(n: int, limit: int | None = None) -> None:
    cap = max_group_exponent() if limit is None else limit
    if n > cap:
        raise BudgetExceeded(f"group exponent {n} exceeds budget {cap}")


def check_enumeration(count: int, limit: int = DEFAULT_ENUMERATION_BUDGET) -> None:
    if count > limit:
        raise BudgetExceeded(f"enumeration of {count} elements exceeds budget {limit}")
