"""
Search Budgets and Verdicts
===========================
Shared plumbing for the budgeted backtracking searches: a node-expansion
budget and the three-valued verdict every search returns.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Generic, TypeVar

from coarsegraph.config import get_settings
from coarsegraph.errors import BudgetError

logger = logging.getLogger(__name__)

W = TypeVar("W")


class VerdictKind(str, Enum):
    FOUND = "found"
    NONE_EXHAUSTIVE = "none-exhaustive"
    INCONCLUSIVE = "inconclusive"

    @property
    def exit_code(self) -> int:
        """0 found, 1 definitively none, 2 inconclusive."""
        return _EXIT_CODES[self]


_EXIT_CODES = {
    VerdictKind.FOUND: 0,
    VerdictKind.NONE_EXHAUSTIVE: 1,
    VerdictKind.INCONCLUSIVE: 2,
}


class BudgetExhausted(Exception):
    """Raised inside a search when its budget runs out; never escapes a search."""


class SearchBudget:
    """
    A finite number of node expansions a search may spend.

    The counter is mutable; give every independent search its own budget
    (``fresh()`` returns an unspent copy).
    """

    def __init__(self, max_expansions: int):
        if isinstance(max_expansions, bool) or not isinstance(max_expansions, (int, float)):
            raise BudgetError(f"budget must be a node count, got {max_expansions!r}")
        if isinstance(max_expansions, float):
            if not math.isfinite(max_expansions) or not max_expansions.is_integer():
                raise BudgetError(f"budget must be a finite whole number, got {max_expansions!r}")
            max_expansions = int(max_expansions)
        if max_expansions <= 0:
            raise BudgetError(f"budget must be positive, got {max_expansions}")
        self.max_expansions = max_expansions
        self.used = 0

    def __repr__(self) -> str:
        return f"SearchBudget({self.used}/{self.max_expansions})"

    def charge(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.max_expansions:
            raise BudgetExhausted()

    @property
    def remaining(self) -> int:
        return max(self.max_expansions - self.used, 0)

    def fresh(self) -> "SearchBudget":
        return SearchBudget(self.max_expansions)


def coerce_budget(budget: SearchBudget | int | None) -> SearchBudget:
    """Accept a SearchBudget, a plain expansion count, or None for the configured default."""
    if budget is None:
        return SearchBudget(get_settings().default_budget)
    if isinstance(budget, SearchBudget):
        return budget
    return SearchBudget(budget)


@dataclass(frozen=True)
class SearchVerdict(Generic[W]):
    """Found(witness) | NoneExhaustive | Inconclusive, plus the expansions spent."""

    kind: VerdictKind
    witness: W | None = None
    expansions: int = 0

    @classmethod
    def found(cls, witness: W, expansions: int = 0) -> "SearchVerdict[W]":
        return cls(VerdictKind.FOUND, witness, expansions)

    @classmethod
    def none_exhaustive(cls, expansions: int = 0) -> "SearchVerdict[W]":
        return cls(VerdictKind.NONE_EXHAUSTIVE, None, expansions)

    @classmethod
    def inconclusive(cls, expansions: int = 0) -> "SearchVerdict[W]":
        return cls(VerdictKind.INCONCLUSIVE, None, expansions)

    @property
    def is_found(self) -> bool:
        return self.kind is VerdictKind.FOUND

    @property
    def exit_code(self) -> int:
        return self.kind.exit_code
