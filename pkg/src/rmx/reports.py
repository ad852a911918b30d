"""Pass/fail records shared by the checks in every module."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np


@dataclass
class BoundReport:
    """Outcome of checking ``measured <= bound`` (or the reverse) over a grid.

    ``violation`` is positive where the inequality fails by that amount.
    """

    name: str
    grid: np.ndarray
    bound: np.ndarray
    measured: np.ndarray
    violation: np.ndarray
    tolerance: float
    notes: dict[str, Any] = field(default_factory=dict)

    @property
    def max_violation(self) -> float:
        if self.violation.size == 0:
            return float("-inf")
        return float(np.max(self.violation))

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance

    def summary(self) -> dict[str, Any]:
        out = {"name": self.name, "max_violation": self.max_violation,
               "tolerance": self.tolerance, "pass": self.passed, "points": int(self.grid.size)}
        out.update({k: v for k, v in self.notes.items() if isinstance(v, (int, float, str, bool))})
        return out


def upper_report(name, grid, measured, bound, tol, **notes) -> BoundReport:
    """Report for measured <= bound."""
    grid, measured, bound = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (grid, measured, bound))
    return BoundReport(name, grid, bound, measured, measured - bound, tol, dict(notes))


def lower_report(name, grid, measured, bound, tol, **notes) -> BoundReport:
    """Report for measured >= bound."""
    grid, measured, bound = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (grid, measured, bound))
    return BoundReport(name, grid, bound, measured, bound - measured, tol, dict(notes))


def equality_report(name, grid, measured, expected, tol, **notes) -> BoundReport:
    grid, measured, expected = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (grid, measured, expected))
    return BoundReport(name, grid, expected, measured, np.abs(measured - expected), tol, dict(notes))
