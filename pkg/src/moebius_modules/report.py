"""Residual reports returned by the validation routines."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

__all__ = ["Check", "Report"]


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    threshold: float

    @property
    def passed(self) -> bool:
        # NaN residuals never pass
        return bool(self.residual < self.threshold)


@dataclass
class Report:
    """Ordered collection of named residual checks plus free-form diagnostics.

    A check passes when its residual is strictly below its threshold.
    Diagnostics are recorded but never affect :attr:`passed`.
    """

    checks: dict[str, Check] = field(default_factory=dict)
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def add(self, name: str, residual: float, threshold: float) -> Check:
        check = Check(name, float(residual), float(threshold))
        self.checks[name] = check
        return check

    def add_or_note(self, name: str, residual: float, threshold: float) -> None:
        """Add a check, or only record the residual when ``threshold`` is infinite."""
        if math.isinf(threshold):
            self.note(name, float(residual))
        else:
            self.add(name, residual, threshold)

    def note(self, name: str, value: Any) -> None:
        self.diagnostics[name] = value

    def merge(self, other: "Report", prefix: str = "") -> "Report":
        for check in other.checks.values():
            self.add(prefix + check.name, check.residual, check.threshold)
        for key, value in other.diagnostics.items():
            self.note(prefix + key, value)
        return self

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failures(self) -> list[str]:
        return [c.name for c in self.checks.values() if not c.passed]

    def __getitem__(self, name: str) -> float:
        return self.checks[name].residual

    def __contains__(self, name: str) -> bool:
        return name in self.checks

    def to_dict(self) -> dict:
        return {
            "checks": [
                {
                    "name": c.name,
                    "residual": c.residual,
                    "threshold": c.threshold,
                    "passed": c.passed,
                }
                for c in self.checks.values()
            ],
            "diagnostics": self.diagnostics,
            "passed": self.passed,
        }
