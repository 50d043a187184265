"""Check results."""

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class Report:
    """Residual statistics for one checked relation.

    ``passed`` holds exactly when the residual is within tolerance and at
    least one vector was checked.
    """

    relation_id: str
    max_residual: float
    vectors_checked: int
    vectors_skipped: int
    tolerance: float
    details: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        # plain Python numbers so reports serialize to JSON
        object.__setattr__(self, "max_residual", float(self.max_residual))
        object.__setattr__(self, "vectors_checked", int(self.vectors_checked))
        object.__setattr__(self, "vectors_skipped", int(self.vectors_skipped))
        object.__setattr__(self, "tolerance", float(self.tolerance))

    @property
    def passed(self) -> bool:
        return bool(self.vectors_checked >= 1 and self.max_residual <= self.tolerance)

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "relation_id": self.relation_id,
            "max_residual": self.max_residual,
            "vectors_checked": self.vectors_checked,
            "vectors_skipped": self.vectors_skipped,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
        if self.details:
            data["details"] = list(self.details)
        return data


def reports_pass(reports: list[Report]) -> bool:
    """Return True if every report passed (and there is at least one)."""
    return bool(reports) and all(report.passed for report in reports)
