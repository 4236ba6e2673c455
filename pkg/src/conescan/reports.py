"""Pass/fail constraint reports and their CSV/text renderings."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    value: float
    limit: float
    unit: str
    passed: bool
    relation: str = "<="

    def describe(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict}  {self.name}: {self.value:.4f} {self.unit} (limit {self.relation} {self.limit:.4f})"


@dataclass(frozen=True)
class ConstraintReport:
    checks: tuple[ConstraintCheck, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> ConstraintCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def names(self) -> list[str]:
        return [c.name for c in self.checks]

    def to_text(self) -> str:
        lines = [c.describe() for c in self.checks]
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["name", "value", "relation", "limit", "unit", "passed"])
        for c in self.checks:
            writer.writerow([c.name, repr(float(c.value)), c.relation, repr(float(c.limit)), c.unit, int(c.passed)])
        return buf.getvalue()


def check_max(name, value, limit, unit) -> ConstraintCheck:
    return ConstraintCheck(name, float(value), float(limit), unit, bool(value <= limit), "<=")


def check_min(name, value, limit, unit, strict=False) -> ConstraintCheck:
    ok = value > limit if strict else value >= limit
    return ConstraintCheck(name, float(value), float(limit), unit, bool(ok), ">" if strict else ">=")
