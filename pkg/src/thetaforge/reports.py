from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class CheckReport:
    """Outcome of a report-valued verification: never raises, lists failures."""

    name: str
    geometry: str | None = None
    checked: int = 0
    failures: list[dict[str, Any]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    values: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, **details: Any) -> None:
        self.failures.append(details)

    def note(self, text: str) -> None:
        self.notes.append(text)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        where = f" [{self.geometry}]" if self.geometry else ""
        line = f"{status} {self.name}{where}: {self.checked} checked, {len(self.failures)} failed"
        return line

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "geometry": self.geometry,
            "passed": self.passed,
            "checked": self.checked,
            "failures": [{k: _plain(v) for k, v in f.items()} for f in self.failures],
            "notes": list(self.notes),
            "values": {k: _plain(v) for k, v in self.values.items()},
        }


def _plain(v: Any) -> Any:
    from fractions import Fraction

    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    return v if isinstance(v, (int, str, float, bool, type(None))) else str(v)
