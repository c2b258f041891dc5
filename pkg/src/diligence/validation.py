"""Shared validation-report types used by graph and payload validators."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    subject: str = ""

    def __str__(self) -> str:
        if self.subject:
            return f"[{self.code}] {self.subject}: {self.message}"
        return f"[{self.code}] {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, code: str, message: str, subject: str = "") -> None:
        self.violations.append(Violation(code=code, message=message, subject=subject))

    def raise_if_failed(self, exc_type: type[Exception]) -> None:
        if self.violations:
            lines = "; ".join(str(v) for v in self.violations)
            raise exc_type(f"{len(self.violations)} violation(s): {lines}")
