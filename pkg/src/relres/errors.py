"""Exception types shared across the package."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    message: str
    line: int | None = None
    col: int | None = None
    property: str | None = None

    def __str__(self) -> str:
        where = ""
        if self.line is not None:
            where = f"{self.line}:{self.col}: "
        owner = f"[{self.property}] " if self.property else ""
        return f"{where}{owner}{self.message}"


class RelresError(Exception):
    pass


class SpecError(RelresError):
    """Raised when a specification text fails to parse or validate."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class NoAdmissibleStrategy(RelresError):
    def __init__(self, property_id: str, target: float):
        self.property_id = property_id
        self.target = target
        super().__init__(
            f"no admissible strategy for {property_id} at target {target}")


class ExplorationCapExceeded(RelresError):
    def __init__(self, cap: int, what: str = "strategies"):
        self.cap = cap
        super().__init__(f"exploration cap exceeded: more than {cap} {what}")
