"""Error codes and the shared exception type.

Every failure surfaced by the platform carries a stable ``code`` string so
CLI/HTTP adapters can map it without string-matching messages.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


class SlegoError(Exception):
    """Domain error with a stable machine-readable code."""

    def __init__(self, code: str, message: str, findings: list[Any] | None = None):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.findings = findings or []


@dataclass(frozen=True)
class Finding:
    """One validation finding. ``severity`` is 'error' or 'warning'."""

    severity: str
    code: str
    message: str
    # sort/grouping hints; param is the parameter or arg name involved,
    # step_index is set for pipeline-level findings
    param: str = ""
    step_index: int | None = None

    def to_json(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "severity": self.severity,
            "code": self.code,
            "message": self.message,
        }
        if self.param:
            d["param"] = self.param
        if self.step_index is not None:
            d["step_index"] = self.step_index
        return d


def errors_of(findings: list[Finding]) -> list[Finding]:
    return [f for f in findings if f.severity == "error"]
