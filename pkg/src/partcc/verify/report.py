"""Verification results and the feedback handed back to a translator."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

ERROR_CLASSES = ("semantic", "runtime", "behavioral", "none")
STAGES = ("assemble", "link", "run", "compare")
DIAG_LIMIT = 4000

EXIT_CODES = {"none": 0, "behavioral": 1, "semantic": 2, "runtime": 3, "infra": 4}


def cap_diagnostics(text: str, limit: int = DIAG_LIMIT) -> str:
    """Keep the tail: assemblers and test runners put the decisive lines last."""
    if len(text) <= limit:
        return text
    return text[-limit:]


@dataclass
class VerificationReport:
    stage: str
    status: str
    error_class: str = "none"
    diagnostics: str = ""
    failed_cases: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.diagnostics = cap_diagnostics(self.diagnostics)
        if self.status == "pass" and (self.error_class != "none" or self.failed_cases):
            raise ValueError("a passing report carries no error")

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.error_class]

    def to_dict(self) -> dict:
        return {"stage": self.stage, "status": self.status, "error_class": self.error_class,
                "diagnostics": self.diagnostics, "failed_cases": list(self.failed_cases)}


@dataclass
class ErrorFeedback:
    error_class: str
    diagnostics: str
    excerpt: str = ""
    attempt_number: int = 1

    def __post_init__(self) -> None:
        if self.attempt_number < 1:
            raise ValueError("attempt_number starts at 1")
        self.diagnostics = cap_diagnostics(self.diagnostics)

    @classmethod
    def from_report(cls, report: VerificationReport, module_text: str = "",
                    attempt_number: int = 1) -> "ErrorFeedback":
        return cls(report.error_class, report.diagnostics,
                   excerpt_for(report.diagnostics, module_text), attempt_number)

    def render(self) -> str:
        parts = [f"Attempt {self.attempt_number} failed with a {self.error_class} error.",
                 "Diagnostics:", self.diagnostics.rstrip()]
        if self.excerpt:
            parts += ["Offending assembly:", self.excerpt.rstrip()]
        return "\n".join(parts)


def excerpt_for(diagnostics: str, module_text: str, context: int = 2) -> str:
    """Assembly lines around the first ``file.s:LINE:`` location, if any."""
    m = re.search(r"\.s:(\d+):", diagnostics)
    if not m or not module_text:
        return ""
    lines = module_text.splitlines()
    n = int(m.group(1)) - 1
    lo, hi = max(0, n - context), min(len(lines), n + context + 1)
    return "\n".join(f"{i + 1:5d}  {lines[i]}" for i in range(lo, hi))


@dataclass
class Attempt:
    number: int
    module_text: str
    report: VerificationReport
    feedback: Optional[ErrorFeedback] = None
