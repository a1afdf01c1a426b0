"""Bounded self-repair: translate, rebuild, verify, feed the diagnostics back."""
from __future__ import annotations

import logging
from typing import Callable, Protocol

from ..errors import (DuplicateLabel, ExhaustedRetries, ImmediateOverflow, UndefinedLabel,
                      UnsupportedFeature)
from .report import Attempt, ErrorFeedback, VerificationReport

log = logging.getLogger(__name__)

DEFAULT_K = 5

# translator output problems that surface before the assembler runs; they are
# reported to the translator like assembler errors
_PRE_ASSEMBLY = (UndefinedLabel, DuplicateLabel, ImmediateOverflow)


class Job(Protocol):
    def build(self, req, backend) -> str: ...

    def verify(self, module: str, tests) -> VerificationReport: ...


def repair_loop(req, backend, tests, k: int = DEFAULT_K, job: Job | None = None,
                on_attempt: Callable[[Attempt], None] | None = None):
    """Returns ``(module text, number of attempts, attempt trail)``.

    ``job`` knows how to turn a request into a module (whole-function or
    split-and-rebuild) and how to check it.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if job is None:
        raise ValueError("repair_loop needs a job to build and verify modules")
    attempts: list[Attempt] = []
    feedback = None
    for n in range(1, k + 1):
        current = req.with_feedback(feedback)
        try:
            module = job.build(current, backend)
        except _PRE_ASSEMBLY as exc:
            module = ""
            report = VerificationReport("assemble", "fail", "semantic", str(exc))
        except UnsupportedFeature as exc:
            module = ""
            report = VerificationReport("assemble", "fail", "semantic", str(exc))
        else:
            report = job.verify(module, tests)
        att = Attempt(n, module, report, feedback)
        attempts.append(att)
        if on_attempt is not None:
            on_attempt(att)
        log.info("attempt %d: %s %s", n, report.status, report.error_class)
        if report.passed:
            return module, n, attempts
        feedback = ErrorFeedback.from_report(report, module, n)
    raise ExhaustedRetries(k, attempts[-1].report, attempts)
