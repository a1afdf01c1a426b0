"""Exception hierarchy shared across the pipeline."""
from __future__ import annotations


class PartccError(Exception):
    """Base class for every error raised by this package."""

    stage = "internal"


# frontend

class CSyntaxError(PartccError):
    stage = "parse"

    def __init__(self, position: int, expected: list[str] | tuple[str, ...], got: str = ""):
        self.position = position
        self.expected = tuple(expected)
        self.got = got
        exp = ", ".join(self.expected) if self.expected else "?"
        super().__init__(f"syntax error at offset {position}: expected {exp}, got {got!r}")


class UnsupportedFeature(PartccError):
    """Construct outside the accepted C subset.

    Soft error: callers may still hand the raw text to an LLM backend.
    """

    stage = "parse"

    def __init__(self, span: tuple[int, int] | None, name: str):
        self.span = span
        self.name = name
        where = f" at {span[0]}" if span else ""
        super().__init__(f"unsupported feature{where}: {name}")


class CheckError(PartccError):
    """Type or scope error found while annotating the AST."""

    stage = "parse"


class UnresolvedLabel(PartccError):
    stage = "parse"

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"goto targets missing label {name!r}")


# layout / mapping

class UnknownType(PartccError):
    stage = "layout"

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown type {name!r}")


class RecursiveType(PartccError):
    stage = "layout"

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"type {name!r} contains itself by value")


class OracleUnavailable(PartccError):
    stage = "layout"


class LayoutMissing(PartccError):
    stage = "mapping"

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"no layout for local {name!r}")


class DuplicateGlobal(PartccError):
    stage = "mapping"

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"global {name!r} defined twice")


# splitting

class NonComposable(PartccError):
    stage = "split"


# translation

class BackendError(PartccError):
    stage = "translate"


class EmptyOutput(BackendError):
    pass


class ExtractionError(BackendError):
    pass


class ImmediateOverflow(PartccError):
    stage = "translate"

    def __init__(self, value: int, width: int):
        self.value = value
        self.width = width
        super().__init__(f"immediate {value:#x} does not fit in {width} bits")


class ConfigError(PartccError):
    stage = "config"


# rebuild

class UndefinedLabel(PartccError):
    stage = "rebuild"

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"label {name!r} is referenced but never defined")


class DuplicateLabel(PartccError):
    stage = "rebuild"

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"label {name!r} defined more than once")


# verification

class HarnessFailure(PartccError):
    """Infrastructure fault (missing tool, driver that does not build)."""

    stage = "harness"


class SemanticError(PartccError):
    """Assembler or linker rejected the module."""

    stage = "assemble"

    def __init__(self, stage: str, diagnostics: str):
        self.stage = stage
        self.diagnostics = diagnostics
        super().__init__(f"{stage} failed:\n{diagnostics}")


class ExhaustedRetries(PartccError):
    stage = "verify"

    def __init__(self, k: int, last_report, attempts=None):
        self.k = k
        self.last_report = last_report
        self.attempts = attempts or []
        super().__init__(f"no passing translation after {k} attempts")
