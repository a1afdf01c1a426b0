"""What a backend is asked to translate."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from ..errors import ConfigError
from ..frontend.features import FeatureFlags
from ..mapping import SymbolTable
from ..verify.report import ErrorFeedback

MODES = ("direct", "workflow", "lego-part")


@dataclass(frozen=True)
class PartContext:
    part_id: int
    preceding_labels: tuple[str, ...] = ()
    loop_depth: int = 0
    kind: str = "SourceBlock"
    role: str = "stmts"
    # label names a bare break/continue in this part must jump to
    break_label: Optional[str] = None
    continue_label: Optional[str] = None


@dataclass
class TranslationRequest:
    mode: str
    source: str
    symbol_table: Optional[SymbolTable] = None
    flags: FeatureFlags = field(default_factory=FeatureFlags)
    part_context: Optional[PartContext] = None
    feedback: Optional[ErrorFeedback] = None
    # the parsed unit (FunctionDef or ControlPart) for backends that want it
    unit: object = field(default=None, compare=False, repr=False)
    function: object = field(default=None, compare=False, repr=False)
    # global entries, for backends that build their own table (direct mode)
    globals: list = field(default_factory=list, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"unknown translation mode {self.mode!r}")
        if self.mode == "lego-part" and (self.symbol_table is None or self.part_context is None):
            raise ConfigError("lego-part requests need a symbol table and a part context")

    def with_feedback(self, feedback: Optional[ErrorFeedback]) -> "TranslationRequest":
        return replace(self, feedback=feedback)
