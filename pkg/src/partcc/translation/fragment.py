"""Assembly fragments and label bookkeeping."""
from __future__ import annotations

import re
from dataclasses import dataclass, field

_LABEL_DEF = re.compile(r"^\s*([A-Za-z_.$][\w.$]*):", re.M)
_LOCAL_REF = re.compile(r"(?<![\w.$])(\.L[\w.$]*)")


def scan_labels(text: str) -> tuple[set[str], set[str]]:
    """(defined, required) label sets of an assembly text.

    Only assembler-local ``.L`` names count as required; globals and
    functions resolve at link time.
    """
    defined = set()
    required = set()
    for line in text.splitlines():
        code = line.split("#", 1)[0]
        m = _LABEL_DEF.match(code)
        if m:
            defined.add(m.group(1))
            code = code[m.end():]
        if code.strip().startswith("."):
            # directives such as .size name, .-name
            if not code.strip().startswith((".quad", ".long")):
                continue
        required.update(_LOCAL_REF.findall(code))
    return defined, required


def label_definitions(text: str) -> list[str]:
    return [m.group(1) for m in _LABEL_DEF.finditer("\n".join(
        line.split("#", 1)[0] for line in text.splitlines()))]


@dataclass
class AssemblyFragment:
    text: str = ""
    defined_labels: set[str] = field(default_factory=set)
    required_labels: set[str] = field(default_factory=set)
    clobbers_note: str = ""
    # read-only constants: label -> directive lines (emitted once per module)
    rodata: dict[str, list[str]] = field(default_factory=dict)

    @classmethod
    def from_text(cls, text: str, clobbers_note: str = "",
                  rodata: dict[str, list[str]] | None = None) -> "AssemblyFragment":
        rodata = dict(rodata or {})
        defined, required = scan_labels(text)
        for lines in rodata.values():
            _, req = scan_labels("\n".join(lines))
            required |= req
        defined |= set(rodata)
        return cls(text, defined, required, clobbers_note, rodata)

    @property
    def lines(self) -> list[str]:
        return [ln for ln in self.text.splitlines() if ln.strip()]

    def instruction_count(self) -> int:
        n = 0
        for ln in self.lines:
            code = ln.split("#", 1)[0].strip()
            if not code or code.endswith(":") or code.startswith("."):
                continue
            n += 1
        return n
