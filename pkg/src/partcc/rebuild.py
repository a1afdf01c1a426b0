"""Reassemble translated fragments into functions and modules."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import DuplicateLabel, UndefinedLabel
from .mapping import GlobalPlan, SymbolTable
from .translation.codegen import epilogue, epilogue_label, prologue
from .translation.fragment import AssemblyFragment, label_definitions, scan_labels


@dataclass
class FunctionAsm:
    name: str
    text: str
    rodata: dict[str, list[str]] = field(default_factory=dict)


def _check_labels(name: str, text: str, rodata: dict[str, list[str]]) -> None:
    defs = label_definitions(text)
    seen: set[str] = set()
    for lab in defs:
        if lab in seen:
            raise DuplicateLabel(lab)
        seen.add(lab)
    _, required = scan_labels(text)
    for lab in sorted(required):
        if lab not in seen and lab not in rodata:
            raise UndefinedLabel(lab)


def body_lines(parts: Iterable[tuple[object, AssemblyFragment]],
               rodata: Optional[dict[str, list[str]]] = None) -> list[str]:
    """Plain concatenation of fragments; Label parts become ``name:`` lines."""
    lines: list[str] = []
    last_id = None
    for part, frag in parts:
        pid = getattr(part, "id", None)
        if pid is not None and last_id is not None and pid <= last_id:
            raise ValueError("fragments must come in part order")
        last_id = pid
        kind = getattr(getattr(part, "kind", None), "value", getattr(part, "kind", None))
        if kind == "Label":
            lines.append(f"{part.label}:")
        if frag.text.strip():
            lines.extend(frag.text.splitlines())
        if rodata is not None:
            rodata.update(frag.rodata)
    return lines


def rebuild(parts: Iterable[tuple[object, AssemblyFragment]], table: SymbolTable,
            name: Optional[str] = None) -> FunctionAsm:
    """Prologue, fragments in part order, then the epilogue."""
    name = name or table.function
    rodata: dict[str, list[str]] = {}
    lines = prologue(table) + body_lines(parts, rodata) + epilogue(name)
    text = "\n".join(lines) + "\n"
    _check_labels(name, text, rodata)
    return FunctionAsm(name, text, rodata)


_HEADER = re.compile(r"^\s*\.(globl|global|type|size|text|section|p2align|align)\b")


def whole_function(name: str, frag: AssemblyFragment) -> FunctionAsm:
    """A function translated in one piece (direct/workflow modes).

    Model replies sometimes carry their own header directives and the
    function label; both are owned by ``emit_module`` and are dropped here.
    """
    kept = []
    for line in frag.text.splitlines():
        if _HEADER.match(line) or line.strip() == f"{name}:":
            continue
        kept.append(line)
    text = "\n".join(kept) + "\n"
    _check_labels(name, text, frag.rodata)
    return FunctionAsm(name, text, dict(frag.rodata))


def emit_module(functions: list[FunctionAsm], plans: Optional[list[GlobalPlan]] = None) -> str:
    """One `.s` module: data sections, then the functions in input order."""
    plans = plans or []
    out: list[str] = []
    data = [p for p in plans if p.section == ".data"]
    bss = [p for p in plans if p.section == ".bss"]
    if data:
        out.append("\t.data")
        out += [p.text() for p in data]
    if bss:
        out.append("\t.bss")
        out += [p.text() for p in bss]
    rodata: dict[str, list[str]] = {}
    for f in functions:
        for k, v in f.rodata.items():
            rodata.setdefault(k, v)
    if rodata:
        out.append("\t.section\t.rodata")
        for k in sorted(rodata):
            lines = rodata[k]
            out += [f"\t{ln}" for ln in lines if ln.startswith(".align")]
            out.append(f"{k}:")
            out += [f"\t{ln}" for ln in lines if not ln.startswith(".align")]
    out.append("\t.text")
    for f in functions:
        out += [f"\t.globl\t{f.name}", f"\t.type\t{f.name}, @function", f"{f.name}:"]
        out.append(f.text.rstrip("\n"))
        out.append(f"\t.size\t{f.name}, .-{f.name}")
    out.append('\t.section\t.note.GNU-stack,"",@progbits')
    return "\n".join(out) + "\n"


__all__ = ["FunctionAsm", "body_lines", "rebuild", "whole_function", "emit_module", "epilogue_label"]
