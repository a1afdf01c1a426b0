"""Variable mapping: globals to data labels, locals to rbp-relative slots."""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Optional

from .errors import CheckError, DuplicateGlobal, LayoutMissing
from .frontend import ast as A
from .frontend.ctype import CType
from .frontend.parser import const_eval
from .frontend.sema import const_float
from .layout import TypeLayout, compute_layout

INT_ARG_REGS = ("rdi", "rsi", "rdx", "rcx", "r8", "r9")
FLOAT_ARG_REGS = tuple(f"xmm{i}" for i in range(8))


@dataclass
class Slot:
    name: str
    offset: int
    layout: TypeLayout
    ctype: Optional[CType] = field(default=None, compare=False, repr=False)

    @property
    def size(self) -> int:
        return self.layout.size

    @property
    def align(self) -> int:
        return self.layout.align


@dataclass
class GlobalEntry:
    name: str
    label: str
    layout: TypeLayout
    init: object = None
    ctype: Optional[CType] = field(default=None, compare=False, repr=False)


@dataclass
class ParamSpill:
    name: str
    reg: str


@dataclass
class SymbolTable:
    function: str = ""
    globals: list[GlobalEntry] = field(default_factory=list)
    locals: list[Slot] = field(default_factory=list)
    frame_size: int = 0
    saved_regs_note: list[str] = field(default_factory=lambda: ["rbp"])
    params: list[ParamSpill] = field(default_factory=list)

    def slot(self, name: str) -> Optional[Slot]:
        for s in self.locals:
            if s.name == name:
                return s
        return None

    def global_entry(self, name: str) -> Optional[GlobalEntry]:
        for g in self.globals:
            if g.name == name:
                return g
        return None

    def dump(self) -> str:
        """``name offset size align`` per slot, then ``name label size align`` per global."""
        lines = [f"# frame {self.function} {self.frame_size}"]
        for p in self.params:
            lines.append(f"# param {p.name} {p.reg}")
        for s in self.locals:
            lines.append(f"{s.name} {s.offset} {s.size} {s.align}")
        if self.globals:
            lines.append("# globals")
            for g in self.globals:
                lines.append(f"{g.name} {g.label}(%rip) {g.layout.size} {g.layout.align}")
        return "\n".join(lines) + "\n"


def _round16(n: int) -> int:
    return (n + 15) // 16 * 16


def local_decls(fn: A.FunctionDef) -> list[A.Decl]:
    return [s for s in A.iter_stmts(fn.body) if isinstance(s, A.Decl)]


def allocate_frame(fn: A.FunctionDef, layouts: Optional[dict[str, TypeLayout]] = None,
                   globals_: Optional[list[GlobalEntry]] = None) -> SymbolTable:
    """Assign every parameter and local a slot, in declaration order.

    ``layouts`` maps local names to layouts; when omitted they are computed.
    """
    named: list[tuple[str, CType]] = [(p.name, p.ctype) for p in fn.params]
    named += [(d.name, d.ctype) for d in local_decls(fn)]
    seen: set[str] = set()
    cur = 0
    slots = []
    for name, t in named:
        if name in seen:
            raise CheckError(f"{fn.name}: local {name!r} is not unique; rename first")
        seen.add(name)
        if layouts is not None:
            lay = layouts.get(name)
            if lay is None:
                raise LayoutMissing(name)
        else:
            lay = compute_layout(t)
        off = (cur - lay.size) // lay.align * lay.align
        slots.append(Slot(name, off, lay, t))
        cur = off
    ints = iter(INT_ARG_REGS)
    floats = iter(FLOAT_ARG_REGS)
    params = []
    for p in fn.params:
        reg = next(floats if p.ctype.is_floating else ints, None)
        if reg is None:
            raise CheckError(f"{fn.name}: too many arguments for registers")
        params.append(ParamSpill(p.name, reg))
    return SymbolTable(fn.name, list(globals_ or []), slots, _round16(-cur), ["rbp"], params)


# ------------------------------------------------------------------ globals

@dataclass
class GlobalPlan:
    name: str
    label: str
    section: str        # .data | .bss
    align: int
    size: int
    directives: list[str]

    def text(self) -> str:
        lines = [f"\t.globl {self.label}", f"\t.align {self.align}",
                 f"\t.type {self.label}, @object", f"\t.size {self.label}, {self.size}",
                 f"{self.label}:"]
        lines += [f"\t{d}" for d in self.directives]
        return "\n".join(lines)


_INT_DIRECTIVE = {1: ".byte", 2: ".short", 4: ".long", 8: ".quad"}


def _init_directives(t: CType, lay: TypeLayout, init, out: list[str]) -> None:
    if isinstance(init, A.InitList) and not (t.is_array or t.is_record):
        init = init.items[0] if init.items else None
    if init is None:
        if lay.size:
            out.append(f".zero {lay.size}")
        return
    if t.is_array:
        items = init.items if isinstance(init, A.InitList) else []
        for i in range(t.count):
            _init_directives(t.elem, lay.elem, items[i] if i < len(items) else None, out)
        return
    if t.is_record:
        items = init.items if isinstance(init, A.InitList) else []
        pos = 0
        members = list(zip(t.members, lay.members))
        if t.is_union:
            members = members[:1]
        for i, ((_, mt), ml) in enumerate(members):
            if ml.offset > pos:
                out.append(f".zero {ml.offset - pos}")
            _init_directives(mt, ml.layout, items[i] if i < len(items) else None, out)
            pos = ml.offset + ml.layout.size
        if lay.size > pos:
            out.append(f".zero {lay.size - pos}")
        return
    if t.is_floating:
        v = const_float(init)
        if t.size == 4:
            bits = struct.unpack("<I", struct.pack("<f", v))[0]
            out.append(f".long {bits:#x}")
        else:
            bits = struct.unpack("<Q", struct.pack("<d", v))[0]
            out.append(f".quad {bits:#x}")
        return
    v = const_eval(init)
    if v is None:
        fv = const_float(init)
        v = int(fv) if fv is not None else 0
    if t.is_integer:
        v = t.wrap(v)
    out.append(f"{_INT_DIRECTIVE[lay.size]} {v}")


def map_globals(globals_: list[A.GlobalDecl]) -> list[GlobalPlan]:
    """One directive plan per defined global; extern declarations get none."""
    plans: list[GlobalPlan] = []
    seen: set[str] = set()
    for g in globals_:
        if g.extern:
            continue
        if g.name in seen:
            raise DuplicateGlobal(g.name)
        seen.add(g.name)
        lay = compute_layout(g.ctype)
        if g.init is None:
            plans.append(GlobalPlan(g.name, g.name, ".bss", lay.align, lay.size,
                                    [f".zero {max(lay.size, 1)}"]))
        else:
            out: list[str] = []
            _init_directives(g.ctype, lay, g.init, out)
            plans.append(GlobalPlan(g.name, g.name, ".data", lay.align, lay.size, out))
    return plans


def global_entries(globals_: list[A.GlobalDecl]) -> list[GlobalEntry]:
    out = []
    names = set()
    for g in globals_:
        if g.name in names:
            continue
        names.add(g.name)
        out.append(GlobalEntry(g.name, g.name, compute_layout(g.ctype), g.init, g.ctype))
    return out


# ------------------------------------------------------------------ checker

@dataclass(frozen=True)
class Violation:
    kind: str   # overlap | misaligned | out-of-bounds | frame
    names: tuple[str, ...]
    detail: str


def check_no_overlap(table: SymbolTable) -> list[Violation]:
    """Exact interval check of the frame: disjoint, aligned, inside [-frame, 0)."""
    out: list[Violation] = []
    if table.frame_size % 16:
        out.append(Violation("frame", (), f"frame size {table.frame_size} not a multiple of 16"))
    for s in table.locals:
        if s.offset % s.align:
            out.append(Violation("misaligned", (s.name,),
                                 f"offset {s.offset} not a multiple of {s.align}"))
        if s.offset < -table.frame_size or s.offset + s.size > 0:
            out.append(Violation("out-of-bounds", (s.name,),
                                 f"[{s.offset}, {s.offset + s.size}) outside [-{table.frame_size}, 0)"))
    ordered = sorted(table.locals, key=lambda s: (s.offset, s.name))
    # sweep: compare each interval with every later one that starts before it ends
    for i, a in enumerate(ordered):
        end = a.offset + a.size
        for b in ordered[i + 1:]:
            if b.offset >= end:
                break
            if a.size and b.size:
                out.append(Violation("overlap", (a.name, b.name),
                                     f"[{a.offset}, {end}) and [{b.offset}, {b.offset + b.size})"))
    return out
