"""System V AMD64 data layout, plus a cross-check against the system C compiler."""
from __future__ import annotations

import os
import shutil
import subprocess
import tempfile
from dataclasses import dataclass, field
from typing import Optional

from .errors import OracleUnavailable, RecursiveType, UnknownType
from .frontend.ctype import (BUILTIN_TYPEDEFS, CHAR, DOUBLE, FLOAT, INT, LONG, SHORT, UCHAR,
                             UINT, ULONG, USHORT, CType, RecordType, base_name, type_to_c)

_SCALARS: dict[str, CType] = {
    "char": CHAR, "signed char": CHAR, "unsigned char": UCHAR,
    "short": SHORT, "unsigned short": USHORT, "int": INT, "unsigned int": UINT,
    "unsigned": UINT, "long": LONG, "unsigned long": ULONG, "long long": LONG,
    "unsigned long long": ULONG, "float": FLOAT, "double": DOUBLE,
    **BUILTIN_TYPEDEFS,
}


@dataclass
class MemberLayout:
    name: str
    offset: int
    layout: "TypeLayout"


@dataclass
class TypeLayout:
    type_name: str
    size: int
    align: int
    members: list[MemberLayout] = field(default_factory=list)
    elem: Optional["TypeLayout"] = None
    count: Optional[int] = None
    ctype: Optional[CType] = field(default=None, compare=False, repr=False)

    def member(self, name: str) -> MemberLayout:
        for m in self.members:
            if m.name == name:
                return m
        raise KeyError(name)

    def check(self) -> list[str]:
        """Structural invariants; returns human-readable violations."""
        bad = []
        if self.size % self.align:
            bad.append(f"{self.type_name}: size {self.size} not a multiple of align {self.align}")
        if self.elem is not None and self.size != self.elem.size * (self.count or 0):
            bad.append(f"{self.type_name}: array size mismatch")
        is_union = self.ctype is not None and self.ctype.is_record and self.ctype.is_union
        end = 0
        prev = 0
        for m in self.members:
            if m.offset % m.layout.align:
                bad.append(f"{self.type_name}.{m.name}: misaligned offset {m.offset}")
            if is_union:
                if m.offset != 0:
                    bad.append(f"{self.type_name}.{m.name}: union member at {m.offset}")
                continue
            if m.offset < prev or m.offset < end:
                bad.append(f"{self.type_name}.{m.name}: overlaps or goes backwards")
            prev = m.offset
            end = m.offset + m.layout.size
            if end > self.size:
                bad.append(f"{self.type_name}.{m.name}: extends past the end")
        return bad


def _round_up(n: int, a: int) -> int:
    return (n + a - 1) // a * a


def compute_layout(t, records: Optional[dict[str, CType]] = None) -> TypeLayout:
    """Layout of a type.  ``t`` is a CType or a type name such as ``"int"``
    or ``"struct S"`` (resolved through ``records``)."""
    if isinstance(t, str):
        t = resolve_type_name(t, records or {})
    return _layout(t, [])


def resolve_type_name(name: str, records: dict[str, CType]) -> CType:
    key = " ".join(name.split())
    if key in _SCALARS:
        return _SCALARS[key]
    if key in records:
        return records[key]
    if key.endswith("*"):
        from .frontend.ctype import PointerType
        return PointerType(resolve_type_name(key[:-1], records))
    raise UnknownType(name)


def _layout(t: CType, active: list) -> TypeLayout:
    if t.is_integer or t.is_floating:
        return TypeLayout(str(t), t.size, t.size, ctype=t)
    if t.is_pointer:
        return TypeLayout(type_to_c(t), 8, 8, ctype=t)
    if t.is_array:
        if t.count is None:
            raise UnknownType(type_to_c(t))
        el = _layout(t.elem, active)
        return TypeLayout(type_to_c(t), el.size * t.count, el.align, elem=el, count=t.count, ctype=t)
    if t.is_record:
        name = base_name(t)
        if any(a is t for a in active):
            raise RecursiveType(name)
        if not t.complete:
            raise UnknownType(name)
        active.append(t)
        members = []
        size = 0
        align = 1
        for mname, mt in t.members:
            ml = _layout(mt, active)
            off = 0 if t.is_union else _round_up(size, ml.align)
            members.append(MemberLayout(mname, off, ml))
            size = max(size, ml.size) if t.is_union else off + ml.size
            align = max(align, ml.align)
        active.pop()
        return TypeLayout(name, _round_up(size, align), align, members, ctype=t)
    raise UnknownType(str(t))


# ------------------------------------------------------------------ oracle

@dataclass(frozen=True)
class Mismatch:
    type_name: str
    fact: str          # "size", "align" or "offset:<member>"
    computed: int
    oracle: Optional[int]

    def __str__(self) -> str:
        return f"{self.type_name} {self.fact}: computed {self.computed}, oracle {self.oracle}"


def _all_records(t: CType, out: list, seen: set) -> None:
    # every record needed to *declare* t, pointees included
    while t.is_array or t.is_pointer:
        t = t.elem if t.is_array else t.target
    if t.is_record and id(t) not in seen:
        seen.add(id(t))
        for _, mt in t.members or ():
            _all_records(mt, out, seen)
        out.append(t)


class LayoutOracle:
    """Asks the system C compiler for sizeof/_Alignof/offsetof facts."""

    def __init__(self, cc: str = "gcc", timeout: float = 60.0):
        self.cc = cc
        self.timeout = timeout

    def available(self) -> bool:
        return shutil.which(self.cc) is not None

    def probe_source(self, layouts: list[TypeLayout]) -> tuple[str, dict[str, str]]:
        recs: list = []
        seen: set = set()
        for lay in layouts:
            if lay.ctype is not None:
                _all_records(lay.ctype, recs, seen)
        lines = ["#include <stdio.h>", "#include <stddef.h>", ""]
        for r in recs:
            if r.tag is not None:
                lines.append(f"{r.keyword} {r.tag};")
        for r in recs:
            if r.tag is not None and r.complete:
                body = " ".join(f"{type_to_c(mt, mn)};" for mn, mt in r.members)
                lines.append(f"{r.keyword} {r.tag} {{ {body} }};")
        aliases: dict[str, str] = {}
        for i, lay in enumerate(_flatten(layouts)):
            if lay.type_name in aliases or lay.ctype is None:
                continue
            alias = f"probe_t{i}"
            aliases[lay.type_name] = alias
            lines.append(f"typedef {type_to_c(lay.ctype, alias)};")
        lines += ["", "int main(void)", "{"]
        for lay in _flatten(layouts):
            alias = aliases.get(lay.type_name)
            if alias is None:
                continue
            key = lay.type_name.replace("\\", "\\\\").replace('"', '\\"')
            lines.append(f'    printf("%s %zu\\n", "size:{key}", sizeof({alias}));')
            lines.append(f'    printf("%s %zu\\n", "align:{key}", _Alignof({alias}));')
            for m in lay.members:
                lines.append(f'    printf("%s %zu\\n", "offset:{key}.{m.name}", '
                             f'offsetof({alias}, {m.name}));')
        lines += ["    return 0;", "}", ""]
        return "\n".join(lines), aliases

    def query(self, layouts: list[TypeLayout]) -> dict[str, int]:
        if not self.available():
            raise OracleUnavailable(f"{self.cc} not found")
        src, _ = self.probe_source(layouts)
        with tempfile.TemporaryDirectory(prefix="partcc-layout-") as tmp:
            c_path = os.path.join(tmp, "probe.c")
            exe = os.path.join(tmp, "probe")
            with open(c_path, "w", encoding="utf-8") as fh:
                fh.write(src)
            try:
                cp = subprocess.run([self.cc, "-std=c11", "-o", exe, c_path],
                                    capture_output=True, text=True, timeout=self.timeout)
                if cp.returncode != 0:
                    raise OracleUnavailable(f"probe did not compile:\n{cp.stderr[-2000:]}")
                run = subprocess.run([exe], capture_output=True, text=True, timeout=self.timeout)
            except (OSError, subprocess.TimeoutExpired) as exc:
                raise OracleUnavailable(str(exc)) from exc
            if run.returncode != 0:
                raise OracleUnavailable(f"probe exited with {run.returncode}")
        facts = {}
        for line in run.stdout.splitlines():
            key, _, val = line.rpartition(" ")
            facts[key] = int(val)
        return facts


def _flatten(layouts: list[TypeLayout]) -> list[TypeLayout]:
    out: list[TypeLayout] = []
    seen: set[str] = set()

    def visit(lay: TypeLayout) -> None:
        if lay.type_name in seen:
            return
        seen.add(lay.type_name)
        out.append(lay)
        for m in lay.members:
            visit(m.layout)
        if lay.elem is not None:
            visit(lay.elem)

    for lay in layouts:
        visit(lay)
    return out


def verify_layout_against_oracle(layouts: list[TypeLayout],
                                 oracle: Optional[LayoutOracle] = None) -> list[Mismatch]:
    """Compare computed layouts with the compiler's answers.

    Raises OracleUnavailable when the compiler cannot be used; callers treat
    that as "verification skipped".
    """
    oracle = oracle or LayoutOracle()
    facts = oracle.query(layouts)
    out: list[Mismatch] = []
    for lay in _flatten(layouts):
        checks = [("size", lay.size), ("align", lay.align)]
        checks += [(f"offset:{m.name}", m.offset) for m in lay.members]
        for fact, val in checks:
            if fact.startswith("offset:"):
                key = f"offset:{lay.type_name}.{fact[7:]}"
            else:
                key = f"{fact}:{lay.type_name}"
            got = facts.get(key)
            if got != val:
                out.append(Mismatch(lay.type_name, fact, val, got))
    return out
