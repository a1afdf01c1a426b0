"""C test drivers: a ``main`` that runs one case (chosen by argv[1]) and
prints the observable state.

Output format, one item per line::

    ret=<value>            (absent for void functions)
    <global path>=<value>  (every scalar reachable in a global, pointers skipped)
    <arg>[i]=<value>       (arrays passed through pointer parameters)

Integers print through long long / unsigned long long, floating values
with ``%.17g``.
"""
from __future__ import annotations

from typing import Any

from ..frontend import ast as A
from ..frontend.ctype import CType, type_to_c
from ..frontend.printer import record_to_c, signature_to_c
from .testcases import TestCase


def _fmt(t: CType, expr: str) -> str | None:
    if t.is_floating:
        return f'printf("%s=%.17g\\n", {{name}}, (double)({expr}));'
    if t.is_integer:
        if t.signed:
            return f'printf("%s=%lld\\n", {{name}}, (long long)({expr}));'
        return f'printf("%s=%llu\\n", {{name}}, (unsigned long long)({expr}));'
    return None


def _scalar_paths(t: CType, expr: str, label: str, out: list[tuple[CType, str, str]]) -> None:
    if t.is_array:
        for i in range(t.count or 0):
            _scalar_paths(t.elem, f"{expr}[{i}]", f"{label}[{i}]", out)
    elif t.is_record:
        members = t.members or []
        if t.is_union:
            members = members[:1]
        for mn, mt in members:
            _scalar_paths(mt, f"{expr}.{mn}", f"{label}.{mn}", out)
    elif t.is_integer or t.is_floating:
        out.append((t, expr, label))


def observable_paths(tree: A.Ast) -> list[tuple[CType, str, str]]:
    out: list = []
    seen = set()
    for g in tree.globals:
        if g.name in seen:
            continue
        seen.add(g.name)
        _scalar_paths(g.ctype, g.name, g.name, out)
    return out


def _c_literal(t: CType, v: Any) -> str:
    if t.is_floating:
        f = float(v)
        if f != f:
            return "(0.0/0.0)"
        if f in (float("inf"), float("-inf")):
            return "(1.0/0.0)" if f > 0 else "(-1.0/0.0)"
        return repr(f)
    iv = int(v)
    if t.is_integer and not t.signed:
        return f"{iv}ULL"
    if iv == -(1 << 63):
        return "(-9223372036854775807LL-1)"
    return f"{iv}LL"


def _setup_lines(tree: A.Ast, setup: dict[str, Any]) -> list[str]:
    globals_ = {g.name: g.ctype for g in tree.globals}
    lines = []
    for name, value in setup.items():
        t = globals_.get(name)
        if t is None:
            raise KeyError(f"setup names unknown global {name!r}")
        if t.is_array:
            for i, v in enumerate(value):
                lines.append(f"    {name}[{i}] = {_c_literal(t.elem, v)};")
        else:
            lines.append(f"    {name} = {_c_literal(t, value)};")
    return lines


def generate_driver(tree: A.Ast, fn_name: str, cases: list[TestCase]) -> str:
    fn = tree.function(fn_name)
    lines = ["#include <stdio.h>", "#include <stdlib.h>", ""]
    for item in tree.items:
        if isinstance(item, A.RecordDecl) and item.rtype.complete and item.rtype.tag:
            lines.append(record_to_c(item.rtype))
        elif isinstance(item, A.TypedefDecl):
            lines.append(f"typedef {type_to_c(item.ctype, item.name)};")
    declared = set()
    for g in tree.globals:
        if g.name not in declared:
            declared.add(g.name)
            lines.append(f"extern {type_to_c(g.ctype, g.name)};")
    lines.append(signature_to_c(fn.name, fn.ret, fn.params) + ";")
    lines += ["", "static void dump_state(void)", "{"]
    for t, expr, label in observable_paths(tree):
        lines.append("    " + _fmt(t, expr).replace("{name}", f'"{label}"'))
    lines += ["}", "", "int main(int argc, char **argv)", "{",
              "    int which = argc > 1 ? atoi(argv[1]) : 0;",
              "    switch (which) {"]
    for i, case in enumerate(cases):
        lines.append(f"    case {i}: {{")
        lines += ["    " + ln for ln in _setup_lines(tree, case.setup)]
        call_args = []
        after = []
        if len(case.args) != len(fn.params):
            raise ValueError(f"case {case.name!r}: {len(case.args)} args for {len(fn.params)} params")
        for j, (p, v) in enumerate(zip(fn.params, case.args)):
            t = p.ctype
            if t.is_pointer and isinstance(v, list):
                et = t.target
                buf = f"arg{j}"
                vals = ", ".join(_c_literal(et, x) for x in v) or "0"
                lines.append(f"        {type_to_c(et, f'{buf}[{max(len(v), 1)}]')} = {{{vals}}};")
                call_args.append(buf)
                for k in range(len(v)):
                    after.append("        " + _fmt(et, f"{buf}[{k}]").replace("{name}", f'"{p.name}[{k}]"'))
            elif t.is_pointer:
                call_args.append("0")
            else:
                call_args.append(f"({type_to_c(t)}){_c_literal(t, v)}")
        call = f"{fn.name}({', '.join(call_args)})"
        if fn.ret.is_void:
            lines.append(f"        {call};")
        else:
            lines.append(f"        {type_to_c(fn.ret, 'r')} = {call};")
            lines.append("        " + _fmt(fn.ret, "r").replace("{name}", '"ret"'))
        lines += after
        lines.append("        break;")
        lines.append("    }")
    lines += ["    default:", '        fprintf(stderr, "no such case\\n");', "        return 64;",
              "    }", "    dump_state();", "    fflush(stdout);", "    return 0;", "}", ""]
    return "\n".join(lines)


def parse_output(text: str) -> tuple[str | None, str]:
    """Split driver output into (return value text, remaining state dump)."""
    ret = None
    rest = []
    for line in text.splitlines(keepends=True):
        if ret is None and line.startswith("ret="):
            ret = line[4:].strip()
        else:
            rest.append(line)
    return ret, "".join(rest)

