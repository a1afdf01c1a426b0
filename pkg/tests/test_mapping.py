import os
import random
import subprocess
import tempfile

import pytest

from partcc.errors import DuplicateGlobal, LayoutMissing
from partcc.layout import compute_layout
from partcc.mapping import Slot, SymbolTable, allocate_frame, check_no_overlap, map_globals
from partcc.rebuild import emit_module
from partcc.verify.harness import CC

from conftest import needs_gcc, unit
from typegen import random_locals_source


def frame(src):
    return allocate_frame(unit(src).functions[-1])


def test_no_locals():
    t = frame("int f(void){ return 0; }")
    assert t.frame_size == 0 and t.locals == []


def test_int_and_double():
    t = frame("void f(void){ int a; double d; }")
    assert [(s.name, s.offset) for s in t.locals] == [("a", -4), ("d", -16)]
    assert t.frame_size == 16
    assert check_no_overlap(t) == []


def test_char_buffer_and_int():
    t = frame("void f(void){ char buf[13]; int n; }")
    assert t.frame_size == 32
    assert check_no_overlap(t) == []
    for s in t.locals:
        assert s.offset <= -s.size and s.offset % s.align == 0


def test_parameters_get_slots_and_registers():
    t = frame("double f(int a, double x, long b){ return x; }")
    assert [s.name for s in t.locals] == ["a", "x", "b"]
    assert [(p.name, p.reg) for p in t.params] == [("a", "rdi"), ("x", "xmm0"), ("b", "rsi")]


def test_explicit_layouts_must_cover_every_local():
    fn = unit("void f(void){ int a; long b; }").functions[0]
    with pytest.raises(LayoutMissing):
        allocate_frame(fn, {"a": compute_layout("int")})
    t = allocate_frame(fn, {"a": compute_layout("int"), "b": compute_layout("long")})
    assert t.frame_size == 16


def test_deterministic():
    src = random_locals_source(random.Random(5))
    assert frame(src) == frame(src)
    assert frame(src).dump() == frame(src).dump()


def test_dump_lines():
    text = frame("int g; void f(void){ int a; }").dump()
    assert "a -4 4 4" in text.splitlines()


def test_random_local_sets_are_safe():
    rng = random.Random(0)
    for _ in range(300):
        t = frame(random_locals_source(rng))
        assert check_no_overlap(t) == []
        assert t.frame_size % 16 == 0


def _slot(name, off, ty="long"):
    return Slot(name, off, compute_layout(ty))


def test_overlap_detected():
    t = SymbolTable("f", [], [_slot("a", -8), _slot("b", -8)], 16)
    (v,) = check_no_overlap(t)
    assert v.kind == "overlap" and set(v.names) == {"a", "b"}


def test_out_of_bounds_detected():
    t = SymbolTable("f", [], [_slot("a", -16 - 4, "int")], 16)
    (v,) = check_no_overlap(t)
    assert v.kind == "out-of-bounds"


def test_misalignment_detected():
    t = SymbolTable("f", [], [_slot("a", -12)], 16)
    assert [v.kind for v in check_no_overlap(t)] == ["misaligned"]


def test_globals_plans():
    tree = unit("int g = 7; double arr[3]; struct S { char c; int i; } s = {1, 2};")
    plans = {p.name: p for p in map_globals(tree.globals)}
    g = plans["g"]
    assert (g.label, g.section, g.align, g.directives) == ("g", ".data", 4, [".long 7"])
    arr = plans["arr"]
    assert (arr.section, arr.align, arr.size) == (".bss", 8, 24)
    assert plans["s"].directives == [".byte 1", ".zero 3", ".long 2"]


def test_duplicate_global():
    tree = unit("int g; int h;")
    tree.globals[1].name = "g"
    with pytest.raises(DuplicateGlobal):
        map_globals(tree.globals)


@needs_gcc
def test_global_plan_assembles():
    tree = unit("int g = 7; double arr[3]; short h[2] = {-1, 3}; float f = 1.5;")
    module = emit_module([], map_globals(tree.globals))
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "m.s")
        with open(path, "w") as fh:
            fh.write(module)
        assert subprocess.run([CC, "-c", path, "-o", os.path.join(tmp, "m.o")]).returncode == 0
