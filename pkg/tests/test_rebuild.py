import os
import subprocess
import tempfile

import pytest

from partcc.errors import DuplicateLabel, UndefinedLabel
from partcc.mapping import SymbolTable, map_globals
from partcc.pipeline import PipelineConfig, plan_function, reference_tests, translate_plan
from partcc.rebuild import body_lines, emit_module, rebuild
from partcc.splitter import ControlPart, PartKind, always_split
from partcc.translation.backends import RefBackend, translate
from partcc.translation.fragment import AssemblyFragment
from partcc.translation.request import PartContext, TranslationRequest
from partcc.verify.driver import generate_driver
from partcc.verify.harness import CC, verify_module

from conftest import needs_gcc, unit

FOR_SRC = "int f(int n){ int s = 0; for (int i = 0; i < n; i++) { s += i; } return s; }"


def translated_parts(tree, name="f"):
    plan = plan_function(tree, tree.function(name), PipelineConfig(decide=always_split))
    pairs = []
    for part in plan.parts:
        req = TranslationRequest("lego-part", part.payload, plan.table,
                                 part_context=PartContext(part.id, (), part.loop_depth),
                                 unit=part, function=plan.fn)
        pairs.append((part, translate(req, RefBackend())))
    return plan, pairs


def assembles(module):
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "m.s")
        with open(path, "w") as fh:
            fh.write(module)
        cp = subprocess.run([CC, "-c", path, "-o", os.path.join(tmp, "m.o")],
                            capture_output=True, text=True)
        return cp.returncode == 0


def test_single_empty_fragment():
    table = SymbolTable("f", frame_size=16)
    part = ControlPart(PartKind.SOURCE, ";", 0)
    text = rebuild([(part, AssemblyFragment())], table).text
    lines = [ln.strip() for ln in text.splitlines()]
    assert lines[:3] == ["pushq\t%rbp", "movq\t%rsp, %rbp", "subq\t$16, %rsp"]
    assert lines[3] == ".L_f__epilogue:"
    assert lines[-1] == "ret"


def test_for_loop_label_order():
    plan, pairs = translated_parts(unit(FOR_SRC))
    text = rebuild(pairs, plan.table).text
    labels = [ln[:-1] for ln in text.splitlines() if ln.endswith(":")]
    split_labels = [p.label for p, _ in pairs if p.kind == PartKind.LABEL]
    assert labels == split_labels + [".L_f__epilogue"]
    assert split_labels[0].endswith("_body") and split_labels[1].endswith("_end")
    for lab in split_labels:
        assert text.count(f"\n{lab}:") == 1


def test_undefined_label():
    table = SymbolTable("f")
    part = ControlPart(PartKind.UNCOND_JUMP, ".L_f__9_end", 0, label=".L_f__9_end")
    with pytest.raises(UndefinedLabel):
        rebuild([(part, AssemblyFragment.from_text("\tjmp\t.L_f__9_end"))], table)


def test_duplicate_label():
    table = SymbolTable("f")
    parts = [(ControlPart(PartKind.LABEL, ".L_x", 0, label=".L_x"), AssemblyFragment()),
             (ControlPart(PartKind.SOURCE, "", 1), AssemblyFragment.from_text(".L_x:\n\tnop"))]
    with pytest.raises(DuplicateLabel):
        rebuild(parts, table)


def test_fragments_must_be_in_order():
    a = ControlPart(PartKind.SOURCE, "", 1)
    b = ControlPart(PartKind.SOURCE, "", 0)
    with pytest.raises(ValueError):
        body_lines([(a, AssemblyFragment()), (b, AssemblyFragment())])


def test_concatenation_is_associative():
    plan, pairs = translated_parts(unit(FOR_SRC))
    whole = body_lines(pairs)
    for cut in range(len(pairs) + 1):
        assert body_lines(pairs[:cut]) + body_lines(pairs[cut:]) == whole


def test_module_without_globals_has_only_text():
    plan, pairs = translated_parts(unit(FOR_SRC))
    module = emit_module([rebuild(pairs, plan.table)])
    assert ".data" not in module and ".bss" not in module and ".rodata" not in module
    assert "\t.globl\tf" in module and "\t.text" in module


@needs_gcc
def test_global_reading_function_runs():
    tree = unit("int g = 7; int f(void){ return g + 1; }")
    plan = plan_function(tree, tree.functions[0], PipelineConfig())
    module = emit_module([translate_plan(tree, plan, RefBackend(), "lego")], map_globals(tree.globals))
    assert "g(%rip)" in module and "\t.data" in module
    tests = reference_tests(tree, "f", [[]]).cases
    assert verify_module(module, generate_driver(tree, "f", tests), tests).passed


@needs_gcc
def test_float_constant_emitted_once():
    tree = unit("double f(double x){ double y = x * 2.5; y = y + 2.5; return y * 2.5; }")
    plan, pairs = translated_parts(tree)
    module = emit_module([rebuild(pairs, plan.table)])
    defs = [ln for ln in module.splitlines() if ln.startswith(".LC_d_") and ln.endswith(":")]
    assert len(defs) == 1
    assert assembles(module)
