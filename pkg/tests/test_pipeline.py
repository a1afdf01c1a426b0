import json
import os

import pytest

from partcc.errors import ConfigError
from partcc.pipeline import (Complexity, PipelineConfig, compile_raw, compile_source, complexity,
                             plan_function, reference_tests, write_artifacts)
from partcc.splitter import SplitConfig, always_split
from partcc.translation.backends import FaultInjectionBackend, RefBackend
from partcc.translation.fragment import AssemblyFragment

from conftest import needs_gcc, unit

SAMPLE = """
int total;
double scale = 0.5;
int clamp(int v) { if (v > 100) { return 100; } return v; }
int f(int n)
{
    int x = 0;
    for (int i = 0; i < n; i++) {
        int x = i * 2;
        switch (x % 3) {
            case 0: total += clamp(x); break;
            case 1: total -= 1;
            default: total += 2;
        }
    }
    do { x = x + 1; } while (x < 3);
    return x + (int)(total * scale);
}
"""


def io_tests(src, fn, inputs):
    return [reference_tests(unit(src), fn, inputs)]


def test_unknown_mode():
    with pytest.raises(ConfigError):
        PipelineConfig(mode="turbo")


@needs_gcc
@pytest.mark.parametrize("mode", ["direct", "workflow", "lego"])
def test_every_mode_passes_with_reference_backend(mode):
    tests = io_tests(SAMPLE, "f", [[0], [7], [40]])
    out = compile_source(SAMPLE, RefBackend(), tests,
                         PipelineConfig(mode=mode, split=SplitConfig(split_threshold=1)))
    assert out.passed and len(out.attempts) == 1


def test_lego_plan_splits_and_direct_plan_does_not():
    tree = unit(SAMPLE)
    fn = tree.function("f")
    lego = plan_function(tree, fn, PipelineConfig(decide=always_split))
    assert lego.parts and len(lego.parts) > 10
    assert "x -> x__2" in lego.rename_note
    direct = plan_function(tree, fn, PipelineConfig(mode="direct"))
    assert direct.parts is None and direct.fn is fn


def test_decomposition_only_when_order_flag_set():
    src = "int f(int a, int b){ int x; x = ((a*b)+(b*a))-((a^b)+(a|b)); return x; }"
    tree = unit(src)
    tight = plan_function(tree, tree.functions[0], PipelineConfig(split=SplitConfig(expr_complexity_limit=2)))
    loose = plan_function(tree, tree.functions[0], PipelineConfig())
    assert tight.flags.order and any(s.name.startswith("t__") for s in tight.table.locals)
    assert not loose.flags.order and not any(s.name.startswith("t__") for s in loose.table.locals)


@needs_gcc
def test_goto_function_bypasses_splitting():
    src = "int f(int a){ if (a > 2) { goto big; } return a; big: return a * 10; }"
    tree = unit(src)
    plan = plan_function(tree, tree.functions[0], PipelineConfig(decide=always_split))
    assert plan.parts is None and plan.flags.has_goto
    out = compile_source(src, RefBackend(), io_tests(src, "f", [[1], [5]]),
                         PipelineConfig(decide=always_split))
    assert out.passed


@needs_gcc
def test_failing_unit_reports_last_attempt():
    src = "int f(int a){ return a + 1; }"
    out = compile_source(src, FaultInjectionBackend("off-by-one", "always"), io_tests(src, "f", [[1]]),
                         PipelineConfig(max_retries=3))
    assert not out.passed and len(out.attempts) == 3
    assert out.report.error_class == "behavioral"


@needs_gcc
def test_without_tests_the_assembler_decides():
    out = compile_source("int f(int a){ return a; }", RefBackend())
    assert out.passed and out.report.stage == "assemble"


@needs_gcc
def test_artifacts(tmp_path):
    tests = io_tests(SAMPLE, "f", [[3]])
    out = compile_source(SAMPLE, RefBackend(), tests, PipelineConfig(decide=always_split))
    write_artifacts(str(tmp_path), out, "lego")
    names = set(os.listdir(tmp_path))
    assert {"module.s", "report.json", "f.symtab.txt", "f.parts.txt", "f.rename.txt",
            "clamp.symtab.txt", "attempts"} <= names
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["status"] == "pass" and report["exit_code"] == 0 and len(report["attempts"]) == 1


def test_complexity_filter():
    small = complexity(unit("int f(int a){ return a; }"))
    assert small.blocks == 1 and not small.is_hard()
    body = " ".join(f"if (a > {i}) {{ a = a - 1; }}" for i in range(12))
    branchy = complexity(unit(f"int f(int a){{ {body} return a; }}"))
    assert branchy.blocks >= 10 and branchy.is_hard()
    assert Complexity(1, 80, 80).is_hard() and Complexity(1, 1, 200).is_hard()
    assert not Complexity(9, 79, 199).is_hard()


class ScriptedModel:
    name = "scripted"

    def __init__(self, replies):
        self.replies = list(replies)
        self.requests = []

    def translate(self, req):
        self.requests.append(req)
        return AssemblyFragment.from_text(self.replies.pop(0))


@needs_gcc
def test_raw_text_route():
    model = ScriptedModel(["\tcmpl\t$1, $2", "\t.globl\tf\nf:\n\tmovl\t$0, %eax\n\tret"])
    src = "int f(void) { int (*p)(void) = 0; return 0; }"
    out = compile_raw(src, model)
    assert out.passed and len(out.attempts) == 2
    assert model.requests[0].mode == "direct" and model.requests[0].source == src
    assert "operand type mismatch" in model.requests[1].feedback.diagnostics
