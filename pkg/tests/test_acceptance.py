"""Acceptance criteria; each test prints one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines next to
the pytest verdicts (they are printed with capture disabled either way).
"""
import dataclasses
import math
import os
import random
import time
from concurrent.futures import ThreadPoolExecutor

import pytest

from partcc.errors import ExhaustedRetries, ImmediateOverflow
from partcc.frontend.parser import parse_source
from partcc.frontend.sema import check
from partcc.layout import compute_layout, verify_layout_against_oracle
from partcc.mapping import allocate_frame, check_no_overlap
from partcc.pipeline import PipelineConfig, UnitJob, compile_source, compile_unit, plan_function, \
    reference_tests
from partcc.splitter import PartKind, always_split, split_parts, verify_split_integrity
from partcc.suite.corpus import generated_tests
from partcc.suite.generator import generate
from partcc.suite.theorems import ControlFixture, check_control_fixture
from partcc.translation.backends import FaultInjectionBackend, RefBackend, translate
from partcc.translation.request import TranslationRequest
from partcc.verify.repair import repair_loop

from conftest import fn_of, needs_gcc
from typegen import random_locals_source, random_record

WORKERS = max(2, min(8, os.cpu_count() or 2))


@pytest.fixture
def verdict(capsys):
    def say(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n}: {'PASS' if ok else 'FAIL'} - {detail}")
        return ok
    return say


# 1 -------------------------------------------------------------------------

def _lego_case(seed):
    prog = generate(seed, 12)
    tree = check(parse_source(prog.source))
    config = PipelineConfig(mode="lego", decide=always_split)
    intact = True
    for fn in tree.functions:
        plan = plan_function(tree, fn, config)
        if plan.parts is not None:
            intact &= verify_split_integrity(plan.fn, plan.parts)
    out = compile_unit(tree, RefBackend(), [generated_tests(prog, tree)], config)
    return seed, out.passed, intact


@pytest.mark.slow
@needs_gcc
def test_1_composability_at_scale(verdict):
    start = time.monotonic()
    with ThreadPoolExecutor(WORKERS) as pool:
        rows = list(pool.map(_lego_case, range(300)))
    secs = time.monotonic() - start
    failed = [s for s, ok, _ in rows if not ok]
    broken = [s for s, _, intact in rows if not intact]
    ok = not failed and not broken and secs < 600
    assert verdict(1, ok, f"300 seeds lego+ref, {300 - len(failed)}/300 pass, "
                          f"integrity broken on {len(broken)}, {secs:.0f}s")
    assert not failed, failed


# 2 -------------------------------------------------------------------------

def _numbers_close(a, b):
    if a == b:
        return True
    try:
        x, y = float(a), float(b)
    except ValueError:
        return False
    if "." not in a + b and "e" not in (a + b).lower() and "nan" not in (a + b).lower():
        return False        # integers must match exactly
    return math.isclose(x, y, rel_tol=1e-9, abs_tol=0.0) or (math.isnan(x) and math.isnan(y))


def _outputs_agree(xs, ys):
    if len(xs) != len(ys):
        return False
    for x, y in zip(xs, ys):
        lx, ly = x.splitlines(), y.splitlines()
        if len(lx) != len(ly):
            return False
        for a, b in zip(lx, ly):
            ka, _, va = a.partition("=")
            kb, _, vb = b.partition("=")
            if ka != kb or not _numbers_close(va, vb):
                return False
    return True


def _equivalence_case(seed):
    prog = generate(seed, 12)
    fx = ControlFixture(f"seed{seed}", prog.source, prog.inputs, prog.function)
    res = check_control_fixture(fx)
    ok = _outputs_agree(res.whole_output, res.split_output) and not any("<" in o for o in res.whole_output)
    return seed, ok


@needs_gcc
def test_2_rebuild_equals_whole_translation(verdict):
    with ThreadPoolExecutor(WORKERS) as pool:
        rows = list(pool.map(_equivalence_case, range(1000, 1100)))
    bad = [s for s, ok in rows if not ok]
    assert verdict(2, not bad, f"100 programs, split vs whole disagree on {len(bad)}"), bad


# 3 -------------------------------------------------------------------------

@needs_gcc
def test_3_layout_fidelity(verdict):
    rng = random.Random(2024)
    layouts = [compute_layout(random_record(rng, 3)) for _ in range(50)]
    bad = verify_layout_against_oracle(layouts)
    assert verdict(3, not bad, f"50 compound types vs gcc, {len(bad)} mismatches"), bad[:5]


# 4 -------------------------------------------------------------------------

def _mutations(table, rng):
    """(expected violation kind, mutated table) for each applicable mutation."""
    slots = table.locals
    out = []
    if len(slots) >= 2:
        i, j = sorted(rng.sample(range(len(slots)), 2))
        moved = dataclasses.replace(slots[j], offset=slots[i].offset)
        out.append(("overlap", slots[:j] + [moved] + slots[j + 1:]))
    wide = [k for k, s in enumerate(slots) if s.align > 1]
    if wide:
        k = rng.choice(wide)
        out.append(("misaligned", slots[:k] + [dataclasses.replace(slots[k], offset=slots[k].offset - 1)]
                    + slots[k + 1:]))
    if slots:
        k = rng.randrange(len(slots))
        s = slots[k]
        below = -table.frame_size - -(-s.size // s.align) * s.align
        out.append(("out-of-bounds", slots[:k] + [dataclasses.replace(s, offset=below)] + slots[k + 1:]))
    return [(kind, dataclasses.replace(table, locals=locs)) for kind, locs in out]


def test_4_frame_safety(verdict):
    rng = random.Random(7)
    violations = missed = mutated = 0
    for _ in range(1000):
        fn = check(parse_source(random_locals_source(rng))).functions[-1]
        table = allocate_frame(fn)
        violations += len(check_no_overlap(table))
        for kind, bad in _mutations(table, rng):
            mutated += 1
            if kind not in {v.kind for v in check_no_overlap(bad)}:
                missed += 1
    ok = violations == 0 and missed == 0 and mutated > 2000
    assert verdict(4, ok, f"1000 frames, {violations} violations; "
                          f"{mutated - missed}/{mutated} mutations detected")


# 5 -------------------------------------------------------------------------

REPAIR_SRC = "int g;\nint f(int a, int b)\n{\n    if (a < b) {\n        g = b - a;\n    }\n    return a + b;\n}\n"


@needs_gcc
def test_5_repair_loop(verdict):
    tree = check(parse_source(REPAIR_SRC))
    tests = [reference_tests(tree, "f", [[1, 2], [5, -3]])]
    config = PipelineConfig(mode="lego")
    plans = [plan_function(tree, fn, config) for fn in tree.functions]
    req = TranslationRequest("workflow", REPAIR_SRC)
    _, n, trail = repair_loop(req, FaultInjectionBackend("cmp-imm", "once"), tests, 5,
                              UnitJob(tree, plans, "lego"))
    first_ok = n == 2 and trail[0].report.error_class == "semantic" and trail[1].report.passed
    try:
        repair_loop(req, FaultInjectionBackend("cmp-imm", "always"), tests, 5, UnitJob(tree, plans, "lego"))
        count = None
    except ExhaustedRetries as exc:
        count = len(exc.attempts)
    ok = first_ok and count == 5
    assert verdict(5, ok, f"once-faulty backend passes at attempt {n}; always-faulty stops "
                          f"after {count} attempts with ExhaustedRetries")


# 6 -------------------------------------------------------------------------

@needs_gcc
def test_6_error_taxonomy(verdict):
    tests = [reference_tests(check(parse_source(REPAIR_SRC)), "f", [[1, 2], [5, -3]])]
    got = {}
    for fault in ("cmp-imm", "spin", "off-by-one"):
        out = compile_source(REPAIR_SRC, FaultInjectionBackend(fault, "always"), tests,
                             PipelineConfig(max_retries=1, timeout=2.0))
        got[fault] = out.report.error_class
    want = {"cmp-imm": "semantic", "spin": "runtime", "off-by-one": "behavioral"}
    hits = sum(got[k] == want[k] for k in want)
    assert verdict(6, hits == 3, f"{hits}/3 classified ({got})")


# 7 -------------------------------------------------------------------------

def test_7_overflow_diagnostic(verdict):
    fn = fn_of("int f(void)\n{\n    int16_t x = 0x56671485;\n    return x;\n}\n")
    req = TranslationRequest("workflow", "", allocate_frame(fn), unit=fn, function=fn)
    try:
        translate(req, RefBackend())
        caught = None
    except ImmediateOverflow as exc:
        caught = exc
    ok = caught is not None and caught.value == 0x56671485 and caught.width == 16
    assert verdict(7, ok, f"int16_t x = 0x56671485 -> {type(caught).__name__ if caught else 'accepted'}")


# 8 -------------------------------------------------------------------------

def _shape(parts):
    return [(p.kind.value, p.role if p.kind == PartKind.SOURCE else p.label.rsplit("_", 1)[-1])
            for p in parts]


def test_8_split_structure(verdict):
    loop = split_parts(fn_of("void f(int n){ int s = 0; for (int i = 0; i < n; i++) { s += i; } }"),
                       decide=always_split)[1:]
    branch = split_parts(fn_of("int f(int x){ if (x > 1) { x = 2; } else { x = 3; } }"),
                         decide=always_split)
    ok = _shape(loop) == [
        ("SourceBlock", "for_init"), ("Label", "body"), ("SourceBlock", "cond"), ("CondJump", "end"),
        ("SourceBlock", "stmts"), ("SourceBlock", "for_incr"), ("UncondJump", "body"), ("Label", "end"),
    ] and _shape(branch) == [
        ("SourceBlock", "cond"), ("CondJump", "else"), ("SourceBlock", "stmts"), ("UncondJump", "endif"),
        ("Label", "else"), ("SourceBlock", "stmts"), ("Label", "endif"),
    ]
    assert verdict(8, ok, f"for -> {len(loop)} parts, if/else -> {len(branch)} parts, orders as expected")


# 9 -------------------------------------------------------------------------

def test_9_llm_accuracy_not_reproduced(capsys):
    with capsys.disabled():
        print("\nACCEPTANCE 9: SKIP - model accuracy on full benchmarks needs paid endpoints and "
              "datasets; see tests/test_live_llm.py for an opt-in smoke run")
    pytest.skip("needs a live model endpoint and the full benchmark datasets")
