import os

import yaml

from partcc.frontend import parse_source
from partcc.interp import run_function
from partcc.splitter import PartKind, always_split, check_composability, split_parts
from partcc.suite.corpus import CorpusEntry, dump_manifest, load_manifest, materialize, \
    seed_manifest, write_corpus
from partcc.suite.generator import FUNCTION, gen_subset_program, generate
from partcc.suite.theorems import CONTROL_FIXTURES, check_control_fixture, random_basic_pairs, \
    theorem_check_basic_statements, theorem_check_control_structures
from partcc.transforms import rename_variables
from partcc.verify.testcases import load_tests_file

from conftest import needs_gcc, unit

GOLDEN = os.path.join(os.path.dirname(__file__), "golden", "seed0_budget10.c")


def test_golden_program():
    with open(GOLDEN, encoding="utf-8") as fh:
        assert gen_subset_program(0, 10) == fh.read()


def test_generation_is_deterministic():
    assert generate(17, 14).source == generate(17, 14).source
    assert generate(17, 14).source != generate(18, 14).source


def test_generated_programs_parse_and_are_goto_free():
    for seed in range(100):
        prog = generate(seed, 12)
        tree = unit(prog.source)      # raises on anything outside the subset
        fn = tree.function(FUNCTION)
        assert check_composability(fn).composable
        assert "goto" not in prog.source


def test_generated_programs_terminate_without_ub():
    for seed in range(60):
        prog = generate(seed, 14)
        tree = unit(prog.source)
        for args in prog.inputs:
            assert run_function(tree, FUNCTION, args, max_steps=10**6).steps <= 10**6


def test_sequential_programs():
    prog = generate(3, 10, sequential=True)
    tree = unit(prog.source)
    assert "x_" in prog.source and "y_" in prog.source
    for args in prog.inputs:
        run_function(tree, FUNCTION, args)


@needs_gcc
def test_basic_statement_examples():
    assert theorem_check_basic_statements([("a=b+3;", "b=a-1;")])
    assert theorem_check_basic_statements([(";", ";")])


@needs_gcc
def test_random_basic_statement_pairs():
    assert theorem_check_basic_statements(random_basic_pairs(500, seed=1))


@needs_gcc
def test_control_fixtures():
    assert theorem_check_control_structures()


@needs_gcc
def test_switch_fall_through_fixture():
    fx = next(f for f in CONTROL_FIXTURES if f.name == "switch-fall-through")
    result = check_control_fixture(fx)
    assert result.equal and result.parts > 1
    rets = [out.splitlines()[0] for out in result.split_output]
    assert rets == ["ret=11", "ret=10", "ret=1100", "ret=1000", "ret=1000"]


def test_nested_break_targets_inner_end():
    fx = next(f for f in CONTROL_FIXTURES if f.name == "nested-inner-break")
    fn = rename_variables(unit(fx.source).function("f"))[0]
    parts = split_parts(fn, decide=always_split)
    ends = [p for p in parts if p.kind == PartKind.LABEL and p.label.endswith("_end")]
    outer, inner = sorted(ends, key=lambda p: p.loop_depth)
    (brk,) = [p for p in parts if p.kind == PartKind.SOURCE and p.payload.strip() == "break;"]
    assert brk.break_label == inner.label != outer.label


def test_manifest_round_trip(tmp_path):
    entries = seed_manifest([1, 2], budget=9) + [CorpusEntry("file", "a.c", "a.tests.yaml")]
    path = tmp_path / "m.yaml"
    path.write_text(dump_manifest(entries))
    back = load_manifest(str(path))
    assert [(e.name, e.seed, e.budget) for e in back[:2]] == [("seed1-b9", 1, 9), ("seed2-b9", 2, 9)]
    assert back[2].source == str(tmp_path / "a.c")
    assert yaml.safe_load(path.read_text())["cases"][0]["expected_pass"] is True


def test_empty_manifest(tmp_path):
    path = tmp_path / "m.yaml"
    path.write_text("cases: []\n")
    assert load_manifest(str(path)) == []


@needs_gcc
def test_write_corpus(tmp_path):
    path = write_corpus(str(tmp_path), [0, 1], budget=8)
    entries = load_manifest(path)
    assert [e.name for e in entries] == ["seed0-b8", "seed1-b8"]
    text, tests = materialize(entries[0])
    assert parse_source(text).function(FUNCTION)
    assert tests[0].cases and all(c.has_expectation for c in tests[0].cases)
    assert load_tests_file(entries[1].tests)[0].function == FUNCTION
