import copy
import random
from collections import Counter

from hypothesis import given, settings, strategies as st

from partcc.frontend import ast as A
from partcc.frontend.features import stmt_complexity
from partcc.frontend.sema import ProgramEnv
from partcc.interp import run_function
from partcc.suite.generator import generate
from partcc.transforms import decompose_complex_expressions, rename_variables, \
    verify_rename_equivalence
from partcc.verify.testcases import TestCase

from conftest import needs_gcc, unit

SHADOW = "int f(int k){ int x; x = k; { int x; x = 1; } return x; }"
COMPLEX = ("int f(int a, int b, int c, int d, int e, int g)"
           "{ int x; x = ((a*b)+(c*d))-((e/g)+a); return x; }")


def assigns(fn):
    return [s for s in A.iter_stmts(fn.body) if isinstance(s, A.Assign)]


def test_rename_shadowing_fixture():
    fn = unit("int f(void){ int x; x = 0; { int x; x = 1; } x = 2; return x; }").functions[0]
    out, rmap = rename_variables(fn)
    assert [(e.original, e.fresh) for e in rmap.entries] == [("x", "x__1"), ("x", "x__2")]
    targets = [s.target.name for s in assigns(out)]
    assert targets == ["x__1", "x__2", "x__1"]
    assert out.body.items[-1].value.name == "x__1"
    # the input is left alone
    assert assigns(fn)[1].target.name == "x"


def test_rename_counts_parameters_first():
    fn = unit(SHADOW).functions[0]
    out, rmap = rename_variables(fn)
    assert out.params[0].name == "k__1"
    assert rmap.lookup("x") == ["x__2", "x__3"]


def test_rename_single_variable():
    fn = unit("int f(void){ int x; x = 3; return x; }").functions[0]
    out, _ = rename_variables(fn)
    assert [s.target.name for s in assigns(out)] == ["x__1"]


def test_rename_invariants_on_generated_programs():
    for seed in range(40):
        fn = unit(generate(seed, 12).source).function("func")
        out, rmap = rename_variables(fn)
        fresh = rmap.fresh_names()
        assert len(fresh) == len(set(fresh))
        keys = [(e.scope_path, e.original) for e in rmap.entries]
        assert len(keys) == len(set(keys))
        before = Counter(s.kind for s in A.iter_stmts(fn.body))
        after = Counter(s.kind for s in A.iter_stmts(out.body))
        assert before == after


@needs_gcc
def test_rename_equivalence_holds_and_detects_misbinding():
    tree = unit(SHADOW)
    fn = tree.functions[0]
    tests = [TestCase(f"c{i}", [v]) for i, v in enumerate([0, 5, -7])]
    assert verify_rename_equivalence(fn, fn, tests, tree)
    renamed, _ = rename_variables(fn)
    assert verify_rename_equivalence(fn, renamed, tests, tree)
    bad = copy.deepcopy(renamed)
    assigns(bad)[1].target.name = "x__2"    # the inner store now hits the outer x
    assert verify_rename_equivalence(fn, bad, tests, tree) is False


def test_decompose_leaves_small_expressions():
    fn = rename_variables(unit("int f(int a, int b){ int x; x = a + b; return x; }").functions[0])[0]
    assert decompose_complex_expressions(fn, 4).body == fn.body


def test_decompose_bounds_every_expression():
    tree = unit(COMPLEX)
    fn = rename_variables(tree.functions[0])[0]
    out = decompose_complex_expressions(fn, 2)
    assert all(stmt_complexity(s) <= 2 for s in A.iter_stmts(out.body))
    temps = [s.name for s in A.iter_stmts(out.body) if isinstance(s, A.Decl) and s.name.startswith("t__")]
    assert temps and len(temps) == len(set(temps))
    rng = random.Random(7)
    new_tree = tree.replace_function(out)
    for _ in range(100):
        args = [rng.randint(-1000, 1000) for _ in range(5)] + [rng.choice([-3, -1, 1, 2, 9])]
        assert run_function(tree, "f", args).ret == run_function(new_tree, "f", args).ret


def test_decompose_keeps_call_order():
    src = """
int trace;
int f(void) { trace = trace * 10 + 1; return 1; }
int g(void) { trace = trace * 10 + 2; return 2; }
int h(void) { trace = trace * 10 + 3; return 3; }
int m(void) { int x; x = f() + g() * h(); return trace * 100 + x; }
"""
    tree = unit(src)
    out = decompose_complex_expressions(rename_variables(tree.function("m"))[0], 1,
                                        ProgramEnv.of(tree))
    assert len(out.body.items) > len(tree.function("m").body.items)
    expect = run_function(tree, "m", []).ret
    assert expect == "12307"   # f, g, h ran left to right
    assert run_function(tree.replace_function(out), "m", []).ret == expect


def test_decompose_keeps_float_types():
    src = "double f(int a, double d){ double r; r = (a / 2) * d + (a % 3) * (d - 1.5) / (a + 1.0); return r; }"
    tree = unit(src)
    out = decompose_complex_expressions(rename_variables(tree.functions[0])[0], 2)
    for a, d in [(5, 0.25), (-7, 3.5), (11, -2.0)]:
        assert run_function(tree, "f", [a, d]).ret == run_function(tree.replace_function(out), "f", [a, d]).ret


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(min_value=-10**6, max_value=10**6), min_size=6, max_size=6),
       st.integers(min_value=1, max_value=4))
def test_decompose_preserves_results(args, limit):
    tree = unit(COMPLEX.replace("(e/g)", "(e/((g & 7) + 1))"))
    out = decompose_complex_expressions(rename_variables(tree.functions[0])[0], limit)
    assert run_function(tree, "f", args, wrap=True).ret == \
        run_function(tree.replace_function(out), "f", args, wrap=True).ret
