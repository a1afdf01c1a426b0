import pytest

from partcc.frontend.printer import ast_to_c
from partcc.interp import StepLimitExceeded, UndefinedBehavior, run_function
from partcc.suite.generator import generate
from partcc.verify.driver import generate_driver, parse_output
from partcc.verify.harness import reference_outputs
from partcc.verify.testcases import TestCase

from conftest import needs_gcc, unit


def run(src, args, **kw):
    tree = unit(src)
    return run_function(tree, tree.functions[-1].name, args, **kw)


def test_return_and_globals():
    r = run("int g; double h; int f(int x){ g = x * 2; h = x / 4.0; return g + 1; }", [3])
    assert r.ret == "7"
    assert r.stdout == "ret=7\ng=6\nh=0.75\n"


@pytest.mark.parametrize("src, args", [
    ("int f(int x){ return 10 / x; }", [0]),
    ("int f(int x){ return x + 2147483647; }", [1]),
    ("int f(int x){ return 1 << x; }", [40]),
    ("int f(int x){ int a[4]; a[0] = 1; return a[x]; }", [4]),
    ("int f(int x){ int y; return y + x; }", [1]),
    ("int f(int x){ return (-2147483647 - 1) / x; }", [-1]),
])
def test_undefined_behaviour_detected(src, args):
    with pytest.raises(UndefinedBehavior):
        run(src, args)


def test_unsigned_wraps():
    assert run("unsigned f(unsigned x){ return x - 1u; }", [0]).ret == "4294967295"


def test_wrap_mode():
    assert run("int f(int x){ return x + 2147483647; }", [1], wrap=True).ret == "-2147483648"


def test_step_limit():
    with pytest.raises(StepLimitExceeded):
        run("int f(int x){ while (1) { x = x ^ 1; } return x; }", [0], max_steps=10_000)


def test_switch_fall_through():
    src = """int f(int k){ int r = 0; switch (k) { case 0: r += 1; case 1: r += 10; break;
             default: r += 100; } return r; }"""
    assert [run(src, [k]).ret for k in (0, 1, 5)] == ["11", "10", "100"]


def test_call_restores_caller_return_slot():
    src = "int h(int x){ return x * 3; } int f(int x){ int y = h(x) + h(1); return y; }"
    assert run(src, [2]).ret == "9"


@needs_gcc
def test_matches_system_compiler_on_generated_programs():
    for seed in range(25):
        prog = generate(seed, 12)
        tree = unit(prog.source)
        cases = [TestCase(f"c{i}", a, expected_stdout="") for i, a in enumerate(prog.inputs)]
        driver = generate_driver(tree, prog.function, cases)
        want = reference_outputs(ast_to_c(tree), driver, len(cases))
        for args, expect in zip(prog.inputs, want):
            assert parse_output(run_function(tree, prog.function, args).stdout) == expect, seed
