"""Executable checks that piecewise translation composes.

Basic statements: translating ``s1; s2`` in one go must behave like
translating ``s1`` and ``s2`` separately and concatenating the results.
Control structures: splitting a structure into parts, translating each and
rebuilding must behave like translating the whole function.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..frontend import ast as A
from ..frontend.parser import parse_source
from ..frontend.printer import stmts_to_c
from ..frontend.sema import check
from ..mapping import allocate_frame, global_entries, map_globals
from ..pipeline import PipelineConfig, plan_function, translate_plan
from ..rebuild import emit_module, rebuild, whole_function
from ..splitter import ControlPart, PartKind, always_split
from ..translation.backends import Backend, RefBackend, translate
from ..translation.request import PartContext, TranslationRequest
from ..verify.driver import generate_driver
from ..verify.harness import DEFAULT_TIMEOUT, module_outputs
from ..verify.testcases import TestCase

# shared state every basic-statement pair reads and writes
STATE = [("int", "a"), ("int", "b"), ("int", "c"), ("unsigned", "u"), ("long", "l"),
         ("double", "d")]
STATE_ARRAY = ("int", "arr", 4)
STATE_FIXTURES = [
    {"a": 0, "b": 0, "c": 0, "u": 0, "l": 0, "d": 0.0, "arr": [0, 0, 0, 0]},
    {"a": 5, "b": -3, "c": 7, "u": 9, "l": -100, "d": 2.5, "arr": [1, 2, 3, 4]},
    {"a": -17, "b": 1000, "c": -1, "u": 4000000000, "l": 1 << 40, "d": -0.75,
     "arr": [-5, 0, 9, 2]},
]
_FMT = {"int": "%d", "unsigned": "%u", "long": "%ld", "double": "%.17g"}


# ---------------------------------------------------------------- basic statements

def _state_decls() -> list[str]:
    t, n, k = STATE_ARRAY
    return [f"{ty} {name};" for ty, name in STATE] + [f"{t} {n}[{k}];"]


def _int_operand(rng: random.Random) -> str:
    r = rng.random()
    if r < 0.3:
        return str(rng.randint(0, 50))
    if r < 0.45:
        return f"arr[{rng.randint(0, 3)}]"
    return rng.choice(["a", "b", "c", "u", "l"])


def _int_expr(rng: random.Random, depth: int = 2) -> str:
    if depth == 0 or rng.random() < 0.3:
        return _int_operand(rng)
    x, y = _int_expr(rng, depth - 1), _int_expr(rng, depth - 1)
    k = rng.randrange(6)
    if k == 0:
        return f"({x} / (({y} & 7) + 1))"
    if k == 1:
        return f"({x} {rng.choice(['<', '==', '!=', '>='])} {y})"
    if k == 2:
        return f"({x} >> ({y} & 7))"
    return f"({x} {rng.choice(['+', '-', '*', '&', '|', '^'])} {y})"


def random_basic_statement(rng: random.Random, tag: str = "t") -> str:
    """One basic statement over the shared state; ``tag`` names any local it declares."""
    k = rng.randrange(10)
    if k == 0:
        return ";"
    if k == 1:
        return f"int {tag} = {_int_expr(rng)};"
    if k == 2:
        return f"d = d * 0.5 + (double)({_int_expr(rng, 1)});"
    if k == 3:
        return f"{rng.choice(['a', 'b', 'c'])}{rng.choice(['++', '--'])};"
    if k == 4:
        return f"arr[{rng.randint(0, 3)}] = {_int_expr(rng)};"
    if k == 5:
        return f"{rng.choice(['a', 'b', 'u', 'l'])} {rng.choice(['+=', '-=', '^=', '|='])} {_int_expr(rng)};"
    if k == 6:
        return f"c = (int)(d) + {_int_expr(rng, 1)};"
    return f"{rng.choice(['a', 'b', 'c', 'u', 'l'])} = {_int_expr(rng)};"


def random_basic_pairs(n: int, seed: int = 0) -> list[tuple[str, str]]:
    rng = random.Random(f"basic-{seed}")
    return [(random_basic_statement(rng, "t1"), random_basic_statement(rng, "t2")) for _ in range(n)]


def _state_driver(names: list[str], fixtures: list[dict]) -> str:
    t, an, k = STATE_ARRAY
    lines = ["#include <stdio.h>"]
    lines += [f"extern {ty} {n};" for ty, n in STATE] + [f"extern {t} {an}[{k}];"]
    lines += [f"void {n}(void);" for n in names]
    lines += ["", "static void dump(void)", "{"]
    for ty, n in STATE:
        lines.append(f'    printf("{n}={_FMT[ty]}\\n", {n});')
    for i in range(k):
        lines.append(f'    printf("{an}[{i}]={_FMT[t]}\\n", {an}[{i}]);')
    lines += ["}", "", "int main(void)", "{"]
    for fi, fx in enumerate(fixtures):
        for n in names:
            for ty, v in STATE:
                val = repr(float(fx[v])) if ty == "double" else f"{fx[v]}LL"
                lines.append(f"    {v} = {val};")
            for i, v in enumerate(fx[an]):
                lines.append(f"    {an}[{i}] = {v};")
            lines += [f'    printf("== {n} fixture {fi}\\n");', f"    {n}();", "    dump();"]
    lines += ["    return 0;", "}", ""]
    return "\n".join(lines)


def _basic_unit(pairs: list[tuple[str, str]]) -> A.Ast:
    src = "\n".join(_state_decls())
    for i, (s1, s2) in enumerate(pairs):
        src += f"\nvoid p{i}(void)\n{{\n    {s1}\n    {s2}\n}}\n"
    return check(parse_source(src))


def composed_and_separate(pairs: list[tuple[str, str]], backend: Backend | None = None):
    """(module from whole translations, module from per-statement translations, unit)."""
    backend = backend or RefBackend()
    tree = _basic_unit(pairs)
    entries = global_entries(tree.globals)
    joint, separate = [], []
    for fn in tree.functions:
        table = allocate_frame(fn, globals_=entries)
        req = TranslationRequest("workflow", stmts_to_c(fn.body.items), table, unit=fn, function=fn)
        joint.append(whole_function(fn.name, translate(req, backend)))
        frags = []
        for i, s in enumerate(fn.body.items):
            part = ControlPart(PartKind.SOURCE, stmts_to_c([s], 0, canonical=True), i, nodes=[s])
            preq = TranslationRequest("lego-part", part.payload, table, part_context=PartContext(i),
                                      unit=part, function=fn)
            frags.append((part, translate(preq, backend)))
        separate.append(rebuild(frags, table, fn.name))
    plans = map_globals(tree.globals)
    return emit_module(joint, plans), emit_module(separate, plans), tree


def theorem_check_basic_statements(pairs: list[tuple[str, str]], backend: Backend | None = None,
                                   fixtures: list[dict] | None = None,
                                   timeout: float = DEFAULT_TIMEOUT) -> bool:
    """True iff T(s1; s2) and T(s1) . T(s2) leave the same state on every fixture."""
    if not pairs:
        return True
    fixtures = fixtures or STATE_FIXTURES
    joint, separate, tree = composed_and_separate(pairs, backend)
    driver = _state_driver([f.name for f in tree.functions], fixtures)
    # the driver ignores the case index, so one run covers every pair
    a = module_outputs(joint, driver, 1, timeout)
    b = module_outputs(separate, driver, 1, timeout)
    return a == b and "<" not in a[0]


# ---------------------------------------------------------------- control structures

@dataclass
class ControlFixture:
    name: str
    source: str
    inputs: list[list] = field(default_factory=lambda: [[]])
    function: str = "f"


CONTROL_FIXTURES = [
    ControlFixture("while-count-to-10", """
int g;
int f(void)
{
    int i = 0;
    while (i < 10) {
        i = i + 1;
        g = g + i;
    }
    return i;
}
"""),
    ControlFixture("if-else", """
int g;
int f(int x)
{
    int r = 0;
    if (x > 3) {
        r = x * 2;
        g = 1;
    } else {
        r = x - 7;
        g = 2;
    }
    return r;
}
""", [[0], [4], [-9]]),
    ControlFixture("for-continue", """
long total;
long f(int n)
{
    long s = 0;
    for (int i = 0; i < n; i++) {
        if (i % 3 == 0) {
            continue;
        }
        s += i;
    }
    total = s * 2;
    return s;
}
""", [[0], [10], [17]]),
    ControlFixture("do-while", """
unsigned h;
unsigned f(unsigned x)
{
    unsigned steps = 0;
    do {
        x = x / 2;
        steps++;
    } while (x > 0);
    h = steps;
    return x;
}
""", [[0], [1], [1000]]),
    ControlFixture("switch-fall-through", """
int trace;
int f(int k)
{
    int r = 0;
    switch (k) {
        case 0:
            r = r + 1;
        case 1:
            r = r + 10;
            break;
        case 2:
            r = r + 100;
        default:
            r = r + 1000;
    }
    trace = r;
    return r;
}
""", [[0], [1], [2], [3], [-1]]),
    ControlFixture("nested-inner-break", """
int hits;
int f(int n)
{
    int c = 0;
    for (int i = 0; i < n; i++) {
        int j = 0;
        while (1) {
            if (j >= i) {
                break;
            }
            j = j + 1;
            c = c + 1;
        }
        hits = hits + j;
    }
    return c;
}
""", [[0], [3], [6]]),
    ControlFixture("loop-switch-continue", """
int evens;
int f(int n)
{
    int s = 0;
    int i = 0;
    while (i < n) {
        i = i + 1;
        switch (i & 1) {
            case 0:
                evens = evens + 1;
                continue;
            default:
                s = s + i;
        }
        s = s + 100;
    }
    return s;
}
""", [[0], [5], [8]]),
    ControlFixture("double-accumulate", """
double acc;
double f(double x, int n)
{
    double r = 1.0;
    for (int i = 0; i < n; i++) {
        if (r > 100.0) {
            break;
        }
        r = r * x + 0.5;
    }
    acc = r;
    return r;
}
""", [[1.5, 4], [3.0, 20], [-0.5, 3]]),
]


@dataclass
class FixtureResult:
    name: str
    equal: bool
    parts: int
    whole_output: list[str]
    split_output: list[str]


def check_control_fixture(fx: ControlFixture, backend: Backend | None = None,
                          timeout: float = DEFAULT_TIMEOUT) -> FixtureResult:
    backend = backend or RefBackend()
    tree = check(parse_source(fx.source))
    whole = PipelineConfig(mode="workflow")
    lego = PipelineConfig(mode="lego", decide=always_split)
    plans = map_globals(tree.globals)
    modules, nparts = [], 0
    for config in (whole, lego):
        funcs = []
        for fn in tree.functions:
            plan = plan_function(tree, fn, config)
            if plan.parts is not None:
                nparts += len(plan.parts)
            funcs.append(translate_plan(tree, plan, backend, config.mode))
        modules.append(emit_module(funcs, plans))
    cases = [TestCase(f"c{i}", list(args), expected_stdout="") for i, args in enumerate(fx.inputs)]
    driver = generate_driver(tree, fx.function, cases)
    a = module_outputs(modules[0], driver, len(cases), timeout)
    b = module_outputs(modules[1], driver, len(cases), timeout)
    ok = a == b and nparts > 1 and not any("<" in o for o in a)
    return FixtureResult(fx.name, ok, nparts, a, b)


def theorem_check_control_structures(fixtures: list[ControlFixture] | None = None,
                                     backend: Backend | None = None,
                                     timeout: float = DEFAULT_TIMEOUT) -> bool:
    """Split-translate-rebuild behaves like whole translation on every fixture."""
    fixtures = CONTROL_FIXTURES if fixtures is None else fixtures
    return all(check_control_fixture(fx, backend, timeout).equal for fx in fixtures)
