import dataclasses

import pytest

from partcc.errors import ConfigError, NonComposable
from partcc.frontend import ast as A
from partcc.frontend.printer import stmts_to_c
from partcc.splitter import (GOTO_REASON, Block, PartKind, SplitConfig, always_split,
                             check_composability, dump_parts, heuristic_decide, never_split,
                             random_policy, recombine, split_parts, verify_split_integrity)
from partcc.suite.generator import generate
from partcc.transforms import rename_variables

from conftest import fn_of, unit

FOR_SRC = "int f(int n){ int s = 0; for (int i = 0; i < n; i++) { s += i; } return s; }"
IF_SRC = "int f(int x){ if (x > 1) { x = 2; } else { x = 3; } return x; }"
NESTED = """
int f(int x)
{
    while (x) {
        while (1) {
            if (x > 3) {
                break;
            }
            x++;
        }
        x--;
    }
    return x;
}
"""


def shape(parts):
    return [(p.kind.value, p.role if p.kind == PartKind.SOURCE else p.label.rsplit("_", 1)[-1])
            for p in parts]


def test_for_loop_force_split_order():
    parts = split_parts(fn_of(FOR_SRC), decide=always_split)
    loop = parts[1:9]
    assert shape(loop) == [
        ("SourceBlock", "for_init"), ("Label", "body"), ("SourceBlock", "cond"),
        ("CondJump", "end"), ("SourceBlock", "stmts"), ("SourceBlock", "for_incr"),
        ("UncondJump", "body"), ("Label", "end")]
    assert [p.id for p in parts] == list(range(len(parts)))
    assert loop[3].label == loop[7].label and loop[6].label == loop[1].label


def test_if_else_force_split_order():
    parts = split_parts(fn_of("int f(int x){ if (x > 1) { x = 2; } else { x = 3; } }"),
                        decide=always_split)
    assert shape(parts) == [
        ("SourceBlock", "cond"), ("CondJump", "else"), ("SourceBlock", "stmts"),
        ("UncondJump", "endif"), ("Label", "else"), ("SourceBlock", "stmts"), ("Label", "endif")]


def test_label_naming():
    parts = split_parts(fn_of(IF_SRC), decide=always_split)
    labels = [p.label for p in parts if p.kind == PartKind.LABEL]
    assert labels == [".L_f__0_else", ".L_f__0_endif"]


def test_small_function_is_one_part():
    parts = split_parts(fn_of(FOR_SRC))
    assert len(parts) == 1 and parts[0].kind == PartKind.SOURCE
    assert verify_split_integrity(fn_of(FOR_SRC), parts)


def test_composability_verdicts():
    assert check_composability(fn_of("int f(int a){ a = a + 1; return a; }")).composable
    nested = fn_of("int f(int n){ int s = 0; for (int i = 0; i < n; i++) { if (i) { s++; } } return s; }")
    assert check_composability(nested).composable
    v = check_composability(fn_of("int f(int a){ goto l; a = 2; l: return a; }"))
    assert not v.composable
    assert GOTO_REASON in [r for _, r in v.blocking_constructs]
    with pytest.raises(NonComposable):
        split_parts(fn_of("int f(int a){ goto l; a = 2; l: return a; }"))


def test_heuristic_decisions():
    config = SplitConfig()
    small_if = Block(fn_of("int f(int x){ if (x) { x = 1; } return x; }").body.items[:1])
    assert small_if.token_estimate < 50
    assert heuristic_decide(small_if, config) == "keep"
    body = " ".join(f"s = s + {i} * i;" for i in range(100))
    big_for = Block(fn_of(f"int f(int n){{ int s = 0; for (int i = 0; i < n; i++) {{ {body} }} return s; }}")
                    .body.items[1:2])
    assert big_for.token_estimate > 900
    assert heuristic_decide(big_for, config) == "split"
    basic = Block(fn_of(f"int f(int i){{ int s = 0; {body} return s; }}").body.items)
    assert basic.token_estimate > 900
    assert heuristic_decide(basic, config) == "keep"


def test_config_validation():
    with pytest.raises(ConfigError):
        SplitConfig(split_threshold=0)
    with pytest.raises(ConfigError):
        SplitConfig(expr_complexity_limit=-1)


def test_integrity_for_unsplit_and_split():
    fn = fn_of(FOR_SRC)
    assert verify_split_integrity(fn, split_parts(fn, decide=never_split))
    assert verify_split_integrity(fn, split_parts(fn, decide=always_split))


def test_integrity_rejects_retargeted_jump():
    fn = fn_of(NESTED)
    parts = split_parts(fn, decide=always_split)
    jumps = [i for i, p in enumerate(parts) if p.kind == PartKind.UNCOND_JUMP]
    bad = list(parts)
    other = next(p.label for p in parts if p.kind == PartKind.LABEL and p.label != parts[jumps[0]].label)
    bad[jumps[0]] = dataclasses.replace(parts[jumps[0]], label=other, payload=other)
    assert not verify_split_integrity(fn, bad)


def test_integrity_rejects_dropped_part():
    fn = fn_of(IF_SRC)
    parts = split_parts(fn, decide=always_split)
    assert not verify_split_integrity(fn, parts[:2] + parts[3:])


def test_break_targets_label_of_same_depth():
    parts = split_parts(fn_of(NESTED), decide=always_split)
    labels = {p.label: p.loop_depth for p in parts if p.kind == PartKind.LABEL}
    (brk,) = [p for p in parts if p.kind == PartKind.SOURCE and p.payload.strip() == "break;"]
    assert brk.break_label.endswith("_end")
    assert labels[brk.break_label] == brk.loop_depth == 2


def test_every_jump_target_defined_once():
    for seed in range(40):
        fn = rename_variables(unit(generate(seed, 12).source).function("func"))[0]
        parts = split_parts(fn, decide=always_split)
        defined = [p.label for p in parts if p.kind == PartKind.LABEL]
        assert len(defined) == len(set(defined))
        for p in parts:
            if p.kind in (PartKind.COND_JUMP, PartKind.UNCOND_JUMP):
                assert defined.count(p.label) == 1


def test_integrity_under_random_policies():
    for seed in range(60):
        fn = rename_variables(unit(generate(seed, 12).source).function("func"))[0]
        for k in range(3):
            parts = split_parts(fn, decide=random_policy(seed * 10 + k))
            assert verify_split_integrity(fn, parts), (seed, k)


def test_split_is_idempotent_on_atomic_parts():
    fn = fn_of(NESTED)
    parts = split_parts(fn, decide=always_split)
    for p in parts:
        if p.kind == PartKind.SOURCE and p.role == "stmts":
            inner = A.FunctionDef("g", fn.ret, [], A.Block(list(p.nodes)))
            again = split_parts(inner, decide=always_split)
            assert [q.payload for q in again] == [p.payload]


def test_recombine_reproduces_body_text():
    fn = fn_of(NESTED)
    text = recombine(split_parts(fn, decide=always_split))
    original = stmts_to_c(fn.body.items, 0, canonical=True)
    assert text.split() == original.split()


def test_parts_dump_format():
    line = dump_parts(split_parts(fn_of(IF_SRC), decide=always_split)).splitlines()[1]
    assert line == "1 CondJump 0 zero .L_f__0_else"
