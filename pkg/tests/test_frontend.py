import pytest
from hypothesis import given, settings, strategies as st

from partcc.errors import CSyntaxError, UnresolvedLabel, UnsupportedFeature
from partcc.frontend import ast as A
from partcc.frontend import ast_to_c, parse_source
from partcc.frontend.cfg import build_cfg
from partcc.frontend.features import analyze_features, token_estimate
from partcc.splitter import SplitConfig
from partcc.suite.generator import generate

from conftest import fn_of, unit


def test_minimal_function():
    tree = parse_source("int f(){return 0;}")
    assert len(tree.functions) == 1
    body = tree.functions[0].body.items
    assert len(body) == 1 and isinstance(body[0], A.Return)
    assert body[0].value.value == 0


def test_two_assignments_keep_order():
    fn = fn_of("int a; int b; void f(void){ a = b + 3; b = a - 1; }")
    s1, s2 = fn.body.items
    assert isinstance(s1, A.Assign) and isinstance(s2, A.Assign)
    assert (s1.target.name, s1.value.op) == ("a", "+")
    assert (s2.target.name, s2.value.op) == ("b", "-")


def test_spans_nested_and_in_bounds():
    src = "int g;\nint f(int x)\n{\n    if (x > 1) {\n        g = x * 2;\n    }\n    return g;\n}\n"
    tree = parse_source(src)

    def visit(node, lo, hi):
        span = getattr(node, "span", None)
        if span is not None:
            assert lo <= span[0] <= span[1] <= hi
            lo, hi = span
        for c in node.children():
            visit(c, lo, hi)

    for item in tree.items:
        visit(item, 0, len(src))


def test_print_parse_fixpoint_on_generated_corpus():
    for seed in range(200):
        tree = unit(generate(seed, 8).source)
        text = ast_to_c(tree)
        again = parse_source(text)
        assert again.items == parse_source(ast_to_c(again)).items
        assert [f.name for f in again.functions] == [f.name for f in tree.functions]
        assert again.functions[-1] == parse_source(generate(seed, 8).source).functions[-1]


def test_syntax_error_carries_position_and_expected():
    with pytest.raises(CSyntaxError) as info:
        parse_source("int f(){return 0")
    assert info.value.position == 16
    assert ";" in info.value.expected


@pytest.mark.parametrize("src, name", [
    ("int f(int n, ...){return 0;}", "variadic"),
    ("int f(){ int x; x = (x = 1); return x; }", "assignment inside an expression"),
])
def test_unsupported_feature_has_span(src, name):
    with pytest.raises(UnsupportedFeature) as info:
        unit(src)
    assert name in info.value.name
    lo, hi = info.value.span
    assert 0 <= lo < hi <= len(src)


def test_cfg_straight_line_is_one_block():
    cfg = build_cfg(fn_of("int f(int a){int c; a = 1; c = 3; a = c; return a;}"))
    assert len(cfg.nodes) == 1
    assert not [e for e in cfg.edges if e.kind.startswith("branch")]


def test_cfg_if_else_diamond():
    cfg = build_cfg(fn_of("int f(int x){int r; if (x) { r = 1; } else { r = 2; } return r;}"))
    assert len(cfg.nodes) == 4 and len(cfg.edges) == 4
    kinds = sorted(e.kind for e in cfg.edges)
    assert kinds == ["branch-false", "branch-true", "fallthrough", "fallthrough"]
    assert cfg.predecessors(cfg.entry) == []


def test_cfg_while_back_edge_targets_condition():
    cfg = build_cfg(fn_of("int f(int x){ while (x > 0) { x = x - 1; } return x; }"))
    (back,) = cfg.back_edges
    cond = next(b for b in cfg.nodes if any(it.kind == "cond" for it in b.items))
    assert back.dst == cond.id
    assert back.src in cfg.successors(cond.id)


def test_cfg_back_edges_match_loop_count():
    for seed in range(60):
        fn = unit(generate(seed, 12).source).function("func")
        loops = sum(1 for s in A.iter_stmts(fn.body) if s.kind in A.LOOP_KINDS)
        assert len(build_cfg(fn).back_edges) == loops


def test_cfg_missing_goto_label():
    with pytest.raises(UnresolvedLabel):
        build_cfg(fn_of("int f(){ goto nowhere; return 0; }"))


def test_flags_all_false():
    flags = analyze_features(fn_of("int f(){return 1;}"), SplitConfig())
    assert flags.active() == []


def test_flags_numerical():
    fn = fn_of("double f(double x, double y, double z){ double d = x*y+z; return d; }")
    assert analyze_features(fn, SplitConfig()).numerical
    fn = fn_of("int f(int x){ int d = (int)(x * 0.5); return d; }")
    assert analyze_features(fn, SplitConfig()).numerical


def test_flags_long_for_big_function():
    body = "\n".join(f"    g = g + {i};" for i in range(600))
    fn = fn_of(f"int g;\nvoid f(void)\n{{\n{body}\n}}\n")
    flags = analyze_features(fn, SplitConfig())
    assert flags.token_estimate >= 3000
    assert flags.long
    assert not analyze_features(fn, SplitConfig(split_threshold=10**6)).long


def test_flags_order_and_goto():
    fn = fn_of("int f(int a,int b,int c){ a = ((a*b)+(c*a))-((b/(c|1))+a); return a; }")
    assert analyze_features(fn, SplitConfig(expr_complexity_limit=2)).order
    assert not analyze_features(fn, SplitConfig(expr_complexity_limit=20)).order
    fn = fn_of("int f(int a){ goto out; a = 1; out: return a; }")
    assert analyze_features(fn, SplitConfig()).has_goto


def test_token_estimate_rule():
    assert token_estimate("a = b + 3 ;") == 8   # 6 lexemes * 1.3 = 7.8, rounded up
    assert token_estimate("") == 0


def test_basic_kinds_are_exactly_the_listed_set():
    assert {k.value for k in A.BASIC_KINDS} == {
        "Assign", "Expr", "Goto", "Blank", "Break", "Continue", "Return"}


def test_statement_classification_partitions():
    for seed in range(30):
        fn = unit(generate(seed, 12).source).function("func")
        for s in A.iter_stmts(fn.body):
            assert isinstance(s.kind, A.StatementKind)
            assert not (s.is_basic and s.is_control)
            if s.is_control:
                assert A.sub_statements(s)
            if s.kind in (A.StatementKind.BLOCK, A.StatementKind.DECL):
                assert not s.is_basic and not s.is_control


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=-2**31, max_value=2**31 - 1), st.sampled_from(["+", "-", "*", "&", "^"]))
def test_expression_round_trip(k, op):
    src = f"long f(long x){{ long y = x {op} ({k}); return y; }}"
    tree = parse_source(src)
    assert parse_source(ast_to_c(tree)).items == tree.items
