import pytest

from partcc.errors import ExhaustedRetries, HarnessFailure, SemanticError
from partcc.pipeline import PipelineConfig, UnitJob, plan_function, reference_tests
from partcc.rebuild import emit_module, whole_function
from partcc.translation.backends import FaultInjectionBackend, RefBackend, inject
from partcc.translation.fragment import AssemblyFragment
from partcc.translation.request import TranslationRequest
from partcc.verify.driver import generate_driver, parse_output
from partcc.verify.harness import assemble_link, run_tests, verify_module
from partcc.verify.repair import repair_loop
from partcc.verify.report import DIAG_LIMIT, ErrorFeedback, VerificationReport, excerpt_for
from partcc.verify.testcases import TestCase, dump_tests, load_tests

from conftest import needs_gcc, unit

ADD = "int add(int a, int b){ return a + b; }"


def add_module(fault=None):
    tree = unit(ADD)
    fn = tree.functions[0]
    text = RefBackend().translate(TranslationRequest("direct", ADD, unit=fn)).text
    if fault:
        text = inject(text, fault, "add")
    return tree, emit_module([whole_function("add", AssemblyFragment.from_text(text))])


ADD_CASES = [TestCase("two-three", [2, 3], 5), TestCase("neg", [-4, 1], -3)]


# ---------------------------------------------------------------- reports and files

def test_passing_report_has_no_error():
    with pytest.raises(ValueError):
        VerificationReport("compare", "pass", "behavioral")
    with pytest.raises(ValueError):
        VerificationReport("compare", "pass", failed_cases=["x"])
    assert VerificationReport("compare", "pass").exit_code == 0


def test_exit_codes():
    codes = {c: VerificationReport("run", "fail", c).exit_code for c in ("behavioral", "semantic", "runtime")}
    assert codes == {"behavioral": 1, "semantic": 2, "runtime": 3}


def test_diagnostics_capped_tail_first():
    r = VerificationReport("assemble", "fail", "semantic", "x" * DIAG_LIMIT + "END")
    assert len(r.diagnostics) == DIAG_LIMIT and r.diagnostics.endswith("END")


def test_feedback_attempt_number():
    with pytest.raises(ValueError):
        ErrorFeedback("semantic", "", attempt_number=0)


def test_excerpt_points_at_reported_line():
    module = "\n".join(f"line{i}" for i in range(1, 11))
    ex = excerpt_for("module.s:5: Error: bad", module, context=1)
    assert [ln.split()[-1] for ln in ex.splitlines()] == ["line4", "line5", "line6"]
    assert excerpt_for("no location", module) == ""


def test_test_file_round_trip():
    text = """
function: add
cases:
  - name: small
    args: [2, 3]
    expected_return: 5
  - name: approx
    args: [1, 1]
    expected_return: 2.0
    comparison: {float_tolerance: 1.0e-6}
---
function: bump
cases:
  - name: g
    args: []
    setup: {counter: 4}
    expected_stdout: "counter=5\\n"
"""
    groups = load_tests(text)
    assert [g.function for g in groups] == ["add", "bump"]
    approx = groups[0].cases[1]
    assert approx.comparison == "float-tolerance" and approx.epsilon == 1e-6
    assert groups[1].cases[0].setup == {"counter": 4}
    assert load_tests(dump_tests(groups))[0].cases[0] == groups[0].cases[0]


def test_case_without_expectation_is_allowed_but_flagged():
    assert not TestCase("x", [1]).has_expectation
    with pytest.raises(ValueError):
        TestCase("x", [1], 1, comparison="fuzzy")


def test_driver_prints_return_and_globals():
    tree = unit("int g; double h[2]; int f(int x){ g = x; return x + 1; }")
    driver = generate_driver(tree, "f", [TestCase("c", [4], 5, setup={"h": [1.5, 2]})])
    assert 'printf("%s=%lld\\n", "ret"' in driver
    assert '"h[1]"' in driver and "h[0] = 1.5;" in driver
    assert parse_output("ret=5\ng=4\n") == ("5", "g=4\n")


def test_driver_rejects_wrong_arity():
    tree = unit(ADD)
    with pytest.raises(ValueError):
        generate_driver(tree, "add", [TestCase("c", [1], 1)])


# ---------------------------------------------------------------- harness

@needs_gcc
def test_correct_add_passes():
    tree, module = add_module()
    r = verify_module(module, generate_driver(tree, "add", ADD_CASES), ADD_CASES)
    assert r.passed and r.stage == "compare" and r.error_class == "none"


@needs_gcc
def test_cmp_of_two_immediates_is_semantic():
    tree, module = add_module("cmp-imm")
    with pytest.raises(SemanticError) as info:
        assemble_link(module, generate_driver(tree, "add", ADD_CASES))
    assert info.value.stage == "assemble"
    assert "cmp" in info.value.diagnostics
    r = verify_module(module, generate_driver(tree, "add", ADD_CASES), ADD_CASES)
    assert (r.stage, r.error_class) == ("assemble", "semantic")


@needs_gcc
def test_undefined_symbol_fails_at_link():
    tree, module = add_module()
    module = module.replace("\tjmp\t.L_add__epilogue", "\tcall\tmissing_helper\n\tjmp\t.L_add__epilogue")
    r = verify_module(module, generate_driver(tree, "add", ADD_CASES), ADD_CASES)
    assert (r.stage, r.error_class) == ("link", "semantic")
    assert "missing_helper" in r.diagnostics


@needs_gcc
def test_endless_loop_is_runtime():
    tree, module = add_module("spin")
    r = verify_module(module, generate_driver(tree, "add", ADD_CASES), ADD_CASES, timeout=2)
    assert (r.stage, r.error_class) == ("run", "runtime")
    assert "timed out" in r.diagnostics


@needs_gcc
def test_crash_is_runtime():
    tree, module = add_module()
    module = module.replace("\tjmp\t.L_add__epilogue", "\tmovq\t$0, %rcx\n\tmovq\t(%rcx), %rax\n\tjmp\t.L_add__epilogue")
    r = verify_module(module, generate_driver(tree, "add", ADD_CASES), ADD_CASES)
    assert r.error_class == "runtime" and "signal" in r.diagnostics


@needs_gcc
def test_off_by_one_is_behavioral():
    tree, module = add_module("off-by-one")
    r = verify_module(module, generate_driver(tree, "add", ADD_CASES), ADD_CASES)
    assert (r.stage, r.error_class) == ("compare", "behavioral")
    assert r.failed_cases == ["two-three", "neg"]


@needs_gcc
def test_float_tolerance():
    src = "double f(double x){ return x / 3.0; }"
    tree = unit(src)
    exact = reference_tests(tree, "f", [[1.0]]).cases[0]
    near = TestCase("near", [1.0], exact.expected_return * (1 + 1e-12), comparison="float-tolerance")
    far = TestCase("far", [1.0], exact.expected_return * (1 + 1e-6), comparison="float-tolerance")
    plan = plan_function(tree, tree.functions[0], PipelineConfig(mode="workflow"))
    module = UnitJob(tree, [plan], "workflow").build(TranslationRequest("workflow", src), RefBackend())
    driver = generate_driver(tree, "f", [near, far])
    assert verify_module(module, driver, [near, far]).failed_cases == ["far"]


@needs_gcc
def test_reports_are_deterministic():
    tree, module = add_module("off-by-one")
    driver = generate_driver(tree, "add", ADD_CASES)
    assert verify_module(module, driver, ADD_CASES) == verify_module(module, driver, ADD_CASES)


def test_missing_executable_is_infrastructure():
    with pytest.raises(HarnessFailure):
        run_tests("/nonexistent/prog", ADD_CASES)


@needs_gcc
def test_cases_without_expectation_are_refused(tmp_path):
    tree, module = add_module()
    cases = [TestCase("blank", [1, 2])]
    exe = assemble_link(module, generate_driver(tree, "add", cases), str(tmp_path))
    with pytest.raises(HarnessFailure):
        run_tests(exe, cases)


# ---------------------------------------------------------------- repair loop

class ScriptedJob:
    """Fails until the feedback mentions the expected word."""

    def __init__(self, fix_when=None):
        self.fix_when = fix_when
        self.seen = []

    def build(self, req, backend):
        self.seen.append(req.feedback)
        fb = req.feedback
        return "good" if fb is not None and self.fix_when and self.fix_when in fb.diagnostics else "bad"

    def verify(self, module, tests):
        if module == "good":
            return VerificationReport("compare", "pass")
        return VerificationReport("assemble", "fail", "semantic", "module.s:1: Error: broken")


def test_repair_first_attempt():
    class Good(ScriptedJob):
        def build(self, req, backend):
            return "good"
    module, n, trail = repair_loop(TranslationRequest("direct", ""), None, [], 5, Good())
    assert (module, n, len(trail)) == ("good", 1, 1)


def test_repair_second_attempt_uses_feedback():
    job = ScriptedJob("broken")
    module, n, trail = repair_loop(TranslationRequest("direct", ""), None, [], 5, job)
    assert n == 2 and job.seen[0] is None
    assert job.seen[1].attempt_number == 1 and job.seen[1].error_class == "semantic"
    assert trail[1].feedback is job.seen[1]


def test_repair_gives_up_after_k():
    with pytest.raises(ExhaustedRetries) as info:
        repair_loop(TranslationRequest("direct", ""), None, [], 5, ScriptedJob())
    assert info.value.k == 5 and len(info.value.attempts) == 5
    assert [a.number for a in info.value.attempts] == [1, 2, 3, 4, 5]


def test_repair_needs_k_and_job():
    with pytest.raises(ValueError):
        repair_loop(TranslationRequest("direct", ""), None, [], 0, ScriptedJob())
    with pytest.raises(ValueError):
        repair_loop(TranslationRequest("direct", ""), None, [], 1, None)


@needs_gcc
def test_repair_with_fault_backend():
    tree = unit(ADD)
    tests = [reference_tests(tree, "add", [[2, 3]])]
    plans = [plan_function(tree, tree.functions[0], PipelineConfig(mode="lego"))]
    job = UnitJob(tree, plans, "lego")
    req = TranslationRequest("workflow", ADD)
    _, n, trail = repair_loop(req, FaultInjectionBackend("cmp-imm", "once"), tests, 5, job)
    assert n == 2 and trail[0].report.error_class == "semantic" and trail[1].report.passed
