import pytest
import requests

from partcc.errors import BackendError, ConfigError, EmptyOutput, ExtractionError, \
    ImmediateOverflow
from partcc.frontend.features import FeatureFlags
from partcc.mapping import allocate_frame, global_entries
from partcc.pipeline import PipelineConfig, compile_unit, reference_tests
from partcc.splitter import ControlPart, PartKind, always_split
from partcc.suite.generator import generate
from partcc.transforms import rename_variables
from partcc.translation.backends import FaultInjectionBackend, LLMBackend, RefBackend, inject, \
    translate
from partcc.translation.codegen import check_immediates, translate_function
from partcc.translation.fragment import AssemblyFragment, scan_labels
from partcc.translation.llm import ChatClient, LLMConfig, TokenBucket, extract_assembly
from partcc.translation.prompt import KNOWLEDGE_NUMERICAL, build_prompt
from partcc.translation.request import PartContext, TranslationRequest
from partcc.verify.report import ErrorFeedback

from conftest import needs_gcc, unit

STATE = "int f(void){ int a; int b; ; a = b + 3; return 0; }"


def part_request(fn, table, part):
    return TranslationRequest("lego-part", part.payload, table, part_context=PartContext(part.id),
                              unit=part, function=fn)


def source_part(fn, index):
    s = fn.body.items[index]
    return ControlPart(PartKind.SOURCE, "", index, nodes=[s])


@pytest.fixture
def state():
    fn = unit(STATE).functions[0]
    return fn, allocate_frame(fn)


def test_blank_statement_is_empty(state):
    fn, table = state
    frag = translate(part_request(fn, table, source_part(fn, 2)), RefBackend())
    assert frag.text == "" and not frag.defined_labels


def test_assignment_loads_adds_stores(state):
    fn, table = state
    frag = translate(part_request(fn, table, source_part(fn, 3)), RefBackend())
    a, b = table.slot("a").offset, table.slot("b").offset
    lines = frag.lines
    assert f"{b}(%rbp)" in lines[0]
    assert any("add" in ln for ln in lines)
    assert lines[-1].split()[-1] == f"{a}(%rbp)"


def test_return_sets_rax_and_jumps_to_epilogue(state):
    fn, table = state
    frag = translate(part_request(fn, table, source_part(fn, 4)), RefBackend())
    assert "$0, %rax" in frag.lines[0]
    assert frag.lines[-1].split() == ["jmp", ".L_f__epilogue"]
    assert frag.required_labels == {".L_f__epilogue"}


def test_unconditional_jump_part(state):
    fn, table = state
    part = ControlPart(PartKind.UNCOND_JUMP, ".L_f__3_body", 5, label=".L_f__3_body")
    frag = translate(part_request(fn, table, part), RefBackend())
    assert frag.lines == ["\tjmp\t.L_f__3_body"]


def test_wide_immediate_rejected():
    fn = unit("int f(void){ int16_t x = 0x56671485; return x; }").functions[0]
    with pytest.raises(ImmediateOverflow) as info:
        translate_function(fn, allocate_frame(fn))
    assert info.value.value == 0x56671485 and info.value.width == 16


def test_fitting_immediates_accepted():
    fn = unit("int f(void){ short x = -32768; unsigned char c = 255; x = 32767; return x + c; }").functions[0]
    translate_function(fn, allocate_frame(fn))


def test_no_overwide_immediates_in_generated_code():
    for seed in range(40):
        tree = unit(generate(seed, 12).source)
        entries = global_entries(tree.globals)
        for fn in tree.functions:
            fn = rename_variables(fn)[0]
            text = translate_function(fn, allocate_frame(fn, globals_=entries)).text
            assert check_immediates(text) == []


def test_check_immediates_flags_bad_lines():
    assert check_immediates("\tmovw\t$0x56671485, -2(%rbp)\n\tmovw\t$5, -2(%rbp)") == \
        ["movw\t$0x56671485, -2(%rbp)"]


@needs_gcc
def test_for_loop_function_end_to_end():
    src = "int f(int n){ int s = 0; for (int i = 0; i < n; i++) { s += i * i; } return s; }"
    tree = unit(src)
    tests = [reference_tests(tree, "f", [[0], [1], [10], [100]])]
    assert [c.expected_return for c in tests[0].cases] == [0, 0, 285, 328350]
    out = compile_unit(tree, RefBackend(), tests, PipelineConfig(mode="lego"))
    assert out.passed and len(out.attempts) == 1


# ---------------------------------------------------------------- prompts

def make_request(**kw):
    fn = unit("double f(double x){ double y = x * 2.0; return y; }").functions[0]
    return TranslationRequest("workflow", "double f(double x) { ... }", allocate_frame(fn), unit=fn, **kw)


def test_prompt_is_deterministic():
    assert build_prompt(make_request()) == build_prompt(make_request())


def test_prompt_carries_symbol_table_and_common_knowledge():
    text = build_prompt(make_request())
    assert "x -8 8 8" in text
    assert "cannot compare two immediate values" in text
    assert "(%rip)" in text


def test_numerical_flag_adds_float_knowledge():
    assert KNOWLEDGE_NUMERICAL not in build_prompt(make_request())
    assert KNOWLEDGE_NUMERICAL in build_prompt(make_request(flags=FeatureFlags(numerical=True)))


def test_feedback_closes_prompt():
    fb = ErrorFeedback("semantic", "module.s:3: Error: operand type mismatch for `cmp'", "    3  cmpl $1, $2", 1)
    text = build_prompt(make_request(feedback=fb))
    tail = text[text.rindex("## Feedback"):]
    assert "operand type mismatch" in tail and tail.rstrip().endswith("cmpl $1, $2")


def test_lego_request_needs_context():
    with pytest.raises(ConfigError):
        TranslationRequest("lego-part", "x = 1;")
    with pytest.raises(ConfigError):
        TranslationRequest("bogus", "")


# ---------------------------------------------------------------- replies

def test_extract_single_block():
    frag = extract_assembly("```asm\n\tmovl $1, %eax\n.L_x:\n\tjmp .L_y\n```")
    assert frag.lines == ["\tmovl $1, %eax", ".L_x:", "\tjmp .L_y"]
    assert frag.defined_labels == {".L_x"} and frag.required_labels == {".L_y"}


def test_extract_last_block():
    raw = "Here is a draft:\n```\nnop\n```\nOn reflection:\n```asm\nret\n```\nDone."
    assert extract_assembly(raw).lines == ["ret"]


def test_extract_without_block():
    with pytest.raises(ExtractionError):
        extract_assembly("movl $1, %eax")


def test_scan_labels_ignores_comments():
    defined, required = scan_labels(".L_a:\n\tjmp .L_b  # to .L_c\n\tcall helper")
    assert defined == {".L_a"} and required == {".L_b"}


class FakeResponse:
    def __init__(self, status, payload=None, text=""):
        self.status_code = status
        self.payload = payload
        self.text = text

    def json(self):
        if self.payload is None:
            raise ValueError("no json")
        return self.payload


class FakeSession:
    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.calls.append((url, json, headers, timeout))
        r = self.responses.pop(0)
        if isinstance(r, Exception):
            raise r
        return r


def reply(content):
    return FakeResponse(200, {"choices": [{"message": {"content": content}}]})


def client(responses, **cfg):
    sleeps = []
    session = FakeSession(responses)
    config = LLMConfig(endpoint="http://llm.invalid/v1/chat", api_key="k", **cfg)
    return ChatClient(config, session=session, sleep=sleeps.append), session, sleeps


def test_client_sends_chat_messages():
    c, session, _ = client([reply("```\nret\n```")], timeout=7.0)
    assert c.complete("hi", system="sys") == "```\nret\n```"
    url, body, headers, timeout = session.calls[0]
    assert body["messages"] == [{"role": "system", "content": "sys"}, {"role": "user", "content": "hi"}]
    assert headers["Authorization"] == "Bearer k" and timeout == 7.0


def test_client_retries_with_backoff():
    c, session, sleeps = client([requests.ConnectionError("down"), FakeResponse(503), reply("ok")])
    assert c.complete("x") == "ok"
    assert sleeps == [1.0, 2.0] and len(session.calls) == 3


def test_client_gives_up_after_three_attempts():
    c, session, sleeps = client([FakeResponse(500)] * 3)
    with pytest.raises(BackendError):
        c.complete("x")
    assert len(session.calls) == 3


def test_client_client_errors_are_final():
    c, session, _ = client([FakeResponse(401, text="nope")])
    with pytest.raises(BackendError):
        c.complete("x")
    assert len(session.calls) == 1


def test_client_empty_reply():
    c, _, _ = client([reply("   ")])
    with pytest.raises(EmptyOutput):
        c.complete("x")


def test_client_needs_endpoint():
    with pytest.raises(ConfigError):
        ChatClient(LLMConfig(endpoint=None))


def test_token_bucket_waits_when_empty():
    now = [0.0]
    waits = []

    def sleep(dt):
        waits.append(dt)
        now[0] += dt

    bucket = TokenBucket(rate=2.0, capacity=2, clock=lambda: now[0], sleep=sleep)
    for _ in range(3):
        bucket.acquire()
    assert waits == [pytest.approx(0.5)]


@needs_gcc
def test_llm_backend_with_scripted_model():
    src = "int f(int n){ int s = 0; for (int i = 0; i < n; i++) { s += i; } return s; }"
    tree = unit(src)
    tests = [reference_tests(tree, "f", [[0], [5]])]
    ref = RefBackend()
    state = {}

    class Model:
        # answers every prompt with the reference translation of the request in flight
        def complete(self, prompt, system=None):
            return "```asm\n" + ref.translate(state["req"]).text + "\n```"

    backend = LLMBackend(Model())
    original = backend.translate

    def spy(req):
        state["req"] = req
        return original(req)

    backend.translate = spy
    out = compile_unit(tree, backend, tests, PipelineConfig(mode="lego", decide=always_split))
    assert out.passed


def test_fault_injection_variants():
    text = "\tmovq\t$5, %rax\n\tjmp\t.L_f__epilogue"
    assert inject(text, "cmp-imm", "f").startswith("\tcmpl\t$1, $2")
    assert "jmp\t.L_f__fault_spin" in inject(text, "spin", "f")
    assert "\taddq\t$1, %rax\n\tjmp\t.L_f__epilogue" in inject(text, "off-by-one", "f")
    with pytest.raises(ValueError):
        FaultInjectionBackend("nonsense")


def test_fragment_from_text_tracks_rodata():
    frag = AssemblyFragment.from_text("\tmovsd\t.LC_d_1(%rip), %xmm0", rodata={".LC_d_1": [".quad 1"]})
    assert ".LC_d_1" in frag.defined_labels
    assert frag.instruction_count() == 1
