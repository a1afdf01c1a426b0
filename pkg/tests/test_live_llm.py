"""Opt-in smoke run against a real chat completion endpoint.

Set PARTCC_LLM_ENDPOINT (and PARTCC_LLM_API_KEY / PARTCC_LLM_MODEL as
needed) to enable it.  The pass rate is printed, not asserted.
"""
import os

import pytest

from partcc.frontend.parser import parse_source
from partcc.frontend.sema import check
from partcc.pipeline import PipelineConfig, compile_unit
from partcc.suite.corpus import generated_tests
from partcc.suite.generator import generate
from partcc.translation.backends import make_backend
from partcc.translation.llm import ENV_ENDPOINT

pytestmark = [
    pytest.mark.live_llm,
    pytest.mark.skipif(not os.environ.get(ENV_ENDPOINT), reason=f"{ENV_ENDPOINT} not set"),
]


def test_lego_smoke(capsys):
    backend = make_backend("llm")
    passed = 0
    for seed in range(10):
        prog = generate(seed, 6)
        tree = check(parse_source(prog.source))
        out = compile_unit(tree, backend, [generated_tests(prog, tree)], PipelineConfig(mode="lego"))
        passed += out.passed
    with capsys.disabled():
        print(f"\nlive model, lego mode: {passed}/10 small functions pass")
