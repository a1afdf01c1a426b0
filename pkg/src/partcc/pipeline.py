"""End-to-end compilation of one translation unit in a chosen mode.

direct    whole functions, no preprocessing, no symbol table in the request
workflow  rename, optional decomposition, symbol table and feature context
lego      as workflow, then split into parts, translate each, rebuild
"""
from __future__ import annotations

import json
import logging
import os
import shutil
import subprocess
import tempfile
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import ExhaustedRetries, HarnessFailure, NonComposable, SemanticError
from .frontend import ast as A
from .frontend.features import FeatureFlags, analyze_features
from .frontend.parser import parse_source
from .frontend.printer import function_to_c, item_to_c
from .frontend.sema import ProgramEnv, check
from .mapping import SymbolTable, allocate_frame, global_entries, map_globals
from .rebuild import FunctionAsm, emit_module, rebuild, whole_function
from .splitter import (ControlPart, PartKind, SplitConfig, SplitPolicy, check_composability,
                       dump_parts, policy_for, split_parts)
from .transforms import decompose_complex_expressions, rename_variables
from .translation.backends import Backend, translate
from .translation.request import PartContext, TranslationRequest
from .verify.driver import generate_driver
from .verify.harness import CC, DEFAULT_TIMEOUT, reference_outputs, verify_module
from .verify.repair import DEFAULT_K, repair_loop
from .verify.report import Attempt, VerificationReport
from .verify.testcases import FunctionTests, TestCase

log = logging.getLogger(__name__)

PIPELINE_MODES = ("direct", "workflow", "lego")


@dataclass
class PipelineConfig:
    mode: str = "lego"
    max_retries: int = DEFAULT_K
    split: SplitConfig = field(default_factory=SplitConfig)
    timeout: float = DEFAULT_TIMEOUT
    # overrides the split policy named in ``split`` (tests use seeded policies)
    decide: Optional[SplitPolicy] = None

    def __post_init__(self) -> None:
        if self.mode not in PIPELINE_MODES:
            from .errors import ConfigError
            raise ConfigError(f"unknown mode {self.mode!r}; pick one of {', '.join(PIPELINE_MODES)}")


@dataclass
class FunctionPlan:
    """Everything decided about one function before translation."""

    original: A.FunctionDef
    fn: A.FunctionDef
    table: SymbolTable
    flags: FeatureFlags
    parts: Optional[list[ControlPart]] = None
    rename_note: str = ""


@dataclass
class CompileOutcome:
    module: str
    report: VerificationReport
    attempts: list[Attempt]
    plans: list[FunctionPlan]

    @property
    def passed(self) -> bool:
        return self.report.passed


def context_source(tree: A.Ast, fn: A.FunctionDef) -> str:
    """Declarations the function depends on, followed by the function."""
    items = []
    for it in tree.items:
        if isinstance(it, A.FunctionDef):
            if it.name != fn.name:
                items.append(item_to_c(A.FunctionDecl(it.name, it.ret, it.params)))
        elif not isinstance(it, A.FunctionDecl) or it.name != fn.name:
            items.append(item_to_c(it))
    items.append(function_to_c(fn))
    return "\n".join(items).rstrip() + "\n"


def plan_function(tree: A.Ast, fn: A.FunctionDef, config: PipelineConfig) -> FunctionPlan:
    entries = global_entries(tree.globals)
    renamed, rmap = rename_variables(fn)
    if config.mode == "direct":
        # the table is only an artifact here; the backend sees the raw function
        return FunctionPlan(fn, fn, allocate_frame(renamed, globals_=entries), FeatureFlags())
    flags = analyze_features(renamed, config.split)
    work = renamed
    if flags.order:
        work = decompose_complex_expressions(renamed, config.split.expr_complexity_limit,
                                             ProgramEnv.of(tree))
    table = allocate_frame(work, globals_=entries)
    plan = FunctionPlan(fn, work, table, flags,
                        rename_note="\n".join(f"{e.original} -> {e.fresh}" for e in rmap.entries))
    if config.mode == "lego" and not flags.has_goto and check_composability(work).composable:
        decide = config.decide or policy_for(config.split)
        try:
            plan.parts = split_parts(work, config.split, decide)
        except NonComposable:
            plan.parts = None
    return plan


def translate_plan(tree: A.Ast, plan: FunctionPlan, backend: Backend, mode: str,
                   feedback=None) -> FunctionAsm:
    fn = plan.fn
    if plan.parts is None:
        req = TranslationRequest(
            "direct" if mode == "direct" else "workflow",
            context_source(tree, fn),
            None if mode == "direct" else plan.table,
            plan.flags, feedback=feedback, unit=fn, function=fn,
            globals=plan.table.globals)
        frag = translate(req, backend)
        return whole_function(fn.name, frag)
    pairs = []
    labels: list[str] = []
    for part in plan.parts:
        ctx = PartContext(part.id, tuple(labels), part.loop_depth, part.kind.value, part.role,
                          part.break_label, part.continue_label)
        req = TranslationRequest("lego-part", part.payload, plan.table, plan.flags, ctx,
                                 feedback, unit=part, function=fn)
        pairs.append((part, translate(req, backend)))
        if part.kind == PartKind.LABEL:
            labels.append(part.label)
    return rebuild(pairs, plan.table, fn.name)


class UnitJob:
    """Build/verify callbacks for the repair loop, over a whole unit."""

    def __init__(self, tree: A.Ast, plans: list[FunctionPlan], mode: str,
                 timeout: float = DEFAULT_TIMEOUT, keep_dir: Optional[str] = None):
        self.tree = tree
        self.plans = plans
        self.mode = mode
        self.timeout = timeout
        self.keep_dir = keep_dir
        self.global_plans = map_globals(tree.globals)

    def build(self, req: TranslationRequest, backend: Backend) -> str:
        funcs = [translate_plan(self.tree, p, backend, self.mode, req.feedback) for p in self.plans]
        return emit_module(funcs, self.global_plans)

    def verify(self, module: str, tests: list[FunctionTests]) -> VerificationReport:
        if not tests:
            return assemble_only(module)
        for group in tests:
            driver = generate_driver(self.tree, group.function, group.cases)
            report = verify_module(module, driver, group.cases, self.timeout, self.keep_dir)
            if not report.passed:
                return report
        return report


def assemble_only(module: str) -> VerificationReport:
    """Without IO tests the best available check is the assembler itself."""
    work = tempfile.mkdtemp(prefix="partcc-as-")
    try:
        path = os.path.join(work, "module.s")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(module)
        try:
            cp = subprocess.run([CC, "-c", path, "-o", os.path.join(work, "module.o")],
                                capture_output=True, text=True, timeout=120)
        except FileNotFoundError as exc:
            raise HarnessFailure(f"{CC} not found") from exc
        if cp.returncode != 0:
            return VerificationReport("assemble", "fail", "semantic", cp.stderr or cp.stdout)
        return VerificationReport("assemble", "pass")
    finally:
        shutil.rmtree(work, ignore_errors=True)


def fill_expectations(tree: A.Ast, tests: list[FunctionTests],
                      timeout: float = DEFAULT_TIMEOUT) -> list[FunctionTests]:
    """Cases without expectations get them from the system compiler."""
    out = []
    for group in tests:
        if all(c.has_expectation for c in group.cases):
            out.append(group)
            continue
        out.append(reference_tests(tree, group.function, [c.args for c in group.cases],
                                   [c.setup for c in group.cases], timeout))
    return out


def reference_tests(tree: A.Ast, fn_name: str, arg_lists: list[list], setups: Optional[list[dict]] = None,
                    timeout: float = DEFAULT_TIMEOUT, names: Optional[list[str]] = None) -> FunctionTests:
    """IO tests whose expectations come from the original C under gcc -O0."""
    setups = setups or [{} for _ in arg_lists]
    fn = tree.function(fn_name)
    comparison = "float-tolerance" if fn.ret.is_floating else "exact"
    placeholders = [TestCase(f"c{i}", list(a), expected_stdout="", setup=dict(s))
                    for i, (a, s) in enumerate(zip(arg_lists, setups))]
    driver = generate_driver(tree, fn_name, placeholders)
    outs = reference_outputs(tree.source or "\n".join(item_to_c(i) for i in tree.items),
                             driver, len(placeholders), timeout)
    cases = []
    for i, ((ret, rest), ph) in enumerate(zip(outs, placeholders)):
        expected_ret = None if ret is None else _parse_number(ret)
        name = names[i] if names else f"case{i}"
        cases.append(TestCase(name, ph.args, expected_ret, rest, comparison, setup=ph.setup))
    return FunctionTests(fn_name, cases)


def _parse_number(text: str):
    try:
        return int(text)
    except ValueError:
        return text if text.strip().lower().lstrip("-+") in ("nan", "inf") else float(text)


def compile_unit(tree: A.Ast, backend: Backend, tests: Optional[list[FunctionTests]] = None,
                 config: Optional[PipelineConfig] = None, keep_dir: Optional[str] = None,
                 on_attempt: Optional[Callable[[Attempt], None]] = None) -> CompileOutcome:
    """Plan, translate, verify and repair; never raises on translation failure."""
    config = config or PipelineConfig()
    plans = [plan_function(tree, fn, config) for fn in tree.functions]
    job = UnitJob(tree, plans, config.mode, config.timeout, keep_dir)
    main = plans[-1].fn if plans else None
    req = TranslationRequest("direct" if config.mode == "direct" else "workflow",
                             tree.source, unit=main, function=main)
    try:
        module, _, attempts = repair_loop(req, backend, tests or [], config.max_retries, job,
                                          on_attempt)
    except ExhaustedRetries as exc:
        last = exc.attempts[-1]
        return CompileOutcome(last.module_text, exc.last_report, exc.attempts, plans)
    return CompileOutcome(module, attempts[-1].report, attempts, plans)


def compile_source(text: str, backend: Backend, tests: Optional[list[FunctionTests]] = None,
                   config: Optional[PipelineConfig] = None, **kw) -> CompileOutcome:
    return compile_unit(check(parse_source(text)), backend, tests, config, **kw)


class RawJob:
    """Repair-loop callbacks for text the frontend cannot parse.

    The backend's reply is taken as the whole module and only the assembler
    can judge it, since no test driver can be generated without a parse.
    """

    def build(self, req: TranslationRequest, backend: Backend) -> str:
        text = translate(req, backend).text
        if not any(ln.strip().startswith((".text", ".section", ".data")) for ln in text.splitlines()):
            text = "\t.text\n" + text
        return text.rstrip("\n") + "\n"

    def verify(self, module: str, tests) -> VerificationReport:
        return assemble_only(module)


def compile_raw(text: str, backend: Backend, config: Optional[PipelineConfig] = None,
                on_attempt: Optional[Callable[[Attempt], None]] = None) -> CompileOutcome:
    """Direct translation of source outside the accepted subset."""
    config = config or PipelineConfig(mode="direct")
    req = TranslationRequest("direct", text)
    try:
        module, _, attempts = repair_loop(req, backend, [], config.max_retries, RawJob(),
                                          on_attempt)
    except ExhaustedRetries as exc:
        return CompileOutcome(exc.attempts[-1].module_text, exc.last_report, exc.attempts, [])
    return CompileOutcome(module, attempts[-1].report, attempts, [])


def write_artifacts(out_dir: str, outcome: CompileOutcome, mode: str) -> list[str]:
    """``module.s``, per-function symbol tables (and parts in lego mode),
    every attempt and the final report.  Returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def put(name: str, text: str) -> None:
        path = os.path.join(out_dir, name)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        written.append(path)

    put("module.s", outcome.module)
    for plan in outcome.plans:
        put(f"{plan.fn.name}.symtab.txt", plan.table.dump())
        if mode != "direct" and plan.rename_note:
            put(f"{plan.fn.name}.rename.txt", plan.rename_note + "\n")
        if mode == "lego":
            body = dump_parts(plan.parts) if plan.parts is not None else \
                "# not split: translated as a whole function\n"
            put(f"{plan.fn.name}.parts.txt", body)
    for att in outcome.attempts:
        put(os.path.join("attempts", f"attempt{att.number}.s"), att.module_text)
    report = outcome.report.to_dict()
    report["attempts"] = [{"number": a.number, **a.report.to_dict()} for a in outcome.attempts]
    report["exit_code"] = outcome.report.exit_code
    put("report.json", json.dumps(report, indent=2) + "\n")
    return written


@dataclass(frozen=True)
class Complexity:
    blocks: int
    max_block_instructions: int
    instructions: int

    def is_hard(self, blocks: int = 10, max_block: int = 80, total: int = 200) -> bool:
        # any one threshold makes a case hard
        return (self.blocks >= blocks or self.max_block_instructions >= max_block
                or self.instructions >= total)


_BLOCK_END = ("jmp", "je", "jne", "jz", "jnz", "ret", "ja", "jb", "jae", "jbe", "jl", "jle",
              "jg", "jge", "jp", "jnp")


def complexity(tree: A.Ast) -> Complexity:
    """Basic blocks from our CFG; instruction counts from the reference translation."""
    from .frontend.cfg import build_cfg
    from .translation.codegen import translate_function
    blocks = 0
    biggest = 0
    total = 0
    entries = global_entries(tree.globals)
    for fn in tree.functions:
        renamed = rename_variables(fn)[0]
        blocks += len([b for b in build_cfg(renamed).nodes if not b.dead])
        text = translate_function(renamed, allocate_frame(renamed, globals_=entries)).text
        run = 0
        for line in text.splitlines():
            s = line.strip()
            if not s or s.startswith("."):
                if s.endswith(":"):
                    biggest, run = max(biggest, run), 0
                continue
            if s.endswith(":"):
                biggest, run = max(biggest, run), 0
                continue
            run += 1
            total += 1
            if s.split()[0] in _BLOCK_END:
                biggest, run = max(biggest, run), 0
        biggest = max(biggest, run)
    return Complexity(blocks, biggest, total)
