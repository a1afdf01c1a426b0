"""Command line: ``partcc compile``, ``partcc batch`` and ``partcc gen``.

Settings resolve as command-line flag, then ``PARTCC_*`` environment
variable, then the YAML config file (``--config`` or ``PARTCC_CONFIG``),
then the built-in default.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import yaml

from .errors import ConfigError, HarnessFailure, PartccError, UnsupportedFeature
from .frontend.parser import parse_source
from .frontend.sema import check
from .pipeline import PIPELINE_MODES, PipelineConfig, compile_raw, compile_unit, complexity, \
    fill_expectations, write_artifacts
from .splitter import SplitConfig
from .translation.backends import FaultInjectionBackend, RefBackend, make_backend
from .translation.llm import ENV_MODEL, LLMConfig, TokenBucket
from .verify.repair import DEFAULT_K
from .verify.report import EXIT_CODES
from .verify.testcases import load_tests_file

log = logging.getLogger("partcc")

EXIT_INFRA = EXIT_CODES["infra"]

DEFAULTS: dict[str, Any] = {
    "mode": "lego",
    "backend": "ref",
    "target": "x86_64",
    "max_retries": DEFAULT_K,
    "split_threshold": 400,
    "expr_limit": 8,
    "timeout_secs": 10,
    "jobs": 1,
    "fault": "off-by-one",
    "fault_policy": "size",
    "fault_limit": 200,
    "hard_filter": "10/80/200",
}
_INTS = {"max_retries", "split_threshold", "expr_limit", "timeout_secs", "jobs", "fault_limit"}


def _config_file(path: Optional[str]) -> dict:
    path = path or os.environ.get("PARTCC_CONFIG")
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping")
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve(args: argparse.Namespace, key: str, file_cfg: dict) -> Any:
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    env = os.environ.get(f"PARTCC_{key.upper()}")
    if env is not None:
        return int(env) if key in _INTS else env
    if key in file_cfg:
        v = file_cfg[key]
        return int(v) if key in _INTS else v
    return DEFAULTS.get(key)


@dataclass
class Settings:
    mode: str
    backend: str
    target: str
    max_retries: int
    split_threshold: int
    expr_limit: int
    timeout_secs: int
    jobs: int
    fault: str
    fault_policy: str
    fault_limit: int
    hard_filter: str
    llm: LLMConfig


def settings_from(args: argparse.Namespace) -> Settings:
    file_cfg = _config_file(getattr(args, "config", None))
    values = {k: resolve(args, k, file_cfg) for k in DEFAULTS}
    if values["target"] != "x86_64":
        raise ConfigError(f"unsupported target {values['target']!r}; only x86_64 is implemented")
    if values["max_retries"] < 1:
        raise ConfigError("--max-retries must be at least 1")
    if values["jobs"] < 1:
        raise ConfigError("--jobs must be at least 1")
    env = LLMConfig.from_env()
    llm = LLMConfig(
        endpoint=getattr(args, "endpoint", None) or env.endpoint or file_cfg.get("endpoint"),
        api_key=env.api_key or file_cfg.get("api_key"),
        model=os.environ.get(ENV_MODEL) or file_cfg.get("model") or env.model)
    return Settings(llm=llm, **values)


def backend_for(s: Settings, bucket: Optional[TokenBucket] = None):
    if s.backend == "ref":
        return RefBackend()
    if s.backend == "llm":
        return make_backend("llm", config=s.llm, bucket=bucket or TokenBucket())
    if s.backend == "fault":
        return FaultInjectionBackend(s.fault, s.fault_policy, limit=s.fault_limit)
    raise ConfigError(f"unknown backend {s.backend!r}")


def pipeline_config(s: Settings, mode: Optional[str] = None) -> PipelineConfig:
    return PipelineConfig(mode=mode or s.mode, max_retries=s.max_retries,
                          split=SplitConfig(s.split_threshold, s.expr_limit),
                          timeout=float(s.timeout_secs))


# ---------------------------------------------------------------- compile

def compile_command(args: argparse.Namespace) -> int:
    try:
        s = settings_from(args)
        if s.mode not in PIPELINE_MODES:
            raise ConfigError(f"unknown mode {s.mode!r}")
        backend = backend_for(s)
    except ConfigError as exc:
        print(f"error [config]: {exc}", file=sys.stderr)
        return EXIT_INFRA
    raw = False
    try:
        text = Path(args.file).read_text(encoding="utf-8")
        try:
            tree = check(parse_source(text))
        except UnsupportedFeature as exc:
            # outside the subset: only a model translating the raw text can help
            if s.mode != "direct" or s.backend != "llm":
                raise
            log.warning("%s; translating the raw text without IO tests", exc)
            raw = True
        if not raw:
            tests = load_tests_file(args.tests) if args.tests else []
            tests = fill_expectations(tree, tests, s.timeout_secs)
    except (OSError, ValueError, KeyError, yaml.YAMLError) as exc:
        print(f"error [input]: {exc}", file=sys.stderr)
        return EXIT_INFRA
    except PartccError as exc:
        print(f"error [{exc.stage}]: {exc}", file=sys.stderr)
        return EXIT_INFRA
    out_dir = args.out_dir or str(Path(args.file).with_suffix("")) + ".partcc"
    on_attempt = lambda a: log.info("attempt %d: %s", a.number, a.report.status)  # noqa: E731
    try:
        if raw:
            outcome = compile_raw(text, backend, pipeline_config(s), on_attempt)
        else:
            outcome = compile_unit(tree, backend, tests, pipeline_config(s), on_attempt=on_attempt)
    except HarnessFailure as exc:
        print(f"error [harness]: {exc}", file=sys.stderr)
        return EXIT_INFRA
    except PartccError as exc:
        print(f"error [{exc.stage}]: {exc}", file=sys.stderr)
        return EXIT_INFRA
    write_artifacts(out_dir, outcome, s.mode)
    r = outcome.report
    print(f"{args.file}: {r.status} ({r.error_class}) after {len(outcome.attempts)} "
          f"attempt(s) of at most {s.max_retries}; artifacts in {out_dir}")
    if not r.passed:
        print(r.diagnostics, file=sys.stderr)
    return r.exit_code


# ---------------------------------------------------------------- batch

@dataclass
class CaseRow:
    name: str
    mode: str
    status: str
    error_class: str
    attempts: int
    hard: Optional[bool]
    seconds: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def parse_filter(text: str) -> tuple[int, int, int]:
    try:
        b, m, t = (int(x) for x in text.split("/"))
    except ValueError as exc:
        raise ConfigError(f"hard filter must look like B/M/T, got {text!r}") from exc
    return b, m, t


def run_case(entry, mode: str, s: Settings, out_root: Optional[str], thresholds,
             bucket: TokenBucket) -> CaseRow:
    from .suite.corpus import materialize
    start = time.monotonic()
    try:
        text, tests = materialize(entry, s.timeout_secs)
        tree = check(parse_source(text))
        tests = fill_expectations(tree, tests, s.timeout_secs)
        hard = complexity(tree).is_hard(*thresholds)
        outcome = compile_unit(tree, backend_for(s, bucket), tests, pipeline_config(s, mode))
    except (PartccError, OSError, ValueError, KeyError) as exc:
        log.warning("%s [%s]: %s", entry.name, mode, exc)
        return CaseRow(entry.name, mode, "error", "infra", 0, None, time.monotonic() - start)
    if out_root:
        write_artifacts(os.path.join(out_root, mode, entry.name), outcome, mode)
    r = outcome.report
    return CaseRow(entry.name, mode, r.status, r.error_class, len(outcome.attempts), hard,
                   time.monotonic() - start)


def summarize(rows: list[CaseRow], modes: list[str]) -> dict:
    out: dict = {"cases": [r.to_dict() for r in rows], "rates": {}}
    for mode in modes:
        mine = [r for r in rows if r.mode == mode]
        n = len(mine)
        passed = sum(r.status == "pass" for r in mine)
        hard = [r for r in mine if r.hard]
        out["rates"][mode] = {
            "cases": n, "passed": passed, "pass_rate": passed / n if n else None,
            "hard_cases": len(hard), "hard_passed": sum(r.status == "pass" for r in hard),
            "easy_cases": sum(1 for r in mine if r.hard is False),
        }
    return out


def batch_command(args: argparse.Namespace) -> int:
    from .suite.corpus import load_manifest
    try:
        s = settings_from(args)
        modes = list(PIPELINE_MODES) if s.mode == "all" else [s.mode]
        if any(m not in PIPELINE_MODES for m in modes):
            raise ConfigError(f"unknown mode {s.mode!r}")
        thresholds = parse_filter(s.hard_filter)
        backend_for(s)      # configuration errors surface before any work
        entries = load_manifest(args.manifest)
    except ConfigError as exc:
        print(f"error [config]: {exc}", file=sys.stderr)
        return EXIT_INFRA
    except (OSError, yaml.YAMLError) as exc:
        print(f"error [input]: {exc}", file=sys.stderr)
        return EXIT_INFRA
    bucket = TokenBucket()
    jobs = [(e, m) for m in modes for e in entries]
    lock = threading.Lock()
    rows: list[Optional[CaseRow]] = [None] * len(jobs)

    def work(i: int) -> None:
        e, m = jobs[i]
        row = run_case(e, m, s, args.out_dir, thresholds, bucket)
        with lock:
            rows[i] = row
            if not args.quiet:
                print(f"{row.mode:8s} {row.name:24s} {row.status:5s} {row.error_class:10s} "
                      f"attempts={row.attempts}", flush=True)

    with ThreadPoolExecutor(max_workers=s.jobs) as pool:
        list(pool.map(work, range(len(jobs))))
    summary = summarize([r for r in rows if r is not None], modes)
    text = yaml.safe_dump(summary, sort_keys=False)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        Path(args.out_dir, "summary.yaml").write_text(text, encoding="utf-8")
    print("rates:")
    for mode, r in summary["rates"].items():
        rate = "n/a" if r["pass_rate"] is None else f"{100 * r['pass_rate']:.1f}%"
        print(f"  {mode}: {r['passed']}/{r['cases']} ({rate}); hard {r['hard_passed']}/{r['hard_cases']}")
    return 0


# ---------------------------------------------------------------- gen

def parse_seeds(text: str) -> list[int]:
    out: list[int] = []
    for piece in text.split(","):
        if "-" in piece.strip()[1:]:
            lo, hi = piece.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif piece.strip():
            out.append(int(piece))
    return out


def gen_command(args: argparse.Namespace) -> int:
    from .suite.corpus import write_corpus
    from .suite.generator import generate
    seeds = parse_seeds(args.seeds)
    if not args.out_dir:
        for seed in seeds:
            print(f"/* seed {seed}, budget {args.budget} */")
            print(generate(seed, args.budget, sequential=args.sequential).source)
        return 0
    try:
        path = write_corpus(args.out_dir, seeds, args.budget, args.sequential)
    except HarnessFailure as exc:
        print(f"error [harness]: {exc}", file=sys.stderr)
        return EXIT_INFRA
    print(path)
    return 0


# ---------------------------------------------------------------- parser

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", help="direct | workflow | lego (batch also takes all)")
    p.add_argument("--backend", choices=["ref", "llm", "fault"])
    p.add_argument("--target", help="only x86_64")
    p.add_argument("--max-retries", dest="max_retries", type=int,
                   help=f"self-repair rounds (default {DEFAULT_K})")
    p.add_argument("--split-threshold", dest="split_threshold", type=int,
                   help="token estimate above which control blocks are split (default 400)")
    p.add_argument("--expr-limit", dest="expr_limit", type=int,
                   help="operator count above which expressions are decomposed (default 8)")
    p.add_argument("--timeout-secs", dest="timeout_secs", type=int,
                   help="per test case run time limit (default 10)")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--endpoint", help="chat completion URL for the llm backend")
    p.add_argument("--fault", choices=["cmp-imm", "spin", "off-by-one"],
                   help="fault backend: the damage it does")
    p.add_argument("--fault-policy", dest="fault_policy", choices=["once", "always", "size"])
    p.add_argument("--fault-limit", dest="fault_limit", type=int,
                   help="fault backend size policy: token limit")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="partcc", description="Split-translate-rebuild C to x86-64 assembly.")
    sub = ap.add_subparsers(dest="command", required=True)
    c = sub.add_parser("compile", help="compile and verify one C file")
    c.add_argument("file")
    c.add_argument("--tests", help="YAML IO tests")
    _common(c)
    c.set_defaults(func=compile_command)
    b = sub.add_parser("batch", help="evaluate a corpus manifest")
    b.add_argument("manifest")
    b.add_argument("--jobs", type=int)
    b.add_argument("--hard-filter", dest="hard_filter",
                   help="B/M/T: basic blocks, max instructions per block, total (default 10/80/200)")
    b.add_argument("-q", "--quiet", action="store_true")
    _common(b)
    b.set_defaults(func=batch_command)
    g = sub.add_parser("gen", help="generate subset programs")
    g.add_argument("--seeds", default="0", help="e.g. 0-99 or 1,5,9")
    g.add_argument("--budget", type=int, default=12)
    g.add_argument("--sequential", action="store_true", help="concatenate two generated bodies")
    g.add_argument("--out-dir", dest="out_dir", help="write .c, .tests.yaml and manifest.yaml here")
    g.set_defaults(func=gen_command)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
