"""Corpus manifests.

A manifest is a YAML document with a ``cases`` list.  Each entry either
points at files (``source`` and ``tests``, relative to the manifest) or
names a generator seed (``seed``, ``budget``, optionally ``sequential``)
whose program and IO tests are produced on demand.  ``expected_pass`` records
what the reference backend in lego mode should achieve.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import yaml

from ..frontend import ast as A
from ..frontend.parser import parse_source
from ..frontend.sema import check
from ..verify.testcases import FunctionTests, dump_tests, load_tests_file
from .generator import GeneratedProgram, generate


@dataclass
class CorpusEntry:
    name: str
    source: Optional[str] = None
    tests: Optional[str] = None
    seed: Optional[int] = None
    budget: int = 12
    sequential: bool = False
    expected_pass: bool = True

    def to_dict(self) -> dict:
        d: dict = {"name": self.name}
        if self.seed is not None:
            d.update(seed=self.seed, budget=self.budget)
            if self.sequential:
                d["sequential"] = True
        else:
            d.update(source=self.source, tests=self.tests)
        d["expected_pass"] = self.expected_pass
        return d


def load_manifest(path: str) -> list[CorpusEntry]:
    with open(path, encoding="utf-8") as fh:
        doc = yaml.safe_load(fh) or {}
    base = os.path.dirname(os.path.abspath(path))
    out = []
    for i, d in enumerate(doc.get("cases") or []):
        src = d.get("source")
        tests = d.get("tests")
        out.append(CorpusEntry(
            str(d.get("name", f"case{i}")),
            os.path.join(base, src) if src else None,
            os.path.join(base, tests) if tests else None,
            d.get("seed"), int(d.get("budget", 12)), bool(d.get("sequential", False)),
            bool(d.get("expected_pass", True))))
    return out


def dump_manifest(entries: list[CorpusEntry]) -> str:
    return yaml.safe_dump({"cases": [e.to_dict() for e in entries]}, sort_keys=False)


def seed_manifest(seeds, budget: int = 12, sequential: bool = False) -> list[CorpusEntry]:
    kind = "seq" if sequential else "seed"
    return [CorpusEntry(f"{kind}{s}-b{budget}", seed=s, budget=budget, sequential=sequential)
            for s in seeds]


def generated_tests(prog: GeneratedProgram, tree: Optional[A.Ast] = None,
                    timeout: float = 10.0) -> FunctionTests:
    """IO tests for a generated program; expectations come from gcc on the C."""
    from ..pipeline import reference_tests
    tree = tree or check(parse_source(prog.source))
    return reference_tests(tree, prog.function, prog.inputs, timeout=timeout)


def materialize(entry: CorpusEntry, timeout: float = 10.0) -> tuple[str, list[FunctionTests]]:
    """Source text and IO tests for one entry."""
    if entry.seed is not None:
        prog = generate(entry.seed, entry.budget, sequential=entry.sequential)
        return prog.source, [generated_tests(prog, timeout=timeout)]
    if entry.source is None:
        raise ValueError(f"{entry.name}: neither a seed nor a source file")
    with open(entry.source, encoding="utf-8") as fh:
        text = fh.read()
    tests = load_tests_file(entry.tests) if entry.tests else []
    return text, tests


def write_corpus(out_dir: str, seeds, budget: int = 12, sequential: bool = False,
                 timeout: float = 10.0) -> str:
    """Write ``<name>.c``, ``<name>.tests.yaml`` and ``manifest.yaml``; return the manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    for e in seed_manifest(seeds, budget, sequential):
        text, tests = materialize(e, timeout)
        with open(os.path.join(out_dir, f"{e.name}.c"), "w", encoding="utf-8") as fh:
            fh.write(text)
        with open(os.path.join(out_dir, f"{e.name}.tests.yaml"), "w", encoding="utf-8") as fh:
            fh.write(dump_tests(tests))
        entries.append(CorpusEntry(e.name, f"{e.name}.c", f"{e.name}.tests.yaml"))
    path = os.path.join(out_dir, "manifest.yaml")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_manifest(entries))
    return path
