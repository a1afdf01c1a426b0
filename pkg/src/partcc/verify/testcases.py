"""IO test cases and their YAML file format.

One YAML document per function::

    function: add
    cases:
      - name: small
        args: [2, 3]
        expected_return: 5
      - name: with-globals
        args: [1]
        setup: {counter: 4}
        expected_stdout: "counter=5\\n"
        comparison: {float_tolerance: 1.0e-9}

A case without any expectation is filled in by running the original C
through the system compiler before verification.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import yaml

DEFAULT_EPSILON = 1e-9


@dataclass
class TestCase:
    __test__ = False    # not a pytest class

    name: str
    args: list[Any] = field(default_factory=list)
    expected_return: Any = None
    expected_stdout: Optional[str] = None
    comparison: str = "exact"          # exact | float-tolerance
    epsilon: float = DEFAULT_EPSILON
    setup: dict[str, Any] = field(default_factory=dict)

    @property
    def has_expectation(self) -> bool:
        return self.expected_return is not None or self.expected_stdout is not None

    def __post_init__(self) -> None:
        if self.comparison not in ("exact", "float-tolerance"):
            raise ValueError(f"unknown comparison {self.comparison!r}")

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"name": self.name, "args": list(self.args)}
        if self.setup:
            d["setup"] = dict(self.setup)
        if self.expected_return is not None:
            d["expected_return"] = self.expected_return
        if self.expected_stdout is not None:
            d["expected_stdout"] = self.expected_stdout
        d["comparison"] = ("exact" if self.comparison == "exact"
                           else {"float_tolerance": self.epsilon})
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TestCase":
        comp = d.get("comparison", "exact")
        eps = DEFAULT_EPSILON
        if isinstance(comp, dict):
            eps = float(comp.get("float_tolerance", DEFAULT_EPSILON))
            comp = "float-tolerance"
        elif comp in ("float", "float-tolerance", "float_tolerance"):
            comp = "float-tolerance"
        return cls(str(d.get("name", "case")), list(d.get("args") or []),
                   d.get("expected_return"), d.get("expected_stdout"), comp, eps,
                   dict(d.get("setup") or {}))


@dataclass
class FunctionTests:
    function: str
    cases: list[TestCase]


def load_tests(text: str) -> list[FunctionTests]:
    out = []
    for doc in yaml.safe_load_all(text):
        if not doc:
            continue
        out.append(FunctionTests(str(doc["function"]),
                                 [TestCase.from_dict(c) for c in doc.get("cases") or []]))
    return out


def load_tests_file(path: str) -> list[FunctionTests]:
    with open(path, encoding="utf-8") as fh:
        return load_tests(fh.read())


def dump_tests(groups: list[FunctionTests]) -> str:
    docs = [{"function": g.function, "cases": [c.to_dict() for c in g.cases]} for g in groups]
    return yaml.safe_dump_all(docs, sort_keys=False)
