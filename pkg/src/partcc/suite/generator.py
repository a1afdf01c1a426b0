"""Seeded random programs in the accepted subset.

Programs are goto-free.  Loops run on dedicated counters with small
constant bounds, divisors are forced non-zero and shift counts are masked.
Each candidate also runs through the checking interpreter on its own test
inputs; a candidate that hits undefined behaviour (signed overflow, a
float-to-int conversion out of range) is discarded and the next derived
seed is tried.  The result is still a pure function of the seed.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import Optional

from ..errors import PartccError
from ..frontend.parser import parse_source
from ..frontend.sema import check
from ..interp import StepLimitExceeded, UndefinedBehavior, run_function

FUNCTION = "func"
_DECL = re.compile(r"\s*(unsigned|int|long|short|char|double|float)\b")
MAX_STEPS = 1_000_000

_INT_TYPES = ["int", "int", "int", "long", "unsigned", "short", "char", "unsigned char",
              "unsigned long"]
_FLOAT_TYPES = ["double", "double", "float"]


@dataclass
class Var:
    name: str
    ctype: str
    writable: bool = True

    @property
    def floating(self) -> bool:
        return self.ctype in ("double", "float")


@dataclass
class GeneratedProgram:
    seed: int
    budget: int
    source: str
    function: str
    inputs: list[list] = field(default_factory=list)
    attempts: int = 1


@dataclass
class _Pieces:
    head: list[str]
    params: list[tuple[str, str]]
    ret: str
    body: list[str]
    ret_expr: Optional[str]
    inputs: list[list]


class _Gen:
    def __init__(self, rng: random.Random, budget: int, prefix: str = ""):
        self.rng = rng
        self.prefix = prefix
        self.budget = budget
        self.left = budget
        self.nvar = 0
        self.ncounter = 0
        self.lines: list[str] = []
        self.scopes: list[list[Var]] = []
        self.globals: list[Var] = []
        self.arrays: list[Var] = []      # ctype is the element type, length 8
        self.params: list[Var] = []
        self.use_helper = rng.random() < 0.5
        self.use_struct = rng.random() < 0.5

    # ------------------------------------------------------------ names

    def fresh(self, prefix: str = "v") -> str:
        self.nvar += 1
        return f"{self.prefix}{prefix}{self.nvar}"

    def visible(self, floating: Optional[bool] = None, writable: bool = False) -> list[Var]:
        vs = list(self.globals) + list(self.params)
        for sc in self.scopes:
            vs += sc
        if floating is not None:
            vs = [v for v in vs if v.floating == floating]
        if writable:
            vs = [v for v in vs if v.writable]
        return vs

    # ------------------------------------------------------------ expressions

    def const(self, floating: bool) -> str:
        if floating:
            return self.rng.choice(["0.5", "1.25", "2.0", "3.75", "0.125", "10.0", "1.5"])
        return str(self.rng.randint(0, 40))

    def leaf(self, floating: bool) -> str:
        r = self.rng.random()
        pool = self.visible(floating)
        if r < 0.2 or not pool:
            if not floating and self.arrays and self.rng.random() < 0.3:
                return self.array_ref(floating)
            return self.const(floating)
        if r < 0.3 and self.arrays:
            return self.array_ref(floating)
        if r < 0.38 and self.use_struct:
            return f"{self.prefix}gs." + (self.rng.choice(["d", "f"]) if floating else self.rng.choice(["a", "b", "c"]))
        return self.rng.choice(pool).name

    def array_ref(self, floating: bool) -> str:
        cands = [a for a in self.arrays if a.floating == floating]
        if not cands:
            return self.const(floating)
        a = self.rng.choice(cands)
        return f"{a.name}[{self.int_expr(1)} & 7]" if self.rng.random() < 0.5 else \
            f"{a.name}[{self.rng.randint(0, 7)}]"

    def int_expr(self, depth: int) -> str:
        if depth <= 0 or self.rng.random() < 0.25:
            return self.leaf(False)
        d = depth - 1
        k = self.rng.randrange(14)
        if k <= 2:
            op = self.rng.choice(["+", "-", "+", "-", "&", "|", "^"])
            return f"({self.int_expr(d)} {op} {self.int_expr(d)})"
        if k == 3:
            return f"(({self.int_expr(d)} & 255) * ({self.int_expr(d)} & 127))"
        if k == 4:
            op = self.rng.choice(["/", "%"])
            return f"({self.int_expr(d)} {op} (({self.int_expr(d)} & 15) + 1))"
        if k == 5:
            if self.rng.random() < 0.5:
                return f"((unsigned)({self.int_expr(d)}) << ({self.int_expr(d)} & 7))"
            return f"({self.int_expr(d)} >> ({self.int_expr(d)} & 7))"
        if k == 6:
            op = self.rng.choice(["<", "<=", ">", ">=", "==", "!="])
            fl = self.rng.random() < 0.25
            a, b = (self.float_expr(d), self.float_expr(d)) if fl else (self.int_expr(d), self.int_expr(d))
            return f"({a} {op} {b})"
        if k == 7:
            op = self.rng.choice(["&&", "||"])
            return f"({self.int_expr(d)} {op} {self.int_expr(d)})"
        if k == 8:
            return f"({self.int_expr(d)} ? {self.int_expr(d)} : {self.int_expr(d)})"
        if k == 9:
            op = self.rng.choice(["-", "!", "~"])
            return f"({op}{self.int_expr(d)})"
        if k == 10:
            return f"(int)({self.float_expr(d)})"
        if k == 11 and self.use_helper:
            return f"{self.prefix}helper({self.int_expr(d)}, {self.int_expr(d)})"
        if k == 12:
            t = self.rng.choice(["char", "short", "unsigned char", "long", "unsigned"])
            return f"({t})({self.int_expr(d)})"
        return self.leaf(False)

    def float_expr(self, depth: int) -> str:
        if depth <= 0 or self.rng.random() < 0.3:
            return self.leaf(True)
        d = depth - 1
        k = self.rng.randrange(7)
        if k <= 1:
            op = self.rng.choice(["+", "-", "*"])
            return f"({self.float_expr(d)} {op} {self.float_expr(d)})"
        if k == 2:
            e = self.float_expr(d)
            return f"({self.float_expr(d)} / ({e} * {e} + 1.0))"
        if k == 3:
            return f"(double)({self.int_expr(d)})"
        if k == 4:
            return f"({self.int_expr(d)} ? {self.float_expr(d)} : {self.float_expr(d)})"
        if k == 5:
            return f"(-{self.float_expr(d)})"
        return self.leaf(True)

    def expr_for(self, v: Var, depth: int = 2) -> str:
        return self.float_expr(depth) if v.floating else self.int_expr(depth)

    # ------------------------------------------------------------ statements

    def emit(self, indent: int, text: str) -> None:
        self.lines.append("    " * indent + text)

    def declare(self, indent: int) -> None:
        floating = self.rng.random() < 0.25
        t = self.rng.choice(_FLOAT_TYPES if floating else _INT_TYPES)
        name = self.fresh()
        init = self.float_expr(2) if floating else self.int_expr(2)
        self.emit(indent, f"{t} {name} = {init};")
        self.scopes[-1].append(Var(name, t))

    def assign(self, indent: int) -> None:
        targets = self.visible(writable=True)
        r = self.rng.random()
        if r < 0.15 and self.arrays:
            a = self.rng.choice(self.arrays)
            idx = f"{self.int_expr(1)} & 7" if self.rng.random() < 0.5 else str(self.rng.randint(0, 7))
            self.emit(indent, f"{a.name}[{idx}] = {self.expr_for(a)};")
            return
        if r < 0.25 and self.use_struct:
            m, fl = self.rng.choice([("a", False), ("b", False), ("c", False), ("d", True), ("f", True)])
            e = self.float_expr(2) if fl else self.int_expr(2)
            self.emit(indent, f"{self.prefix}gs.{m} = {e};")
            return
        v = self.rng.choice(targets)
        if not v.floating and self.rng.random() < 0.35:
            op = self.rng.choice(["+=", "-=", "&=", "|=", "^="])
            self.emit(indent, f"{v.name} {op} {self.int_expr(1)};")
            return
        if not v.floating and self.rng.random() < 0.1:
            self.emit(indent, f"{v.name}{self.rng.choice(['++', '--'])};")
            return
        self.emit(indent, f"{v.name} = {self.expr_for(v)};")

    def pointer_stmt(self, indent: int) -> None:
        a = self.rng.choice(self.arrays)
        p = self.fresh("p")
        self.emit(indent, f"{a.ctype} *{p} = &{a.name}[{self.int_expr(1)} & 7];")
        self.emit(indent, f"*{p} = *{p} + {self.expr_for(a, 1)};")

    def block(self, indent: int, loop: bool, n: int) -> None:
        self.scopes.append([])
        for _ in range(n):
            if self.left <= 0:
                break
            self.statement(indent, loop)
        self.scopes.pop()

    def statement(self, indent: int, loop: bool, depth: int = 0) -> None:
        self.left -= 1
        nest = sum(1 for ln in self.lines if ln.strip().startswith(("for", "while", "do")))
        r = self.rng.random()
        deep = len(self.scopes) > 3
        if r < 0.12:
            self.declare(indent)
        elif r < 0.42 or deep:
            if loop and self.rng.random() < 0.1:
                self.emit(indent, self.rng.choice(["break;", "continue;"]) if loop != "switch" else "break;")
                return
            self.assign(indent)
        elif r < 0.48 and self.arrays:
            self.pointer_stmt(indent)
        elif r < 0.62:
            self.emit(indent, f"if ({self.int_expr(2)}) {{")
            self.block(indent + 1, loop, self.rng.randint(1, 3))
            if self.rng.random() < 0.5:
                self.emit(indent, "} else {")
                self.block(indent + 1, loop, self.rng.randint(1, 2))
            self.emit(indent, "}")
        elif r < 0.88 and self.loop_nesting() < 2 and nest < 6:
            self.loop(indent)
        elif r < 0.96:
            self.switch(indent, loop)
        else:
            self.assign(indent)

    def loop_nesting(self) -> int:
        return sum(1 for sc in self.scopes for v in sc if not v.writable)

    def loop(self, indent: int) -> None:
        self.ncounter += 1
        c = f"{self.prefix}i{self.ncounter}"
        bound = self.rng.randint(1, 6)
        kind = self.rng.choice(["for", "while", "do"])
        counter = Var(c, "int", writable=False)
        if kind == "for":
            self.emit(indent, f"for (int {c} = 0; {c} < {bound}; {c}++) {{")
            self.scopes.append([counter])
            self.block(indent + 1, True, self.rng.randint(1, 3))
            self.scopes.pop()
            self.emit(indent, "}")
        elif kind == "while":
            self.emit(indent, f"int {c} = 0;")
            self.scopes[-1].append(counter)
            self.emit(indent, f"while ({c} < {bound}) {{")
            self.emit(indent + 1, f"{c} = {c} + 1;")
            self.block(indent + 1, True, self.rng.randint(1, 3))
            self.emit(indent, "}")
        else:
            self.emit(indent, f"int {c} = 0;")
            self.scopes[-1].append(counter)
            self.emit(indent, "do {")
            self.emit(indent + 1, f"{c}++;")
            self.block(indent + 1, True, self.rng.randint(1, 3))
            self.emit(indent, f"}} while ({c} < {bound});")

    def switch(self, indent: int, loop) -> None:
        self.emit(indent, f"switch ({self.int_expr(1)} & 3) {{")
        values = sorted(self.rng.sample(range(4), self.rng.randint(1, 3)))
        for v in values:
            self.emit(indent + 1, f"case {v}:")
            self.case_body(indent + 2, loop, self.rng.randint(1, 2), self.rng.random() < 0.7)
        if self.rng.random() < 0.6:
            self.emit(indent + 1, "default:")
            self.case_body(indent + 2, loop, 1, False)
        self.emit(indent, "}")

    def case_body(self, indent: int, loop, n: int, brk: bool) -> None:
        # a case label must label a statement, and a declaration is not one
        at = len(self.lines)
        self.block(indent, loop or "switch", n)
        if brk:
            self.emit(indent, "break;")
        if len(self.lines) == at or _DECL.match(self.lines[at]):
            self.lines.insert(at, "    " * indent + ";")

    # ------------------------------------------------------------ program

    def pieces(self) -> _Pieces:
        rng = self.rng
        P = self.prefix
        head: list[str] = []
        if self.use_struct:
            head.append(f"struct {P}S {{ int a; long b; char c; double d; float f; }};")
            head.append(f"struct {P}S {P}gs;")
        for _ in range(rng.randint(1, 3)):
            t = rng.choice(_INT_TYPES + ["double"])
            name = self.fresh("g")
            init = f" = {self.const(t == 'double')}" if rng.random() < 0.5 else ""
            head.append(f"{t} {name}{init};")
            self.globals.append(Var(name, t))
        for _ in range(rng.randint(0, 2)):
            t = rng.choice(["int", "long", "unsigned", "double", "short"])
            name = self.fresh("arr")
            if rng.random() < 0.5:
                vals = ", ".join(self.const(t == "double") for _ in range(rng.randint(1, 8)))
                head.append(f"{t} {name}[8] = {{{vals}}};")
            else:
                head.append(f"{t} {name}[8];")
            self.arrays.append(Var(name, t))
        if self.use_helper:
            head += [f"int {P}helper(int x, int y)", "{",
                     "    if (x > y) {", "        return (x - y) & 1023;", "    }",
                     "    return ((x & 63) + (y & 63)) % 97;", "}"]
        ptypes = [rng.choice(["int", "int", "long", "unsigned", "double", "char"])
                  for _ in range(rng.randint(0, 3))]
        params = [(t, f"{P}a{i}") for i, t in enumerate(ptypes)]
        self.params = [Var(n, t) for t, n in params]
        ret = rng.choice(["int", "int", "long", "unsigned", "double", "void"])
        self.scopes.append([])
        while self.left > 0:
            self.statement(1, False)
        ret_expr = None if ret == "void" else self.expr_for(Var("r", ret), 2)
        self.scopes.pop()
        inputs = []
        for _ in range(3):
            row = []
            for t in ptypes:
                if t == "double":
                    row.append(rng.choice([0.0, 1.5, -2.25, 3.0, 0.1]))
                elif t == "char":
                    row.append(rng.randint(-20, 20))
                elif t == "unsigned":
                    row.append(rng.randint(0, 60))
                else:
                    row.append(rng.randint(-30, 30))
            inputs.append(row)
        return _Pieces(head, params, ret, self.lines, ret_expr, inputs)


def _assemble(head: list[str], params: list[tuple[str, str]], ret: str, body: list[str],
              ret_expr: Optional[str]) -> str:
    sig = ", ".join(f"{t} {n}" for t, n in params) or "void"
    lines = head + [f"{ret} {FUNCTION}({sig})", "{"] + body
    if ret_expr is not None:
        lines.append(f"    return {ret_expr};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _candidate(seed: int, budget: int, attempt: int) -> tuple[str, list[list]]:
    rng = random.Random(f"partcc-{seed}-{budget}-{attempt}")
    p = _Gen(rng, budget).pieces()
    return _assemble(p.head, p.params, p.ret, p.body, p.ret_expr), p.inputs


def _sequential_candidate(seed: int, budget: int, attempt: int) -> tuple[str, list[list]]:
    """Two independently generated bodies run one after the other; the
    first one's return is dropped and the second one's kept."""
    a = _Gen(random.Random(f"partcc-seq-a-{seed}-{budget}-{attempt}"), budget, "x_").pieces()
    b = _Gen(random.Random(f"partcc-seq-b-{seed}-{budget}-{attempt}"), budget, "y_").pieces()
    src = _assemble(a.head + b.head, a.params + b.params, b.ret, a.body + b.body, b.ret_expr)
    return src, [ra + rb for ra, rb in zip(a.inputs, b.inputs)]


def well_defined(source: str, inputs: list[list], max_steps: int = MAX_STEPS) -> bool:
    try:
        tree = check(parse_source(source))
        for args in inputs:
            run_function(tree, FUNCTION, args, max_steps=max_steps)
    except (UndefinedBehavior, StepLimitExceeded):
        return False
    return True


def generate(seed: int, budget: int = 12, max_attempts: int = 200,
             sequential: bool = False) -> GeneratedProgram:
    """A well-defined, terminating program and the inputs it was checked on."""
    make = _sequential_candidate if sequential else _candidate
    for attempt in range(max_attempts):
        source, inputs = make(seed, budget, attempt)
        if well_defined(source, inputs):
            return GeneratedProgram(seed, budget, source, FUNCTION, inputs, attempt + 1)
    raise PartccError(f"seed {seed}: no well-defined program in {max_attempts} attempts")


def gen_subset_program(seed: int, budget: int = 12) -> str:
    return generate(seed, budget).source
