"""Split a function body into control parts, and check the split.

The body is processed through a work deque.  Each popped block is either
kept whole (one SourceBlock part) or expanded by its outermost control
structure into condition/label/jump parts plus sub-blocks, which go back to
the front of the deque so that the emitted order follows the source order.
"""
from __future__ import annotations

import enum
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import networkx as nx

from .errors import ConfigError, NonComposable, UnresolvedLabel
from .frontend import ast as A
from .frontend.cfg import EXIT, Item, Lowering, blocks_from_items, build_cfg
from .frontend.features import stmts_token_estimate
from .frontend.lexer import tokenize
from .frontend.printer import expr_to_c, simple_to_c, stmts_to_c


class PartKind(str, enum.Enum):
    SOURCE = "SourceBlock"
    LABEL = "Label"
    COND_JUMP = "CondJump"
    UNCOND_JUMP = "UncondJump"


@dataclass
class ControlPart:
    kind: PartKind
    payload: str
    id: int = -1
    loop_depth: int = 0
    # SourceBlock: stmts | cond | for_init | for_incr | switch_head
    role: str = "stmts"
    nodes: list = field(default_factory=list, repr=False)
    # jumps: target label; CondJump sense is zero | nonzero | eq
    label: Optional[str] = None
    sense: Optional[str] = None
    case_value: Optional[int] = None
    switch_type: object = field(default=None, repr=False)
    back: bool = False
    break_label: Optional[str] = None
    continue_label: Optional[str] = None
    # structural parts of one split construct share these
    construct: Optional[str] = None
    struct_id: Optional[int] = None

    def dump(self) -> str:
        payload = self.payload.replace("\n", " ")
        if self.kind == PartKind.COND_JUMP:
            payload = f"{self.sense}{'' if self.case_value is None else ' ' + str(self.case_value)} {payload}"
        return f"{self.id} {self.kind.value} {self.loop_depth} {payload}"


@dataclass(frozen=True)
class SplitConfig:
    split_threshold: int = 400
    expr_complexity_limit: int = 8
    policy: str = "heuristic"

    def __post_init__(self) -> None:
        if self.split_threshold <= 0:
            raise ConfigError("split_threshold must be positive")
        if self.expr_complexity_limit <= 0:
            raise ConfigError("expr_complexity_limit must be positive")
        if self.policy not in ("heuristic", "llm", "always", "never"):
            raise ConfigError(f"unknown split policy {self.policy!r}")


@dataclass
class CompoabilityVerdict:
    composable: bool
    blocking_constructs: list[tuple[Optional[tuple[int, int]], str]] = field(default_factory=list)


# the spelling above is the published interface name; offer the obvious one too
ComposabilityVerdict = CompoabilityVerdict


def dump_parts(parts: list[ControlPart]) -> str:
    return "".join(p.dump() + "\n" for p in parts)


# ---------------------------------------------------------------- blocks

@dataclass
class Block:
    """A unit the split policy decides on: one statement or a statement run."""
    stmts: list[A.Stmt]
    loop_depth: int = 0
    break_label: Optional[str] = None
    continue_label: Optional[str] = None

    @property
    def token_estimate(self) -> int:
        return stmts_token_estimate(self.stmts)

    @property
    def is_control(self) -> bool:
        return any(not _is_basic_tree(s) for s in self.stmts)

    @property
    def text(self) -> str:
        return stmts_to_c(self.stmts, 0, canonical=True)


def _is_basic_tree(s: A.Stmt) -> bool:
    if isinstance(s, A.Block):
        return all(_is_basic_tree(x) for x in s.items)
    return not s.is_control


def _flatten(stmts: list[A.Stmt]) -> list[A.Stmt]:
    out = []
    for s in stmts:
        if isinstance(s, A.Block) and not s.labels:
            out.extend(_flatten(s.items))
        else:
            out.append(s)
    return out


def _body_list(s: Optional[A.Stmt]) -> list[A.Stmt]:
    if s is None:
        return []
    return _flatten([s])


SplitPolicy = Callable[[Block, SplitConfig], str]


def heuristic_decide(block: Block, config: SplitConfig) -> str:
    if block.is_control and block.token_estimate > config.split_threshold:
        return "split"
    return "keep"


def always_split(block: Block, config: SplitConfig) -> str:
    return "split" if block.is_control else "keep"


def never_split(block: Block, config: SplitConfig) -> str:
    return "keep"


def random_policy(seed: int) -> SplitPolicy:
    rng = random.Random(seed)

    def decide(block: Block, config: SplitConfig) -> str:
        return rng.choice(("keep", "split")) if block.is_control else "keep"
    return decide


def llm_policy(ask: Callable[[str], str]) -> SplitPolicy:
    """Forward the block to a model; anything but a clear "split" keeps it."""
    def decide(block: Block, config: SplitConfig) -> str:
        if not block.is_control:
            return "keep"
        prompt = (f"Should this C block (about {block.token_estimate} tokens; threshold "
                  f"{config.split_threshold}) be split at its outermost control structure "
                  f"before translation? Answer keep or split.\n```c\n{block.text}\n```")
        try:
            reply = ask(prompt).strip().lower()
        except Exception:
            return heuristic_decide(block, config)
        return "split" if reply.startswith("split") else "keep"
    return decide


def policy_for(config: SplitConfig, ask: Optional[Callable[[str], str]] = None) -> SplitPolicy:
    if config.policy == "llm":
        if ask is None:
            raise ConfigError("the llm split policy needs a model")
        return llm_policy(ask)
    return {"heuristic": heuristic_decide, "always": always_split,
            "never": never_split}[config.policy]


# ---------------------------------------------------------------- composability

GOTO_REASON = "goto breaks structured control flow"
LABEL_REASON = "statement label implies goto-style control flow"


def check_composability(fn: A.FunctionDef) -> CompoabilityVerdict:
    blockers: list = []
    work = deque([fn.body])
    while work:
        s = work.popleft()
        if s.labels:
            blockers.append((s.span, LABEL_REASON))
        if isinstance(s, A.Goto):
            blockers.append((s.span, GOTO_REASON))
            continue
        if isinstance(s, (A.Assign, A.ExprStmt, A.Decl, A.Blank, A.Return, A.Break, A.Continue)):
            continue
        if isinstance(s, (A.Block, A.If, A.While, A.For, A.DoWhile, A.Switch)):
            # structure-specific split, sub-blocks back to the front in reverse
            work.extendleft(reversed(A.sub_statements(s)))
            continue
        blockers.append((getattr(s, "span", None), f"unrecognised construct {type(s).__name__}"))
    return CompoabilityVerdict(not blockers, blockers)


# ---------------------------------------------------------------- splitting

class _Splitter:
    def __init__(self, fn: A.FunctionDef, config: SplitConfig, decide: SplitPolicy):
        self.fn = fn
        self.config = config
        self.decide = decide
        self.nstruct = 0

    def label_name(self, n: int, kind: str) -> str:
        return f".L_{self.fn.name}__{n}_{kind}"

    def run(self) -> list[ControlPart]:
        parts: list[ControlPart] = []
        work: deque = deque([Block(_flatten(self.fn.body.items))])
        while work:
            item = work.popleft()
            if isinstance(item, ControlPart):
                item.id = len(parts)
                parts.append(item)
                continue
            for x in reversed(self.expand(item)):
                work.appendleft(x)
        return parts

    def source(self, block: Block, stmts: list[A.Stmt]) -> ControlPart:
        return ControlPart(PartKind.SOURCE, stmts_to_c(stmts, 0, canonical=True),
                           loop_depth=block.loop_depth, nodes=list(stmts),
                           break_label=block.break_label, continue_label=block.continue_label)

    def expand(self, block: Block) -> list:
        if not block.stmts:
            return []
        if self.decide(block, self.config) != "split":
            return [self.source(block, block.stmts)]
        if len(block.stmts) > 1:
            # outermost control blocks: maximal basic runs and single structures
            out: list = []
            run: list[A.Stmt] = []
            for s in block.stmts:
                if _is_basic_tree(s):
                    run.append(s)
                    continue
                if run:
                    out.append(self.source(block, run))
                    run = []
                out.append(self.sub(block, [s]))
            if run:
                out.append(self.source(block, run))
            return out
        return self.split_structure(block, block.stmts[0])

    def sub(self, block: Block, stmts: list[A.Stmt], depth: Optional[int] = None,
            brk: Optional[str] = "", cont: Optional[str] = "") -> Block:
        return Block(stmts, block.loop_depth if depth is None else depth,
                     block.break_label if brk == "" else brk,
                     block.continue_label if cont == "" else cont)

    def split_structure(self, block: Block, s: A.Stmt) -> list:
        n = self.nstruct
        self.nstruct += 1
        d = block.loop_depth
        lab = lambda kind: self.label_name(n, kind)  # noqa: E731

        def mk(kind, payload, depth=d, **kw) -> ControlPart:
            return ControlPart(kind, payload, loop_depth=depth, construct=construct,
                               struct_id=n, **kw)

        def label(name, depth=d) -> ControlPart:
            return mk(PartKind.LABEL, name, depth, label=name)

        def cond(e, depth=d) -> ControlPart:
            return mk(PartKind.SOURCE, expr_to_c(e), depth, role="cond", nodes=[e],
                      break_label=block.break_label, continue_label=block.continue_label)

        def jump(target, depth=d, sense=None, back=False, **kw) -> ControlPart:
            kind = PartKind.UNCOND_JUMP if sense is None else PartKind.COND_JUMP
            return mk(kind, target, depth, label=target, sense=sense, back=back, **kw)

        if isinstance(s, A.If):
            construct = "if"
            end = lab("endif")
            if s.other is None:
                return [cond(s.cond), jump(end, sense="zero"),
                        self.sub(block, _body_list(s.then)), label(end)]
            els = lab("else")
            return [cond(s.cond), jump(els, sense="zero"),
                    self.sub(block, _body_list(s.then)), jump(end), label(els),
                    self.sub(block, _body_list(s.other)), label(end)]
        if isinstance(s, (A.While, A.For, A.DoWhile)):
            construct = {A.While: "while", A.For: "for", A.DoWhile: "do"}[type(s)]
            inner = d + 1
            head, end = lab("body"), lab("end")
            cont = lab("cont") if A.binds(s.body, A.Continue) else None
            body = self.sub(block, _body_list(s.body), inner, end, cont or head)
            out: list = []
            if isinstance(s, A.DoWhile):
                out += [label(head, inner), body]
                if cont:
                    out.append(label(cont, inner))
                out += [cond(s.cond, inner), jump(head, inner, sense="nonzero", back=True),
                        label(end, inner)]
                return out
            if isinstance(s, A.For) and s.init is not None:
                out.append(mk(PartKind.SOURCE, simple_to_c(s.init) + ";", d, role="for_init",
                              nodes=[s.init]))
            out.append(label(head, inner))
            if s.cond is not None:
                out += [cond(s.cond, inner), jump(end, inner, sense="zero")]
            out.append(body)
            if cont:
                out.append(label(cont, inner))
            if isinstance(s, A.For) and s.incr is not None:
                out.append(mk(PartKind.SOURCE, simple_to_c(s.incr) + ";", inner,
                              role="for_incr", nodes=[s.incr]))
            out += [jump(head, inner, back=True), label(end, inner)]
            return out
        if isinstance(s, A.Switch):
            construct = "switch"
            end = lab("end")
            names = [lab("default" if c.value is None else f"case{i}")
                     for i, c in enumerate(s.cases)]
            out = [mk(PartKind.SOURCE, expr_to_c(s.expr), d, role="switch_head",
                      nodes=[s.expr])]
            default = end
            for c, name in zip(s.cases, names):
                if c.value is None:
                    default = name
                else:
                    out.append(jump(name, sense="eq", case_value=c.value,
                                    switch_type=s.expr.ctype))
            out.append(jump(default))
            for c, name in zip(s.cases, names):
                out.append(label(name))
                out.append(self.sub(block, _flatten(c.body), d, end, ""))
            out.append(label(end))
            return out
        raise NonComposable(f"cannot split {type(s).__name__}")


def split_parts(fn: A.FunctionDef, config: Optional[SplitConfig] = None,
                decide: Optional[SplitPolicy] = None) -> list[ControlPart]:
    config = config or SplitConfig()
    verdict = check_composability(fn)
    if not verdict.composable:
        reasons = "; ".join(r for _, r in verdict.blocking_constructs)
        raise NonComposable(f"{fn.name}: {reasons}")
    return _Splitter(fn, config, decide or policy_for(config)).run()


# ---------------------------------------------------------------- integrity

def recombine(parts: list[ControlPart]) -> str:
    """Rebuild C text from the parts alone (payloads plus structure tags)."""
    pos = 0

    def at() -> Optional[ControlPart]:
        return parts[pos] if pos < len(parts) else None

    def take() -> ControlPart:
        nonlocal pos
        p = parts[pos]
        pos += 1
        return p

    def seq(open_ids: frozenset) -> list[str]:
        out: list[str] = []
        while at() is not None and at().struct_id not in open_ids:
            p = at()
            if p.struct_id is None:
                out.append(take().payload)
            else:
                out.extend(construct(p.struct_id, p.construct, open_ids | {p.struct_id}))
        return out

    def expect(n: int, kind: PartKind, role: Optional[str] = None) -> ControlPart:
        p = at()
        if p is None or p.struct_id != n or p.kind != kind or (role and p.role != role):
            raise ValueError(f"malformed part list near {pos}")
        return take()

    def maybe(n: int, kind: PartKind, role: Optional[str] = None) -> Optional[ControlPart]:
        p = at()
        if p is not None and p.struct_id == n and p.kind == kind and (role is None or p.role == role):
            return take()
        return None

    def braced(head: str, body: list[str]) -> list[str]:
        return [head + " {", *body, "}"]

    def construct(n: int, kind: str, ids: frozenset) -> list[str]:
        if kind == "if":
            c = expect(n, PartKind.SOURCE, "cond")
            expect(n, PartKind.COND_JUMP)
            then = seq(ids)
            if maybe(n, PartKind.UNCOND_JUMP):
                expect(n, PartKind.LABEL)
                other = seq(ids)
                expect(n, PartKind.LABEL)
                return braced(f"if ({c.payload})", then) + braced("else", other)
            expect(n, PartKind.LABEL)
            return braced(f"if ({c.payload})", then)
        if kind in ("while", "for"):
            init = maybe(n, PartKind.SOURCE, "for_init")
            expect(n, PartKind.LABEL)
            c = maybe(n, PartKind.SOURCE, "cond")
            if c is not None:
                expect(n, PartKind.COND_JUMP)
            body = seq(ids)
            maybe(n, PartKind.LABEL)
            incr = maybe(n, PartKind.SOURCE, "for_incr")
            expect(n, PartKind.UNCOND_JUMP)
            expect(n, PartKind.LABEL)
            if kind == "while":
                return braced(f"while ({c.payload})", body)
            i = init.payload.rstrip(";") if init else ""
            cc = " " + c.payload if c else ""
            inc = " " + incr.payload.rstrip(";") if incr else ""
            return braced(f"for ({i};{cc};{inc})", body)
        if kind == "do":
            expect(n, PartKind.LABEL)
            body = seq(ids)
            maybe(n, PartKind.LABEL)
            c = expect(n, PartKind.SOURCE, "cond")
            expect(n, PartKind.COND_JUMP)
            expect(n, PartKind.LABEL)
            return ["do {", *body, f"}} while ({c.payload});"]
        if kind == "switch":
            head = expect(n, PartKind.SOURCE, "switch_head")
            values: dict[str, Optional[int]] = {}
            while (j := maybe(n, PartKind.COND_JUMP)) is not None:
                values[j.label] = j.case_value
            dflt = expect(n, PartKind.UNCOND_JUMP)
            if dflt.label.endswith("_default"):
                values.setdefault(dflt.label, None)
            out = [f"switch ({head.payload}) {{"]
            while True:
                lab = expect(n, PartKind.LABEL)
                if lab.label not in values:
                    if at() is not None and at().struct_id == n:
                        raise ValueError("case label without dispatch")
                    break      # the end label
                v = values[lab.label]
                out.append("default:" if v is None else f"case {v}:")
                out.extend(seq(ids))
            out.append("}")
            return out
        raise ValueError(f"unknown construct {kind!r}")

    text = seq(frozenset())
    if pos != len(parts):
        raise ValueError("trailing parts")
    return "\n".join(text)


def _tokens(text: str) -> list[str]:
    return [t.text for t in tokenize(text) if t.kind != "EOF"]


def parts_items(fn: A.FunctionDef, parts: list[ControlPart]) -> list[Item]:
    """Lower a part list to CFG items, mirroring the function lowering."""
    items: list[Item] = []
    i = 0
    while i < len(parts):
        p = parts[i]
        if p.kind == PartKind.LABEL:
            items.append(Item("label", target=p.label))
        elif p.kind == PartKind.UNCOND_JUMP:
            items.append(Item("jump", target=p.label, back=p.back))
        elif p.kind == PartKind.COND_JUMP:
            raise ValueError(f"part {p.id}: conditional jump without a condition")
        elif p.role in ("for_init", "for_incr"):
            items.append(Item("stmt", p.nodes[0]))
        elif p.role == "cond":
            j = parts[i + 1] if i + 1 < len(parts) else None
            if j is None or j.kind != PartKind.COND_JUMP or j.sense == "eq":
                raise ValueError(f"part {p.id}: condition not followed by its jump")
            items.append(Item("cond", p.nodes[0], target=j.label, back=j.back,
                              sense=j.sense == "nonzero"))
            i += 1
        elif p.role == "switch_head":
            cases = []
            i += 1
            while i < len(parts) and parts[i].kind == PartKind.COND_JUMP and parts[i].sense == "eq":
                cases.append((parts[i].case_value, parts[i].label))
                i += 1
            if i >= len(parts) or parts[i].kind != PartKind.UNCOND_JUMP:
                raise ValueError(f"part {p.id}: switch dispatch without a default jump")
            cases.append((None, parts[i].label))
            items.append(Item("casejump", p.nodes[0], cases=cases))
        else:
            low = Lowering(prefix=f"%P{p.id}_")
            if p.break_label:
                low.breaks.append(p.break_label)
            if p.continue_label:
                low.conts.append(p.continue_label)
            low.stmts(p.nodes)
            items.extend(low.items)
        i += 1
    for it in items:
        if it.kind == "return":
            it.target = EXIT
    return items


def _graph(cfg):
    return cfg.to_networkx()


def _edge_kinds(a: dict, b: dict) -> bool:
    return sorted(d["kind"] for d in a.values()) == sorted(d["kind"] for d in b.values())


def verify_split_integrity(fn: A.FunctionDef, parts: list[ControlPart]) -> bool:
    """Recombined text equals the body, and the part CFG is isomorphic to the function CFG."""
    try:
        text = recombine(parts)
    except (ValueError, IndexError, AttributeError):
        return False
    if _tokens(text) != _tokens(stmts_to_c(fn.body.items, 0, canonical=True)):
        return False
    labels = [p.label for p in parts if p.kind == PartKind.LABEL]
    if len(labels) != len(set(labels)):
        return False
    owner = {p.label: p.struct_id for p in parts if p.kind == PartKind.LABEL}
    for p in parts:
        # a split jump only ever targets a label of its own construct
        if p.kind in (PartKind.COND_JUMP, PartKind.UNCOND_JUMP):
            if p.label not in owner or owner[p.label] != p.struct_id:
                return False
    try:
        mine = blocks_from_items(parts_items(fn, parts))
    except (ValueError, UnresolvedLabel, IndexError):
        return False
    ref = build_cfg(fn)
    return nx.is_isomorphic(
        _graph(mine), _graph(ref),
        node_match=lambda a, b: a["size"] == b["size"] and a["dead"] == b["dead"],
        edge_match=_edge_kinds)
