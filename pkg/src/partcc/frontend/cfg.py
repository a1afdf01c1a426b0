"""Control-flow graphs over the statement AST.

Statements are first lowered to a flat item list (labels, jumps, conditional
branches, multiway case dispatch); basic blocks then fall out of the usual
leader rules.  The splitter lowers its part lists through the same
``blocks_from_items`` so the two graphs are directly comparable.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from ..errors import UnresolvedLabel
from . import ast as A

EDGE_KINDS = ("fallthrough", "branch-true", "branch-false", "switch-case", "back")


@dataclass
class Item:
    # stmt | cond | casejump | label | jump | return
    kind: str
    node: object = None            # statement, or condition expression
    target: Optional[str] = None   # label name (jump, cond false-target, label)
    back: bool = False             # jump/cond that closes a loop
    sense: bool = False            # cond: branch to target when the condition is TRUE
    cases: list = field(default_factory=list)   # casejump: [(value|None, label)]


@dataclass
class BasicBlock:
    id: int
    items: list[Item]
    dead: bool = False

    @property
    def stmts(self) -> list:
        return [it.node for it in self.items if it.kind in ("stmt", "return")]

    @property
    def size(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    kind: str


@dataclass
class Cfg:
    nodes: list[BasicBlock]
    edges: list[Edge]
    entry: int
    exit: int

    def successors(self, n: int) -> list[int]:
        return [e.dst for e in self.edges if e.src == n]

    def predecessors(self, n: int) -> list[int]:
        return [e.src for e in self.edges if e.dst == n]

    @property
    def back_edges(self) -> list[Edge]:
        return [e for e in self.edges if e.kind == "back"]

    def to_networkx(self):
        import networkx as nx
        g = nx.MultiDiGraph()
        for b in self.nodes:
            g.add_node(b.id, size=b.size, dead=b.dead)
        for e in self.edges:
            g.add_edge(e.src, e.dst, kind=e.kind)
        return g

    def dump(self) -> str:
        lines = []
        for b in self.nodes:
            succ = ", ".join(f"{e.dst}:{e.kind}" for e in self.edges if e.src == b.id)
            tag = " dead" if b.dead else ""
            lines.append(f"B{b.id} size={b.size}{tag} -> [{succ}]")
        return "\n".join(lines)


class Lowering:
    """Flatten structured statements into items.

    ``break_to``/``continue_to`` let callers lower a fragment that sits inside
    a loop lowered elsewhere (the splitter does this for body parts).
    """

    def __init__(self, prefix: str = "%L"):
        self.items: list[Item] = []
        self._ids = itertools.count()
        self.prefix = prefix
        self.breaks: list[str] = []
        self.conts: list[str] = []

    def fresh(self, kind: str) -> str:
        return f"{self.prefix}{next(self._ids)}_{kind}"

    def label(self, name: str) -> None:
        self.items.append(Item("label", target=name))

    def jump(self, target: str, back: bool = False) -> None:
        self.items.append(Item("jump", target=target, back=back))

    def stmts(self, items: list[A.Stmt]) -> None:
        for s in items:
            self.stmt(s)

    def stmt(self, s: A.Stmt) -> None:
        for lab in s.labels:
            self.label(lab)
        if isinstance(s, A.Block):
            self.stmts(s.items)
        elif isinstance(s, (A.Assign, A.ExprStmt, A.Decl, A.Blank)):
            self.items.append(Item("stmt", s))
        elif isinstance(s, A.Return):
            self.items.append(Item("return", s))
        elif isinstance(s, A.Goto):
            self.items.append(Item("jump", s, target=s.label))
        elif isinstance(s, A.Break):
            self.items.append(Item("jump", s, target=self.breaks[-1]))
        elif isinstance(s, A.Continue):
            self.items.append(Item("jump", s, target=self.conts[-1]))
        elif isinstance(s, A.If):
            els = self.fresh("else") if s.other is not None else None
            end = self.fresh("endif")
            self.items.append(Item("cond", s.cond, target=els or end))
            self.stmt(s.then)
            if s.other is not None:
                self.jump(end)
                self.label(els)
                self.stmt(s.other)
            self.label(end)
        elif isinstance(s, A.While):
            head, end = self.fresh("body"), self.fresh("end")
            cont = self.fresh("cont") if A.binds(s.body, A.Continue) else None
            self.label(head)
            self.items.append(Item("cond", s.cond, target=end))
            self.loop_body(s.body, end, cont or head)
            if cont:
                self.label(cont)
            self.jump(head, back=True)
            self.label(end)
        elif isinstance(s, A.For):
            if s.init is not None:
                self.items.append(Item("stmt", s.init))
            head, end = self.fresh("body"), self.fresh("end")
            cont = self.fresh("cont") if A.binds(s.body, A.Continue) else None
            self.label(head)
            if s.cond is not None:
                self.items.append(Item("cond", s.cond, target=end))
            self.loop_body(s.body, end, cont or head)
            if cont:
                self.label(cont)
            if s.incr is not None:
                self.items.append(Item("stmt", s.incr))
            self.jump(head, back=True)
            self.label(end)
        elif isinstance(s, A.DoWhile):
            head, end = self.fresh("body"), self.fresh("end")
            cont = self.fresh("cont") if A.binds(s.body, A.Continue) else None
            self.label(head)
            self.loop_body(s.body, end, cont or head)
            if cont:
                self.label(cont)
            self.items.append(Item("cond", s.cond, target=head, back=True, sense=True))
            self.label(end)
        elif isinstance(s, A.Switch):
            end = self.fresh("end")
            labels = [self.fresh("default" if c.value is None else f"case{i}")
                      for i, c in enumerate(s.cases)]
            cases = [(c.value, lab) for c, lab in zip(s.cases, labels)]
            if all(c.value is not None for c in s.cases):
                cases.append((None, end))
            self.items.append(Item("casejump", s.expr, cases=cases))
            self.breaks.append(end)
            for c, lab in zip(s.cases, labels):
                self.label(lab)
                self.stmts(c.body)
            self.breaks.pop()
            self.label(end)
        else:
            raise TypeError(f"cannot lower {type(s).__name__}")

    def loop_body(self, body: A.Stmt, brk: str, cont: str) -> None:
        self.breaks.append(brk)
        self.conts.append(cont)
        self.stmt(body)
        self.breaks.pop()
        self.conts.pop()


EXIT = "%EXIT"


def blocks_from_items(items: list[Item]) -> Cfg:
    """Partition ``items`` into basic blocks and connect them."""
    targeted = set()
    for it in items:
        if it.kind in ("jump", "cond"):
            targeted.add(it.target)
        elif it.kind == "casejump":
            targeted.update(lab for _, lab in it.cases)
    defined = {it.target for it in items if it.kind == "label"}
    for name in targeted - defined:
        raise UnresolvedLabel(name)
    # a non-final return needs an explicit exit node
    last_real = max((i for i, it in enumerate(items) if it.kind != "label"), default=-1)
    needs_exit = any(it.kind == "return" and i != last_real for i, it in enumerate(items))

    blocks: list[list[Item]] = [[]]
    label_block: dict[str, int] = {}
    for it in items:
        if it.kind == "label":
            if it.target not in targeted:
                continue
            if blocks[-1]:
                blocks.append([])
            label_block[it.target] = len(blocks) - 1
            continue
        blocks[-1].append(it)
        if it.kind in ("jump", "cond", "casejump", "return"):
            blocks.append([])
    if not blocks[-1] and len(blocks) > 1 and len(blocks) - 1 not in label_block.values():
        blocks.pop()

    nodes = [BasicBlock(i, [it for it in b if it.kind != "jump"]) for i, b in enumerate(blocks)]
    exit_id = None
    if needs_exit:
        exit_id = len(nodes)
        nodes.append(BasicBlock(exit_id, []))
        label_block[EXIT] = exit_id
    edges: list[Edge] = []
    for i, b in enumerate(blocks):
        tail = b[-1] if b else None
        nxt = i + 1 if i + 1 < len(blocks) else exit_id
        if tail is None or tail.kind == "stmt":
            if nxt is not None:
                edges.append(Edge(i, nxt, "fallthrough"))
        elif tail.kind == "jump":
            edges.append(Edge(i, label_block[tail.target], "back" if tail.back else "fallthrough"))
        elif tail.kind == "return":
            if exit_id is not None:
                edges.append(Edge(i, exit_id, "fallthrough"))
        elif tail.kind == "cond":
            tgt = label_block[tail.target]
            if tail.sense:
                edges.append(Edge(i, tgt, "back" if tail.back else "branch-true"))
                if nxt is not None:
                    edges.append(Edge(i, nxt, "branch-false"))
            else:
                if nxt is not None:
                    edges.append(Edge(i, nxt, "branch-true"))
                edges.append(Edge(i, tgt, "branch-false"))
        elif tail.kind == "casejump":
            for _, lab in tail.cases:
                edges.append(Edge(i, label_block[lab], "switch-case"))

    entry = 0
    if any(e.dst == 0 for e in edges):
        # keep the entry free of predecessors
        nodes = [BasicBlock(0, [])] + [BasicBlock(b.id + 1, b.items) for b in nodes]
        edges = [Edge(0, 1, "fallthrough")] + [Edge(e.src + 1, e.dst + 1, e.kind) for e in edges]
        if exit_id is not None:
            exit_id += 1
    reach = {entry}
    frontier = [entry]
    succ: dict[int, list[int]] = {}
    for e in edges:
        succ.setdefault(e.src, []).append(e.dst)
    while frontier:
        n = frontier.pop()
        for m in succ.get(n, ()):
            if m not in reach:
                reach.add(m)
                frontier.append(m)
    for b in nodes:
        b.dead = b.id not in reach
    return Cfg(nodes, edges, entry, exit_id if exit_id is not None else len(nodes) - 1)


def lower_function(fn: A.FunctionDef) -> list[Item]:
    low = Lowering()
    low.stmts(fn.body.items)
    for it in low.items:
        if it.kind == "return":
            it.target = EXIT
    return low.items


def build_cfg(fn: A.FunctionDef) -> Cfg:
    """Control-flow graph of ``fn``'s body."""
    return blocks_from_items(lower_function(fn))
