"""AST node classes for the C subset.

Every node carries a ``span`` (byte offsets into the parsed text); spans,
resolved types and declaration links are excluded from equality so two
trees compare structurally.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields
from typing import Iterator, Optional, Union

from .ctype import CType


def _meta(default=None):
    return field(default=default, compare=False, repr=False)


class Node:
    span: Optional[tuple[int, int]]

    def children(self) -> Iterator["Node"]:
        for f in fields(self):
            if not f.compare:
                continue
            v = getattr(self, f.name)
            if isinstance(v, Node):
                yield v
            elif isinstance(v, (list, tuple)):
                for x in v:
                    if isinstance(x, Node):
                        yield x

    def walk(self) -> Iterator["Node"]:
        stack = [self]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(reversed(list(n.children())))


# ---------------------------------------------------------------- expressions

class Expr(Node):
    ctype: Optional[CType]


@dataclass(eq=True)
class IntLit(Expr):
    value: int
    suffix: str = ""      # "", "u", "l", "ul"
    radix: str = "dec"    # dec | hex | oct
    span: Optional[tuple[int, int]] = _meta()
    ctype: Optional[CType] = _meta()


@dataclass(eq=True)
class FloatLit(Expr):
    value: float
    single: bool = False
    span: Optional[tuple[int, int]] = _meta()
    ctype: Optional[CType] = _meta()


@dataclass(eq=True)
class Ident(Expr):
    name: str
    span: Optional[tuple[int, int]] = _meta()
    ctype: Optional[CType] = _meta()
    decl: Optional[object] = _meta()


@dataclass(eq=True)
class Unary(Expr):
    # - + ! ~ * & pre++ pre-- post++ post--
    op: str
    operand: Expr
    span: Optional[tuple[int, int]] = _meta()
    ctype: Optional[CType] = _meta()


@dataclass(eq=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr
    span: Optional[tuple[int, int]] = _meta()
    ctype: Optional[CType] = _meta()
    # operand type both sides are converted to before the operation
    optype: Optional[CType] = _meta()


@dataclass(eq=True)
class Ternary(Expr):
    cond: Expr
    then: Expr
    other: Expr
    span: Optional[tuple[int, int]] = _meta()
    ctype: Optional[CType] = _meta()


@dataclass(eq=True)
class Call(Expr):
    name: str
    args: list[Expr]
    span: Optional[tuple[int, int]] = _meta()
    ctype: Optional[CType] = _meta()
    ftype: Optional[CType] = _meta()


@dataclass(eq=True)
class Index(Expr):
    base: Expr
    index: Expr
    span: Optional[tuple[int, int]] = _meta()
    ctype: Optional[CType] = _meta()


@dataclass(eq=True)
class Member(Expr):
    base: Expr
    name: str
    arrow: bool = False
    span: Optional[tuple[int, int]] = _meta()
    ctype: Optional[CType] = _meta()


@dataclass(eq=True)
class Cast(Expr):
    to: CType
    operand: Expr
    span: Optional[tuple[int, int]] = _meta()
    ctype: Optional[CType] = _meta()


@dataclass(eq=True)
class SizeofType(Expr):
    of: CType
    span: Optional[tuple[int, int]] = _meta()
    ctype: Optional[CType] = _meta()


@dataclass(eq=True)
class SizeofExpr(Expr):
    operand: Expr
    span: Optional[tuple[int, int]] = _meta()
    ctype: Optional[CType] = _meta()


@dataclass(eq=True)
class InitList(Node):
    items: list[Union[Expr, "InitList"]]
    span: Optional[tuple[int, int]] = _meta()


# ----------------------------------------------------------------- statements

class StatementKind(enum.Enum):
    ASSIGN = "Assign"
    EXPR = "Expr"
    GOTO = "Goto"
    BLANK = "Blank"
    BLOCK = "Block"
    IF = "If"
    WHILE = "While"
    FOR = "For"
    DO_WHILE = "DoWhile"
    SWITCH = "Switch"
    BREAK = "Break"
    CONTINUE = "Continue"
    RETURN = "Return"
    DECL = "Decl"


BASIC_KINDS = frozenset({
    StatementKind.ASSIGN, StatementKind.EXPR, StatementKind.GOTO, StatementKind.BLANK,
    StatementKind.BREAK, StatementKind.CONTINUE, StatementKind.RETURN,
})
LOOP_KINDS = frozenset({StatementKind.WHILE, StatementKind.FOR, StatementKind.DO_WHILE})
CONTROL_KINDS = frozenset({
    StatementKind.IF, StatementKind.WHILE, StatementKind.FOR,
    StatementKind.DO_WHILE, StatementKind.SWITCH,
})


class Stmt(Node):
    kind: StatementKind
    # goto labels attached in front of this statement
    labels: tuple[str, ...]

    @property
    def is_basic(self) -> bool:
        return self.kind in BASIC_KINDS

    @property
    def is_control(self) -> bool:
        return self.kind in CONTROL_KINDS


@dataclass(eq=True)
class Assign(Stmt):
    target: Expr
    value: Expr
    op: str = "="        # = += -= *= /= %= <<= >>= &= |= ^=
    labels: tuple[str, ...] = ()
    span: Optional[tuple[int, int]] = _meta()
    kind = StatementKind.ASSIGN


@dataclass(eq=True)
class ExprStmt(Stmt):
    expr: Expr
    labels: tuple[str, ...] = ()
    span: Optional[tuple[int, int]] = _meta()
    kind = StatementKind.EXPR


@dataclass(eq=True)
class Goto(Stmt):
    label: str
    labels: tuple[str, ...] = ()
    span: Optional[tuple[int, int]] = _meta()
    kind = StatementKind.GOTO


@dataclass(eq=True)
class Blank(Stmt):
    labels: tuple[str, ...] = ()
    span: Optional[tuple[int, int]] = _meta()
    kind = StatementKind.BLANK


@dataclass(eq=True)
class Block(Stmt):
    items: list[Stmt]
    labels: tuple[str, ...] = ()
    span: Optional[tuple[int, int]] = _meta()
    kind = StatementKind.BLOCK


@dataclass(eq=True)
class If(Stmt):
    cond: Expr
    then: Stmt
    other: Optional[Stmt] = None
    labels: tuple[str, ...] = ()
    span: Optional[tuple[int, int]] = _meta()
    kind = StatementKind.IF


@dataclass(eq=True)
class While(Stmt):
    cond: Expr
    body: Stmt
    labels: tuple[str, ...] = ()
    span: Optional[tuple[int, int]] = _meta()
    kind = StatementKind.WHILE


@dataclass(eq=True)
class For(Stmt):
    init: Optional[Stmt]
    cond: Optional[Expr]
    incr: Optional[Stmt]
    body: Stmt
    labels: tuple[str, ...] = ()
    span: Optional[tuple[int, int]] = _meta()
    kind = StatementKind.FOR


@dataclass(eq=True)
class DoWhile(Stmt):
    body: Stmt
    cond: Expr
    labels: tuple[str, ...] = ()
    span: Optional[tuple[int, int]] = _meta()
    kind = StatementKind.DO_WHILE


@dataclass(eq=True)
class Case(Node):
    value: Optional[int]  # None for default
    body: list[Stmt]
    span: Optional[tuple[int, int]] = _meta()


@dataclass(eq=True)
class Switch(Stmt):
    expr: Expr
    cases: list[Case]
    labels: tuple[str, ...] = ()
    span: Optional[tuple[int, int]] = _meta()
    kind = StatementKind.SWITCH


@dataclass(eq=True)
class Break(Stmt):
    labels: tuple[str, ...] = ()
    span: Optional[tuple[int, int]] = _meta()
    kind = StatementKind.BREAK


@dataclass(eq=True)
class Continue(Stmt):
    labels: tuple[str, ...] = ()
    span: Optional[tuple[int, int]] = _meta()
    kind = StatementKind.CONTINUE


@dataclass(eq=True)
class Return(Stmt):
    value: Optional[Expr] = None
    labels: tuple[str, ...] = ()
    span: Optional[tuple[int, int]] = _meta()
    kind = StatementKind.RETURN


@dataclass(eq=True)
class Decl(Stmt):
    name: str
    ctype: CType
    init: Optional[Union[Expr, InitList]] = None
    labels: tuple[str, ...] = ()
    span: Optional[tuple[int, int]] = _meta()
    kind = StatementKind.DECL


# ------------------------------------------------------------------ top level

@dataclass(eq=True)
class Param(Node):
    name: str
    ctype: CType
    span: Optional[tuple[int, int]] = _meta()


@dataclass(eq=True)
class FunctionDef(Node):
    name: str
    ret: CType
    params: list[Param]
    body: Block
    span: Optional[tuple[int, int]] = _meta()

    @property
    def ftype(self):
        from .ctype import FunctionType
        return FunctionType(self.ret, tuple(p.ctype for p in self.params))


@dataclass(eq=True)
class FunctionDecl(Node):
    """A prototype without a body."""

    name: str
    ret: CType
    params: list[Param]
    span: Optional[tuple[int, int]] = _meta()

    @property
    def ftype(self):
        from .ctype import FunctionType
        return FunctionType(self.ret, tuple(p.ctype for p in self.params))


@dataclass(eq=True)
class GlobalDecl(Node):
    name: str
    ctype: CType
    init: Optional[Union[Expr, InitList]] = None
    extern: bool = False
    span: Optional[tuple[int, int]] = _meta()


@dataclass(eq=True)
class RecordDecl(Node):
    """``struct S { ... };`` at file scope."""

    rtype: CType
    span: Optional[tuple[int, int]] = _meta()

    def __eq__(self, other):
        if not isinstance(other, RecordDecl):
            return NotImplemented
        return self.rtype == other.rtype and self.rtype.members == other.rtype.members


@dataclass(eq=True)
class TypedefDecl(Node):
    name: str
    ctype: CType
    span: Optional[tuple[int, int]] = _meta()


TopItem = Union[FunctionDef, FunctionDecl, GlobalDecl, RecordDecl, TypedefDecl]


@dataclass(eq=True)
class Ast:
    items: list[TopItem]
    source: str = field(default="", compare=False, repr=False)

    @property
    def functions(self) -> list[FunctionDef]:
        return [i for i in self.items if isinstance(i, FunctionDef)]

    @property
    def globals(self) -> list[GlobalDecl]:
        return [i for i in self.items if isinstance(i, GlobalDecl)]

    def function(self, name: str) -> FunctionDef:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    def replace_function(self, fn: FunctionDef) -> "Ast":
        items = [fn if isinstance(i, FunctionDef) and i.name == fn.name else i for i in self.items]
        return Ast(items, self.source)


def iter_stmts(stmt: Stmt) -> Iterator[Stmt]:
    """Preorder walk over statements (not expressions)."""
    stack = [stmt]
    while stack:
        s = stack.pop()
        yield s
        stack.extend(reversed(sub_statements(s)))


def sub_statements(s: Stmt) -> list[Stmt]:
    if isinstance(s, Block):
        return list(s.items)
    if isinstance(s, If):
        return [s.then] + ([s.other] if s.other is not None else [])
    if isinstance(s, While):
        return [s.body]
    if isinstance(s, DoWhile):
        return [s.body]
    if isinstance(s, For):
        return [x for x in (s.init, s.incr, s.body) if x is not None]
    if isinstance(s, Switch):
        return [st for c in s.cases for st in c.body]
    return []


def stmt_exprs(s: Stmt) -> list[Expr]:
    """Expression roots owned directly by ``s`` (not by nested statements)."""
    if isinstance(s, Assign):
        return [s.target, s.value]
    if isinstance(s, ExprStmt):
        return [s.expr]
    if isinstance(s, (If, While, DoWhile)):
        return [s.cond]
    if isinstance(s, For):
        return [s.cond] if s.cond is not None else []
    if isinstance(s, Switch):
        return [s.expr]
    if isinstance(s, Return):
        return [s.value] if s.value is not None else []
    if isinstance(s, Decl):
        return list(_init_exprs(s.init))
    return []


def _init_exprs(init):
    if init is None:
        return
    if isinstance(init, InitList):
        for it in init.items:
            yield from _init_exprs(it)
    else:
        yield init


def binds(body: Stmt, cls: type) -> bool:
    """Does ``body`` contain a ``cls`` (Break/Continue) that binds to the
    enclosing loop, i.e. one not captured by a nested loop (or, for break,
    a nested switch)?"""
    stack = [body]
    while stack:
        s = stack.pop()
        if isinstance(s, cls):
            return True
        if isinstance(s, (While, For, DoWhile)):
            continue
        if isinstance(s, Switch) and cls is Break:
            continue
        stack.extend(sub_statements(s))
    return False
