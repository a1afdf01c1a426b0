"""Source-level rewrites that run before translation.

``rename_variables`` gives every local declaration a unique name;
``decompose_complex_expressions`` splits expressions with too many operators
into temporaries.  Both return new trees and leave their input untouched.
"""
from __future__ import annotations

import copy
import itertools
from dataclasses import dataclass, field
from typing import Optional

from .frontend import ast as A
from .frontend.ctype import INT, decay
from .frontend.features import operator_count
from .frontend.sema import ProgramEnv, check_function


# ---------------------------------------------------------------- renaming

@dataclass(frozen=True)
class RenameEntry:
    scope_path: tuple[int, ...]
    original: str
    fresh: str


@dataclass
class RenameMap:
    entries: list[RenameEntry] = field(default_factory=list)

    def fresh_names(self) -> list[str]:
        return [e.fresh for e in self.entries]

    def lookup(self, original: str) -> list[str]:
        return [e.fresh for e in self.entries if e.original == original]


def fresh_name(original: str, ordinal: int) -> str:
    return f"{original}__{ordinal}"


class _Renamer:
    def __init__(self):
        self.ordinal = itertools.count(1)
        self.scopes: list[dict[str, str]] = []
        self.path: list[int] = []
        self.child_counter: list[int] = []
        self.map = RenameMap()

    def push(self) -> None:
        idx = self.child_counter[-1] if self.child_counter else 0
        if self.child_counter:
            self.child_counter[-1] += 1
        self.path.append(idx)
        self.child_counter.append(0)
        self.scopes.append({})

    def pop(self) -> None:
        self.scopes.pop()
        self.path.pop()
        self.child_counter.pop()

    def declare(self, name: str) -> str:
        new = fresh_name(name, next(self.ordinal))
        self.scopes[-1][name] = new
        self.map.entries.append(RenameEntry(tuple(self.path), name, new))
        return new

    def resolve(self, name: str) -> str:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return name          # a global or a function

    def expr(self, e) -> None:
        if e is None:
            return
        if isinstance(e, A.InitList):
            for it in e.items:
                self.expr(it)
            return
        for node in e.walk():
            if isinstance(node, A.Ident):
                node.name = self.resolve(node.name)

    def stmt(self, s: A.Stmt) -> None:
        if isinstance(s, A.Block):
            self.push()
            for it in s.items:
                self.stmt(it)
            self.pop()
        elif isinstance(s, A.Decl):
            # the initializer sees the outer binding only after the declarator,
            # which is the new one: `int x = x;` refers to itself in C
            s.name = self.declare(s.name)
            self.expr(s.init)
        elif isinstance(s, A.For):
            self.push()
            if s.init is not None:
                self.stmt(s.init)
            self.expr(s.cond)
            if s.incr is not None:
                self.stmt(s.incr)
            self.stmt(s.body)
            self.pop()
        elif isinstance(s, A.Switch):
            self.expr(s.expr)
            self.push()
            for c in s.cases:
                for it in c.body:
                    self.stmt(it)
            self.pop()
        else:
            for e in A.stmt_exprs(s):
                self.expr(e)
            for sub in A.sub_statements(s):
                self.stmt(sub)


def rename_variables(fn: A.FunctionDef) -> tuple[A.FunctionDef, RenameMap]:
    """Rename parameters and locals to ``<orig>__<n>``, n the preorder ordinal."""
    out = copy.deepcopy(fn)
    r = _Renamer()
    r.push()
    for p in out.params:
        p.name = r.declare(p.name)
    # the body block shares the parameter scope
    for it in out.body.items:
        r.stmt(it)
    r.pop()
    return out, r.map


def verify_rename_equivalence(original: A.FunctionDef, renamed: A.FunctionDef, tests,
                              tree: Optional[A.Ast] = None, timeout: float = 10.0) -> bool:
    """Build both versions with the system compiler and compare their outputs."""
    from .frontend.printer import ast_to_c
    from .verify.driver import generate_driver
    from .verify.harness import reference_outputs
    tree = tree or A.Ast([original])
    a = tree.replace_function(original)
    b = tree.replace_function(renamed)
    if not any(f.name == original.name for f in tree.functions):
        a, b = A.Ast(tree.items + [original]), A.Ast(tree.items + [renamed])
    driver = generate_driver(a, original.name, tests)
    out_a = reference_outputs(ast_to_c(a), driver, len(tests), timeout)
    out_b = reference_outputs(ast_to_c(b), driver, len(tests), timeout)
    return out_a == out_b


# ---------------------------------------------------------------- decomposition

_SHORT = ("&&", "||")


def _has_effects(e) -> bool:
    for n in e.walk():
        if isinstance(n, A.Call):
            return True
        if isinstance(n, A.Unary) and n.op in ("pre++", "pre--", "post++", "post--"):
            return True
    return False


def _hoistable(e) -> bool:
    t = getattr(e, "ctype", None)
    if t is None:
        return False
    t = decay(t) if t.is_array else t
    if t.is_array or t.is_record or t.is_void or t.is_function:
        return False
    return not (isinstance(e, A.Ident) and e.ctype.is_array)


class _Decomposer:
    def __init__(self, limit: int, taken: set[str]):
        self.limit = limit
        self.counter = itertools.count(1)
        self.taken = taken

    def fresh(self) -> str:
        while True:
            name = f"t__x{next(self.counter)}"
            if name not in self.taken:
                self.taken.add(name)
                return name

    def temp(self, e: A.Expr, out: list) -> A.Ident:
        name = self.fresh()
        t = e.ctype
        out.append(A.Decl(name, t, e))
        ident = A.Ident(name)
        ident.ctype = t
        return ident

    # -- expressions -------------------------------------------------------

    def children(self, e) -> list[tuple[str, object, bool]]:
        """(field, value, is_lvalue_position) in evaluation order."""
        if isinstance(e, A.Binary):
            return [("left", e.left, False), ("right", e.right, False)]
        if isinstance(e, A.Unary):
            lv = e.op in ("&", "pre++", "pre--", "post++", "post--")
            return [("operand", e.operand, lv)]
        if isinstance(e, A.Cast):
            return [("operand", e.operand, False)]
        if isinstance(e, A.Call):
            return [(i, a, False) for i, a in enumerate(e.args)]
        if isinstance(e, A.Index):
            base_lv = e.base.ctype is not None and e.base.ctype.is_array
            return [("base", e.base, base_lv), ("index", e.index, False)]
        if isinstance(e, A.Member):
            return [("base", e.base, not e.arrow)]
        return []

    def put(self, e, key, value) -> None:
        if isinstance(key, int):
            e.args[key] = value
        else:
            setattr(e, key, value)

    def reduce(self, e: A.Expr, budget: int, out: list, lvalue: bool = False) -> A.Expr:
        """Rewrite ``e`` so it has at most ``budget`` operator nodes,
        appending the statements that compute the temporaries to ``out``."""
        if operator_count(e) <= budget:
            return e
        if not lvalue and (isinstance(e, A.Ternary) or
                           (isinstance(e, A.Binary) and e.op in _SHORT)):
            return self.materialize(e, out)
        if not lvalue and budget == 0 and _hoistable(e):
            return self.temp(self.reduce(e, self.limit, out), out)
        kids = self.children(e)
        if _has_effects(e):
            return self.linearize(e, kids, out, lvalue)
        # pure: hoist the heaviest operands first until the node fits
        for key, child, lv in kids:
            self.put(e, key, self.reduce(child, self.limit, out, lv))
        own = operator_count(e) - sum(operator_count(c) for _, c, _ in self.children(e))
        while operator_count(e) > budget:
            cands = [(operator_count(c), i, key, c, lv)
                     for i, (key, c, lv) in enumerate(self.children(e))]
            cands = [c for c in cands if c[0] > 0]
            if not cands:
                break
            cnt, _, key, child, lv = max(cands, key=lambda c: (c[0], -c[1]))
            if lv or not _hoistable(child):
                new = self.reduce(child, 0, out, lv)
            else:
                new = self.temp(child, out)
            self.put(e, key, new)
            if operator_count(new) >= cnt:
                break
        if operator_count(e) > budget and not lvalue and _hoistable(e) and own <= self.limit:
            return self.temp(e, out)
        return e

    def linearize(self, e, kids, out: list, lvalue: bool) -> A.Expr:
        # side effects present: every operand is computed into a temporary in
        # evaluation order; plain reads preceding an effect are snapshotted
        for i, (key, child, lv) in enumerate(kids):
            later_effects = any(_has_effects(c) for _, c, _ in kids[i + 1:])
            if lv:
                self.put(e, key, self.reduce(child, 0, out, True))
                continue
            new = self.reduce(child, self.limit, out)
            if _hoistable(new) and (operator_count(new) > 0 or
                                    (later_effects and not isinstance(new, (A.IntLit, A.FloatLit)))):
                new = self.temp(new, out)
            self.put(e, key, new)
        return e

    def materialize(self, e: A.Expr, out: list) -> A.Ident:
        """``c ? a : b`` / ``a && b`` / ``a || b`` as if-statements into a temporary."""
        name = self.fresh()
        t = e.ctype
        ident = A.Ident(name)
        ident.ctype = t

        def assign(value: A.Expr) -> list:
            body: list = []
            v = self.reduce(value, self.limit, body)
            return body + [A.Assign(A.Ident(name), v)]

        def one(value: int) -> A.IntLit:
            lit = A.IntLit(value)
            lit.ctype = INT
            return lit

        if isinstance(e, A.Ternary):
            out.append(A.Decl(name, t, None))
            cond = self.reduce(e.cond, self.limit, out)
            out.append(A.If(cond, A.Block(assign(e.then)), A.Block(assign(e.other))))
            return ident
        out.append(A.Decl(name, t, one(0)))
        left = self.reduce(e.left, self.limit, out)
        inner: list = []
        right = self.reduce(e.right, self.limit, inner)
        set_one = A.Block([A.Assign(A.Ident(name), one(1))])
        if e.op == "&&":
            inner.append(A.If(right, set_one))
            out.append(A.If(left, A.Block(inner)))
        else:
            inner.append(A.If(right, set_one))
            out.append(A.If(left, A.Block([A.Assign(A.Ident(name), one(1))]), A.Block(inner)))
        return ident

    # -- statements --------------------------------------------------------

    def stmts(self, items: list[A.Stmt]) -> list[A.Stmt]:
        out: list[A.Stmt] = []
        for s in items:
            labels = s.labels
            if labels:
                # a jump to the label must also run the hoisted temporaries
                s = copy.copy(s)
                s.labels = ()
            res = self.stmt(s)
            if labels:
                res[0] = copy.copy(res[0])
                res[0].labels = labels
            out.extend(res)
        return out

    def as_stmt(self, items: list[A.Stmt]) -> A.Stmt:
        return items[0] if len(items) == 1 else A.Block(items)

    def body(self, s: A.Stmt) -> A.Stmt:
        if isinstance(s, A.Block):
            return A.Block(self.stmts(s.items), s.labels)
        return self.as_stmt(self.stmts([s]))

    def simple(self, s: A.Stmt, out: list) -> A.Stmt:
        from .frontend.features import stmt_complexity
        if stmt_complexity(s) <= self.limit:
            return s
        if isinstance(s, A.Assign):
            value_effects = _has_effects(s.value)
            tgt = s.target
            if value_effects:
                # keep the address computation ahead of the value's side effects
                tgt = self.reduce(tgt, 0, out, lvalue=True)
                tgt = self.snapshot_indices(tgt, out)
            else:
                tgt = self.reduce(tgt, self.limit, out, lvalue=True)
            budget = max(self.limit - operator_count(tgt) - (s.op != "="), 0)
            value = self.reduce(s.value, budget, out)
            return A.Assign(tgt, value, s.op, s.labels)
        if isinstance(s, A.ExprStmt):
            return A.ExprStmt(self.reduce(s.expr, self.limit, out), s.labels)
        if isinstance(s, A.Decl):
            return A.Decl(s.name, s.ctype, self.init(s.init, out), s.labels)
        return s

    def snapshot_indices(self, target: A.Expr, out: list) -> A.Expr:
        if isinstance(target, A.Index):
            target.base = self.snapshot_indices(target.base, out) if target.base.ctype.is_array \
                else self.snap(target.base, out)
            target.index = self.snap(target.index, out)
        elif isinstance(target, A.Member):
            target.base = self.snap(target.base, out) if target.arrow \
                else self.snapshot_indices(target.base, out)
        elif isinstance(target, A.Unary) and target.op == "*":
            target.operand = self.snap(target.operand, out)
        return target

    def snap(self, e: A.Expr, out: list) -> A.Expr:
        if isinstance(e, (A.IntLit, A.FloatLit)) or not _hoistable(e):
            return e
        return self.temp(e, out)

    def init(self, init, out: list):
        if init is None:
            return None
        if isinstance(init, A.InitList):
            return A.InitList([self.init(i, out) for i in init.items])
        return self.reduce(init, self.limit, out)

    def cond_break(self, cond: A.Expr, pre: list) -> list:
        # `if (!(cond)) break;` with cond already reduced into `pre`
        neg = A.Unary("!", cond)
        neg.ctype = INT
        return pre + [A.If(neg, A.Break())]

    def stmt(self, s: A.Stmt) -> list[A.Stmt]:
        out: list[A.Stmt] = []
        if isinstance(s, (A.Assign, A.ExprStmt, A.Decl)):
            out.append(self.simple(s, out))
            return out
        if isinstance(s, A.Return):
            if s.value is not None and operator_count(s.value) > self.limit:
                v = self.reduce(s.value, self.limit, out)
                out.append(A.Return(v, s.labels))
                return out
            return [s]
        if isinstance(s, A.Block):
            return [A.Block(self.stmts(s.items), s.labels)]
        if isinstance(s, A.If):
            cond = self.reduce(s.cond, self.limit, out)
            other = self.body(s.other) if s.other is not None else None
            out.append(A.If(cond, self.body(s.then), other, s.labels))
            return out
        if isinstance(s, A.Switch):
            expr = self.reduce(s.expr, self.limit, out)
            cases = [A.Case(c.value, self.stmts(c.body)) for c in s.cases]
            out.append(A.Switch(expr, cases, s.labels))
            return out
        if isinstance(s, A.While):
            body = self.body(s.body)
            if operator_count(s.cond) <= self.limit:
                return [A.While(s.cond, body, s.labels)]
            pre: list = []
            cond = self.reduce(s.cond, self.limit, pre)
            one = A.IntLit(1)
            one.ctype = INT
            items = self.cond_break(cond, pre) + _items(body)
            return [A.While(one, A.Block(items), s.labels)]
        if isinstance(s, A.For):
            init: list = []
            if s.init is not None:
                init = self.stmt(s.init)
            body = self.body(s.body)
            incr = s.incr
            head_init = init[-1] if init else None
            out.extend(init[:-1])
            cond = s.cond
            complex_cond = cond is not None and operator_count(cond) > self.limit
            incr_parts = self.stmt(incr) if incr is not None else []
            complex_incr = len(incr_parts) > 1
            if complex_incr and A.binds(s.body, A.Continue):
                # a continue must still run the whole increment; leave it as is
                complex_incr = False
                incr_parts = [incr]
            body_items = _items(body)
            if complex_cond:
                pre: list = []
                c = self.reduce(cond, self.limit, pre)
                body_items = self.cond_break(c, pre) + body_items
                cond = None
            if complex_incr:
                body_items = body_items + incr_parts
                incr = None
            else:
                incr = incr_parts[0] if incr_parts else None
            out.append(A.For(head_init, cond, incr, A.Block(body_items), s.labels))
            return out
        if isinstance(s, A.DoWhile):
            body = self.body(s.body)
            if operator_count(s.cond) <= self.limit or A.binds(s.body, A.Continue):
                # with a continue in the body the condition must stay in place
                return [A.DoWhile(body, s.cond, s.labels)]
            pre: list = []
            cond = self.reduce(s.cond, self.limit, pre)
            one = A.IntLit(1)
            one.ctype = INT
            items = _items(body) + self.cond_break(cond, pre)
            return [A.While(one, A.Block(items), s.labels)]
        return [s]


def _items(s: A.Stmt) -> list[A.Stmt]:
    return list(s.items) if isinstance(s, A.Block) and not s.labels else [s]


def _local_names(fn: A.FunctionDef) -> set[str]:
    names = {p.name for p in fn.params}
    names |= {s.name for s in A.iter_stmts(fn.body) if isinstance(s, A.Decl)}
    for n in fn.body.walk():
        if isinstance(n, A.Ident):
            names.add(n.name)
    return names


def decompose_complex_expressions(fn: A.FunctionDef, limit: int,
                                  env: Optional[ProgramEnv] = None) -> A.FunctionDef:
    """Split expressions with more than ``limit`` operators into temporaries.

    ``fn`` must be annotated (and should be renamed).  The result is
    re-annotated against ``env`` (default: an environment holding only
    ``fn``).
    """
    if limit < 1:
        raise ValueError("limit must be at least 1")
    work = copy.deepcopy(fn)
    d = _Decomposer(limit, _local_names(work))
    body = A.Block(d.stmts(work.body.items), work.body.labels)
    out = A.FunctionDef(work.name, work.ret, work.params, body)
    out.span = fn.span
    if env is None:
        env = ProgramEnv({}, {fn.name: fn})
    check_function(out, env)
    return out
