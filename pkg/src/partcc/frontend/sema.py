"""Scope resolution and type annotation.

Fills ``ctype`` on every expression, ``optype`` on binary operators, ``decl``
on identifiers and ``ftype`` on calls.  Safe to rerun after a rewrite.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..errors import CheckError, UnsupportedFeature
from . import ast as A
from .ctype import (DOUBLE, FLOAT, INT, LONG, ULONG, VOID, CType, PointerType,
                    common_type, decay, int_literal_type, promote)


@dataclass
class ProgramEnv:
    globals: dict[str, A.GlobalDecl] = field(default_factory=dict)
    functions: dict[str, object] = field(default_factory=dict)  # FunctionDecl | FunctionDef

    @classmethod
    def of(cls, tree: A.Ast) -> "ProgramEnv":
        env = cls()
        for item in tree.items:
            if isinstance(item, A.GlobalDecl):
                prev = env.globals.get(item.name)
                if prev is not None and not (prev.extern or item.extern):
                    raise CheckError(f"global {item.name!r} defined twice")
                if prev is None or not item.extern:
                    env.globals[item.name] = item
            elif isinstance(item, (A.FunctionDecl, A.FunctionDef)):
                prev = env.functions.get(item.name)
                if prev is not None and prev.ftype != item.ftype:
                    raise CheckError(f"conflicting types for {item.name!r}")
                if isinstance(prev, A.FunctionDef) and isinstance(item, A.FunctionDef):
                    raise CheckError(f"function {item.name!r} defined twice")
                if prev is None or isinstance(item, A.FunctionDef):
                    env.functions[item.name] = item
        return env


def is_lvalue(e: A.Expr) -> bool:
    if isinstance(e, A.Ident):
        return not isinstance(e.decl, (A.FunctionDecl, A.FunctionDef))
    if isinstance(e, A.Index):
        return True
    if isinstance(e, A.Member):
        return e.arrow or is_lvalue(e.base)
    return isinstance(e, A.Unary) and e.op == "*"


def is_null_constant(e: A.Expr) -> bool:
    return isinstance(e, A.IntLit) and e.value == 0


class Checker:
    def __init__(self, env: ProgramEnv, fn: A.FunctionDef):
        self.env = env
        self.fn = fn
        self.scopes: list[dict[str, object]] = [{p.name: p for p in fn.params}]
        self.loops = 0
        self.breakable = 0

    def err(self, node, msg: str):
        where = f" at {node.span[0]}" if getattr(node, "span", None) else ""
        raise CheckError(f"{self.fn.name}{where}: {msg}")

    def lookup(self, name: str):
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        if name in self.env.globals:
            return self.env.globals[name]
        return None

    # ---------------------------------------------------------- statements

    def stmt(self, s: A.Stmt) -> None:
        if isinstance(s, A.Block):
            self.scopes.append({})
            for it in s.items:
                self.stmt(it)
            self.scopes.pop()
        elif isinstance(s, A.Decl):
            if s.name in self.scopes[-1]:
                self.err(s, f"redeclaration of {s.name!r}")
            if s.ctype.is_record and not s.ctype.complete:
                self.err(s, f"incomplete type for {s.name!r}")
            if s.ctype.is_array and s.ctype.count is None:
                self.err(s, "array without size")
            if s.init is not None:
                self.init(s.ctype, s.init, s)
            self.scopes[-1][s.name] = s
        elif isinstance(s, A.Assign):
            t = self.expr(s.target)
            v = self.expr(s.value)
            if not is_lvalue(s.target) or t.is_array:
                self.err(s, "assignment to a non-lvalue")
            if t.is_record:
                raise UnsupportedFeature(s.span, "struct assignment")
            if s.op == "=":
                self.assignable(t, s.value, s)
            else:
                self.compound(s.op[:-1], t, v, s)
        elif isinstance(s, A.ExprStmt):
            self.expr(s.expr)
        elif isinstance(s, A.If):
            self.cond(s.cond)
            self.stmt(s.then)
            if s.other is not None:
                self.stmt(s.other)
        elif isinstance(s, (A.While, A.DoWhile)):
            self.cond(s.cond)
            self.loop(s.body)
        elif isinstance(s, A.For):
            self.scopes.append({})
            if s.init is not None:
                self.stmt(s.init)
            if s.cond is not None:
                self.cond(s.cond)
            if s.incr is not None:
                self.stmt(s.incr)
            self.loop(s.body)
            self.scopes.pop()
        elif isinstance(s, A.Switch):
            t = self.expr(s.expr)
            if not t.is_integer:
                self.err(s, "switch on a non-integer")
            seen = set()
            for c in s.cases:
                if c.value in seen:
                    self.err(c, f"duplicate case {c.value}")
                seen.add(c.value)
            self.breakable += 1
            self.scopes.append({})
            for c in s.cases:
                for it in c.body:
                    self.stmt(it)
            self.scopes.pop()
            self.breakable -= 1
        elif isinstance(s, A.Break):
            if not self.breakable:
                self.err(s, "break outside loop or switch")
        elif isinstance(s, A.Continue):
            if not self.loops:
                self.err(s, "continue outside loop")
        elif isinstance(s, A.Return):
            ret = self.fn.ret
            if s.value is None:
                if not ret.is_void:
                    self.err(s, "return without value in non-void function")
            else:
                if ret.is_void:
                    self.err(s, "return with value in void function")
                self.expr(s.value)
                self.assignable(ret, s.value, s)
        elif isinstance(s, (A.Blank, A.Goto)):
            pass
        else:
            self.err(s, f"unknown statement {type(s).__name__}")

    def loop(self, body: A.Stmt) -> None:
        self.loops += 1
        self.breakable += 1
        self.stmt(body)
        self.loops -= 1
        self.breakable -= 1

    def cond(self, e: A.Expr) -> None:
        t = self.expr(e)
        if not decay(t).is_scalar:
            self.err(e, "condition is not scalar")

    def init(self, t: CType, init, node) -> None:
        if isinstance(init, A.InitList):
            if t.is_array:
                if len(init.items) > t.count:
                    self.err(node, "too many initializers")
                for it in init.items:
                    self.init(t.elem, it, node)
            elif t.is_record:
                members = t.members or []
                if t.is_union and len(init.items) > 1 or len(init.items) > len(members):
                    self.err(node, "too many initializers")
                for (_, mt), it in zip(members, init.items):
                    self.init(mt, it, node)
            else:
                if len(init.items) != 1 or isinstance(init.items[0], A.InitList):
                    self.err(node, "bad scalar initializer")
                self.init(t, init.items[0], node)
            return
        if t.is_array or t.is_record:
            raise UnsupportedFeature(node.span, "aggregate initialised from an expression")
        self.expr(init)
        self.assignable(t, init, node)

    def assignable(self, t: CType, value: A.Expr, node) -> None:
        v = decay(value.ctype)
        if t.is_arithmetic and v.is_arithmetic:
            return
        if t.is_pointer and (v.is_pointer or (v.is_integer and is_null_constant(value))):
            return
        if t.is_integer and v.is_pointer:
            return
        self.err(node, f"cannot convert {v} to {t}")

    def compound(self, op: str, t: CType, v: CType, node) -> None:
        v = decay(v)
        if t.is_pointer and op in ("+", "-") and v.is_integer:
            return
        if not (t.is_arithmetic and v.is_arithmetic):
            self.err(node, f"bad operands for {op}=")
        if op in ("%", "<<", ">>", "&", "|", "^") and not (t.is_integer and v.is_integer):
            self.err(node, f"{op}= needs integers")

    # ---------------------------------------------------------- expressions

    def expr(self, e: A.Expr) -> CType:
        t = self._expr(e)
        e.ctype = t
        return t

    def _expr(self, e: A.Expr) -> CType:
        if isinstance(e, A.IntLit):
            return int_literal_type(e.value, e.suffix, e.radix)
        if isinstance(e, A.FloatLit):
            return FLOAT if e.single else DOUBLE
        if isinstance(e, A.Ident):
            d = self.lookup(e.name)
            if d is None:
                if e.name in self.env.functions:
                    raise UnsupportedFeature(e.span, "function used as a value")
                self.err(e, f"undeclared identifier {e.name!r}")
            e.decl = d
            return d.ctype
        if isinstance(e, A.Unary):
            return self.unary(e)
        if isinstance(e, A.Binary):
            return self.binary(e)
        if isinstance(e, A.Ternary):
            self.cond(e.cond)
            a = decay(self.expr(e.then))
            b = decay(self.expr(e.other))
            if a.is_arithmetic and b.is_arithmetic:
                return common_type(a, b)
            if a.is_pointer and (b.is_pointer or is_null_constant(e.other)):
                return a
            if b.is_pointer and is_null_constant(e.then):
                return b
            if a.is_void and b.is_void:
                return VOID
            self.err(e, "incompatible ternary operands")
        if isinstance(e, A.Call):
            f = self.env.functions.get(e.name)
            if f is None:
                self.err(e, f"call to undeclared function {e.name!r}")
            if len(e.args) != len(f.params):
                self.err(e, f"{e.name} expects {len(f.params)} arguments")
            for a, p in zip(e.args, f.params):
                self.expr(a)
                if p.ctype.is_record:
                    raise UnsupportedFeature(e.span, "struct passed by value")
                self.assignable(p.ctype, a, e)
            if f.ret.is_record:
                raise UnsupportedFeature(e.span, "struct returned by value")
            e.ftype = f.ftype
            return f.ret
        if isinstance(e, A.Index):
            b = decay(self.expr(e.base))
            i = decay(self.expr(e.index))
            if not b.is_pointer or not i.is_integer:
                self.err(e, "subscript needs pointer[integer]")
            if b.target.is_void or (b.target.is_record and not b.target.complete):
                self.err(e, "subscript of incomplete type")
            return b.target
        if isinstance(e, A.Member):
            b = self.expr(e.base)
            if e.arrow:
                b = decay(b)
                if not b.is_pointer:
                    self.err(e, "-> on a non-pointer")
                b = b.target
            if not b.is_record or not b.complete:
                self.err(e, "member access on a non-struct")
            mt = b.member(e.name)
            if mt is None:
                self.err(e, f"no member {e.name!r}")
            return mt
        if isinstance(e, A.Cast):
            src = decay(self.expr(e.operand))
            to = e.to
            if to.is_void:
                return to
            if not to.is_scalar or not src.is_scalar:
                self.err(e, "cast between non-scalar types")
            if (to.is_pointer and src.is_floating) or (to.is_floating and src.is_pointer):
                self.err(e, "cast between pointer and floating type")
            return to
        if isinstance(e, A.SizeofType):
            if e.of.is_void or e.of.is_function:
                self.err(e, "sizeof of incomplete type")
            return ULONG
        if isinstance(e, A.SizeofExpr):
            # operand is not evaluated but still typed
            self.expr(e.operand)
            return ULONG
        self.err(e, f"unknown expression {type(e).__name__}")

    def unary(self, e: A.Unary) -> CType:
        t = self.expr(e.operand)
        op = e.op
        if op == "&":
            if not is_lvalue(e.operand):
                self.err(e, "address of a non-lvalue")
            return PointerType(t)
        t = decay(t)
        if op == "*":
            if not t.is_pointer or t.target.is_void:
                self.err(e, "dereference of a non-pointer")
            return t.target
        if op in ("-", "+"):
            if not t.is_arithmetic:
                self.err(e, f"bad operand for unary {op}")
            return promote(t)
        if op == "~":
            if not t.is_integer:
                self.err(e, "~ needs an integer")
            return promote(t)
        if op == "!":
            if not t.is_scalar:
                self.err(e, "! needs a scalar")
            return INT
        # ++ / --
        if not is_lvalue(e.operand) or not t.is_scalar or e.operand.ctype.is_array:
            self.err(e, f"{op} needs a scalar lvalue")
        if t.is_pointer and (t.target.is_void or t.target.is_function):
            self.err(e, "arithmetic on void pointer")
        return t

    def binary(self, e: A.Binary) -> CType:
        a = decay(self.expr(e.left))
        b = decay(self.expr(e.right))
        op = e.op
        if op in ("&&", "||"):
            if not (a.is_scalar and b.is_scalar):
                self.err(e, f"{op} needs scalars")
            e.optype = None
            return INT
        if op in ("+", "-") and (a.is_pointer or b.is_pointer):
            if op == "+" and a.is_pointer and b.is_integer:
                e.optype = a
                return a
            if op == "+" and a.is_integer and b.is_pointer:
                e.optype = b
                return b
            if op == "-" and a.is_pointer and b.is_integer:
                e.optype = a
                return a
            if op == "-" and a.is_pointer and b.is_pointer and a == b:
                e.optype = a
                return LONG
            self.err(e, f"bad pointer operands for {op}")
        if op in ("==", "!=", "<", ">", "<=", ">="):
            if a.is_arithmetic and b.is_arithmetic:
                e.optype = common_type(a, b)
            elif a.is_pointer and (b.is_pointer or is_null_constant(e.right)):
                e.optype = a
            elif b.is_pointer and is_null_constant(e.left):
                e.optype = b
            else:
                self.err(e, f"bad operands for {op}")
            return INT
        if op in ("<<", ">>"):
            if not (a.is_integer and b.is_integer):
                self.err(e, "shift needs integers")
            e.optype = promote(a)
            return e.optype
        if not (a.is_arithmetic and b.is_arithmetic):
            self.err(e, f"bad operands for {op}")
        if op in ("%", "&", "|", "^") and not (a.is_integer and b.is_integer):
            self.err(e, f"{op} needs integers")
        e.optype = common_type(a, b)
        return e.optype


def check_function(fn: A.FunctionDef, env: ProgramEnv) -> A.FunctionDef:
    names = set()
    for p in fn.params:
        if p.name in names:
            raise CheckError(f"{fn.name}: duplicate parameter {p.name!r}")
        names.add(p.name)
        if p.ctype.is_record:
            raise UnsupportedFeature(p.span, "struct passed by value")
    if fn.ret.is_record:
        raise UnsupportedFeature(fn.span, "struct returned by value")
    if len([p for p in fn.params if not p.ctype.is_floating]) > 6 or \
            len([p for p in fn.params if p.ctype.is_floating]) > 8:
        raise UnsupportedFeature(fn.span, "arguments passed on the stack")
    Checker(env, fn).stmt(fn.body)
    return fn


def check(tree: A.Ast) -> A.Ast:
    """Annotate every function of ``tree`` in place and return it."""
    env = ProgramEnv.of(tree)
    for g in tree.globals:
        if g.ctype.is_record and not g.ctype.complete and not g.extern:
            raise CheckError(f"global {g.name!r} has incomplete type")
        if g.init is not None:
            _check_const_init(g.ctype, g.init, g)
    for f in env.functions.values():
        if len([p for p in f.params if not p.ctype.is_floating]) > 6:
            raise UnsupportedFeature(f.span, "arguments passed on the stack")
    for fn in tree.functions:
        check_function(fn, env)
    return tree


def _check_const_init(t: CType, init, g: A.GlobalDecl) -> None:
    from .parser import const_eval
    if isinstance(init, A.InitList):
        if t.is_array:
            subs = [t.elem] * len(init.items)
            if len(init.items) > t.count:
                raise CheckError(f"too many initializers for {g.name!r}")
        elif t.is_record:
            subs = [mt for _, mt in t.members or []][:len(init.items)]
            if len(init.items) > len(t.members or []) or (t.is_union and len(init.items) > 1):
                raise CheckError(f"too many initializers for {g.name!r}")
        else:
            subs = [t]
            if len(init.items) != 1:
                raise CheckError(f"bad scalar initializer for {g.name!r}")
        for st, it in zip(subs, init.items):
            _check_const_init(st, it, g)
        return
    if t.is_integer or t.is_pointer:
        if const_eval(init) is None:
            raise UnsupportedFeature(g.span, "non-constant global initializer")
        if t.is_pointer and const_eval(init) != 0:
            raise UnsupportedFeature(g.span, "pointer global initialised to an address")
    elif t.is_floating:
        if const_float(init) is None:
            raise UnsupportedFeature(g.span, "non-constant global initializer")
    else:
        raise UnsupportedFeature(g.span, "aggregate initialised from an expression")


def const_float(e) -> Optional[float]:
    from .parser import const_eval
    if isinstance(e, A.FloatLit):
        return e.value
    if isinstance(e, A.Unary) and e.op in ("-", "+"):
        v = const_float(e.operand)
        return None if v is None else (-v if e.op == "-" else v)
    v = const_eval(e)
    return None if v is None else float(v)
