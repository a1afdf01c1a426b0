"""A checking interpreter for the accepted C subset.

Memory is a flat byte array holding every global and every live local
object; pointers are plain integer addresses.  Behaviour that C leaves
undefined (signed overflow, division by zero, out-of-range shifts, accesses
outside an object, unrepresentable float-to-int conversions) raises
``UndefinedBehavior`` unless ``wrap=True`` asks for -fwrapv semantics on
signed overflow.  Execution is bounded by a step budget.
"""
from __future__ import annotations

import bisect
import re
import math
import struct
from dataclasses import dataclass
from typing import Optional

from .errors import PartccError, UnsupportedFeature
from .frontend import ast as A
from .frontend.ctype import INT, LONG, ULONG, CType, common_type, decay, promote
from .frontend.parser import const_eval
from .frontend.sema import const_float
from .layout import compute_layout

DEFAULT_STEPS = 1_000_000
_BASE = 0x1000


class UndefinedBehavior(PartccError):
    stage = "interp"


class StepLimitExceeded(PartccError):
    stage = "interp"


@dataclass
class RunResult:
    ret: Optional[str]
    state: str
    steps: int

    @property
    def stdout(self) -> str:
        head = f"ret={self.ret}\n" if self.ret is not None else ""
        return head + self.state


def format_value(t: CType, v) -> str:
    if t.is_floating:
        return "%.17g" % v
    return str(int(v))


class _Flow:
    __slots__ = ("kind", "value")

    def __init__(self, kind: str, value=None):
        self.kind = kind
        self.value = value


_BREAK = _Flow("break")
_CONTINUE = _Flow("continue")


class Interpreter:
    def __init__(self, tree: A.Ast, max_steps: int = DEFAULT_STEPS, wrap: bool = False):
        self.tree = tree
        self.max_steps = max_steps
        self.wrap = wrap
        self.steps = 0
        self.mem = bytearray()
        # one flag per byte of mem: written since allocation (statics start written)
        self.written = bytearray()
        self.starts: list[int] = []
        self.ends: list[int] = []
        self.functions = {f.name: f for f in tree.functions}
        self.globals: dict[str, tuple[int, CType]] = {}
        for g in tree.globals:
            if g.name in self.globals or g.extern:
                continue
            addr = self.alloc(g.ctype, written=True)
            self.globals[g.name] = (addr, g.ctype)
            if g.init is not None:
                self.init_static(addr, g.ctype, g.init)
        self.global_mark = len(self.starts)
        self.scopes: list[dict[str, tuple[int, CType]]] = []

    # -------------------------------------------------------------- memory

    def alloc(self, t: CType, written: bool = False) -> int:
        lay = compute_layout(t)
        top = len(self.mem)
        pad = (-(top + _BASE)) % max(lay.align, 1)
        self.mem.extend(b"\0" * (pad + max(lay.size, 1)))
        self.written.extend((b"\1" if written else b"\0") * (pad + max(lay.size, 1)))
        addr = top + pad + _BASE
        self.starts.append(addr)
        self.ends.append(addr + lay.size)
        return addr

    def mark(self) -> tuple[int, int]:
        return len(self.starts), len(self.mem)

    def release(self, m: tuple[int, int]) -> None:
        del self.starts[m[0]:]
        del self.ends[m[0]:]
        del self.mem[m[1]:]
        del self.written[m[1]:]

    def check(self, addr: int, size: int) -> int:
        i = bisect.bisect_right(self.starts, addr) - 1
        if i < 0 or addr + size > self.ends[i]:
            raise UndefinedBehavior(f"access of {size} bytes at {addr:#x} outside any object")
        return addr - _BASE

    def readable(self, addr: int, size: int) -> int:
        off = self.check(addr, size)
        if 0 in self.written[off:off + size]:
            raise UndefinedBehavior(f"read of uninitialized memory at {addr:#x}")
        return off

    def load(self, addr: int, t: CType):
        if t.is_floating:
            off = self.readable(addr, t.size)
            return struct.unpack_from("<f" if t.size == 4 else "<d", self.mem, off)[0]
        size = 8 if t.is_pointer else t.size
        off = self.readable(addr, size)
        signed = t.is_integer and t.signed
        return int.from_bytes(self.mem[off:off + size], "little", signed=signed)

    def store(self, addr: int, t: CType, v) -> None:
        if t.is_floating:
            off = self.check(addr, t.size)
            struct.pack_into("<f" if t.size == 4 else "<d", self.mem, off, v)
            self.written[off:off + t.size] = b"\1" * t.size
            return
        size = 8 if t.is_pointer else t.size
        off = self.check(addr, size)
        self.mem[off:off + size] = (int(v) & ((1 << (8 * size)) - 1)).to_bytes(size, "little")
        self.written[off:off + size] = b"\1" * size

    def init_static(self, addr: int, t: CType, init) -> None:
        if isinstance(init, A.InitList) and not (t.is_array or t.is_record):
            init = init.items[0] if init.items else None
        if init is None:
            return
        if t.is_array:
            esz = compute_layout(t.elem).size
            for i, it in enumerate(init.items):
                self.init_static(addr + i * esz, t.elem, it)
        elif t.is_record:
            lay = compute_layout(t)
            for (mn, mt), it in zip(t.members, init.items):
                self.init_static(addr + lay.member(mn).offset, mt, it)
        elif t.is_floating:
            self.store(addr, t, self.round(t, const_float(init)))
        else:
            v = const_eval(init)
            if v is None:
                v = int(const_float(init))
            self.store(addr, t, t.wrap(v) if t.is_integer else v)

    # -------------------------------------------------------------- values

    @staticmethod
    def round(t: CType, v: float) -> float:
        if t.size == 4:
            try:
                return struct.unpack("<f", struct.pack("<f", v))[0]
            except OverflowError:
                return math.copysign(math.inf, v)
        return float(v)

    def convert(self, v, frm: CType, to: CType):
        frm = decay(frm)
        if to.is_void:
            return None
        if to.is_floating:
            return self.round(to, float(v))
        if frm.is_floating:
            if math.isnan(v) or math.isinf(v):
                raise UndefinedBehavior("conversion of a non-finite value to an integer")
            iv = math.trunc(v)
            lo, hi = (to.min, to.max) if to.is_integer else (0, (1 << 64) - 1)
            if not lo <= iv <= hi:
                raise UndefinedBehavior(f"float {v!r} out of range for {to}")
            return iv
        if to.is_integer:
            return to.wrap(int(v))
        return int(v) & ((1 << 64) - 1)     # to a pointer

    def arith(self, t: CType, v: int) -> int:
        if t.is_integer and t.signed and not (t.min <= v <= t.max):
            if not self.wrap:
                raise UndefinedBehavior(f"signed overflow in {t}")
        return t.wrap(v)

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.max_steps:
            raise StepLimitExceeded(f"more than {self.max_steps} steps")

    # -------------------------------------------------------------- lookup

    def lookup(self, name: str) -> tuple[int, CType]:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        if name in self.globals:
            return self.globals[name]
        raise UndefinedBehavior(f"unknown variable {name!r}")

    def sizeof(self, t: CType) -> int:
        return compute_layout(t).size

    # -------------------------------------------------------------- lvalues

    def addr(self, e) -> int:
        if isinstance(e, A.Ident):
            return self.lookup(e.name)[0]
        if isinstance(e, A.Index):
            base = self.eval(e.base)
            idx = self.eval(e.index)
            bt = decay(e.base.ctype)
            return self.ptr_add(base, idx, bt.target)
        if isinstance(e, A.Member):
            if e.arrow:
                base = self.eval(e.base)
                rec = decay(e.base.ctype).target
            else:
                base = self.addr(e.base)
                rec = e.base.ctype
            return base + compute_layout(rec).member(e.name).offset
        if isinstance(e, A.Unary) and e.op == "*":
            p = self.eval(e.operand)
            if p == 0:
                raise UndefinedBehavior("null pointer dereference")
            return p
        raise UndefinedBehavior("address of a non-lvalue")

    def ptr_add(self, p: int, n: int, target: CType) -> int:
        return (p + n * self.sizeof(target)) & ((1 << 64) - 1)

    # -------------------------------------------------------------- expressions

    def eval(self, e):
        t = e.ctype
        if isinstance(e, A.IntLit):
            return t.wrap(e.value)
        if isinstance(e, A.FloatLit):
            return self.round(t, e.value)
        if isinstance(e, (A.Ident, A.Index, A.Member)) or (isinstance(e, A.Unary) and e.op == "*"):
            a = self.addr(e)
            if t.is_array or t.is_record:
                return a
            return self.load(a, t)
        if isinstance(e, A.Unary):
            return self.unary(e)
        if isinstance(e, A.Binary):
            return self.binary(e)
        if isinstance(e, A.Ternary):
            c = self.truth(self.eval(e.cond))
            arm = e.then if c else e.other
            return self.convert(self.eval(arm), arm.ctype, t)
        if isinstance(e, A.Cast):
            return self.convert(self.eval(e.operand), e.operand.ctype, e.to)
        if isinstance(e, A.Call):
            fn = self.functions.get(e.name)
            if fn is None:
                raise UnsupportedFeature(e.span, f"call to undefined function {e.name}")
            args = [self.convert(self.eval(a), a.ctype, p.ctype) for a, p in zip(e.args, fn.params)]
            return self.call(fn, args)
        if isinstance(e, A.SizeofType):
            return self.sizeof(e.of)
        if isinstance(e, A.SizeofExpr):
            return self.sizeof(e.operand.ctype)
        raise UnsupportedFeature(getattr(e, "span", None), type(e).__name__)

    @staticmethod
    def truth(v) -> bool:
        return v != 0

    def unary(self, e: A.Unary):
        op = e.op
        if op == "&":
            return self.addr(e.operand)
        if op in ("pre++", "pre--", "post++", "post--"):
            a = self.addr(e.operand)
            t = e.operand.ctype
            old = self.load(a, t)
            delta = 1 if "++" in op else -1
            if t.is_pointer:
                new = self.ptr_add(old, delta, t.target)
            elif t.is_floating:
                new = self.round(t, old + delta)
            else:
                pt = promote(t)
                new = self.convert(self.arith(pt, old + delta), pt, t)
            self.store(a, t, new)
            return old if op.startswith("post") else new
        v = self.eval(e.operand)
        ot = decay(e.operand.ctype)
        if op == "!":
            return int(not self.truth(v))
        t = e.ctype
        v = self.convert(v, ot, t)
        if op == "+":
            return v
        if op == "-":
            if t.is_floating:
                return -v
            return self.arith(t, -v)
        if op == "~":
            return t.wrap(~v)
        raise UnsupportedFeature(e.span, op)

    def binary(self, e: A.Binary):
        op = e.op
        if op == "&&":
            return int(self.truth(self.eval(e.left)) and self.truth(self.eval(e.right)))
        if op == "||":
            return int(self.truth(self.eval(e.left)) or self.truth(self.eval(e.right)))
        lt, rt = decay(e.left.ctype), decay(e.right.ctype)
        a = self.eval(e.left)
        b = self.eval(e.right)
        if op in ("+", "-") and (lt.is_pointer or rt.is_pointer):
            if lt.is_pointer and rt.is_pointer:
                return (a - b) // self.sizeof(lt.target) if a >= b else \
                    -((b - a) // self.sizeof(lt.target))
            if lt.is_pointer:
                return self.ptr_add(a, b if op == "+" else -b, lt.target)
            return self.ptr_add(b, a, rt.target)
        return self.apply(op, a, lt, b, rt, e.optype)

    def apply(self, op: str, a, lt: CType, b, rt: CType, opt: CType):
        if op in ("<<", ">>"):
            pt, rpt = promote(lt), promote(rt)
            a = self.convert(a, lt, pt)
            b = self.convert(b, rt, rpt)
            if b < 0 or b >= pt.bits:
                raise UndefinedBehavior(f"shift by {b} in {pt}")
            if op == ">>":
                return pt.wrap(a >> b)
            if pt.signed:
                if a < 0 and not self.wrap:
                    raise UndefinedBehavior("left shift of a negative value")
                return self.arith(pt, a << b)
            return pt.wrap(a << b)
        if opt.is_pointer:
            a, b = int(a), int(b)
        else:
            a = self.convert(a, lt, opt)
            b = self.convert(b, rt, opt)
        if op in ("==", "!=", "<", "<=", ">", ">="):
            return int({"==": a == b, "!=": a != b, "<": a < b, "<=": a <= b,
                        ">": a > b, ">=": a >= b}[op])
        if opt.is_floating:
            if op == "+":
                r = a + b
            elif op == "-":
                r = a - b
            elif op == "*":
                r = a * b
            elif op == "/":
                if b == 0:
                    if a == 0 or math.isnan(a):
                        r = math.nan
                    else:
                        r = math.copysign(math.inf, a) * math.copysign(1.0, b)
                else:
                    r = a / b
            else:
                raise UnsupportedFeature(None, f"{op} on floating operands")
            return self.round(opt, r)
        if op in ("/", "%"):
            if b == 0:
                raise UndefinedBehavior("division by zero")
            q = abs(a) // abs(b)
            if (a < 0) != (b < 0):
                q = -q
            if op == "/":
                return self.arith(opt, q)
            self.arith(opt, q)      # INT_MIN % -1 is undefined as well
            return opt.wrap(a - b * q)
        r = {"+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b,
             "&": lambda: a & b, "|": lambda: a | b, "^": lambda: a ^ b}[op]()
        return self.arith(opt, r)

    # -------------------------------------------------------------- statements

    def call(self, fn: A.FunctionDef, args: list):
        saved, saved_ret = self.scopes, self.current_ret
        m = self.mark()
        self.scopes = [{}]
        self.current_ret = fn.ret
        try:
            for p, v in zip(fn.params, args):
                a = self.alloc(p.ctype)
                self.store(a, p.ctype, v)
                self.scopes[0][p.name] = (a, p.ctype)
            flow = self.block(fn.body.items)
            if isinstance(flow, _Flow) and flow.kind == "return":
                return flow.value
            if not fn.ret.is_void and fn.name != "main":
                raise UndefinedBehavior(f"{fn.name} ends without returning a value")
            return 0 if fn.name == "main" else None
        finally:
            self.scopes, self.current_ret = saved, saved_ret
            self.release(m)

    def block(self, items: list[A.Stmt]):
        m = self.mark()
        self.scopes.append({})
        try:
            for s in items:
                flow = self.stmt(s)
                if flow is not None:
                    return flow
            return None
        finally:
            self.scopes.pop()
            self.release(m)

    def declare(self, s: A.Decl) -> None:
        a = self.alloc(s.ctype)
        self.scopes[-1][s.name] = (a, s.ctype)
        if s.init is not None:
            self.init_local(a, s.ctype, s.init)

    def init_local(self, addr: int, t: CType, init) -> None:
        if isinstance(init, A.InitList) and not (t.is_array or t.is_record):
            init = init.items[0]
        if isinstance(init, A.InitList):
            # members without an initializer are zero, so the whole object counts as written
            size = self.sizeof(t)
            off = self.check(addr, size)
            self.written[off:off + size] = b"\1" * size
            if t.is_array:
                esz = self.sizeof(t.elem)
                for i, it in enumerate(init.items):
                    self.init_local(addr + i * esz, t.elem, it)
            else:
                lay = compute_layout(t)
                for (mn, mt), it in zip(t.members, init.items):
                    self.init_local(addr + lay.member(mn).offset, mt, it)
            return
        self.store(addr, t, self.convert(self.eval(init), init.ctype, t))

    def assign(self, s: A.Assign) -> None:
        t = s.target.ctype
        if s.op == "=":
            if isinstance(s.target, A.Ident):
                v = self.eval(s.value)
                a = self.addr(s.target)
            else:
                a = self.addr(s.target)
                v = self.eval(s.value)
            self.store(a, t, self.convert(v, s.value.ctype, t))
            return
        a = self.addr(s.target)
        v = self.eval(s.value)
        old = self.load(a, t)
        bop = s.op[:-1]
        vt = decay(s.value.ctype)
        if t.is_pointer:
            new = self.ptr_add(old, v if bop == "+" else -v, t.target)
        elif bop in ("<<", ">>"):
            new = self.convert(self.apply(bop, old, t, v, vt, promote(t)), promote(t), t)
        else:
            opt = common_type(t, vt)
            new = self.convert(self.apply(bop, old, t, v, vt, opt), opt, t)
        self.store(a, t, new)

    def stmt(self, s: A.Stmt):
        self.tick()
        if isinstance(s, A.Goto):
            raise UnsupportedFeature(s.span, "goto in the interpreter")
        if isinstance(s, A.Assign):
            self.assign(s)
        elif isinstance(s, A.ExprStmt):
            self.eval(s.expr)
        elif isinstance(s, A.Decl):
            self.declare(s)
        elif isinstance(s, A.Blank):
            pass
        elif isinstance(s, A.Block):
            return self.block(s.items)
        elif isinstance(s, A.Return):
            v = None
            if s.value is not None:
                fn_ret = self.current_ret
                v = self.convert(self.eval(s.value), s.value.ctype, fn_ret)
            return _Flow("return", v)
        elif isinstance(s, A.Break):
            return _BREAK
        elif isinstance(s, A.Continue):
            return _CONTINUE
        elif isinstance(s, A.If):
            if self.truth(self.eval(s.cond)):
                return self.sub(s.then)
            if s.other is not None:
                return self.sub(s.other)
        elif isinstance(s, A.While):
            while True:
                self.tick()
                if not self.truth(self.eval(s.cond)):
                    break
                flow = self.sub(s.body)
                if flow is _BREAK:
                    break
                if flow is not None and flow is not _CONTINUE:
                    return flow
        elif isinstance(s, A.DoWhile):
            while True:
                self.tick()
                flow = self.sub(s.body)
                if flow is _BREAK:
                    break
                if flow is not None and flow is not _CONTINUE:
                    return flow
                if not self.truth(self.eval(s.cond)):
                    break
        elif isinstance(s, A.For):
            m = self.mark()
            self.scopes.append({})
            try:
                if s.init is not None:
                    self.stmt(s.init)
                while True:
                    self.tick()
                    if s.cond is not None and not self.truth(self.eval(s.cond)):
                        break
                    flow = self.sub(s.body)
                    if flow is _BREAK:
                        break
                    if flow is not None and flow is not _CONTINUE:
                        return flow
                    if s.incr is not None:
                        self.stmt(s.incr)
            finally:
                self.scopes.pop()
                self.release(m)
        elif isinstance(s, A.Switch):
            v = self.convert(self.eval(s.expr), s.expr.ctype, promote(s.expr.ctype))
            start = None
            for i, c in enumerate(s.cases):
                if c.value is not None and promote(s.expr.ctype).wrap(c.value) == v:
                    start = i
                    break
            if start is None:
                start = next((i for i, c in enumerate(s.cases) if c.value is None), None)
            if start is None:
                return None
            items = [st for c in s.cases[start:] for st in c.body]
            # declarations in skipped cases still have scope in C; give them storage
            m = self.mark()
            self.scopes.append({})
            try:
                for st in (st for c in s.cases[:start] for st in c.body):
                    if isinstance(st, A.Decl):
                        self.scopes[-1][st.name] = (self.alloc(st.ctype), st.ctype)
                for st in items:
                    flow = self.stmt(st)
                    if flow is _BREAK:
                        return None
                    if flow is not None:
                        return flow
            finally:
                self.scopes.pop()
                self.release(m)
        else:
            raise UnsupportedFeature(s.span, type(s).__name__)
        return None

    def sub(self, s: A.Stmt):
        if isinstance(s, A.Block):
            return self.block(s.items)
        return self.stmt(s)

    # -------------------------------------------------------------- entry

    current_ret: CType = INT

    def run(self, fn_name: str, args: list, setup: Optional[dict] = None) -> RunResult:
        from .verify.driver import observable_paths
        fn = self.functions[fn_name]
        for name, value in (setup or {}).items():
            addr, t = self.globals[name]
            if t.is_array:
                esz = self.sizeof(t.elem)
                for i, v in enumerate(value):
                    self.store(addr + i * esz, t.elem, self.convert(v, LONG if isinstance(v, int) else t.elem, t.elem))
            else:
                self.store(addr, t, self.convert(value, LONG if isinstance(value, int) else t, t))
        conv = []
        for p, v in zip(fn.params, args):
            if p.ctype.is_pointer:
                raise UnsupportedFeature(p.span, "pointer arguments in the interpreter")
            src = p.ctype if p.ctype.is_floating else (ULONG if isinstance(v, int) and v > LONG.max else LONG)
            conv.append(self.convert(v, src, p.ctype))
        ret = self.call(fn, conv)
        lines = []
        for t, expr, label in observable_paths(self.tree):
            lines.append(f"{label}={format_value(t, self.load(self._path_addr(expr), t))}\n")
        ret_text = None if fn.ret.is_void else format_value(fn.ret, ret)
        return RunResult(ret_text, "".join(lines), self.steps)

    def _path_addr(self, expr: str) -> int:
        # expr is a driver path such as g, g[3], s.m or s.a[1].b
        head = re.match(r"[A-Za-z_]\w*", expr).group()
        addr, t = self.globals[head]
        for m in re.finditer(r"\[(\d+)\]|\.(\w+)", expr[len(head):]):
            if m.group(1) is not None:
                addr += int(m.group(1)) * self.sizeof(t.elem)
                t = t.elem
            else:
                lay = compute_layout(t)
                addr += lay.member(m.group(2)).offset
                t = t.member(m.group(2))
        return addr


def run_function(tree: A.Ast, fn_name: str, args: list, setup: Optional[dict] = None,
                 max_steps: int = DEFAULT_STEPS, wrap: bool = False) -> RunResult:
    """Fresh program state, one call, the same observable dump as the test driver."""
    return Interpreter(tree, max_steps, wrap).run(fn_name, args, setup)
