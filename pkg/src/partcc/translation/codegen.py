"""Reference translator: a small, unoptimised x86-64 code generator (AT&T).

Integers live in %rax, always normalised to 64 bits by sign or zero
extension according to their C type; floating values live in %xmm0.
Every variable is a memory operand: locals ``off(%rbp)``, globals
``name(%rip)``.  Temporaries go on the machine stack.
"""
from __future__ import annotations

import struct
from typing import Optional

from ..errors import ImmediateOverflow, UnsupportedFeature
from ..frontend import ast as A
from ..frontend.ctype import LONG, ULONG, CType, common_type, decay, promote
from ..layout import compute_layout
from ..mapping import FLOAT_ARG_REGS, INT_ARG_REGS, SymbolTable
from .fragment import AssemblyFragment

_SFX = {1: "b", 2: "w", 4: "l", 8: "q"}
_RAX = {1: "%al", 2: "%ax", 4: "%eax", 8: "%rax"}
_RCX = {1: "%cl", 2: "%cx", 4: "%ecx", 8: "%rcx"}
_REG64_TO = {
    "rdi": {1: "%dil", 2: "%di", 4: "%edi", 8: "%rdi"},
    "rsi": {1: "%sil", 2: "%si", 4: "%esi", 8: "%rsi"},
    "rdx": {1: "%dl", 2: "%dx", 4: "%edx", 8: "%rdx"},
    "rcx": {1: "%cl", 2: "%cx", 4: "%ecx", 8: "%rcx"},
    "r8": {1: "%r8b", 2: "%r8w", 4: "%r8d", 8: "%r8"},
    "r9": {1: "%r9b", 2: "%r9w", 4: "%r9d", 8: "%r9"},
}
_SET_SIGNED = {"==": "sete", "!=": "setne", "<": "setl", "<=": "setle", ">": "setg", ">=": "setge"}
_SET_UNSIGNED = {"==": "sete", "!=": "setne", "<": "setb", "<=": "setbe", ">": "seta", ">=": "setae"}

IMM_RANGES = {
    "b": (-(1 << 7), (1 << 8) - 1),
    "w": (-(1 << 15), (1 << 16) - 1),
    "l": (-(1 << 31), (1 << 32) - 1),
    "q": (-(1 << 31), (1 << 31) - 1),
}


def epilogue_label(fn_name: str) -> str:
    return f".L_{fn_name}__epilogue"


def user_label(fn_name: str, name: str) -> str:
    return f".L_{fn_name}__u_{name}"


def check_immediate(value: int, width: int) -> None:
    """Reject a constant that does not fit a ``width``-bit destination."""
    if not -(1 << (width - 1)) <= value <= (1 << width) - 1:
        raise ImmediateOverflow(value, width)


def _const_int(e: A.Expr) -> Optional[int]:
    # bare literal, possibly negated; casts are real conversions and excluded
    if isinstance(e, A.IntLit):
        return e.value
    if isinstance(e, A.Unary) and e.op in ("-", "+") and isinstance(e.operand, A.IntLit):
        return -e.operand.value if e.op == "-" else e.operand.value
    return None


def rodata_double(v: float) -> tuple[str, list[str]]:
    bits = struct.unpack("<Q", struct.pack("<d", v))[0]
    return f".LC_d_{bits:016x}", [".align 8", f".quad {bits:#x}"]


def rodata_float(v: float) -> tuple[str, list[str]]:
    bits = struct.unpack("<I", struct.pack("<f", v))[0]
    return f".LC_f_{bits:08x}", [".align 4", f".long {bits:#x}"]


def sizeof(t: CType) -> int:
    return compute_layout(t).size


class CodeGen:
    def __init__(self, table: SymbolTable, fn_name: str, ret: CType, label_prefix: str,
                 break_label: Optional[str] = None, continue_label: Optional[str] = None):
        self.table = table
        self.fn_name = fn_name
        self.ret = ret
        self.prefix = label_prefix
        self.lines: list[str] = []
        self.rodata: dict[str, list[str]] = {}
        self.depth = 0          # 8-byte temporaries currently pushed
        self.nlabel = 0
        self.breaks: list[str] = [break_label] if break_label else []
        self.conts: list[str] = [continue_label] if continue_label else []

    # ------------------------------------------------------------ emission

    def ins(self, op: str, *args: str) -> None:
        self.lines.append(f"\t{op}\t{', '.join(args)}" if args else f"\t{op}")

    def label(self, name: str) -> None:
        self.lines.append(f"{name}:")

    def new_label(self, kind: str) -> str:
        self.nlabel += 1
        return f"{self.prefix}{self.nlabel}_{kind}"

    def fragment(self) -> AssemblyFragment:
        return AssemblyFragment.from_text("\n".join(self.lines), "rax rcx rdx xmm0 xmm1 flags",
                                          self.rodata)

    # ------------------------------------------------------------ storage

    def operand(self, name: str, offset: int = 0) -> str:
        slot = self.table.slot(name)
        if slot is not None:
            return f"{slot.offset + offset}(%rbp)"
        g = self.table.global_entry(name)
        if g is not None:
            return f"{g.label}+{offset}(%rip)" if offset else f"{g.label}(%rip)"
        raise UnsupportedFeature(None, f"no storage for {name!r}")

    def push(self, t: CType) -> None:
        if t.is_floating:
            self.ins("subq", "$8", "%rsp")
            self.ins("movsd", "%xmm0", "(%rsp)")
        else:
            self.ins("pushq", "%rax")
        self.depth += 1

    def pop(self, t: CType, reg: str) -> None:
        if t.is_floating:
            self.ins("movsd", "(%rsp)", reg)
            self.ins("addq", "$8", "%rsp")
        else:
            self.ins("popq", reg)
        self.depth -= 1

    def load(self, mem: str, t: CType) -> None:
        if t.is_floating:
            self.ins("movss" if t.size == 4 else "movsd", mem, "%xmm0")
        elif t.is_pointer or t.size == 8:
            self.ins("movq", mem, "%rax")
        elif t.size == 4:
            if t.signed:
                self.ins("movslq", mem, "%rax")
            else:
                self.ins("movl", mem, "%eax")
        elif t.size == 2:
            self.ins("movswq" if t.signed else "movzwq", mem, "%rax")
        else:
            self.ins("movsbq" if t.signed else "movzbq", mem, "%rax")

    def store(self, mem: str, t: CType) -> None:
        if t.is_floating:
            self.ins("movss" if t.size == 4 else "movsd", "%xmm0", mem)
        else:
            size = 8 if t.is_pointer else t.size
            self.ins(f"mov{_SFX[size]}", _RAX[size], mem)

    def store_imm(self, mem: str, t: CType, value: int) -> None:
        size = 8 if t.is_pointer else t.size
        check_immediate(value, size * 8)
        lo, hi = IMM_RANGES[_SFX[size]]
        if lo <= value <= hi:
            self.ins(f"mov{_SFX[size]}", f"${value}", mem)
        else:
            self.ins("movabsq", f"${value}", "%rcx")
            self.ins("movq", "%rcx", mem)

    def load_imm(self, value: int) -> None:
        if -(1 << 31) <= value < (1 << 31):
            self.ins("movq", f"${value}", "%rax")
        elif 0 <= value < (1 << 32):
            self.ins("movl", f"${value}", "%eax")
        else:
            self.ins("movabsq", f"${value}", "%rax")

    def const_double(self, v: float, single: bool = False) -> str:
        name, lines = rodata_float(v) if single else rodata_double(v)
        self.rodata[name] = lines
        return f"{name}(%rip)"

    # ------------------------------------------------------------ conversions

    def normalize(self, t: CType) -> None:
        if t.is_pointer or not t.is_integer or t.size == 8:
            return
        if t.size == 4:
            if t.signed:
                self.ins("movslq", "%eax", "%rax")
            else:
                self.ins("movl", "%eax", "%eax")
        elif t.size == 2:
            self.ins("movswq" if t.signed else "movzwq", "%ax", "%rax")
        else:
            self.ins("movsbq" if t.signed else "movzbq", "%al", "%rax")

    def convert(self, frm: CType, to: CType) -> None:
        frm = decay(frm)
        if to.is_void or frm.is_void:
            return
        if frm.is_floating and to.is_floating:
            if frm.size != to.size:
                self.ins("cvtss2sd" if frm.size == 4 else "cvtsd2ss", "%xmm0", "%xmm0")
            return
        if frm.is_floating:
            if frm.size == 4:
                self.ins("cvtss2sd", "%xmm0", "%xmm0")
            if to == ULONG:
                big, done = self.new_label("big"), self.new_label("cvt")
                self.ins("movsd", self.const_double(2.0 ** 63), "%xmm1")
                self.ins("ucomisd", "%xmm1", "%xmm0")
                self.ins("jae", big)
                self.ins("cvttsd2siq", "%xmm0", "%rax")
                self.ins("jmp", done)
                self.label(big)
                self.ins("subsd", "%xmm1", "%xmm0")
                self.ins("cvttsd2siq", "%xmm0", "%rax")
                self.ins("btcq", "$63", "%rax")
                self.label(done)
            else:
                self.ins("cvttsd2siq", "%xmm0", "%rax")
                self.normalize(to)
            return
        if to.is_floating:
            cvt = "cvtsi2ssq" if to.size == 4 else "cvtsi2sdq"
            if frm == ULONG:
                neg, done = self.new_label("big"), self.new_label("cvt")
                self.ins("testq", "%rax", "%rax")
                self.ins("js", neg)
                self.ins(cvt, "%rax", "%xmm0")
                self.ins("jmp", done)
                self.label(neg)
                self.ins("movq", "%rax", "%rcx")
                self.ins("shrq", "%rcx")
                self.ins("andl", "$1", "%eax")
                self.ins("orq", "%rax", "%rcx")
                self.ins(cvt, "%rcx", "%xmm0")
                self.ins("addss" if to.size == 4 else "addsd", "%xmm0", "%xmm0")
                self.label(done)
            else:
                self.ins(cvt, "%rax", "%xmm0")
            return
        if to.is_integer:
            self.normalize(to)

    def truth(self, t: CType) -> None:
        """Turn the value of type ``t`` into 0/1 in %rax."""
        t = decay(t)
        if t.is_floating:
            self.ins("xorps", "%xmm1", "%xmm1")
            self.ins("ucomiss" if t.size == 4 else "ucomisd", "%xmm1", "%xmm0")
            self.ins("setne", "%al")
            self.ins("setp", "%cl")
            self.ins("orb", "%cl", "%al")
        else:
            self.ins("testq", "%rax", "%rax")
            self.ins("setne", "%al")
        self.ins("movzbl", "%al", "%eax")

    def branch_false(self, cond: A.Expr, target: str) -> None:
        self.expr(cond)
        if decay(cond.ctype).is_floating:
            self.truth(cond.ctype)
        self.ins("testq", "%rax", "%rax")
        self.ins("je", target)

    # ------------------------------------------------------------ lvalues

    def addr(self, e: A.Expr) -> None:
        if isinstance(e, A.Ident):
            self.ins("leaq", self.operand(e.name), "%rax")
        elif isinstance(e, A.Index):
            base = decay(e.base.ctype)
            self.expr(e.base)
            self.push(base)
            self.expr(e.index)
            self.scale(sizeof(base.target))
            self.pop(base, "%rcx")
            self.ins("addq", "%rcx", "%rax")
        elif isinstance(e, A.Member):
            if e.arrow:
                self.expr(e.base)
                rec = decay(e.base.ctype).target
            else:
                self.addr(e.base)
                rec = e.base.ctype
            off = compute_layout(rec).member(e.name).offset
            if off:
                self.ins("addq", f"${off}", "%rax")
        elif isinstance(e, A.Unary) and e.op == "*":
            self.expr(e.operand)
        else:
            raise UnsupportedFeature(e.span, "address of a non-lvalue")

    def scale(self, n: int) -> None:
        if n == 1:
            return
        if n & (n - 1) == 0:
            self.ins("salq", f"${n.bit_length() - 1}", "%rax")
        else:
            self.ins("imulq", f"${n}", "%rax", "%rax")

    def direct(self, e: A.Expr) -> Optional[str]:
        """Memory operand for a plain variable, else None."""
        if isinstance(e, A.Ident):
            return self.operand(e.name)
        return None

    # ------------------------------------------------------------ expressions

    def expr(self, e: A.Expr) -> None:
        t = e.ctype
        if isinstance(e, A.IntLit):
            self.load_imm(t.wrap(e.value) if t.is_integer else e.value)
        elif isinstance(e, A.FloatLit):
            self.ins("movss" if e.single else "movsd", self.const_double(e.value, e.single), "%xmm0")
        elif isinstance(e, A.Ident):
            if t.is_array or t.is_record:
                self.ins("leaq", self.operand(e.name), "%rax")
            else:
                self.load(self.operand(e.name), t)
        elif isinstance(e, (A.Index, A.Member)) or (isinstance(e, A.Unary) and e.op == "*"):
            self.addr(e)
            if not (t.is_array or t.is_record):
                self.load("(%rax)", t)
        elif isinstance(e, A.Unary):
            self.unary(e)
        elif isinstance(e, A.Binary):
            self.binary(e)
        elif isinstance(e, A.Ternary):
            other, end = self.new_label("else"), self.new_label("fi")
            self.branch_false(e.cond, other)
            self.expr(e.then)
            self.convert(e.then.ctype, t)
            self.ins("jmp", end)
            self.label(other)
            self.expr(e.other)
            self.convert(e.other.ctype, t)
            self.label(end)
        elif isinstance(e, A.Call):
            self.call(e)
        elif isinstance(e, A.Cast):
            self.expr(e.operand)
            self.convert(e.operand.ctype, e.to)
        elif isinstance(e, A.SizeofType):
            self.load_imm(sizeof(e.of))
        elif isinstance(e, A.SizeofExpr):
            self.load_imm(sizeof(e.operand.ctype))
        else:
            raise UnsupportedFeature(e.span, type(e).__name__)

    def unary(self, e: A.Unary) -> None:
        op = e.op
        t = e.ctype
        if op == "&":
            self.addr(e.operand)
            return
        if op in ("pre++", "pre--", "post++", "post--"):
            self.incdec(e)
            return
        self.expr(e.operand)
        ot = decay(e.operand.ctype)
        if op == "!":
            self.truth(ot)
            self.ins("xorl", "$1", "%eax")
            return
        self.convert(ot, t)
        if op == "-":
            if t.is_floating:
                if t.size == 4:
                    self.ins("movd", "%xmm0", "%eax")
                    self.ins("xorl", "$0x80000000", "%eax")
                    self.ins("movd", "%eax", "%xmm0")
                else:
                    self.ins("movq", "%xmm0", "%rax")
                    self.ins("btcq", "$63", "%rax")
                    self.ins("movq", "%rax", "%xmm0")
            else:
                self.ins("negq", "%rax")
                self.normalize(t)
        elif op == "~":
            self.ins("notq", "%rax")
            self.normalize(t)

    def incdec(self, e: A.Unary) -> None:
        t = decay(e.ctype)
        target = e.operand
        delta = 1 if "++" in e.op else -1
        mem = self.direct(target)
        if mem is None:
            self.addr(target)
            self.ins("movq", "%rax", "%rdx")
            mem = "(%rdx)"
        self.load(mem, t)
        if t.is_floating:
            self.ins("movaps", "%xmm0", "%xmm2")
            one = self.const_double(1.0, t.size == 4)
            self.ins(("addss" if t.size == 4 else "addsd") if delta > 0 else
                     ("subss" if t.size == 4 else "subsd"), one, "%xmm0")
            self.store(mem, t)
            if e.op.startswith("post"):
                self.ins("movaps", "%xmm2", "%xmm0")
            return
        step = sizeof(t.target) if t.is_pointer else 1
        self.ins("movq", "%rax", "%rcx")
        self.ins("addq" if delta > 0 else "subq", f"${step}", "%rax")
        self.normalize(t)
        self.store(mem, t)
        if e.op.startswith("post"):
            self.ins("movq", "%rcx", "%rax")

    def binary(self, e: A.Binary) -> None:
        op = e.op
        if op in ("&&", "||"):
            short, end = self.new_label("sc"), self.new_label("sce")
            for side in (e.left, e.right):
                self.expr(side)
                self.truth(side.ctype)
                self.ins("testq", "%rax", "%rax")
                self.ins("je" if op == "&&" else "jne", short)
            self.ins("movl", "$1" if op == "&&" else "$0", "%eax")
            self.ins("jmp", end)
            self.label(short)
            self.ins("movl", "$0" if op == "&&" else "$1", "%eax")
            self.label(end)
            return
        lt, rt = decay(e.left.ctype), decay(e.right.ctype)
        opt = e.optype
        if op in ("+", "-") and (lt.is_pointer or rt.is_pointer):
            self.pointer_arith(e, lt, rt)
            return
        ropt = promote(rt) if op in ("<<", ">>") else opt
        self.expr(e.left)
        self.convert(lt, opt)
        self.push(opt)
        self.expr(e.right)
        self.convert(rt, ropt)
        if opt.is_floating:
            self.ins("movaps", "%xmm0", "%xmm1")
            self.pop(opt, "%xmm0")
            self.float_op(op, opt)
            return
        self.ins("movq", "%rax", "%rcx")
        self.pop(opt, "%rax")
        if op in _SET_SIGNED:
            unsigned = opt.is_pointer or not opt.signed
            self.ins("cmpq", "%rcx", "%rax")
            self.ins((_SET_UNSIGNED if unsigned else _SET_SIGNED)[op], "%al")
            self.ins("movzbl", "%al", "%eax")
            return
        if op == "+":
            self.ins("addq", "%rcx", "%rax")
        elif op == "-":
            self.ins("subq", "%rcx", "%rax")
        elif op == "*":
            self.ins("imulq", "%rcx", "%rax")
        elif op in ("/", "%"):
            if opt.signed:
                self.ins("cqto")
                self.ins("idivq", "%rcx")
            else:
                self.ins("xorl", "%edx", "%edx")
                self.ins("divq", "%rcx")
            if op == "%":
                self.ins("movq", "%rdx", "%rax")
        elif op == "&":
            self.ins("andq", "%rcx", "%rax")
        elif op == "|":
            self.ins("orq", "%rcx", "%rax")
        elif op == "^":
            self.ins("xorq", "%rcx", "%rax")
        elif op == "<<":
            self.ins("salq", "%cl", "%rax")
        elif op == ">>":
            self.ins("sarq" if opt.signed else "shrq", "%cl", "%rax")
        self.normalize(opt)

    def float_op(self, op: str, t: CType) -> None:
        s = "ss" if t.size == 4 else "sd"
        ucom = "ucomiss" if t.size == 4 else "ucomisd"
        if op in ("+", "-", "*", "/"):
            name = {"+": "add", "-": "sub", "*": "mul", "/": "div"}[op]
            self.ins(name + s, "%xmm1", "%xmm0")
            return
        if op in (">", ">="):
            self.ins(ucom, "%xmm1", "%xmm0")
            self.ins("seta" if op == ">" else "setae", "%al")
        elif op in ("<", "<="):
            self.ins(ucom, "%xmm0", "%xmm1")
            self.ins("seta" if op == "<" else "setae", "%al")
        elif op == "==":
            self.ins(ucom, "%xmm1", "%xmm0")
            self.ins("sete", "%al")
            self.ins("setnp", "%cl")
            self.ins("andb", "%cl", "%al")
        elif op == "!=":
            self.ins(ucom, "%xmm1", "%xmm0")
            self.ins("setne", "%al")
            self.ins("setp", "%cl")
            self.ins("orb", "%cl", "%al")
        else:
            raise UnsupportedFeature(None, f"operator {op} on floating operands")
        self.ins("movzbl", "%al", "%eax")

    def pointer_arith(self, e: A.Binary, lt: CType, rt: CType) -> None:
        if lt.is_pointer and rt.is_pointer:
            self.expr(e.left)
            self.push(lt)
            self.expr(e.right)
            self.ins("movq", "%rax", "%rcx")
            self.pop(lt, "%rax")
            self.ins("subq", "%rcx", "%rax")
            n = sizeof(lt.target)
            if n > 1:
                self.ins("movq", f"${n}", "%rcx")
                self.ins("cqto")
                self.ins("idivq", "%rcx")
            return
        ptr, idx = (e.left, e.right) if lt.is_pointer else (e.right, e.left)
        pt = decay(ptr.ctype)
        self.expr(idx)
        self.convert(idx.ctype, LONG if idx.ctype.signed else ULONG)
        self.scale(sizeof(pt.target))
        self.push(pt)
        self.expr(ptr)
        self.pop(pt, "%rcx")
        self.ins("subq" if e.op == "-" else "addq", "%rcx", "%rax")

    def call(self, e: A.Call) -> None:
        ft = e.ftype
        start = self.depth
        for a, pt in zip(e.args, ft.params):
            self.expr(a)
            self.convert(a.ctype, pt)
            self.push(pt)
        ints = list(INT_ARG_REGS)
        floats = list(FLOAT_ARG_REGS)
        regs = []
        for pt in ft.params:
            regs.append(floats.pop(0) if pt.is_floating else ints.pop(0))
        for pt, reg in reversed(list(zip(ft.params, regs))):
            self.pop(pt, "%" + reg)
        pad = self.depth % 2 == 1
        if pad:
            self.ins("subq", "$8", "%rsp")
        self.ins("call", e.name)
        if pad:
            self.ins("addq", "$8", "%rsp")
        assert self.depth == start
        if ft.ret.is_integer:
            self.normalize(ft.ret)

    # ------------------------------------------------------------ statements

    def assign(self, target: A.Expr, value: A.Expr, op: str = "=") -> None:
        tt = target.ctype
        if op == "=":
            imm = _const_int(value) if tt.is_integer else None
            mem = self.direct(target)
            if imm is not None:
                if mem is None:
                    self.addr(target)
                    mem = "(%rax)"
                self.store_imm(mem, tt, imm)
                return
            if mem is not None:
                self.expr(value)
                self.convert(value.ctype, tt)
                self.store(mem, tt)
                return
            self.addr(target)
            self.push(LONG)
            self.expr(value)
            self.convert(value.ctype, tt)
            self.pop(LONG, "%rcx")
            self.store("(%rcx)", tt)
            return
        # compound assignment
        bop = op[:-1]
        vt = decay(value.ctype)
        if tt.is_pointer:
            opt = tt
        elif bop in ("<<", ">>"):
            opt = promote(tt)
        else:
            opt = common_type(tt, vt)
        self.addr(target)
        self.push(LONG)
        if tt.is_pointer:
            self.expr(value)
            self.convert(vt, LONG if vt.signed else ULONG)
            self.scale(sizeof(tt.target))
            self.ins("movq", "%rax", "%rcx")
            self.ins("movq", "(%rsp)", "%rdx")
            self.load("(%rdx)", tt)
            self.ins("addq" if bop == "+" else "subq", "%rcx", "%rax")
            self.pop(LONG, "%rcx")
            self.store("(%rcx)", tt)
            return
        self.expr(value)
        self.convert(vt, promote(vt) if bop in ("<<", ">>") else opt)
        vtmp = opt if not bop in ("<<", ">>") else promote(vt)
        self.push(vtmp)
        self.ins("movq", "8(%rsp)", "%rdx")
        self.load("(%rdx)", tt)
        self.convert(tt, opt)
        if opt.is_floating:
            self.pop(opt, "%xmm1")
            self.float_op(bop, opt)
        else:
            self.pop(vtmp, "%rcx")
            self._int_op(bop, opt)
        self.convert(opt, tt)
        self.pop(LONG, "%rcx")
        self.store("(%rcx)", tt)

    def _int_op(self, op: str, opt: CType) -> None:
        # left in %rax, right in %rcx
        if op == "+":
            self.ins("addq", "%rcx", "%rax")
        elif op == "-":
            self.ins("subq", "%rcx", "%rax")
        elif op == "*":
            self.ins("imulq", "%rcx", "%rax")
        elif op in ("/", "%"):
            if opt.signed:
                self.ins("cqto")
                self.ins("idivq", "%rcx")
            else:
                self.ins("xorl", "%edx", "%edx")
                self.ins("divq", "%rcx")
            if op == "%":
                self.ins("movq", "%rdx", "%rax")
        elif op == "&":
            self.ins("andq", "%rcx", "%rax")
        elif op == "|":
            self.ins("orq", "%rcx", "%rax")
        elif op == "^":
            self.ins("xorq", "%rcx", "%rax")
        elif op == "<<":
            self.ins("salq", "%cl", "%rax")
        elif op == ">>":
            self.ins("sarq" if opt.signed else "shrq", "%cl", "%rax")
        self.normalize(opt)

    def init_object(self, name: str, t: CType, init, offset: int = 0) -> None:
        if isinstance(init, A.InitList) and not (t.is_array or t.is_record):
            init = init.items[0]
        if isinstance(init, A.InitList):
            lay = compute_layout(t)
            if offset == 0:
                self.zero(name, lay.size)
            if t.is_array:
                esz = sizeof(t.elem)
                for i, it in enumerate(init.items):
                    self.init_object(name, t.elem, it, offset + i * esz)
            else:
                for (mname, mt), it in zip(t.members, init.items):
                    self.init_object(name, mt, it, offset + lay.member(mname).offset)
            return
        mem = self.operand(name, offset)
        imm = _const_int(init) if t.is_integer else None
        if imm is not None:
            self.store_imm(mem, t, imm)
            return
        self.expr(init)
        self.convert(init.ctype, t)
        self.store(mem, t)

    def zero(self, name: str, size: int) -> None:
        pos = 0
        for width, sfx in ((8, "q"), (4, "l"), (2, "w"), (1, "b")):
            while size - pos >= width:
                self.ins(f"mov{sfx}", "$0", self.operand(name, pos))
                pos += width

    def stmts(self, items: list[A.Stmt]) -> None:
        for s in items:
            self.stmt(s)

    def stmt(self, s: A.Stmt) -> None:
        for lab in s.labels:
            self.label(user_label(self.fn_name, lab))
        if isinstance(s, A.Block):
            self.stmts(s.items)
        elif isinstance(s, A.Assign):
            self.assign(s.target, s.value, s.op)
        elif isinstance(s, A.ExprStmt):
            self.expr(s.expr)
        elif isinstance(s, A.Decl):
            if s.init is not None:
                self.init_object(s.name, s.ctype, s.init)
        elif isinstance(s, A.Blank):
            pass
        elif isinstance(s, A.Return):
            if s.value is not None:
                imm = _const_int(s.value) if self.ret.is_integer else None
                if imm is not None:
                    check_immediate(imm, self.ret.size * 8)
                self.expr(s.value)
                self.convert(s.value.ctype, self.ret)
            self.ins("jmp", epilogue_label(self.fn_name))
        elif isinstance(s, A.Break):
            self.ins("jmp", self.breaks[-1])
        elif isinstance(s, A.Continue):
            self.ins("jmp", self.conts[-1])
        elif isinstance(s, A.Goto):
            self.ins("jmp", user_label(self.fn_name, s.label))
        elif isinstance(s, A.If):
            end = self.new_label("endif")
            other = self.new_label("else") if s.other is not None else end
            self.branch_false(s.cond, other)
            self.stmt(s.then)
            if s.other is not None:
                self.ins("jmp", end)
                self.label(other)
                self.stmt(s.other)
            self.label(end)
        elif isinstance(s, A.While):
            head, end, cont = self.new_label("body"), self.new_label("end"), self.new_label("cont")
            self.label(head)
            self.branch_false(s.cond, end)
            self.loop_body(s.body, end, cont)
            self.label(cont)
            self.ins("jmp", head)
            self.label(end)
        elif isinstance(s, A.For):
            if s.init is not None:
                self.stmt(s.init)
            head, end, cont = self.new_label("body"), self.new_label("end"), self.new_label("cont")
            self.label(head)
            if s.cond is not None:
                self.branch_false(s.cond, end)
            self.loop_body(s.body, end, cont)
            self.label(cont)
            if s.incr is not None:
                self.stmt(s.incr)
            self.ins("jmp", head)
            self.label(end)
        elif isinstance(s, A.DoWhile):
            head, end, cont = self.new_label("body"), self.new_label("end"), self.new_label("cont")
            self.label(head)
            self.loop_body(s.body, end, cont)
            self.label(cont)
            self.expr(s.cond)
            if decay(s.cond.ctype).is_floating:
                self.truth(s.cond.ctype)
            self.ins("testq", "%rax", "%rax")
            self.ins("jne", head)
            self.label(end)
        elif isinstance(s, A.Switch):
            end = self.new_label("end")
            self.switch_head(s.expr)
            labels = []
            for i, c in enumerate(s.cases):
                labels.append(self.new_label("default" if c.value is None else f"case{i}"))
            default = end
            for c, lab in zip(s.cases, labels):
                if c.value is None:
                    default = lab
                else:
                    self.case_jump(s.expr.ctype, c.value, lab)
            self.ins("jmp", default)
            self.breaks.append(end)
            for c, lab in zip(s.cases, labels):
                self.label(lab)
                self.stmts(c.body)
            self.breaks.pop()
            self.label(end)
        else:
            raise UnsupportedFeature(s.span, type(s).__name__)

    def loop_body(self, body: A.Stmt, end: str, cont: str) -> None:
        self.breaks.append(end)
        self.conts.append(cont)
        self.stmt(body)
        self.breaks.pop()
        self.conts.pop()

    def switch_head(self, e: A.Expr) -> None:
        self.expr(e)
        self.convert(e.ctype, promote(e.ctype))

    def case_jump(self, switch_type: CType, value: int, label: str) -> None:
        v = promote(switch_type).wrap(value)
        if -(1 << 31) <= v < (1 << 31):
            self.ins("cmpq", f"${v}", "%rax")
        else:
            self.ins("movabsq", f"${v}", "%rcx")
            self.ins("cmpq", "%rcx", "%rax")
        self.ins("je", label)

    def cond_flags(self, e: A.Expr) -> None:
        """Evaluate a condition leaving ZF=1 iff it is false."""
        self.expr(e)
        if decay(e.ctype).is_floating:
            self.truth(e.ctype)
        self.ins("cmpq", "$0", "%rax")


# ---------------------------------------------------------------- frames

def prologue(table: SymbolTable) -> list[str]:
    """Frame setup plus parameter spills into their slots."""
    lines = ["\tpushq\t%rbp", "\tmovq\t%rsp, %rbp"]
    if table.frame_size:
        lines.append(f"\tsubq\t${table.frame_size}, %rsp")
    for spill in table.params:
        slot = table.slot(spill.name)
        mem = f"{slot.offset}(%rbp)"
        t = slot.ctype
        if t.is_floating:
            lines.append(f"\t{'movss' if t.size == 4 else 'movsd'}\t%{spill.reg}, {mem}")
        else:
            size = 8 if t.is_pointer else t.size
            lines.append(f"\tmov{_SFX[size]}\t{_REG64_TO[spill.reg][size]}, {mem}")
    return lines


def epilogue(fn_name: str) -> list[str]:
    return [f"{epilogue_label(fn_name)}:", "\tleave", "\tret"]


def function_header(fn_name: str) -> list[str]:
    return [f"\t.globl\t{fn_name}", f"\t.type\t{fn_name}, @function", f"{fn_name}:"]


def function_footer(fn_name: str) -> list[str]:
    return [f"\t.size\t{fn_name}, .-{fn_name}"]


# ---------------------------------------------------------------- entry points

def translate_function(fn: A.FunctionDef, table: SymbolTable) -> AssemblyFragment:
    """Whole function, prologue and epilogue included (direct/workflow modes)."""
    gen = CodeGen(table, fn.name, fn.ret, f".L_{fn.name}__d")
    gen.stmts(fn.body.items)
    lines = prologue(table) + gen.lines + epilogue(fn.name)
    return AssemblyFragment.from_text("\n".join(lines), "rax rcx rdx xmm0-xmm2 flags", gen.rodata)


def translate_part(part, table: SymbolTable, fn_name: str, ret: CType) -> AssemblyFragment:
    """One split part; never emits a prologue or epilogue."""
    kind = part.kind.value if hasattr(part.kind, "value") else part.kind
    gen = CodeGen(table, fn_name, ret, f".L_{fn_name}__p{part.id}_",
                  part.break_label, part.continue_label)
    if kind == "Label":
        return AssemblyFragment.from_text("")
    if kind == "UncondJump":
        gen.ins("jmp", part.label)
    elif kind == "CondJump":
        if part.sense == "eq":
            gen.case_jump(part.switch_type, part.case_value, part.label)
        else:
            gen.ins("je" if part.sense == "zero" else "jne", part.label)
    elif part.role == "cond":
        gen.cond_flags(part.nodes[0])
    elif part.role == "switch_head":
        gen.switch_head(part.nodes[0])
    else:
        gen.stmts(part.nodes)
    return gen.fragment()


def check_immediates(asm: str) -> list[str]:
    """Lines whose immediate operand does not fit the instruction width."""
    import re
    bad = []
    pat = re.compile(r"^\s*([a-z]+?)([bwlq])\s+\$(-?(?:0x[0-9a-fA-F]+|\d+))\s*,")
    for line in asm.splitlines():
        m = pat.match(line)
        if not m or m.group(1) in ("movabs",):
            continue
        if m.group(1) in ("sal", "sar", "shr", "shl", "btc", "bt"):
            continue
        v = int(m.group(3), 0)
        lo, hi = IMM_RANGES[m.group(2)]
        if not lo <= v <= hi:
            bad.append(line.strip())
    return bad
