"""C pretty-printer.

``canonical=True`` braces every control body and inlines nested plain blocks;
the splitter compares recombined parts against that form.
"""
from __future__ import annotations

from . import ast as A
from .ctype import CType, base_name, type_to_c
from .parser import BINARY_PREC

_TERNARY, _UNARY, _POSTFIX, _PRIMARY = 0, 11, 12, 13
INDENT = "    "


def expr_to_c(e: A.Expr) -> str:
    return _expr(e, 0)


def _paren(text: str, prec: int, need: int) -> str:
    return f"({text})" if prec < need else text


def _int_text(e: A.IntLit) -> str:
    v = e.value
    if v < 0:
        return f"(-{_int_text(A.IntLit(-v, e.suffix, e.radix))})"
    if e.radix == "hex":
        body = hex(v)
    elif e.radix == "oct" and v:
        body = "0" + format(v, "o")
    else:
        body = str(v)
    return body + e.suffix


def _float_text(e: A.FloatLit) -> str:
    text = repr(float(e.value))
    if "e" not in text and "." not in text:
        text += ".0"
    return text + ("f" if e.single else "")


def _expr(e: A.Expr, need: int) -> str:
    if isinstance(e, A.IntLit):
        return _int_text(e)
    if isinstance(e, A.FloatLit):
        return _float_text(e)
    if isinstance(e, A.Ident):
        return e.name
    if isinstance(e, A.Binary):
        p = BINARY_PREC[e.op]
        text = f"{_expr(e.left, p)} {e.op} {_expr(e.right, p + 1)}"
        return _paren(text, p, need)
    if isinstance(e, A.Ternary):
        text = f"{_expr(e.cond, 1)} ? {_expr(e.then, 0)} : {_expr(e.other, 0)}"
        return _paren(text, _TERNARY, need)
    if isinstance(e, A.Unary):
        if e.op.startswith("post"):
            return _paren(_expr(e.operand, _POSTFIX) + e.op[4:], _POSTFIX, need)
        op = e.op[3:] if e.op.startswith("pre") else e.op
        inner = _expr(e.operand, _UNARY)
        if inner[:1] in "-+&" and op[-1] == inner[0]:
            inner = " " + inner
        return _paren(op + inner, _UNARY, need)
    if isinstance(e, A.Cast):
        return _paren(f"({type_to_c(e.to)}){_expr(e.operand, _UNARY)}", _UNARY, need)
    if isinstance(e, A.SizeofType):
        return _paren(f"sizeof({type_to_c(e.of)})", _UNARY, need)
    if isinstance(e, A.SizeofExpr):
        return _paren(f"sizeof({_expr(e.operand, 0)})", _UNARY, need)
    if isinstance(e, A.Call):
        args = ", ".join(_expr(a, 0) for a in e.args)
        return f"{e.name}({args})"
    if isinstance(e, A.Index):
        return _paren(f"{_expr(e.base, _POSTFIX)}[{_expr(e.index, 0)}]", _POSTFIX, need)
    if isinstance(e, A.Member):
        sep = "->" if e.arrow else "."
        return _paren(f"{_expr(e.base, _POSTFIX)}{sep}{e.name}", _POSTFIX, need)
    raise TypeError(f"cannot print {type(e).__name__}")


def init_to_c(init) -> str:
    if isinstance(init, A.InitList):
        return "{" + ", ".join(init_to_c(i) for i in init.items) + "}"
    return _expr(init, 0)


def simple_to_c(s: A.Stmt) -> str:
    """Assign/ExprStmt/Decl text without the trailing semicolon."""
    if isinstance(s, A.Assign):
        return f"{_expr(s.target, 0)} {s.op} {_expr(s.value, 0)}"
    if isinstance(s, A.ExprStmt):
        return _expr(s.expr, 0)
    if isinstance(s, A.Decl):
        text = type_to_c(s.ctype, s.name)
        if s.init is not None:
            text += " = " + init_to_c(s.init)
        return text
    raise TypeError(f"not a simple statement: {type(s).__name__}")


class _Printer:
    def __init__(self, canonical: bool):
        self.canonical = canonical
        self.lines: list[str] = []

    def emit(self, depth: int, text: str) -> None:
        self.lines.append(INDENT * depth + text)

    def stmt(self, s: A.Stmt, depth: int) -> None:
        for lab in s.labels:
            self.emit(max(depth - 1, 0), f"{lab}:")
        if isinstance(s, (A.Assign, A.ExprStmt, A.Decl)):
            self.emit(depth, simple_to_c(s) + ";")
        elif isinstance(s, A.Blank):
            self.emit(depth, ";")
        elif isinstance(s, A.Break):
            self.emit(depth, "break;")
        elif isinstance(s, A.Continue):
            self.emit(depth, "continue;")
        elif isinstance(s, A.Goto):
            self.emit(depth, f"goto {s.label};")
        elif isinstance(s, A.Return):
            self.emit(depth, "return;" if s.value is None else f"return {expr_to_c(s.value)};")
        elif isinstance(s, A.Block):
            self.emit(depth, "{")
            self.items(s.items, depth + 1)
            self.emit(depth, "}")
        elif isinstance(s, A.If):
            self.body(f"if ({expr_to_c(s.cond)})", s.then, depth, tail=s.other is not None)
            if s.other is not None:
                self.body("else", s.other, depth)
        elif isinstance(s, A.While):
            self.body(f"while ({expr_to_c(s.cond)})", s.body, depth)
        elif isinstance(s, A.For):
            init = simple_to_c(s.init) if s.init is not None else ""
            cond = " " + expr_to_c(s.cond) if s.cond is not None else ""
            incr = " " + simple_to_c(s.incr) if s.incr is not None else ""
            self.body(f"for ({init};{cond};{incr})", s.body, depth)
        elif isinstance(s, A.DoWhile):
            self.body("do", s.body, depth, tail=True)
            self.emit(depth, f"while ({expr_to_c(s.cond)});")
        elif isinstance(s, A.Switch):
            self.emit(depth, f"switch ({expr_to_c(s.expr)}) {{")
            for c in s.cases:
                head = "default:" if c.value is None else f"case {_case_text(c.value)}:"
                self.emit(depth + 1, head)
                self.items(c.body, depth + 2)
            self.emit(depth, "}")
        else:
            raise TypeError(f"cannot print {type(s).__name__}")

    def items(self, items: list[A.Stmt], depth: int) -> None:
        for it in items:
            if self.canonical and isinstance(it, A.Block) and not it.labels:
                self.items(it.items, depth)
            else:
                self.stmt(it, depth)

    def body(self, head: str, body: A.Stmt, depth: int, tail: bool = False) -> None:
        if isinstance(body, A.Block) and not body.labels:
            self.emit(depth, head + " {")
            self.items(body.items, depth + 1)
            self.emit(depth, "}")
        elif self.canonical or (tail and _open_if(body)):
            self.emit(depth, head + " {")
            self.items([body], depth + 1)
            self.emit(depth, "}")
        else:
            self.emit(depth, head)
            self.stmt(body, depth + 1)


def _open_if(s: A.Stmt) -> bool:
    # would a following `else` bind to an if nested inside s?
    while True:
        if isinstance(s, A.If):
            if s.other is None:
                return True
            s = s.other
        elif isinstance(s, (A.While, A.For)):
            s = s.body
        else:
            return False


def _case_text(v: int) -> str:
    return str(v) if v >= 0 else f"-{-v}"


def stmt_to_c(s: A.Stmt, depth: int = 0, canonical: bool = False) -> str:
    p = _Printer(canonical)
    p.stmt(s, depth)
    return "\n".join(p.lines)


def stmts_to_c(items: list[A.Stmt], depth: int = 0, canonical: bool = False) -> str:
    p = _Printer(canonical)
    p.items(items, depth)
    return "\n".join(p.lines)


def _params_text(params: list[A.Param]) -> str:
    if not params:
        return "void"
    return ", ".join(type_to_c(p.ctype, p.name) for p in params)


def signature_to_c(name: str, ret: CType, params: list[A.Param]) -> str:
    return type_to_c(ret, f"{name}({_params_text(params)})")


def function_to_c(fn: A.FunctionDef, canonical: bool = False) -> str:
    head = signature_to_c(fn.name, fn.ret, fn.params)
    return head + "\n" + stmt_to_c(fn.body, 0, canonical)


def record_to_c(rt) -> str:
    lines = [f"{base_name(rt)} {{"]
    for mn, mt in rt.members or ():
        lines.append(f"{INDENT}{type_to_c(mt, mn)};")
    lines.append("};")
    return "\n".join(lines)


def item_to_c(item, canonical: bool = False) -> str:
    if isinstance(item, A.FunctionDef):
        return function_to_c(item, canonical)
    if isinstance(item, A.FunctionDecl):
        return signature_to_c(item.name, item.ret, item.params) + ";"
    if isinstance(item, A.GlobalDecl):
        text = ("extern " if item.extern else "") + type_to_c(item.ctype, item.name)
        if item.init is not None:
            text += " = " + init_to_c(item.init)
        return text + ";"
    if isinstance(item, A.RecordDecl):
        return record_to_c(item.rtype)
    if isinstance(item, A.TypedefDecl):
        return f"typedef {type_to_c(item.ctype, item.name)};"
    raise TypeError(f"cannot print {type(item).__name__}")


def ast_to_c(tree: A.Ast, canonical: bool = False) -> str:
    return "\n\n".join(item_to_c(i, canonical) for i in tree.items) + "\n"
