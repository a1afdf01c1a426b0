"""Recursive-descent parser for the C subset."""
from __future__ import annotations

from typing import Callable, Optional

from ..errors import CSyntaxError, UnsupportedFeature
from . import ast as A
from .ctype import (BUILTIN_TYPEDEFS, CHAR, DOUBLE, FLOAT, INT, LONG, SHORT, VOID,
                    ArrayType, CType, FunctionType, IntType, PointerType, RecordType)
from .lexer import Token, char_value, tokenize

ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "<<=", ">>=", "&=", "|=", "^="}

BINARY_PREC = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5,
    "==": 6, "!=": 6, "<": 7, ">": 7, "<=": 7, ">=": 7,
    "<<": 8, ">>": 8, "+": 9, "-": 9, "*": 10, "/": 10, "%": 10,
}

TYPE_KEYWORDS = {"int", "char", "short", "long", "float", "double", "void", "signed",
                 "unsigned", "struct", "union", "const", "volatile", "enum", "_Bool",
                 "extern", "static", "typedef", "register", "auto", "inline", "restrict"}
_IGNORED_SPECIFIERS = {"const", "volatile", "register", "auto", "inline", "restrict"}

Build = Callable[[CType], CType]


class Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.pos = 0
        self.last_end = 0
        self.typedefs: dict[str, CType] = dict(BUILTIN_TYPEDEFS)
        self.records: dict[tuple[str, str], RecordType] = {}
        self.anon_records: list[RecordType] = []
        self.defined_records: list[RecordType] = []

    # ------------------------------------------------------------ token utils

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        self.last_end = t.end
        return t

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("OP", "KW") and t.text in texts

    def accept(self, text: str) -> Optional[Token]:
        if self.at(text):
            return self.advance()
        return None

    def expect(self, text: str) -> Token:
        if not self.at(text):
            if self.tok.kind == "OP" and self.tok.text in ASSIGN_OPS:
                self.unsupported("assignment inside an expression")
            raise CSyntaxError(self.tok.start, [text], self.tok.text)
        return self.advance()

    def expect_ident(self) -> Token:
        if self.tok.kind != "ID":
            raise CSyntaxError(self.tok.start, ["identifier"], self.tok.text)
        return self.advance()

    def unsupported(self, name: str, tok: Token | None = None):
        t = tok or self.tok
        raise UnsupportedFeature((t.start, t.end), name)

    def span_from(self, start: int) -> tuple[int, int]:
        return (start, self.last_end)

    # ------------------------------------------------------------ top level

    def parse_unit(self) -> A.Ast:
        items: list = []
        while self.tok.kind != "EOF":
            items.extend(self.external_decl())
        return A.Ast(items, self.text)

    def starts_type(self, tok: Token | None = None) -> bool:
        t = tok or self.tok
        if t.kind == "KW" and t.text in TYPE_KEYWORDS:
            return True
        return t.kind == "ID" and t.text in self.typedefs

    def external_decl(self) -> list:
        start = self.tok.start
        self.defined_records = []
        if self.accept("typedef"):
            base = self.specifiers()
            name, build, _ = self.declarator()
            if name is None:
                raise CSyntaxError(self.tok.start, ["typedef name"], self.tok.text)
            self.expect(";")
            t = build(base)
            self.typedefs[name] = t
            return self._record_prefix(start) + [A.TypedefDecl(name, t, span=self.span_from(start))]
        base, storage = self.specifiers(with_storage=True)
        extern = "extern" in storage
        if self.accept(";"):
            if base.is_record and base.tag is not None:
                self.defined_records = [r for r in self.defined_records if r is not base]
                return self._record_prefix(start) + [A.RecordDecl(base, span=self.span_from(start))]
            return []
        out = self._record_prefix(start)
        first = True
        while True:
            dstart = self.tok.start
            name, build, params = self.declarator()
            if name is None:
                raise CSyntaxError(self.tok.start, ["declarator"], self.tok.text)
            t = build(base)
            if t.is_function:
                if params is None:
                    self.unsupported("function declarator without parameter list")
                if first and self.at("{"):
                    body = self.block()
                    out.append(A.FunctionDef(name, t.ret, params, body, span=self.span_from(start)))
                    return out
                out.append(A.FunctionDecl(name, t.ret, params, span=self.span_from(dstart)))
            else:
                init = None
                if self.accept("="):
                    init = self.initializer()
                if t.is_void:
                    raise CSyntaxError(dstart, ["object type"], "void")
                out.append(A.GlobalDecl(name, t, init, extern, span=self.span_from(dstart)))
            first = False
            if not self.accept(","):
                break
        self.expect(";")
        return out

    def _record_prefix(self, start: int) -> list:
        # `struct S {...} g;` also defines S; keep the definition as its own item
        out = [A.RecordDecl(rt, span=(start, start)) for rt in self.defined_records]
        self.defined_records = []
        return out

    # ------------------------------------------------------------ types

    def specifiers(self, with_storage: bool = False):
        storage: set[str] = set()
        words: list[str] = []
        record: Optional[CType] = None
        named: Optional[CType] = None
        start_tok = self.tok
        while True:
            t = self.tok
            if t.kind == "KW" and t.text in _IGNORED_SPECIFIERS:
                self.advance()
            elif t.kind == "KW" and t.text in ("extern", "static"):
                storage.add(t.text)
                self.advance()
            elif t.kind == "KW" and t.text in ("struct", "union"):
                record = self.record_spec()
            elif t.kind == "KW" and t.text in ("enum", "_Bool"):
                self.unsupported(t.text)
            elif t.kind == "KW" and t.text == "typedef":
                self.unsupported("typedef outside file scope")
            elif t.kind == "KW" and t.text in ("int", "char", "short", "long", "float",
                                               "double", "void", "signed", "unsigned"):
                words.append(t.text)
                self.advance()
            elif (t.kind == "ID" and t.text in self.typedefs and not words
                  and record is None and named is None):
                named = self.typedefs[t.text]
                self.advance()
            else:
                break
        if record is not None:
            if words or named:
                raise CSyntaxError(start_tok.start, ["single type"], start_tok.text)
            base = record
        elif named is not None:
            if words:
                raise CSyntaxError(start_tok.start, ["single type"], start_tok.text)
            base = named
        else:
            base = self._base_from_words(words, start_tok)
        if with_storage:
            return base, storage
        return base

    def _base_from_words(self, words: list[str], tok: Token) -> CType:
        if not words:
            raise CSyntaxError(tok.start, ["type specifier"], tok.text)
        signed = "unsigned" not in words
        rest = [w for w in words if w not in ("signed", "unsigned")]
        if words.count("signed") + words.count("unsigned") > 1:
            raise CSyntaxError(tok.start, ["type specifier"], tok.text)
        key = " ".join(sorted(rest))
        if key in ("", "int"):
            return IntType("int", signed)
        if key == "char":
            return IntType("char", signed)
        if key in ("short", "int short"):
            return IntType("short", signed)
        if key in ("long", "int long", "long long", "int long long"):
            return IntType("long", signed)
        if key == "float" and signed and "signed" not in words:
            return FLOAT
        if key == "double" and signed and "signed" not in words:
            return DOUBLE
        if key == "double long":
            self.unsupported("long double", tok)
        if key == "void" and len(words) == 1:
            return VOID
        raise CSyntaxError(tok.start, ["type specifier"], " ".join(words))

    def record_spec(self) -> CType:
        kw = self.advance()
        tag = None
        if self.tok.kind == "ID":
            tag = self.advance().text
        if self.at("{"):
            self.advance()
            members: list[tuple[str, CType]] = []
            while not self.accept("}"):
                base = self.specifiers()
                while True:
                    name, build, _ = self.declarator()
                    if name is None:
                        self.unsupported("anonymous member")
                    if self.at(":"):
                        self.unsupported("bit-field")
                    mt = build(base)
                    if mt.is_array and mt.count is None:
                        self.unsupported("flexible array member")
                    members.append((name, mt))
                    if not self.accept(","):
                        break
                self.expect(";")
            if tag is None:
                rt = RecordType(None, kw.text == "union", members)
                self.anon_records.append(rt)
                return rt
            rt = self.records.get((kw.text, tag))
            if rt is None:
                rt = RecordType(tag, kw.text == "union")
                self.records[(kw.text, tag)] = rt
            if rt.members is not None:
                raise CSyntaxError(kw.start, ["new tag"], f"redefinition of {kw.text} {tag}")
            rt.members = members
            self.defined_records.append(rt)
            return rt
        if tag is None:
            raise CSyntaxError(self.tok.start, ["tag or {"], self.tok.text)
        rt = self.records.get((kw.text, tag))
        if rt is None:
            rt = RecordType(tag, kw.text == "union")
            self.records[(kw.text, tag)] = rt
        return rt

    def declarator(self, abstract: bool = False):
        """Returns (name, build, params).  ``params`` is set for function declarators."""
        nptr = 0
        while self.accept("*"):
            nptr += 1
            while self.at("const", "volatile", "restrict"):
                self.advance()
        name = None
        inner: Build = lambda t: t
        inner_params = None
        if self.at("(") and (self.peek().text in ("*", "(") or
                             (self.peek().kind == "ID" and self.peek().text not in self.typedefs
                              and self.peek(2).text in (")", "[", "("))):
            self.advance()
            name, inner, inner_params = self.declarator(abstract)
            self.expect(")")
            if inner_params is not None:
                self.unsupported("function pointer")
        elif self.tok.kind == "ID" and self.tok.text not in self.typedefs:
            name = self.advance().text
        elif self.tok.kind == "ID" and not abstract:
            name = self.advance().text
        suffixes: list = []
        params = None
        while True:
            if self.accept("["):
                if self.accept("]"):
                    suffixes.append(("array", None))
                else:
                    ctok = self.tok
                    n = const_eval(self.ternary())
                    if n is None or n <= 0:
                        self.unsupported("non-constant array size", ctok)
                    self.expect("]")
                    suffixes.append(("array", n))
            elif self.at("("):
                if suffixes:
                    self.unsupported("array of functions")
                self.advance()
                params = self.param_list()
                suffixes.append(("func", params))
            else:
                break
        if params is not None and (nptr or name is None):
            # pointer-returning functions are fine; pointers to functions are not
            if name is None:
                self.unsupported("function pointer")

        def build(base: CType) -> CType:
            t = base
            for _ in range(nptr):
                t = PointerType(t)
            for kind, val in reversed(suffixes):
                if kind == "array":
                    if t.is_void:
                        raise CSyntaxError(self.tok.start, ["element type"], "void")
                    t = ArrayType(t, val)
                else:
                    t = FunctionType(t, tuple(p.ctype for p in val))
            return inner(t)

        return name, build, params

    def param_list(self) -> list[A.Param]:
        params: list[A.Param] = []
        if self.accept(")"):
            return params
        if self.at("void") and self.peek().text == ")":
            self.advance()
            self.advance()
            return params
        while True:
            if self.at("..."):
                self.unsupported("variadic function")
            pstart = self.tok.start
            base = self.specifiers()
            name, build, fparams = self.declarator()
            if fparams is not None:
                self.unsupported("function pointer parameter")
            t = build(base)
            if t.is_array:
                t = PointerType(t.elem)
            params.append(A.Param(name or f"__arg{len(params)}", t, span=self.span_from(pstart)))
            if not self.accept(","):
                break
        self.expect(")")
        return params

    def type_name(self) -> CType:
        base = self.specifiers()
        name, build, params = self.declarator(abstract=True)
        if name is not None:
            raise CSyntaxError(self.tok.start, ["abstract declarator"], name)
        return build(base)

    # ------------------------------------------------------------ statements

    def block(self) -> A.Block:
        start = self.expect("{").start
        items: list[A.Stmt] = []
        while not self.accept("}"):
            if self.tok.kind == "EOF":
                raise CSyntaxError(self.tok.start, ["}"], "")
            items.extend(self.block_item())
        return A.Block(items, span=self.span_from(start))

    def block_item(self) -> list[A.Stmt]:
        if self.starts_type() and not (self.tok.kind == "ID" and self.peek().text == ":"):
            return self.local_decl()
        return [self.statement()]

    def local_decl(self, allow_multi: bool = True) -> list[A.Stmt]:
        if self.at("static"):
            self.unsupported("static local")
        if self.at("extern", "typedef"):
            self.unsupported(f"{self.tok.text} in block scope")
        spec_tok = self.tok
        base = self.specifiers()
        if base.is_record and base.tag is not None and self.toks[self.pos - 1].text == "}":
            self.unsupported("tagged struct definition in block scope", spec_tok)
        out: list[A.Stmt] = []
        while True:
            dstart = self.tok.start
            name, build, params = self.declarator()
            if name is None:
                raise CSyntaxError(self.tok.start, ["identifier"], self.tok.text)
            t = build(base)
            if t.is_function:
                self.unsupported("block-scope function declaration")
            if t.is_void:
                raise CSyntaxError(dstart, ["object type"], "void")
            init = None
            if self.accept("="):
                init = self.initializer()
            out.append(A.Decl(name, t, init, span=self.span_from(dstart)))
            if not self.accept(","):
                break
            if not allow_multi:
                self.unsupported("multiple declarators here")
        self.expect(";")
        return out

    def initializer(self):
        if self.at("{"):
            start = self.advance().start
            items = []
            while not self.at("}"):
                if self.at(".", "["):
                    self.unsupported("designated initializer")
                items.append(self.initializer())
                if not self.accept(","):
                    break
            self.expect("}")
            return A.InitList(items, span=self.span_from(start))
        return self.ternary()

    def statement(self) -> A.Stmt:
        labels: list[str] = []
        start = self.tok.start
        while self.tok.kind == "ID" and self.peek().text == ":":
            labels.append(self.advance().text)
            self.advance()
        s = self._statement()
        if labels:
            s.labels = tuple(labels) + s.labels
            s.span = (start, s.span[1])
        return s

    def _statement(self) -> A.Stmt:
        t = self.tok
        start = t.start
        if t.kind == "OP" and t.text == "{":
            return self.block()
        if t.kind == "OP" and t.text == ";":
            self.advance()
            return A.Blank(span=self.span_from(start))
        if t.kind == "KW":
            kw = t.text
            if kw == "if":
                self.advance()
                self.expect("(")
                cond = self.expression()
                self.expect(")")
                then = self.statement()
                other = self.statement() if self.accept("else") else None
                return A.If(cond, then, other, span=self.span_from(start))
            if kw == "while":
                self.advance()
                self.expect("(")
                cond = self.expression()
                self.expect(")")
                body = self.statement()
                return A.While(cond, body, span=self.span_from(start))
            if kw == "do":
                self.advance()
                body = self.statement()
                self.expect("while")
                self.expect("(")
                cond = self.expression()
                self.expect(")")
                self.expect(";")
                return A.DoWhile(body, cond, span=self.span_from(start))
            if kw == "for":
                return self.for_stmt()
            if kw == "switch":
                return self.switch_stmt()
            if kw == "break":
                self.advance()
                self.expect(";")
                return A.Break(span=self.span_from(start))
            if kw == "continue":
                self.advance()
                self.expect(";")
                return A.Continue(span=self.span_from(start))
            if kw == "return":
                self.advance()
                value = None if self.at(";") else self.expression()
                self.expect(";")
                return A.Return(value, span=self.span_from(start))
            if kw == "goto":
                self.advance()
                label = self.expect_ident().text
                self.expect(";")
                return A.Goto(label, span=self.span_from(start))
            if kw in ("case", "default"):
                self.unsupported("case label outside the top level of a switch body")
            if kw == "else":
                raise CSyntaxError(start, ["statement"], "else")
        s = self.simple_statement()
        self.expect(";")
        s.span = self.span_from(start)
        return s

    def simple_statement(self) -> A.Stmt:
        start = self.tok.start
        target = self.expression()
        if self.tok.kind == "OP" and self.tok.text in ASSIGN_OPS:
            op = self.advance().text
            value = self.expression()
            if self.tok.kind == "OP" and self.tok.text in ASSIGN_OPS:
                self.unsupported("chained assignment")
            return A.Assign(target, value, op, span=self.span_from(start))
        return A.ExprStmt(target, span=self.span_from(start))

    def for_stmt(self) -> A.For:
        start = self.advance().start
        self.expect("(")
        init: Optional[A.Stmt] = None
        if self.accept(";"):
            pass
        elif self.starts_type():
            decls = self.local_decl(allow_multi=False)
            init = decls[0]
        else:
            istart = self.tok.start
            init = self.simple_statement()
            self.expect(";")
            init.span = self.span_from(istart)
        cond = None if self.at(";") else self.expression()
        self.expect(";")
        incr = None
        if not self.at(")"):
            istart = self.tok.start
            incr = self.simple_statement()
            incr.span = self.span_from(istart)
        self.expect(")")
        body = self.statement()
        return A.For(init, cond, incr, body, span=self.span_from(start))

    def switch_stmt(self) -> A.Switch:
        start = self.advance().start
        self.expect("(")
        expr = self.expression()
        self.expect(")")
        if not self.at("{"):
            self.unsupported("switch body without braces")
        self.advance()
        cases: list[A.Case] = []
        while not self.accept("}"):
            t = self.tok
            if self.accept("case"):
                ctok = self.tok
                v = const_eval(self.ternary())
                if v is None:
                    self.unsupported("non-constant case label", ctok)
                self.expect(":")
                cases.append(A.Case(v, [], span=self.span_from(t.start)))
            elif self.accept("default"):
                self.expect(":")
                cases.append(A.Case(None, [], span=self.span_from(t.start)))
            else:
                if not cases:
                    self.unsupported("statement before the first case label")
                if self.tok.kind == "EOF":
                    raise CSyntaxError(self.tok.start, ["}"], "")
                cases[-1].body.extend(self.block_item())
                c = cases[-1]
                c.span = (c.span[0], self.last_end)
        return A.Switch(expr, cases, span=self.span_from(start))

    # ------------------------------------------------------------ expressions

    def expression(self) -> A.Expr:
        e = self.ternary()
        if self.at(","):
            self.unsupported("comma operator")
        return e

    def ternary(self) -> A.Expr:
        start = self.tok.start
        cond = self.binary(1)
        if self.accept("?"):
            a = self.expression()
            self.expect(":")
            b = self.ternary()
            return A.Ternary(cond, a, b, span=self.span_from(start))
        return cond

    def binary(self, min_prec: int) -> A.Expr:
        start = self.tok.start
        left = self.unary()
        while True:
            t = self.tok
            prec = BINARY_PREC.get(t.text) if t.kind == "OP" else None
            if prec is None or prec < min_prec:
                return left
            self.advance()
            right = self.binary(prec + 1)
            left = A.Binary(t.text, left, right, span=self.span_from(start))

    def unary(self) -> A.Expr:
        t = self.tok
        start = t.start
        if t.kind == "OP" and t.text in ("-", "+", "!", "~", "*", "&"):
            self.advance()
            operand = self.unary()
            return A.Unary(t.text, operand, span=self.span_from(start))
        if t.kind == "OP" and t.text in ("++", "--"):
            self.advance()
            operand = self.unary()
            return A.Unary("pre" + t.text, operand, span=self.span_from(start))
        if t.kind == "KW" and t.text == "sizeof":
            self.advance()
            if self.at("(") and self.starts_type(self.peek()):
                self.advance()
                ty = self.type_name()
                self.expect(")")
                return A.SizeofType(ty, span=self.span_from(start))
            operand = self.unary()
            return A.SizeofExpr(operand, span=self.span_from(start))
        if t.kind == "OP" and t.text == "(" and self.starts_type(self.peek()):
            self.advance()
            ty = self.type_name()
            self.expect(")")
            if self.at("{"):
                self.unsupported("compound literal")
            operand = self.unary()
            return A.Cast(ty, operand, span=self.span_from(start))
        return self.postfix()

    def postfix(self) -> A.Expr:
        start = self.tok.start
        e = self.primary()
        while True:
            if self.accept("["):
                idx = self.expression()
                self.expect("]")
                e = A.Index(e, idx, span=self.span_from(start))
            elif self.at("("):
                if not isinstance(e, A.Ident):
                    self.unsupported("call through an expression")
                self.advance()
                args: list[A.Expr] = []
                if not self.at(")"):
                    while True:
                        args.append(self.ternary())
                        if not self.accept(","):
                            break
                self.expect(")")
                e = A.Call(e.name, args, span=self.span_from(start))
            elif self.accept("."):
                name = self.expect_ident().text
                e = A.Member(e, name, False, span=self.span_from(start))
            elif self.accept("->"):
                name = self.expect_ident().text
                e = A.Member(e, name, True, span=self.span_from(start))
            elif self.at("++", "--"):
                op = self.advance().text
                e = A.Unary("post" + op, e, span=self.span_from(start))
            else:
                return e

    def primary(self) -> A.Expr:
        t = self.tok
        if t.kind == "INT":
            self.advance()
            return parse_int_literal(t)
        if t.kind == "FLOAT":
            self.advance()
            text = t.text
            single = text[-1] in "fF"
            if text[-1] in "lL":
                self.unsupported("long double literal", t)
            return A.FloatLit(float(text.rstrip("fF")), single, span=(t.start, t.end))
        if t.kind == "CHAR":
            self.advance()
            return A.IntLit(char_value(t.text, t.start), span=(t.start, t.end))
        if t.kind == "ID":
            self.advance()
            return A.Ident(t.text, span=(t.start, t.end))
        if t.kind == "OP" and t.text == "(":
            self.advance()
            e = self.expression()
            self.expect(")")
            return e
        raise CSyntaxError(t.start, ["expression"], t.text)


def parse_int_literal(t: Token) -> A.IntLit:
    text = t.text
    body = text.rstrip("uUlL")
    suffix_raw = text[len(body):].lower()
    suffix = ("u" if "u" in suffix_raw else "") + ("l" if "l" in suffix_raw else "")
    if body.lower().startswith("0x"):
        return A.IntLit(int(body, 16), suffix, "hex", span=(t.start, t.end))
    if len(body) > 1 and body.startswith("0"):
        if any(c in "89" for c in body):
            raise CSyntaxError(t.start, ["octal digit"], text)
        return A.IntLit(int(body, 8), suffix, "oct", span=(t.start, t.end))
    return A.IntLit(int(body), suffix, "dec", span=(t.start, t.end))


def const_eval(e) -> Optional[int]:
    """Fold an integer constant expression; None if it is not constant."""
    if isinstance(e, A.IntLit):
        return e.value
    if isinstance(e, A.Unary) and e.op in ("-", "+", "~", "!"):
        v = const_eval(e.operand)
        if v is None:
            return None
        return {"-": -v, "+": v, "~": ~v, "!": int(not v)}[e.op]
    if isinstance(e, A.Cast) and e.to.is_integer:
        v = const_eval(e.operand)
        return None if v is None else e.to.wrap(v)
    if isinstance(e, A.Binary):
        a, b = const_eval(e.left), const_eval(e.right)
        if a is None or b is None:
            return None
        op = e.op
        if op in ("/", "%"):
            if b == 0:
                return None
            q = abs(a) // abs(b) * (1 if (a >= 0) == (b >= 0) else -1)
            return q if op == "/" else a - q * b
        return {
            "+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b,
            "<<": lambda: a << b, ">>": lambda: a >> b, "&": lambda: a & b,
            "|": lambda: a | b, "^": lambda: a ^ b, "&&": lambda: int(bool(a and b)),
            "||": lambda: int(bool(a or b)), "==": lambda: int(a == b),
            "!=": lambda: int(a != b), "<": lambda: int(a < b), ">": lambda: int(a > b),
            "<=": lambda: int(a <= b), ">=": lambda: int(a >= b),
        }[op]()
    if isinstance(e, A.Ternary):
        c = const_eval(e.cond)
        if c is None:
            return None
        return const_eval(e.then if c else e.other)
    return None


def parse_source(text: str) -> A.Ast:
    """Parse a preprocessed translation unit."""
    return Parser(text).parse_unit()


def parse_statements(text: str, typedefs: dict[str, CType] | None = None,
                     records: dict | None = None) -> list[A.Stmt]:
    """Parse a bare sequence of block items (used when recombining split parts)."""
    p = Parser("{" + text + "}")
    if typedefs:
        p.typedefs.update(typedefs)
    if records:
        p.records.update(records)
    blk = p.block()
    if p.tok.kind != "EOF":
        raise CSyntaxError(p.tok.start, ["end of input"], p.tok.text)
    return blk.items
