"""C types for the accepted subset.

Scalars, pointers and arrays are immutable value objects.  Struct and union
types are mutable (members are filled in after the tag is first seen, so a
struct can point to itself) and compare by tag.
"""
from __future__ import annotations

from dataclasses import dataclass


class CType:
    is_integer = False
    is_floating = False
    is_pointer = False
    is_array = False
    is_record = False
    is_void = False
    is_function = False

    @property
    def is_arithmetic(self) -> bool:
        return self.is_integer or self.is_floating

    @property
    def is_scalar(self) -> bool:
        return self.is_arithmetic or self.is_pointer


@dataclass(frozen=True)
class VoidType(CType):
    is_void = True

    def __str__(self) -> str:
        return "void"


INT_SIZES = {"char": 1, "short": 2, "int": 4, "long": 8}


@dataclass(frozen=True)
class IntType(CType):
    kind: str  # char | short | int | long
    signed: bool = True
    is_integer = True

    @property
    def size(self) -> int:
        return INT_SIZES[self.kind]

    @property
    def bits(self) -> int:
        return 8 * self.size

    @property
    def rank(self) -> int:
        return ("char", "short", "int", "long").index(self.kind)

    @property
    def min(self) -> int:
        return -(1 << (self.bits - 1)) if self.signed else 0

    @property
    def max(self) -> int:
        return (1 << (self.bits - 1)) - 1 if self.signed else (1 << self.bits) - 1

    def wrap(self, value: int) -> int:
        value &= (1 << self.bits) - 1
        if self.signed and value >> (self.bits - 1):
            value -= 1 << self.bits
        return value

    def __str__(self) -> str:
        return self.kind if self.signed else f"unsigned {self.kind}"


@dataclass(frozen=True)
class FloatType(CType):
    kind: str  # float | double
    is_floating = True

    @property
    def size(self) -> int:
        return 4 if self.kind == "float" else 8

    def __str__(self) -> str:
        return self.kind


@dataclass(frozen=True)
class PointerType(CType):
    target: CType
    is_pointer = True

    def __str__(self) -> str:
        return f"{self.target}*"


@dataclass(frozen=True)
class ArrayType(CType):
    elem: CType
    count: int | None
    is_array = True

    def __str__(self) -> str:
        n = "" if self.count is None else self.count
        return f"{self.elem}[{n}]"


@dataclass(frozen=True)
class FunctionType(CType):
    ret: CType
    params: tuple[CType, ...]
    is_function = True

    def __str__(self) -> str:
        return f"{self.ret}({', '.join(map(str, self.params))})"


class RecordType(CType):
    """struct or union.  ``members`` is None while the type is incomplete."""

    is_record = True

    def __init__(self, tag: str | None, is_union: bool = False,
                 members: list[tuple[str, CType]] | None = None):
        self.tag = tag
        self.is_union = is_union
        self.members = members

    @property
    def keyword(self) -> str:
        return "union" if self.is_union else "struct"

    @property
    def complete(self) -> bool:
        return self.members is not None

    def member(self, name: str) -> CType | None:
        for n, t in self.members or ():
            if n == name:
                return t
        return None

    def _key(self):
        if self.tag is not None:
            return (self.keyword, self.tag)
        return (self.keyword, None, tuple(self.members or ()))

    def __eq__(self, other) -> bool:
        return isinstance(other, RecordType) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        return f"RecordType({self.keyword} {self.tag or '<anon>'})"

    def __str__(self) -> str:
        return f"{self.keyword} {self.tag or '<anon>'}"


VOID = VoidType()
CHAR = IntType("char")
UCHAR = IntType("char", False)
SHORT = IntType("short")
USHORT = IntType("short", False)
INT = IntType("int")
UINT = IntType("int", False)
LONG = IntType("long")
ULONG = IntType("long", False)
FLOAT = FloatType("float")
DOUBLE = FloatType("double")

# typedef names every input may use without declaring them
BUILTIN_TYPEDEFS: dict[str, CType] = {
    "int8_t": CHAR, "uint8_t": UCHAR,
    "int16_t": SHORT, "uint16_t": USHORT,
    "int32_t": INT, "uint32_t": UINT,
    "int64_t": LONG, "uint64_t": ULONG,
    "size_t": ULONG, "ssize_t": LONG,
    "intptr_t": LONG, "uintptr_t": ULONG, "ptrdiff_t": LONG,
}


def decay(t: CType) -> CType:
    if t.is_array:
        return PointerType(t.elem)
    if t.is_function:
        return PointerType(t)
    return t


def promote(t: CType) -> CType:
    """Integer promotion."""
    if t.is_integer and t.rank < INT.rank:
        return INT
    return t


def common_type(a: CType, b: CType) -> CType:
    """Usual arithmetic conversions."""
    if a == DOUBLE or b == DOUBLE:
        return DOUBLE
    if a == FLOAT or b == FLOAT:
        return FLOAT
    a, b = promote(a), promote(b)
    if a == b:
        return a
    if a.signed == b.signed:
        return a if a.rank >= b.rank else b
    u, s = (a, b) if not a.signed else (b, a)
    if u.rank >= s.rank:
        return u
    if s.size > u.size:
        return s
    return IntType(s.kind, False)


def int_literal_type(value: int, suffix: str, radix: str) -> IntType:
    """Type of an integer constant per the C rules for its suffix and radix."""
    unsigned = "u" in suffix
    is_long = "l" in suffix
    if is_long:
        candidates = [ULONG] if unsigned else [LONG, ULONG] if radix != "dec" else [LONG]
    elif unsigned:
        candidates = [UINT, ULONG]
    elif radix == "dec":
        candidates = [INT, LONG]
    else:
        candidates = [INT, UINT, LONG, ULONG]
    for t in candidates:
        if t.min <= value <= t.max:
            return t
    return candidates[-1]


def type_to_c(t: CType, name: str = "") -> str:
    """Render a declaration of ``name`` with type ``t`` in C syntax."""
    decl = name
    while True:
        if t.is_pointer:
            decl = "*" + decl
            t = t.target
        elif t.is_array:
            if decl.startswith("*"):
                decl = f"({decl})"
            decl = f"{decl}[{'' if t.count is None else t.count}]"
            t = t.elem
        elif t.is_function:
            if decl.startswith("*"):
                decl = f"({decl})"
            decl = f"{decl}({', '.join(type_to_c(p) for p in t.params) or 'void'})"
            t = t.ret
        else:
            break
    base = base_name(t)
    return f"{base} {decl}".rstrip() if decl else base


def base_name(t: CType) -> str:
    if t.is_record:
        if t.tag is not None:
            return f"{t.keyword} {t.tag}"
        body = " ".join(f"{type_to_c(mt, mn)};" for mn, mt in t.members or ())
        return f"{t.keyword} {{ {body} }}"
    return str(t)
