import random

import pytest

from partcc.errors import RecursiveType, UnknownType
from partcc.frontend.ctype import CHAR, INT, LONG, ArrayType, PointerType, RecordType
from partcc.layout import LayoutOracle, Mismatch, compute_layout, verify_layout_against_oracle

from conftest import needs_gcc, unit
from typegen import random_record


def test_builtin_scalars():
    for name, size in [("char", 1), ("short", 2), ("int", 4), ("long", 8), ("float", 4),
                       ("double", 8), ("int*", 8), ("int16_t", 2)]:
        lay = compute_layout(name)
        assert (lay.size, lay.align) == (size, size)


def test_char_int_struct():
    lay = compute_layout(RecordType("S", False, [("c", CHAR), ("i", INT)]))
    assert (lay.size, lay.align) == (8, 4)
    assert {m.name: m.offset for m in lay.members} == {"c": 0, "i": 4}


def test_union_of_array_and_long():
    lay = compute_layout(RecordType("U", True, [("c", ArrayType(CHAR, 3)), ("l", LONG)]))
    assert (lay.size, lay.align) == (8, 8)
    assert all(m.offset == 0 for m in lay.members)


def test_array_layout():
    lay = compute_layout(ArrayType(RecordType("S", False, [("c", CHAR), ("i", INT)]), 3))
    assert (lay.size, lay.align, lay.count, lay.elem.size) == (24, 4, 3, 8)


def test_type_names_resolve_through_records():
    tree = unit("struct P { char c; double d; }; struct P g;")
    rec = tree.globals[0].ctype
    assert compute_layout("struct P", {"struct P": rec}).size == 16


def test_unknown_type():
    with pytest.raises(UnknownType):
        compute_layout("quux")
    with pytest.raises(UnknownType):
        compute_layout(RecordType("Inc", False, None))


def test_self_containing_struct():
    rec = RecordType("Loop", False, [])
    rec.members = [("x", INT), ("again", rec)]
    with pytest.raises(RecursiveType):
        compute_layout(rec)
    rec.members = [("x", INT), ("next", PointerType(rec))]
    assert compute_layout(rec).size == 16


def test_invariants_on_random_types():
    rng = random.Random(3)
    for _ in range(300):
        lay = compute_layout(random_record(rng, rng.randint(0, 4)))
        stack = [lay]
        while stack:
            cur = stack.pop()
            assert cur.check() == []
            stack += [m.layout for m in cur.members]
            if cur.elem is not None:
                stack.append(cur.elem)


@needs_gcc
def test_oracle_builtins_agree():
    assert verify_layout_against_oracle([compute_layout(n) for n in ("char", "int", "double", "long*")]) == []


@needs_gcc
def test_oracle_random_structs_agree():
    rng = random.Random(11)
    layouts = [compute_layout(random_record(rng, 4)) for _ in range(50)]
    assert verify_layout_against_oracle(layouts) == []


@needs_gcc
def test_oracle_catches_sabotage():
    lay = compute_layout(RecordType("S", False, [("c", CHAR), ("i", INT)]))
    lay.member("i").offset = 2
    (bad,) = verify_layout_against_oracle([lay])
    assert bad == Mismatch("struct S", "offset:i", 2, 4)


def test_probe_format():
    src, _ = LayoutOracle().probe_source([compute_layout(RecordType("S", False, [("c", CHAR)]))])
    assert 'printf("%s %zu\\n", "size:struct S"' in src
    assert '"offset:struct S.c"' in src
