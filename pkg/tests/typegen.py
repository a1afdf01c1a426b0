"""Random struct/union types for layout tests."""
import itertools
import random

from partcc.frontend.ctype import (CHAR, DOUBLE, FLOAT, INT, LONG, SHORT, UCHAR, UINT, ULONG,
                                   USHORT, ArrayType, PointerType, RecordType)

_TAGS = itertools.count(1)

SCALARS = [CHAR, UCHAR, SHORT, USHORT, INT, UINT, LONG, ULONG, FLOAT, DOUBLE]


def random_type(rng: random.Random, depth: int):
    r = rng.random()
    if depth > 0 and r < 0.3:
        return random_record(rng, depth - 1)
    if r < 0.45:
        return ArrayType(random_type(rng, max(depth - 1, 0)), rng.randint(1, 5))
    if r < 0.52:
        return PointerType(rng.choice(SCALARS))
    return rng.choice(SCALARS)


def random_record(rng: random.Random, depth: int = 4) -> RecordType:
    """A tagged struct or union nested at most ``depth`` levels."""
    tag = f"R{next(_TAGS)}"     # unique per process: probes declare many records at once
    members = [(f"m{i}", random_type(rng, depth)) for i in range(rng.randint(1, 6))]
    return RecordType(tag, rng.random() < 0.25, members)


_LOCAL_TYPES = ["char", "short", "int", "long", "float", "double", "unsigned", "int*",
                "struct P", "union U"]
_PRELUDE = "struct P { char c; double d; short s; };\nunion U { int i; char b[5]; };\n"


def random_locals_source(rng: random.Random) -> str:
    """A function declaring a random set of locals and parameters."""
    params = [f"{rng.choice(['int', 'long', 'double', 'char'])} p{i}" for i in range(rng.randint(0, 4))]
    lines = []
    for i in range(rng.randint(0, 12)):
        t = rng.choice(_LOCAL_TYPES)
        dims = f"[{rng.randint(1, 17)}]" if rng.random() < 0.3 else ""
        if t.endswith("*"):
            lines.append(f"    {t[:-1]} *v{i}{dims};")
        else:
            lines.append(f"    {t} v{i}{dims};")
    body = "\n".join(lines)
    return f"{_PRELUDE}void f({', '.join(params) or 'void'})\n{{\n{body}\n}}\n"
