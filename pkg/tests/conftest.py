import shutil

import pytest

from partcc.frontend import check, parse_source

needs_gcc = pytest.mark.skipif(shutil.which("gcc") is None, reason="gcc not installed")


def unit(src: str):
    return check(parse_source(src))


def fn_of(src: str, name: str | None = None):
    tree = unit(src)
    return tree.function(name) if name else tree.functions[-1]
