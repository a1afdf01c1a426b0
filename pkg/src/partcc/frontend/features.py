"""Feature flags that steer the optional pipeline steps."""
from __future__ import annotations

from dataclasses import asdict, dataclass

from . import ast as A
from .lexer import lexeme_count
from .printer import function_to_c, stmts_to_c

# nodes that count toward an expression's complexity; plain accesses
# (identifiers, literals, subscripts, members, *p, &x) are free
_COUNTED_UNARY = {"-", "+", "!", "~", "pre++", "pre--", "post++", "post--"}


@dataclass(frozen=True)
class FeatureFlags:
    long: bool = False
    numerical: bool = False
    order: bool = False
    has_goto: bool = False
    token_estimate: int = 0

    def as_dict(self) -> dict:
        return asdict(self)

    def active(self) -> list[str]:
        return [k for k in ("long", "numerical", "order", "has_goto") if getattr(self, k)]


def token_estimate(text: str) -> int:
    """ceil(1.3 * whitespace lexemes), in integer arithmetic."""
    return (lexeme_count(text) * 13 + 9) // 10


def operator_count(e) -> int:
    n = 0
    for node in e.walk():
        if isinstance(node, (A.Binary, A.Ternary, A.Call, A.Cast)):
            n += 1
        elif isinstance(node, A.Unary) and node.op in _COUNTED_UNARY:
            n += 1
    return n


def stmt_complexity(s: A.Stmt) -> int:
    """Operator nodes in the largest expression owned directly by ``s``."""
    if isinstance(s, A.Assign):
        return operator_count(s.target) + operator_count(s.value) + (s.op != "=")
    roots = A.stmt_exprs(s)
    return max((operator_count(e) for e in roots), default=0)


def _is_float(t) -> bool:
    while t is not None and (t.is_array or t.is_pointer):
        t = t.elem if t.is_array else t.target
    return t is not None and t.is_floating


def uses_floating(fn: A.FunctionDef) -> bool:
    if _is_float(fn.ret) or any(_is_float(p.ctype) for p in fn.params):
        return True
    for node in fn.body.walk():
        if isinstance(node, A.FloatLit):
            return True
        if isinstance(node, A.Decl) and _is_float(node.ctype):
            return True
        if isinstance(node, A.Expr) and node.ctype is not None and node.ctype.is_floating:
            return True
        if isinstance(node, A.Cast) and node.to.is_floating:
            return True
    return False


def analyze_features(fn: A.FunctionDef, config) -> FeatureFlags:
    est = token_estimate(function_to_c(fn))
    limit = config.expr_complexity_limit
    order = any(stmt_complexity(s) > limit for s in A.iter_stmts(fn.body))
    has_goto = any(isinstance(s, A.Goto) for s in A.iter_stmts(fn.body))
    return FeatureFlags(
        long=est > config.split_threshold,
        numerical=uses_floating(fn),
        order=order,
        has_goto=has_goto,
        token_estimate=est,
    )


def stmts_token_estimate(items: list[A.Stmt]) -> int:
    return token_estimate(stmts_to_c(items))
