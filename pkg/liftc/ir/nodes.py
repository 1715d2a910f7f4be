"""
Candidate expression IR.

Program summaries, invariants, DSL operator bodies and codegen patterns are
all IRExpr trees. Nodes are frozen dataclasses and compare structurally.
"""
from dataclasses import dataclass
from typing import Any, Callable, Iterator, Optional, Tuple, Union

ARITH_OPS = ("+", "-", "*", "/", "%")
COMPARE_OPS = ("<", "<=", ">", ">=", "==", "!=")
BOOL_OPS = ("and", "or", "not")


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Call:
    op: str
    args: Tuple["IRExpr", ...] = ()


@dataclass(frozen=True)
class Lambda:
    params: Tuple[str, ...]
    body: "IRExpr"


@dataclass(frozen=True)
class Arith:
    op: str
    lhs: "IRExpr"
    rhs: "IRExpr"


@dataclass(frozen=True)
class Compare:
    op: str
    lhs: "IRExpr"
    rhs: "IRExpr"


@dataclass(frozen=True)
class BoolOp:
    op: str
    operands: Tuple["IRExpr", ...]


@dataclass(frozen=True)
class Index:
    base: "IRExpr"
    index: "IRExpr"


@dataclass(frozen=True)
class Slice:
    base: "IRExpr"
    lo: Optional["IRExpr"] = None
    hi: Optional["IRExpr"] = None


@dataclass(frozen=True)
class Len:
    base: "IRExpr"


@dataclass(frozen=True)
class MetaVar:
    """Pattern variable ``?name``; only appears in rewrite-rule patterns."""

    name: str


IRExpr = Union[Var, IntLit, BoolLit, Call, Lambda, Arith, Compare, BoolOp, Index, Slice, Len, MetaVar]


@dataclass(frozen=True)
class Closure:
    """Runtime value of a lambda: parameters, body and captured bindings."""

    params: Tuple[str, ...]
    body: IRExpr
    env: Tuple[Tuple[str, Any], ...]


def children(e: IRExpr) -> Tuple[IRExpr, ...]:
    """Direct subexpressions in left-to-right order."""
    if isinstance(e, Call):
        return e.args
    if isinstance(e, Lambda):
        return (e.body,)
    if isinstance(e, (Arith, Compare)):
        return (e.lhs, e.rhs)
    if isinstance(e, BoolOp):
        return e.operands
    if isinstance(e, Index):
        return (e.base, e.index)
    if isinstance(e, Slice):
        return tuple(x for x in (e.base, e.lo, e.hi) if x is not None)
    if isinstance(e, Len):
        return (e.base,)
    return ()


def walk(e: IRExpr) -> Iterator[IRExpr]:
    """Pre-order traversal."""
    yield e
    for child in children(e):
        yield from walk(child)


def free_vars(e: IRExpr, bound: frozenset = frozenset()) -> frozenset:
    """Variables referenced by ``e`` and not bound by an enclosing lambda."""
    if isinstance(e, Var):
        return frozenset() if e.name in bound else frozenset({e.name})
    if isinstance(e, Lambda):
        return free_vars(e.body, bound | frozenset(e.params))
    result: frozenset = frozenset()
    for child in children(e):
        result |= free_vars(child, bound)
    return result


def called_ops(e: IRExpr) -> frozenset:
    """Names of every Call in ``e``."""
    return frozenset(n.op for n in walk(e) if isinstance(n, Call))


def substitute(e: IRExpr, mapping: dict) -> IRExpr:
    """
    Replace free variables by expressions.

    Lambda parameters shadow the mapping; captured names are not renamed, so
    callers substitute only expressions whose free variables cannot clash
    with lambda parameters.
    """
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Lambda):
        inner = {k: v for k, v in mapping.items() if k not in e.params}
        return Lambda(e.params, substitute(e.body, inner))
    return map_children(e, lambda c: substitute(c, mapping))


def conjuncts(e: IRExpr) -> Tuple[IRExpr, ...]:
    """Flatten nested ``and`` into its operand list."""
    if isinstance(e, BoolOp) and e.op == "and":
        out: Tuple[IRExpr, ...] = ()
        for operand in e.operands:
            out += conjuncts(operand)
        return out
    return (e,)


def conjoin(parts: Tuple[IRExpr, ...]) -> IRExpr:
    if not parts:
        return BoolLit(True)
    if len(parts) == 1:
        return parts[0]
    return BoolOp("and", tuple(parts))


def ite(cond: IRExpr, then: IRExpr, orelse: IRExpr) -> Call:
    return Call("ite", (cond, then, orelse))


def map_children(e: IRExpr, fn: Callable[[IRExpr], IRExpr]) -> IRExpr:
    """Rebuild ``e`` with ``fn`` applied to each direct subexpression."""
    if isinstance(e, Call):
        return Call(e.op, tuple(fn(a) for a in e.args))
    if isinstance(e, Lambda):
        return Lambda(e.params, fn(e.body))
    if isinstance(e, Arith):
        return Arith(e.op, fn(e.lhs), fn(e.rhs))
    if isinstance(e, Compare):
        return Compare(e.op, fn(e.lhs), fn(e.rhs))
    if isinstance(e, BoolOp):
        return BoolOp(e.op, tuple(fn(o) for o in e.operands))
    if isinstance(e, Index):
        return Index(fn(e.base), fn(e.index))
    if isinstance(e, Slice):
        return Slice(
            fn(e.base),
            fn(e.lo) if e.lo is not None else None,
            fn(e.hi) if e.hi is not None else None,
        )
    if isinstance(e, Len):
        return Len(fn(e.base))
    return e
