"""
Typed AST of the imperative source language.

Every node records the line and column it was parsed from. Locations are
excluded from equality: a program and its pretty-printed re-parse compare
equal.
"""
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

from ..types import SourceType


# Expressions


@dataclass(frozen=True)
class IntConst:
    value: int
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BoolConst:
    value: bool
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class VarRef:
    name: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class EmptyList:
    """The ``[]`` literal; typed by its context."""

    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class IndexExpr:
    base: "Expr"
    index: "Expr"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class LenExpr:
    arg: "Expr"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Unary:
    op: str  # "-" or "!"
    operand: "Expr"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


Expr = Union[IntConst, BoolConst, VarRef, EmptyList, IndexExpr, LenExpr, Unary, Binary]

ARITH_OPS = ("+", "-", "*", "/", "%")
ORDER_OPS = ("<", "<=", ">", ">=")
EQUALITY_OPS = ("==", "!=")
LOGIC_OPS = ("&&", "||")


# Statements


@dataclass(frozen=True)
class Decl:
    name: str
    type: SourceType
    init: Optional[Expr] = None
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Assign:
    """``target = expr`` where target is a variable, ``a[i]`` or ``m[i][j]``."""

    target: Expr
    expr: Expr
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class For:
    """Canonical loop ``for (index = start; index < bound; index++) body``."""

    index: str
    start: Expr
    bound: Expr
    body: Tuple["Stmt", ...]
    declares_index: bool = True
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class If:
    cond: Expr
    then: Tuple["Stmt", ...]
    orelse: Tuple["Stmt", ...] = ()
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Push:
    target: str
    expr: Expr
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Return:
    name: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


Stmt = Union[Decl, Assign, For, If, Push, Return]


@dataclass(frozen=True)
class Param:
    name: str
    type: SourceType


@dataclass(frozen=True)
class SourceProgram:
    name: str
    params: Tuple[Param, ...]
    body: Tuple[Stmt, ...]
    return_type: SourceType
    return_var: str

    @property
    def param_names(self) -> Tuple[str, ...]:
        return tuple(p.name for p in self.params)


@dataclass(frozen=True)
class LoopInfo:
    """
    Structure of one canonical loop.

    Attributes:
        index_var: Loop index variable
        start: Initial index expression
        bound: Exclusive upper bound expression
        modified_vars: Variables assigned, declared or pushed to in the body, plus the index
        nesting_depth: 0 for top-level loops
        live_vars: Variables in scope at the loop head, index included, with their types
    """

    index_var: str
    start: Expr
    bound: Expr
    modified_vars: frozenset
    nesting_depth: int
    live_vars: Tuple[Tuple[str, SourceType], ...]

    @property
    def live_names(self) -> frozenset:
        return frozenset(name for name, _ in self.live_vars)


def target_root(target: Expr) -> str:
    """Variable name at the root of an assignment target."""
    while isinstance(target, IndexExpr):
        target = target.base
    if not isinstance(target, VarRef):
        raise ValueError(f"not an lvalue: {target!r}")
    return target.name
