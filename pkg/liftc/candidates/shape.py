"""
Template check for loop invariants.

An invariant is a conjunction of index comparisons followed by one or more
equalities ``var == <expression over DSL operators>``. Invariants are matched
to loops in declaration order.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence

from ..frontend.ast import LoopInfo
from ..ir.dsl import DslDefinition
from ..ir.nodes import Call, Compare, IRExpr, Var, conjuncts, free_vars, walk


@dataclass(frozen=True)
class ShapeViolation:
    """
    Attributes:
        loop: Index of the offending loop (-1 for a count mismatch)
        conjunct: Index of the offending conjunct (-1 when not conjunct-specific)
        detail: Human readable description
    """

    loop: int
    conjunct: int
    detail: str

    def __str__(self) -> str:
        return f"loop {self.loop}, conjunct {self.conjunct}: {self.detail}"


def enclosing_indices(loops: Sequence[LoopInfo]) -> List[frozenset]:
    """For each loop, its own index plus the indices of every enclosing loop."""
    result: List[frozenset] = []
    stack: List[LoopInfo] = []
    for loop in loops:
        while stack and stack[-1].nesting_depth >= loop.nesting_depth:
            stack.pop()
        stack.append(loop)
        result.append(frozenset(l.index_var for l in stack))
    return result


def _mentions_dsl(e: IRExpr, dsl: DslDefinition) -> bool:
    return any(
        isinstance(n, Call) and dsl.has_operator(n.op) and not dsl.operator(n.op).hidden  # type: ignore[union-attr]
        for n in walk(e)
    )


def is_equality_conjunct(e: IRExpr, indices: frozenset, dsl: DslDefinition) -> bool:
    return (
        isinstance(e, Compare)
        and e.op == "=="
        and isinstance(e.lhs, Var)
        and e.lhs.name not in indices
        and _mentions_dsl(e.rhs, dsl)
    )


def _check_one(k: int, inv: IRExpr, loop: LoopInfo, indices: frozenset, dsl: DslDefinition) -> Optional[ShapeViolation]:
    parts = conjuncts(inv)
    equalities = [is_equality_conjunct(p, indices, dsl) for p in parts]
    if not any(equalities):
        return ShapeViolation(k, -1, "missing equality conjunct")
    first_eq = equalities.index(True)
    for i, part in enumerate(parts[:first_eq]):
        if not isinstance(part, Compare) or not (free_vars(part) & indices):
            return ShapeViolation(k, i, "bounds conjunct must compare loop index variables")
    for i in range(first_eq, len(parts)):
        if not equalities[i]:
            return ShapeViolation(k, i, "expected an equality between a variable and a DSL expression")
    if not any(loop.index_var in free_vars(p) for p in parts[:first_eq]):
        return ShapeViolation(k, 0, f"no bounds on loop index '{loop.index_var}'")
    stray = sorted(free_vars(inv) - loop.live_names)
    if stray:
        return ShapeViolation(k, -1, f"'{stray[0]}' is not live at the loop head")
    return None


def validate_invariant_shape(
    invs: Sequence[IRExpr],
    loops: Sequence[LoopInfo],
    dsl: DslDefinition,
) -> Optional[ShapeViolation]:
    """
    Check every invariant against the bounds-then-equalities template.

    Returns:
        None when all invariants pass, otherwise the first violation
    """
    if len(invs) != len(loops):
        return ShapeViolation(-1, -1, f"expected {len(loops)} invariants, got {len(invs)}")
    for k, (inv, loop, indices) in enumerate(zip(invs, loops, enclosing_indices(loops))):
        violation = _check_one(k, inv, loop, indices, dsl)
        if violation is not None:
            return violation
    return None
