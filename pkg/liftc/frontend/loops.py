"""
Loop structure analysis for canonical source programs.
"""
from typing import Dict, List, Set, Tuple

from ..types import SourceType
from .ast import Assign, Decl, For, If, LoopInfo, Push, SourceProgram, Stmt, target_root


def modified_in(stmts: Tuple[Stmt, ...]) -> Set[str]:
    """Names assigned, declared or pushed to anywhere in ``stmts``."""
    names: Set[str] = set()
    for stmt in stmts:
        if isinstance(stmt, Decl):
            names.add(stmt.name)
        elif isinstance(stmt, Assign):
            names.add(target_root(stmt.target))
        elif isinstance(stmt, Push):
            names.add(stmt.target)
        elif isinstance(stmt, For):
            names.add(stmt.index)
            names |= modified_in(stmt.body)
        elif isinstance(stmt, If):
            names |= modified_in(stmt.then) | modified_in(stmt.orelse)
    return names


def _walk(
    stmts: Tuple[Stmt, ...],
    scope: Dict[str, SourceType],
    depth: int,
    out: List[LoopInfo],
) -> None:
    scope = dict(scope)
    for stmt in stmts:
        if isinstance(stmt, Decl):
            scope[stmt.name] = stmt.type
        elif isinstance(stmt, For):
            head = dict(scope)
            head[stmt.index] = SourceType.INT
            out.append(
                LoopInfo(
                    index_var=stmt.index,
                    start=stmt.start,
                    bound=stmt.bound,
                    modified_vars=frozenset(modified_in(stmt.body) | {stmt.index}),
                    nesting_depth=depth,
                    live_vars=tuple(head.items()),
                )
            )
            _walk(stmt.body, head, depth + 1, out)
        elif isinstance(stmt, If):
            _walk(stmt.then, scope, depth, out)
            _walk(stmt.orelse, scope, depth, out)


def loop_structure(program: SourceProgram) -> List[LoopInfo]:
    """
    One LoopInfo per for statement, in declaration (pre-)order.

    Nested loops follow their enclosing loop and carry a larger nesting depth.
    """
    out: List[LoopInfo] = []
    _walk(program.body, {p.name: p.type for p in program.params}, 0, out)
    return out


def program_variables(program: SourceProgram) -> Dict[str, SourceType]:
    """Every parameter and declared variable (loop indices included) with its type."""
    names: Dict[str, SourceType] = {p.name: p.type for p in program.params}

    def visit(stmts: Tuple[Stmt, ...]) -> None:
        for stmt in stmts:
            if isinstance(stmt, Decl):
                names[stmt.name] = stmt.type
            elif isinstance(stmt, For):
                names[stmt.index] = SourceType.INT
                visit(stmt.body)
            elif isinstance(stmt, If):
                visit(stmt.then)
                visit(stmt.orelse)

    visit(program.body)
    return names
