"""
Pretty printer for source programs; its output re-parses to an equal AST.
"""
from typing import List, Tuple

from .ast import (
    Assign,
    Binary,
    BoolConst,
    Decl,
    EmptyList,
    Expr,
    For,
    If,
    IndexExpr,
    IntConst,
    LenExpr,
    Push,
    Return,
    SourceProgram,
    Stmt,
    Unary,
    VarRef,
)

PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 4,
    "<=": 4,
    ">": 4,
    ">=": 4,
    "+": 5,
    "-": 5,
    "*": 6,
    "/": 6,
    "%": 6,
}
_UNARY_PREC = 7
_ATOM_PREC = 8

INDENT = "    "


def _prec(expr: Expr) -> int:
    if isinstance(expr, Binary):
        return PRECEDENCE[expr.op]
    if isinstance(expr, Unary):
        return _UNARY_PREC
    return _ATOM_PREC


def format_expr(expr: Expr) -> str:
    if isinstance(expr, IntConst):
        return str(expr.value)
    if isinstance(expr, BoolConst):
        return "true" if expr.value else "false"
    if isinstance(expr, VarRef):
        return expr.name
    if isinstance(expr, EmptyList):
        return "[]"
    if isinstance(expr, IndexExpr):
        return f"{format_expr(expr.base)}[{format_expr(expr.index)}]"
    if isinstance(expr, LenExpr):
        return f"len({format_expr(expr.arg)})"
    if isinstance(expr, Unary):
        operand = format_expr(expr.operand)
        if _prec(expr.operand) < _UNARY_PREC:
            operand = f"({operand})"
        return f"{expr.op}{operand}"
    assert isinstance(expr, Binary)
    prec = PRECEDENCE[expr.op]
    lhs, rhs = format_expr(expr.lhs), format_expr(expr.rhs)
    if _prec(expr.lhs) < prec:
        lhs = f"({lhs})"
    # left associative: an equal-precedence right operand needs parentheses
    if _prec(expr.rhs) <= prec:
        rhs = f"({rhs})"
    return f"{lhs} {expr.op} {rhs}"


def _block(stmts: Tuple[Stmt, ...], depth: int, out: List[str]) -> None:
    for stmt in stmts:
        _stmt(stmt, depth, out)


def _stmt(stmt: Stmt, depth: int, out: List[str]) -> None:
    pad = INDENT * depth
    if isinstance(stmt, Decl):
        init = f" = {format_expr(stmt.init)}" if stmt.init is not None else ""
        out.append(f"{pad}{stmt.type} {stmt.name}{init};")
    elif isinstance(stmt, Assign):
        out.append(f"{pad}{format_expr(stmt.target)} = {format_expr(stmt.expr)};")
    elif isinstance(stmt, For):
        decl = "int " if stmt.declares_index else ""
        i = stmt.index
        out.append(
            f"{pad}for ({decl}{i} = {format_expr(stmt.start)}; "
            f"{i} < {format_expr(stmt.bound)}; {i}++) {{"
        )
        _block(stmt.body, depth + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(stmt, If):
        out.append(f"{pad}if ({format_expr(stmt.cond)}) {{")
        _block(stmt.then, depth + 1, out)
        if stmt.orelse:
            out.append(f"{pad}}} else {{")
            _block(stmt.orelse, depth + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(stmt, Push):
        out.append(f"{pad}push({stmt.target}, {format_expr(stmt.expr)});")
    elif isinstance(stmt, Return):
        out.append(f"{pad}return {stmt.name};")


def pretty_print(program: SourceProgram) -> str:
    """Render a program as source text."""
    params = ", ".join(f"{p.type} {p.name}" for p in program.params)
    out = [f"{program.return_type} {program.name}({params}) {{"]
    _block(program.body, 1, out)
    out.append("}")
    return "\n".join(out) + "\n"
