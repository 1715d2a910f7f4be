"""
Static checks for source programs: scoping, typing and loop discipline.
"""
import logging
from typing import Dict, List, Optional, Tuple

from ..errors import NonCanonicalLoop, SourceTypeError
from ..types import SourceType
from .ast import (
    ARITH_OPS,
    EQUALITY_OPS,
    LOGIC_OPS,
    ORDER_OPS,
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
    target_root,
)

logger = logging.getLogger(__name__)

INT, BOOL, LIST, MATRIX = (
    SourceType.INT,
    SourceType.BOOL,
    SourceType.INT_LIST,
    SourceType.INT_MATRIX,
)


class _Scopes:
    """Stack of lexical scopes plus the program-wide name/type table."""

    def __init__(self) -> None:
        self.frames: List[Dict[str, SourceType]] = [{}]
        self.declared: Dict[str, SourceType] = {}

    def lookup(self, name: str) -> Optional[SourceType]:
        for frame in reversed(self.frames):
            if name in frame:
                return frame[name]
        return None

    def declare(self, name: str, type_: SourceType, line: int, col: int) -> None:
        if self.lookup(name) is not None:
            raise SourceTypeError(f"'{name}' is already declared in an enclosing scope", line, col)
        previous = self.declared.get(name)
        if previous is not None and previous is not type_:
            raise SourceTypeError(
                f"'{name}' was declared as {previous} elsewhere and cannot become {type_}",
                line,
                col,
            )
        self.declared[name] = type_
        self.frames[-1][name] = type_

    def push(self) -> None:
        self.frames.append({})

    def pop(self) -> None:
        self.frames.pop()


class TypeChecker:
    """Checks one SourceProgram; raises on the first problem found."""

    def __init__(self, program: SourceProgram):
        self.program = program
        self.scopes = _Scopes()
        self.loop_indices: List[str] = []

    def check(self) -> None:
        p = self.program
        for param in p.params:
            self.scopes.declare(param.name, param.type, 1, 1)
        body = p.body
        if not body or not isinstance(body[-1], Return):
            line, col = _loc(body[-1]) if body else (1, 1)
            raise SourceTypeError("program must end with a return statement", line, col)
        self._block(body[:-1])
        self._return(body[-1])

    def _block(self, stmts: Tuple[Stmt, ...]) -> None:
        for stmt in stmts:
            self._stmt(stmt)

    def _nested(self, stmts: Tuple[Stmt, ...]) -> None:
        self.scopes.push()
        try:
            self._block(stmts)
        finally:
            self.scopes.pop()

    def _stmt(self, stmt: Stmt) -> None:
        if isinstance(stmt, Return):
            raise SourceTypeError(
                "return must be the single final statement", stmt.line, stmt.col
            )
        if isinstance(stmt, Decl):
            if stmt.init is not None:
                self._expect(stmt.init, stmt.type)
            self.scopes.declare(stmt.name, stmt.type, stmt.line, stmt.col)
        elif isinstance(stmt, Assign):
            self._assign(stmt)
        elif isinstance(stmt, For):
            self._for(stmt)
        elif isinstance(stmt, If):
            self._expect(stmt.cond, BOOL)
            self._nested(stmt.then)
            self._nested(stmt.orelse)
        elif isinstance(stmt, Push):
            target = self._var_type(stmt.target, stmt.line, stmt.col)
            if not target.is_container:
                raise SourceTypeError(f"cannot push onto {target} '{stmt.target}'", stmt.line, stmt.col)
            self._expect(stmt.expr, target.element)

    def _assign(self, stmt: Assign) -> None:
        root = target_root(stmt.target)
        if root in self.loop_indices:
            raise NonCanonicalLoop(f"loop index '{root}' is assigned in the loop body", stmt.line, stmt.col)
        depth = 0
        node: Expr = stmt.target
        while isinstance(node, IndexExpr):
            depth += 1
            node = node.base
        if depth > 2:
            raise SourceTypeError("assignment target has too many indices", stmt.line, stmt.col)
        self._expect(stmt.expr, self._type(stmt.target))

    def _for(self, stmt: For) -> None:
        self._expect(stmt.start, INT)
        self._expect(stmt.bound, INT)
        self.scopes.push()
        try:
            if stmt.declares_index:
                self.scopes.declare(stmt.index, INT, stmt.line, stmt.col)
            elif self._var_type(stmt.index, stmt.line, stmt.col) is not INT:
                raise SourceTypeError(f"loop index '{stmt.index}' must be int", stmt.line, stmt.col)
            if stmt.index in self.loop_indices:
                raise NonCanonicalLoop(
                    f"loop index '{stmt.index}' is reused by a nested loop", stmt.line, stmt.col
                )
            self.loop_indices.append(stmt.index)
            self._nested(stmt.body)
            self.loop_indices.pop()
        finally:
            self.scopes.pop()

    def _return(self, stmt: Return) -> None:
        declared = self._var_type(stmt.name, stmt.line, stmt.col)
        if declared is not self.program.return_type:
            raise SourceTypeError(
                f"returns {declared} but the program is declared to return "
                f"{self.program.return_type}",
                stmt.line,
                stmt.col,
            )

    def _var_type(self, name: str, line: int, col: int) -> SourceType:
        found = self.scopes.lookup(name)
        if found is None:
            raise SourceTypeError(f"undeclared variable '{name}'", line, col)
        return found

    def _expect(self, expr: Expr, expected: SourceType) -> None:
        if isinstance(expr, EmptyList):
            if not expected.is_container:
                raise SourceTypeError(f"[] used where {expected} is expected", expr.line, expr.col)
            return
        actual = self._type(expr)
        if actual is not expected:
            raise SourceTypeError(f"expected {expected}, found {actual}", expr.line, expr.col)

    def _type(self, expr: Expr) -> SourceType:
        if isinstance(expr, IntConst):
            return INT
        if isinstance(expr, BoolConst):
            return BOOL
        if isinstance(expr, VarRef):
            return self._var_type(expr.name, expr.line, expr.col)
        if isinstance(expr, EmptyList):
            return LIST
        if isinstance(expr, IndexExpr):
            base = self._type(expr.base)
            if not base.is_container:
                raise SourceTypeError(f"cannot index a value of type {base}", expr.line, expr.col)
            self._expect(expr.index, INT)
            return base.element
        if isinstance(expr, LenExpr):
            arg = self._type(expr.arg)
            if not arg.is_container:
                raise SourceTypeError(f"len() of a value of type {arg}", expr.line, expr.col)
            return INT
        if isinstance(expr, Unary):
            operand = INT if expr.op == "-" else BOOL
            self._expect(expr.operand, operand)
            return operand
        if isinstance(expr, Binary):
            return self._binary(expr)
        raise SourceTypeError(f"unsupported expression {expr!r}")

    def _binary(self, expr: Binary) -> SourceType:
        if expr.op in ARITH_OPS:
            self._expect(expr.lhs, INT)
            self._expect(expr.rhs, INT)
            return INT
        if expr.op in ORDER_OPS:
            self._expect(expr.lhs, INT)
            self._expect(expr.rhs, INT)
            return BOOL
        if expr.op in LOGIC_OPS:
            self._expect(expr.lhs, BOOL)
            self._expect(expr.rhs, BOOL)
            return BOOL
        if expr.op in EQUALITY_OPS:
            lhs = self._type(expr.lhs)
            if lhs.is_container:
                raise SourceTypeError(f"cannot compare values of type {lhs}", expr.line, expr.col)
            self._expect(expr.rhs, lhs)
            return BOOL
        raise SourceTypeError(f"unknown operator '{expr.op}'", expr.line, expr.col)


def _loc(stmt: Stmt) -> Tuple[int, int]:
    return stmt.line, stmt.col


def check_program(program: SourceProgram) -> SourceProgram:
    """
    Type-check a parsed program.

    Returns:
        The same program, for chaining

    Raises:
        SourceTypeError: On scoping or typing problems
        NonCanonicalLoop: If a loop body assigns its own index
    """
    TypeChecker(program).check()
    logger.debug(f"program '{program.name}' type-checked")
    return program
