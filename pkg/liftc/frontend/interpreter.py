"""
Reference interpreter for source programs.

Containers are immutable tuples; element updates rebuild the container, so
assigning one list variable to another never aliases.
"""
import logging
from typing import Any, Dict, Mapping, Tuple

from ..errors import DivisionByZero, IndexOutOfBounds, RuntimeFault
from ..types import SourceType
from ..utils import trunc_div, trunc_mod
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

logger = logging.getLogger(__name__)

Value = Any

_DEFAULTS = {
    SourceType.INT: 0,
    SourceType.BOOL: False,
    SourceType.INT_LIST: (),
    SourceType.INT_MATRIX: (),
}


def _freeze(value: Value) -> Value:
    if isinstance(value, (list, tuple)):
        return tuple(_freeze(v) for v in value)
    return value


def _check_index(seq: Tuple, index: int, node: Any) -> None:
    if index < 0 or index >= len(seq):
        raise IndexOutOfBounds(
            f"index {index} out of bounds for length {len(seq)}", node.line, node.col
        )


class _Interpreter:
    def __init__(self, bindings: Dict[str, Value]):
        self.env = bindings

    def run(self, stmts: Tuple[Stmt, ...]) -> None:
        for stmt in stmts:
            self.stmt(stmt)

    def stmt(self, stmt: Stmt) -> None:
        if isinstance(stmt, Decl):
            self.env[stmt.name] = (
                self.eval(stmt.init) if stmt.init is not None else _DEFAULTS[stmt.type]
            )
        elif isinstance(stmt, Assign):
            self.assign(stmt.target, self.eval(stmt.expr))
        elif isinstance(stmt, For):
            self.env[stmt.index] = self.eval(stmt.start)
            while self.env[stmt.index] < self.eval(stmt.bound):
                self.run(stmt.body)
                self.env[stmt.index] += 1
        elif isinstance(stmt, If):
            self.run(stmt.then if self.eval(stmt.cond) else stmt.orelse)
        elif isinstance(stmt, Push):
            self.env[stmt.target] = self.env[stmt.target] + (self.eval(stmt.expr),)
        elif isinstance(stmt, Return):
            pass

    def assign(self, target: Expr, value: Value) -> None:
        if isinstance(target, VarRef):
            self.env[target.name] = value
            return
        assert isinstance(target, IndexExpr)
        container = self.eval(target.base)
        index = self.eval(target.index)
        _check_index(container, index, target)
        updated = container[:index] + (value,) + container[index + 1 :]
        self.assign(target.base, updated)

    def eval(self, expr: Expr) -> Value:
        if isinstance(expr, (IntConst, BoolConst)):
            return expr.value
        if isinstance(expr, VarRef):
            return self.env[expr.name]
        if isinstance(expr, EmptyList):
            return ()
        if isinstance(expr, IndexExpr):
            base = self.eval(expr.base)
            index = self.eval(expr.index)
            _check_index(base, index, expr)
            return base[index]
        if isinstance(expr, LenExpr):
            return len(self.eval(expr.arg))
        if isinstance(expr, Unary):
            operand = self.eval(expr.operand)
            return -operand if expr.op == "-" else not operand
        if isinstance(expr, Binary):
            return self.binary(expr)
        raise RuntimeFault(f"cannot evaluate {expr!r}")

    def binary(self, expr: Binary) -> Value:
        op = expr.op
        if op == "&&":
            return self.eval(expr.lhs) and self.eval(expr.rhs)
        if op == "||":
            return self.eval(expr.lhs) or self.eval(expr.rhs)
        a, b = self.eval(expr.lhs), self.eval(expr.rhs)
        if op in ("/", "%"):
            if b == 0:
                raise DivisionByZero("division by zero", expr.line, expr.col)
            return trunc_div(a, b) if op == "/" else trunc_mod(a, b)
        return _BINARY[op](a, b)


_BINARY = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def interpret_source(program: SourceProgram, state: Mapping[str, Value]) -> Value:
    """
    Run a type-checked program on a state binding its parameters.

    Args:
        program: Program to run
        state: Parameter bindings; lists may be given as lists or tuples

    Returns:
        Value of the return variable, with containers as tuples

    Raises:
        DivisionByZero: On ``/`` or ``%`` by zero, with the program point
        IndexOutOfBounds: On an out-of-range index, with the program point
    """
    bindings = {p.name: _freeze(state[p.name]) for p in program.params}
    machine = _Interpreter(bindings)
    machine.run(program.body)
    return machine.env[program.return_var]
