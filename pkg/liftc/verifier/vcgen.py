"""
Verification-condition generation by symbolic execution of the source program.

Program values are IR terms over symbolic constants. Each loop contributes
an initiation and a preservation condition; the final return contributes the
postcondition, so a program with n loops yields 2n + 1 conditions.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from ..errors import InvariantCountMismatch
from ..frontend.ast import (
    ARITH_OPS,
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
from ..frontend.loops import loop_structure, modified_in, program_variables
from ..ir.nodes import (
    Arith,
    BoolLit,
    BoolOp,
    Call,
    Compare,
    Index,
    IntLit,
    IRExpr,
    Lambda,
    Len,
    Var,
    children,
    conjoin,
    free_vars,
    ite,
    substitute,
)
from ..ir.primitives import ITE
from ..ir.printer import alpha_normalize, print_ir
from ..types import SourceType

logger = logging.getLogger(__name__)

# Domain predicate understood by the SMT encoder: every row has the length of the first.
RECTANGULAR = "rectangular"

_DEFAULTS = {
    SourceType.INT: IntLit(0),
    SourceType.BOOL: BoolLit(False),
    SourceType.INT_LIST: Call("list_empty"),
    SourceType.INT_MATRIX: Call("matrix_empty"),
}


class VCKind(str, Enum):
    INITIATION = "initiation"
    PRESERVATION = "preservation"
    POSTCONDITION = "postcondition"


@dataclass(frozen=True)
class HoareVC:
    """
    One proof obligation: the hypotheses imply the conclusion.

    Attributes:
        kind: Initiation, preservation or postcondition
        loop: Loop index in declaration order; None for the postcondition
        declarations: Symbolic constants with their types
        hypotheses: Input-domain facts, path conditions and assumed invariants
        conclusion: Formula to prove
    """

    kind: VCKind
    loop: Optional[int]
    declarations: Tuple[Tuple[str, SourceType], ...]
    hypotheses: Tuple[IRExpr, ...]
    conclusion: IRExpr

    def describe(self) -> str:
        where = f" of loop {self.loop}" if self.loop is not None else ""
        return f"{self.kind.value}{where}"

    def render(self) -> str:
        lines = [f"{self.describe()}:"]
        lines += [f"  {name}: {type_}" for name, type_ in self.declarations]
        lines += [f"  assume {print_ir(h)}" for h in self.hypotheses]
        lines.append(f"  prove {print_ir(self.conclusion)}")
        return "\n".join(lines)


@dataclass
class _Frame:
    state: Dict[str, IRExpr]
    path: List[IRExpr] = field(default_factory=list)

    def fork(self) -> "_Frame":
        return _Frame(dict(self.state), list(self.path))


def _implies(guard: IRExpr, fact: IRExpr) -> IRExpr:
    return BoolOp("or", (BoolOp("not", (guard,)), fact))


def _guarded(guards: Tuple[IRExpr, ...], fact: IRExpr) -> IRExpr:
    return _implies(conjoin(guards), fact) if guards else fact


def in_bounds(base: IRExpr, index: IRExpr) -> IRExpr:
    return BoolOp("and", (Compare("<=", IntLit(0), index), Compare("<", index, Len(base))))


def index_safety(e: IRExpr, guards: Tuple[IRExpr, ...] = ()) -> List[IRExpr]:
    """
    Bounds facts for the index reads of ``e`` outside lambdas, each guarded by
    the ``ite`` conditions and short-circuit operands that reach it.
    """
    if isinstance(e, Lambda):
        return []
    facts: List[IRExpr] = []
    if isinstance(e, Call) and e.op == ITE and len(e.args) == 3:
        cond, then, orelse = e.args
        facts += index_safety(cond, guards)
        facts += index_safety(then, guards + (cond,))
        facts += index_safety(orelse, guards + (BoolOp("not", (cond,)),))
        return facts
    if isinstance(e, BoolOp) and e.op in ("and", "or"):
        reached = guards
        for operand in e.operands:
            facts += index_safety(operand, reached)
            reached += (operand,) if e.op == "and" else (BoolOp("not", (operand,)),)
        return facts
    for child in children(e):
        facts += index_safety(child, guards)
    if isinstance(e, Index):
        facts.append(_guarded(guards, in_bounds(e.base, e.index)))
    return facts


def domain_hypotheses(program: SourceProgram) -> List[IRExpr]:
    """All list parameters share a length; all matrix parameters share rectangular dimensions."""
    lists = [Var(p.name) for p in program.params if p.type is SourceType.INT_LIST]
    matrices = [Var(p.name) for p in program.params if p.type is SourceType.INT_MATRIX]
    facts: List[IRExpr] = []
    for a, b in zip(lists, lists[1:]):
        facts.append(Compare("==", Len(a), Len(b)))
    for m in matrices:
        facts.append(Call(RECTANGULAR, (m,)))
    for a, b in zip(matrices, matrices[1:]):
        facts.append(Compare("==", Len(a), Len(b)))
        facts.append(Compare("==", Len(Index(a, IntLit(0))), Len(Index(b, IntLit(0)))))
    return facts


class _Executor:
    def __init__(self, program: SourceProgram, ps: IRExpr, invs: Sequence[IRExpr]):
        self.program = program
        self.ps = ps
        self.invs = [alpha_normalize(inv) for inv in invs]
        self.types = program_variables(program)
        self.declarations: List[Tuple[str, SourceType]] = [(p.name, p.type) for p in program.params]
        self.domain = domain_hypotheses(program)
        self.vcs: List[HoareVC] = []
        self.loop_counter = 0
        self.fresh_counter = 0

    def run(self) -> List[HoareVC]:
        frame = _Frame({p.name: Var(p.name) for p in self.program.params})
        self._block(self.program.body, frame)
        return self.vcs

    # statements

    def _block(self, stmts: Tuple[Stmt, ...], frame: _Frame) -> _Frame:
        for stmt in stmts:
            frame = self._stmt(stmt, frame)
        return frame

    def _stmt(self, stmt: Stmt, frame: _Frame) -> _Frame:
        if isinstance(stmt, Decl):
            if stmt.init is None:
                frame.state[stmt.name] = _DEFAULTS[stmt.type]
            else:
                frame.state[stmt.name] = self._expr(stmt.init, frame, (), stmt.type)
        elif isinstance(stmt, Assign):
            self._assign(stmt, frame)
        elif isinstance(stmt, Push):
            target = self.types[stmt.target]
            value = self._expr(stmt.expr, frame, (), target.element)
            op = "list_append" if target is SourceType.INT_LIST else "matrix_append"
            frame.state[stmt.target] = Call(op, (frame.state[stmt.target], value))
        elif isinstance(stmt, If):
            return self._if(stmt, frame)
        elif isinstance(stmt, For):
            return self._for(stmt, frame)
        elif isinstance(stmt, Return):
            equal = Compare("==", frame.state[stmt.name], self.ps)
            conclusion = conjoin((equal,) + tuple(index_safety(self.ps)))
            self._emit(VCKind.POSTCONDITION, None, frame, conclusion)
        return frame

    def _assign(self, stmt: Assign, frame: _Frame) -> None:
        target = stmt.target
        if isinstance(target, VarRef):
            frame.state[target.name] = self._expr(stmt.expr, frame, (), self.types[target.name])
            return
        assert isinstance(target, IndexExpr)
        if isinstance(target.base, VarRef):
            name = target.base.name
            container = frame.state[name]
            index = self._expr(target.index, frame, ())
            frame.path.append(in_bounds(container, index))
            value = self._expr(stmt.expr, frame, (), self.types[name].element)
            op = "list_set" if self.types[name] is SourceType.INT_LIST else "matrix_set"
            frame.state[name] = Call(op, (container, index, value))
            return
        assert isinstance(target.base, IndexExpr) and isinstance(target.base.base, VarRef)
        name = target.base.base.name
        matrix = frame.state[name]
        row = self._expr(target.base.index, frame, ())
        col = self._expr(target.index, frame, ())
        frame.path += [in_bounds(matrix, row), in_bounds(Index(matrix, row), col)]
        value = self._expr(stmt.expr, frame, (), SourceType.INT)
        updated = Call("list_set", (Index(matrix, row), col, value))
        frame.state[name] = Call("matrix_set", (matrix, row, updated))

    def _if(self, stmt: If, frame: _Frame) -> _Frame:
        cond = self._expr(stmt.cond, frame, ())
        base = len(frame.path)
        then = self._block(stmt.then, _Frame(dict(frame.state), list(frame.path) + [cond]))
        negated = BoolOp("not", (cond,))
        orelse = self._block(stmt.orelse, _Frame(dict(frame.state), list(frame.path) + [negated]))
        merged = _Frame({}, list(frame.path))
        merged.path += [_implies(cond, fact) for fact in then.path[base + 1 :]]
        merged.path += [_implies(negated, fact) for fact in orelse.path[base + 1 :]]
        for name in frame.state:
            a, b = then.state[name], orelse.state[name]
            merged.state[name] = a if a == b else ite(cond, a, b)
        return merged

    def _for(self, stmt: For, frame: _Frame) -> _Frame:
        k = self.loop_counter
        self.loop_counter += 1
        inv = self.invs[k]
        frame.state[stmt.index] = self._expr(stmt.start, frame, ())
        self._emit(VCKind.INITIATION, k, frame, self._instantiate(inv, frame.state))

        head = frame.fork()
        for name in sorted((modified_in(stmt.body) | {stmt.index}) & set(head.state)):
            head.state[name] = self._fresh(name)
        head.path.append(self._instantiate(inv, head.state))

        body = head.fork()
        index = body.state[stmt.index]
        body.path.append(Compare("<", index, self._expr(stmt.bound, body, ())))
        body = self._block(stmt.body, body)
        body.state[stmt.index] = Arith("+", body.state[stmt.index], IntLit(1))
        self._emit(VCKind.PRESERVATION, k, body, self._instantiate(inv, body.state))

        exit_ = head.fork()
        bound = self._expr(stmt.bound, exit_, ())
        exit_.path.append(BoolOp("not", (Compare("<", exit_.state[stmt.index], bound),)))
        return exit_

    # expressions

    def _expr(
        self,
        expr: Expr,
        frame: _Frame,
        guards: Tuple[IRExpr, ...],
        expected: Optional[SourceType] = None,
    ) -> IRExpr:
        if isinstance(expr, IntConst):
            return IntLit(expr.value)
        if isinstance(expr, BoolConst):
            return BoolLit(expr.value)
        if isinstance(expr, VarRef):
            return frame.state[expr.name]
        if isinstance(expr, EmptyList):
            return _DEFAULTS[expected or SourceType.INT_LIST]
        if isinstance(expr, IndexExpr):
            base = self._expr(expr.base, frame, guards)
            index = self._expr(expr.index, frame, guards)
            frame.path.append(_guarded(guards, in_bounds(base, index)))
            return Index(base, index)
        if isinstance(expr, LenExpr):
            return Len(self._expr(expr.arg, frame, guards))
        if isinstance(expr, Unary):
            operand = self._expr(expr.operand, frame, guards)
            if expr.op == "!":
                return BoolOp("not", (operand,))
            if isinstance(operand, IntLit):
                return IntLit(-operand.value)
            return Arith("-", IntLit(0), operand)
        assert isinstance(expr, Binary)
        lhs = self._expr(expr.lhs, frame, guards)
        if expr.op == "&&":
            return BoolOp("and", (lhs, self._expr(expr.rhs, frame, guards + (lhs,))))
        if expr.op == "||":
            rhs = self._expr(expr.rhs, frame, guards + (BoolOp("not", (lhs,)),))
            return BoolOp("or", (lhs, rhs))
        rhs = self._expr(expr.rhs, frame, guards)
        if expr.op in ARITH_OPS:
            if expr.op in ("/", "%"):
                frame.path.append(_guarded(guards, Compare("!=", rhs, IntLit(0))))
            return Arith(expr.op, lhs, rhs)
        return Compare(expr.op, lhs, rhs)

    # helpers

    def _fresh(self, name: str) -> Var:
        self.fresh_counter += 1
        symbol = f"{name}__{self.fresh_counter}"
        self.declarations.append((symbol, self.types[name]))
        return Var(symbol)

    def _instantiate(self, inv: IRExpr, state: Dict[str, IRExpr]) -> IRExpr:
        return substitute(inv, {name: state[name] for name in free_vars(inv) if name in state})

    def _emit(self, kind: VCKind, loop: Optional[int], frame: _Frame, conclusion: IRExpr) -> None:
        self.vcs.append(
            HoareVC(
                kind=kind,
                loop=loop,
                declarations=tuple(self.declarations),
                hypotheses=tuple(self.domain) + tuple(frame.path),
                conclusion=conclusion,
            )
        )


def generate_vcs(program: SourceProgram, ps: IRExpr, invs: Sequence[IRExpr]) -> List[HoareVC]:
    """
    Hoare-logic verification conditions for a summary and its invariants.

    Args:
        program: Type-checked source program
        ps: Program summary over the source parameters
        invs: One invariant per loop, in declaration order

    Returns:
        For each loop an initiation and a preservation condition, plus one
        postcondition

    Raises:
        InvariantCountMismatch: ``invs`` does not have one entry per loop
    """
    loops = loop_structure(program)
    if len(invs) != len(loops):
        raise InvariantCountMismatch(f"expected {len(loops)} invariants, got {len(invs)}")
    vcs = _Executor(program, ps, invs).run()
    logger.debug(f"Generated {len(vcs)} verification conditions for '{program.name}'")
    return vcs
