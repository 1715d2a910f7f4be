"""
Fuel-bounded evaluator for IR expressions.

Values are Python ints and bools, tuples of ints (lists), tuples of tuples
(matrices) and Closures.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, List, Mapping, Optional, Tuple

from ..errors import (
    ArityMismatch,
    DivisionByZero,
    FuelExhausted,
    IndexOutOfBounds,
    IRTypeError,
    UnknownOperator,
)
from ..utils import trunc_div, trunc_mod
from .dsl import DslDefinition
from .nodes import (
    Arith,
    BoolLit,
    BoolOp,
    Call,
    Closure,
    Compare,
    Index,
    IntLit,
    IRExpr,
    Lambda,
    Len,
    Slice,
    Var,
    children,
    map_children,
    walk,
)
from .primitives import ITE, PRIMITIVES

logger = logging.getLogger(__name__)

DEFAULT_FUEL = 10**6

Value = Any


def kind_of(value: Value) -> str:
    """Coarse runtime kind; bools are checked before ints."""
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, int):
        return "int"
    if isinstance(value, Closure):
        return "function"
    if isinstance(value, tuple):
        return "sequence"
    return type(value).__name__


def _int(value: Value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise IRTypeError(f"expected int, found {kind_of(value)}")
    return value


def _bool(value: Value) -> bool:
    if not isinstance(value, bool):
        raise IRTypeError(f"expected bool, found {kind_of(value)}")
    return value


def _seq(value: Value) -> tuple:
    if not isinstance(value, tuple):
        raise IRTypeError(f"expected a list or matrix, found {kind_of(value)}")
    return value


def _clamp(bound: int, n: int) -> int:
    return min(max(bound, 0), n)


REC = "$rec"


@dataclass(frozen=True)
class Unfolding:
    """
    Loop form of an operator body ``ite(guard, base, step)`` whose step makes
    exactly one self-call outside any lambda, conditional or boolean operator.

    Attributes:
        guard: Stop condition
        base: Result once the guard holds
        step: The step with the self-call replaced by ``Var(REC)``
        call_args: Arguments of the self-call
    """

    guard: IRExpr
    base: IRExpr
    step: IRExpr
    call_args: Tuple[IRExpr, ...]


def _eager_calls(e: IRExpr, name: str) -> List[Call]:
    if isinstance(e, Call) and e.op == name:
        return [e]
    if isinstance(e, (Lambda, BoolOp)) or (isinstance(e, Call) and e.op == ITE):
        return []
    found: List[Call] = []
    for child in children(e):
        found += _eager_calls(child, name)
    return found


def _replace(e: IRExpr, target: IRExpr, replacement: IRExpr) -> IRExpr:
    if e == target:
        return replacement
    return map_children(e, lambda c: _replace(c, target, replacement))


@lru_cache(maxsize=None)
def unfolding(name: str, body: IRExpr) -> Optional[Unfolding]:
    """Loop form of operator ``name``, or None when its body has another shape."""
    if not (isinstance(body, Call) and body.op == ITE and len(body.args) == 3):
        return None
    guard, base, step = body.args
    if sum(1 for n in walk(body) if isinstance(n, Call) and n.op == name) != 1:
        return None
    eager = _eager_calls(step, name)
    if len(eager) != 1:
        return None
    [call] = eager
    return Unfolding(guard, base, _replace(step, call, Var(REC)), call.args)


class Evaluator:
    """
    Evaluates IR against one DSL with a step budget.

    The budget is shared across all calls to :meth:`eval` on the same
    instance; create a fresh evaluator per top-level evaluation.
    """

    def __init__(self, dsl: DslDefinition, fuel: int = DEFAULT_FUEL):
        self.dsl = dsl
        self.fuel = fuel

    def eval(self, e: IRExpr, env: Mapping[str, Value]) -> Value:
        self.fuel -= 1
        if self.fuel < 0:
            raise FuelExhausted("evaluation step budget exhausted")
        if isinstance(e, IntLit):
            return e.value
        if isinstance(e, BoolLit):
            return e.value
        if isinstance(e, Var):
            if e.name not in env:
                raise IRTypeError(f"unbound variable '{e.name}'")
            return env[e.name]
        if isinstance(e, Arith):
            return self._arith(e, env)
        if isinstance(e, Compare):
            return self._compare(e, env)
        if isinstance(e, BoolOp):
            return self._boolop(e, env)
        if isinstance(e, Index):
            seq = _seq(self.eval(e.base, env))
            i = _int(self.eval(e.index, env))
            if i < 0 or i >= len(seq):
                raise IndexOutOfBounds(f"index {i} out of bounds for length {len(seq)}")
            return seq[i]
        if isinstance(e, Slice):
            seq = _seq(self.eval(e.base, env))
            n = len(seq)
            lo = _clamp(_int(self.eval(e.lo, env)), n) if e.lo is not None else 0
            hi = _clamp(_int(self.eval(e.hi, env)), n) if e.hi is not None else n
            return seq[lo:hi]
        if isinstance(e, Len):
            return len(_seq(self.eval(e.base, env)))
        if isinstance(e, Lambda):
            return Closure(e.params, e.body, tuple(env.items()))
        if isinstance(e, Call):
            return self._call(e, env)
        raise IRTypeError(f"cannot evaluate {e!r}")

    def _arith(self, e: Arith, env: Mapping[str, Value]) -> int:
        a = _int(self.eval(e.lhs, env))
        b = _int(self.eval(e.rhs, env))
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if b == 0:
            raise DivisionByZero("division by zero")
        return trunc_div(a, b) if e.op == "/" else trunc_mod(a, b)

    def _compare(self, e: Compare, env: Mapping[str, Value]) -> bool:
        a = self.eval(e.lhs, env)
        b = self.eval(e.rhs, env)
        if e.op in ("==", "!="):
            if kind_of(a) != kind_of(b) or kind_of(a) == "function":
                raise IRTypeError(f"cannot compare {kind_of(a)} with {kind_of(b)}")
            return (a == b) if e.op == "==" else (a != b)
        a, b = _int(a), _int(b)
        if e.op == "<":
            return a < b
        if e.op == "<=":
            return a <= b
        if e.op == ">":
            return a > b
        return a >= b

    def _boolop(self, e: BoolOp, env: Mapping[str, Value]) -> bool:
        if e.op == "not":
            return not _bool(self.eval(e.operands[0], env))
        if e.op == "and":
            for operand in e.operands:
                if not _bool(self.eval(operand, env)):
                    return False
            return True
        for operand in e.operands:
            if _bool(self.eval(operand, env)):
                return True
        return False

    def _call(self, e: Call, env: Mapping[str, Value]) -> Value:
        bound = env.get(e.op)
        if isinstance(bound, Closure):
            return self.apply(bound, [self.eval(a, env) for a in e.args])
        op = self.dsl.operator(e.op)
        builtin: Optional[str] = op.builtin if op is not None else None
        if e.op == ITE or builtin == ITE:
            if len(e.args) != 3:
                raise ArityMismatch(f"'{e.op}' takes 3 arguments, got {len(e.args)}")
            cond = _bool(self.eval(e.args[0], env))
            return self.eval(e.args[1] if cond else e.args[2], env)
        args = [self.eval(a, env) for a in e.args]
        if op is not None and op.body is not None:
            if len(args) != len(op.params):
                raise ArityMismatch(f"'{op.name}' takes {len(op.params)} arguments, got {len(args)}")
            env = dict(zip(op.param_names, args))
            plan = unfolding(op.name, op.body)
            if plan is None:
                return self.eval(op.body, env)
            return self._unfold(op.param_names, plan, env)
        prim_name = builtin or e.op
        prim = PRIMITIVES.get(prim_name)
        if prim is None:
            raise UnknownOperator(e.op)
        if len(args) != len(prim.params):
            raise ArityMismatch(f"'{e.op}' takes {len(prim.params)} arguments, got {len(args)}")
        return prim.impl(*args)

    def _unfold(self, params: Tuple[str, ...], plan: Unfolding, env: Dict[str, Value]) -> Value:
        """Runs the self-calls of ``plan`` as a loop; Python stack depth stays constant."""
        frames: List[Dict[str, Value]] = []
        while not _bool(self.eval(plan.guard, env)):
            frames.append(env)
            env = dict(zip(params, [self.eval(a, env) for a in plan.call_args]))
        value = self.eval(plan.base, env)
        for frame in reversed(frames):
            value = self.eval(plan.step, {**frame, REC: value})
        return value

    def apply(self, closure: Closure, args: list) -> Value:
        if len(args) != len(closure.params):
            raise ArityMismatch(
                f"function takes {len(closure.params)} arguments, got {len(args)}"
            )
        env: Dict[str, Value] = dict(closure.env)
        env.update(zip(closure.params, args))
        return self.eval(closure.body, env)


def eval_ir(
    e: IRExpr,
    env: Mapping[str, Value],
    dsl: DslDefinition,
    fuel: int = DEFAULT_FUEL,
) -> Value:
    """
    Evaluate an IR expression under the recursive operator semantics of ``dsl``.

    Raises:
        UnknownOperator: A call resolves to nothing
        ArityMismatch: Wrong argument count
        IRTypeError: Ill-typed value
        FuelExhausted: More than ``fuel`` evaluation steps
        DivisionByZero: Division or remainder by zero
        IndexOutOfBounds: Index outside ``[0, len)``
    """
    try:
        return Evaluator(dsl, fuel).eval(e, env)
    except RecursionError:
        raise FuelExhausted("evaluation nested too deeply") from None
