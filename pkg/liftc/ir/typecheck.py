"""
Type inference for IR expressions against a DSL.

A type of ``None`` means "unknown" (an unannotated parameter) and unifies
with anything.
"""
from typing import Mapping, Optional

from ..errors import ArityMismatch, IRTypeError, UnknownOperator
from ..types import AnyType, FunctionType, SourceType
from .dsl import DslDefinition
from .nodes import (
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
    MetaVar,
    Slice,
    Var,
)
from .primitives import ITE, PRIMITIVES

INT, BOOL = SourceType.INT, SourceType.BOOL

TypeEnv = Mapping[str, Optional[AnyType]]


class IRTypeChecker:
    """
    Infers IR expression types.

    Args:
        dsl: DSL whose operators may be called
        allow_hidden: Whether hidden helper operators resolve (true inside operator bodies)
    """

    def __init__(self, dsl: DslDefinition, allow_hidden: bool = True):
        self.dsl = dsl
        self.allow_hidden = allow_hidden

    def infer(self, e: IRExpr, env: TypeEnv) -> Optional[AnyType]:
        if isinstance(e, IntLit):
            return INT
        if isinstance(e, BoolLit):
            return BOOL
        if isinstance(e, MetaVar):
            return None
        if isinstance(e, Var):
            if e.name not in env:
                raise IRTypeError(f"unbound variable '{e.name}'")
            return env[e.name]
        if isinstance(e, Arith):
            self.expect(e.lhs, INT, env)
            self.expect(e.rhs, INT, env)
            return INT
        if isinstance(e, Compare):
            if e.op in ("==", "!="):
                lhs = self.infer(e.lhs, env)
                if isinstance(lhs, FunctionType):
                    raise IRTypeError("functions cannot be compared")
                self.expect(e.rhs, lhs, env)
            else:
                self.expect(e.lhs, INT, env)
                self.expect(e.rhs, INT, env)
            return BOOL
        if isinstance(e, BoolOp):
            if e.op == "not" and len(e.operands) != 1:
                raise ArityMismatch("'not' takes one operand")
            for operand in e.operands:
                self.expect(operand, BOOL, env)
            return BOOL
        if isinstance(e, Index):
            base = self._container(e.base, env)
            self.expect(e.index, INT, env)
            return base.element if base is not None else None
        if isinstance(e, Slice):
            base = self._container(e.base, env)
            for bound in (e.lo, e.hi):
                if bound is not None:
                    self.expect(bound, INT, env)
            return base
        if isinstance(e, Len):
            self._container(e.base, env)
            return INT
        if isinstance(e, Lambda):
            raise IRTypeError("lambda outside operator argument position")
        if isinstance(e, Call):
            return self._call(e, env)
        raise IRTypeError(f"unknown expression {e!r}")

    def expect(self, e: IRExpr, expected: Optional[AnyType], env: TypeEnv) -> Optional[AnyType]:
        actual = self.infer(e, env)
        return unify(expected, actual)

    def _container(self, e: IRExpr, env: TypeEnv) -> Optional[SourceType]:
        found = self.infer(e, env)
        if found is None:
            return None
        if not isinstance(found, SourceType) or not found.is_container:
            raise IRTypeError(f"expected a list or matrix, found {found}")
        return found

    def _call(self, e: Call, env: TypeEnv) -> Optional[AnyType]:
        bound = env.get(e.op) if e.op in env else None
        if isinstance(bound, FunctionType):
            self._args(e, bound.params, env)
            return bound.ret
        op = self.dsl.operator(e.op)
        if op is not None and op.hidden and not self.allow_hidden:
            op = None
        if e.op == ITE or (op is not None and op.builtin == ITE):
            if len(e.args) != 3:
                raise ArityMismatch(f"'{e.op}' takes 3 arguments, got {len(e.args)}")
            self.expect(e.args[0], BOOL, env)
            then = self.infer(e.args[1], env)
            if isinstance(then, FunctionType):
                raise IRTypeError("conditional over functions")
            return unify(then, self.infer(e.args[2], env))
        if op is not None:
            if op.builtin is not None:
                prim = PRIMITIVES[op.builtin]
                self._args(e, prim.params, env)
                return prim.ret
            self._args(e, op.param_types, env)
            return op.returns
        if e.op in PRIMITIVES:
            prim = PRIMITIVES[e.op]
            self._args(e, prim.params, env)
            return prim.ret
        raise UnknownOperator(e.op)

    def _args(self, e: Call, params: tuple, env: TypeEnv) -> None:
        if len(e.args) != len(params):
            raise ArityMismatch(f"'{e.op}' takes {len(params)} arguments, got {len(e.args)}")
        for arg, param in zip(e.args, params):
            if isinstance(param, FunctionType):
                self.check_lambda(arg, param, env)
            elif isinstance(arg, Lambda):
                raise IRTypeError(f"'{e.op}' does not take a function argument here")
            else:
                self.expect(arg, param, env)

    def check_lambda(self, arg: IRExpr, ftype: FunctionType, env: TypeEnv) -> None:
        if isinstance(arg, MetaVar):
            return
        if not isinstance(arg, Lambda):
            found = self.infer(arg, env)
            if found is not None and found != ftype:
                raise IRTypeError(f"expected a function {ftype}")
            return
        if len(arg.params) != len(ftype.params):
            raise ArityMismatch(
                f"lambda takes {len(arg.params)} parameters, expected {len(ftype.params)}"
            )
        inner = dict(env)
        inner.update(zip(arg.params, ftype.params))
        self.expect(arg.body, ftype.ret, inner)


def unify(expected: Optional[AnyType], actual: Optional[AnyType]) -> Optional[AnyType]:
    if expected is None:
        return actual
    if actual is None or actual == expected:
        return expected
    raise IRTypeError(f"expected {expected}, found {actual}")
