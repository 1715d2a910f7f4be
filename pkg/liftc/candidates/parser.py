"""
Parser for generated candidates.

Candidates are Python text: one ``def`` returning a single expression for a
program summary, one ``def`` per loop for invariants, or a bare expression.
Anything outside the DSL yields a :class:`Rejection`; this module never
raises on bad input.
"""
import ast
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from ..errors import ArityMismatch, IRTypeError, UnknownOperator
from ..frontend.ast import SourceProgram
from ..frontend.loops import program_variables
from ..ir.dsl import DslDefinition
from ..ir.nodes import IRExpr, Lambda, Var, map_children, substitute, walk
from ..ir.primitives import STRUCTURAL_NAMES
from ..ir.syntax import (
    ARITY_OR_TYPE,
    LOOP_CONSTRUCT,
    MULTIPLE_STATEMENTS,
    NOT_A_FUNCTION_DEF,
    UNKNOWN_FUNCTION,
    UNSUPPORTED_SYNTAX,
    ExprConverter,
    UnsupportedConstruct,
)
from ..ir.typecheck import IRTypeChecker
from ..types import SourceType

logger = logging.getLogger(__name__)

_PARSE_FAILURES = (SyntaxError, ValueError, RecursionError, OverflowError, MemoryError)


class CandidateKind(str, Enum):
    PS = "ps"
    INV = "inv"


@dataclass(frozen=True)
class Rejection:
    """Why a candidate was rejected, with a stable reason identifier."""

    reason: str
    detail: str = ""
    line: int = 0
    col: int = 0

    def __str__(self) -> str:
        detail = f"({self.detail})" if self.detail else ""
        return f"{self.reason}{detail} at {self.line}:{self.col}"


@dataclass(frozen=True)
class FunctionDef:
    name: str
    params: Tuple[str, ...]
    body: IRExpr


@dataclass(frozen=True)
class ParsedCandidate:
    kind: CandidateKind
    functions: Tuple[FunctionDef, ...]

    @property
    def expr(self) -> IRExpr:
        return self.functions[0].body

    @property
    def exprs(self) -> Tuple[IRExpr, ...]:
        return tuple(f.body for f in self.functions)


ParseResult = Union[ParsedCandidate, Rejection]


@dataclass(frozen=True)
class CandidateScope:
    """
    Source context for name binding.

    Attributes:
        params: Source parameters in order; summary parameters bind to these by position
        variables: Every program variable with its type; invariants may mention any of them
        return_type: Declared return type of the source program
    """

    params: Tuple[Tuple[str, SourceType], ...]
    variables: Mapping[str, SourceType] = field(default_factory=dict)
    return_type: Optional[SourceType] = None

    @classmethod
    def of(cls, program: SourceProgram) -> "CandidateScope":
        return cls(
            params=tuple((p.name, p.type) for p in program.params),
            variables=program_variables(program),
            return_type=program.return_type,
        )


_ANNOTATIONS = {
    "int": SourceType.INT,
    "bool": SourceType.BOOL,
    "List[int]": SourceType.INT_LIST,
    "list[int]": SourceType.INT_LIST,
    "List[List[int]]": SourceType.INT_MATRIX,
    "list[list[int]]": SourceType.INT_MATRIX,
}


def _annotation_type(node: Optional[ast.AST]) -> Optional[SourceType]:
    if node is None:
        return None
    try:
        return _ANNOTATIONS.get(ast.unparse(node).replace(" ", ""))
    except Exception:
        return None


def _reject(reason: str, detail: str, node: Optional[ast.AST]) -> Rejection:
    line = getattr(node, "lineno", 0) or 0
    col = getattr(node, "col_offset", -1) + 1 if node is not None else 0
    return Rejection(reason, detail, line, max(col, 0))


def _is_typing_import(stmt: ast.stmt) -> bool:
    return isinstance(stmt, ast.ImportFrom) and stmt.module == "typing"


def _is_docstring(stmt: ast.stmt) -> bool:
    return (
        isinstance(stmt, ast.Expr)
        and isinstance(stmt.value, ast.Constant)
        and isinstance(stmt.value.value, str)
    )


class _Failure(Exception):
    def __init__(self, rejection: Rejection):
        super().__init__(str(rejection))
        self.rejection = rejection


@dataclass
class _RawFunction:
    name: str
    params: Tuple[str, ...]
    annotations: Tuple[Optional[SourceType], ...]
    returns: Optional[SourceType]
    expr_node: ast.expr
    body: IRExpr


class CandidateParser:
    """
    Parses candidate text against one DSL.

    Args:
        dsl: DSL whose visible operators candidates may call
        scope: Optional source context for parameter binding and typing
    """

    def __init__(self, dsl: DslDefinition, scope: Optional[CandidateScope] = None):
        self.dsl = dsl
        self.scope = scope
        self.checker = IRTypeChecker(dsl, allow_hidden=False)
        self.allowed = {op.name for op in dsl.public_operators} | set(STRUCTURAL_NAMES)

    def parse(self, text: str, kind: CandidateKind) -> ParseResult:
        try:
            stmts = self._module(text)
            return self.parse_statements(stmts, kind)
        except _Failure as failure:
            return failure.rejection
        except _PARSE_FAILURES as e:
            return Rejection(UNSUPPORTED_SYNTAX, f"unparseable: {type(e).__name__}")

    def parse_joint(
        self, text: str, with_invariants: bool
    ) -> Union[Tuple[ParsedCandidate, Optional[ParsedCandidate]], Rejection]:
        """
        Split a joint answer into its summary (first def) and invariants (remaining defs).

        A loop-free source (``with_invariants`` false) needs only the summary.
        """
        try:
            stmts = self._module(text)
            defs = [s for s in stmts if isinstance(s, ast.FunctionDef)]
            for stmt in stmts:
                if not isinstance(stmt, ast.FunctionDef) and (defs or len(stmts) > 1):
                    return self._stray(stmt)
            ps = self.parse_statements(stmts[:1], CandidateKind.PS)
            if isinstance(ps, Rejection) or not with_invariants:
                return ps if isinstance(ps, Rejection) else (ps, None)
            invs = self.parse_statements(defs[1:], CandidateKind.INV)
            if isinstance(invs, Rejection):
                return invs
            return ps, invs
        except _Failure as failure:
            return failure.rejection
        except _PARSE_FAILURES as e:
            return Rejection(UNSUPPORTED_SYNTAX, f"unparseable: {type(e).__name__}")

    def _module(self, text: str) -> List[ast.stmt]:
        try:
            tree = ast.parse(text)
        except SyntaxError as e:
            raise _Failure(
                Rejection(UNSUPPORTED_SYNTAX, e.msg or "syntax error", e.lineno or 0, e.offset or 0)
            ) from None
        return [s for s in tree.body if not _is_typing_import(s)]

    def parse_statements(self, stmts: Sequence[ast.stmt], kind: CandidateKind) -> ParseResult:
        try:
            return ParsedCandidate(kind, self._functions(stmts, kind))
        except _Failure as failure:
            return failure.rejection
        except _PARSE_FAILURES as e:
            return Rejection(UNSUPPORTED_SYNTAX, f"unparseable: {type(e).__name__}")

    def _stray(self, stmt: ast.stmt) -> Rejection:
        if isinstance(stmt, (ast.For, ast.While, ast.AsyncFor)):
            return _reject(LOOP_CONSTRUCT, "loop", stmt)
        return _reject(NOT_A_FUNCTION_DEF, type(stmt).__name__, stmt)

    def _functions(self, stmts: Sequence[ast.stmt], kind: CandidateKind) -> Tuple[FunctionDef, ...]:
        if not stmts:
            raise _Failure(Rejection(NOT_A_FUNCTION_DEF, "empty candidate"))
        if len(stmts) == 1 and isinstance(stmts[0], ast.Expr) and not _is_docstring(stmts[0]):
            raw = [self._bare(stmts[0])]
        else:
            for stmt in stmts:
                if not isinstance(stmt, ast.FunctionDef):
                    raise _Failure(self._stray(stmt))
            if kind is CandidateKind.PS and len(stmts) > 1:
                raise _Failure(_reject(MULTIPLE_STATEMENTS, "more than one function", stmts[1]))
            raw = [self._structure(stmt) for stmt in stmts]  # type: ignore[arg-type]
        # names are resolved only after every function passed the structure walk
        for fn in raw:
            self._resolve_names(fn.expr_node)
        return tuple(self._typed(fn, kind) for fn in raw)

    def _bare(self, stmt: ast.Expr) -> _RawFunction:
        body = self._convert(stmt.value)
        return _RawFunction("<expr>", (), (), None, stmt.value, body)

    def _structure(self, fn: ast.FunctionDef) -> _RawFunction:
        if fn.decorator_list:
            raise _Failure(_reject(UNSUPPORTED_SYNTAX, "@", fn.decorator_list[0]))
        for node in ast.walk(fn):
            if isinstance(node, (ast.For, ast.While, ast.AsyncFor)):
                raise _Failure(_reject(LOOP_CONSTRUCT, "loop", node))
        spec = fn.args
        if spec.vararg or spec.kwarg:
            raise _Failure(_reject(UNSUPPORTED_SYNTAX, "*", fn))
        if spec.defaults or spec.kwonlyargs:
            raise _Failure(_reject(UNSUPPORTED_SYNTAX, "=", fn))
        body = list(fn.body)
        if len(body) > 1 and _is_docstring(body[0]):
            body = body[1:]
        if len(body) != 1:
            raise _Failure(_reject(MULTIPLE_STATEMENTS, "function body must be a single return", body[1]))
        ret = body[0]
        if not isinstance(ret, ast.Return):
            raise _Failure(_reject(MULTIPLE_STATEMENTS, "function body must be a single return", ret))
        if ret.value is None:
            raise _Failure(_reject(UNSUPPORTED_SYNTAX, "None", ret))
        args = list(spec.posonlyargs) + list(spec.args)
        return _RawFunction(
            name=fn.name,
            params=tuple(a.arg for a in args),
            annotations=tuple(_annotation_type(a.annotation) for a in args),
            returns=_annotation_type(fn.returns),
            expr_node=ret.value,
            body=self._convert(ret.value),
        )

    def _convert(self, node: ast.expr) -> IRExpr:
        try:
            return ExprConverter().convert(node)
        except UnsupportedConstruct as e:
            raise _Failure(Rejection(e.reason, e.detail, e.line, e.col)) from None

    def _resolve_names(self, node: ast.expr) -> None:
        for sub in ast.walk(node):
            if isinstance(sub, ast.Call) and isinstance(sub.func, ast.Name):
                name = sub.func.id
                if name != "len" and name not in self.allowed:
                    raise _Failure(_reject(UNKNOWN_FUNCTION, name, sub))

    def _typed(self, fn: _RawFunction, kind: CandidateKind) -> FunctionDef:
        env: Dict[str, Optional[SourceType]] = {}
        body = fn.body
        params = fn.params
        scope = self.scope
        if scope is not None and kind is CandidateKind.PS and fn.name != "<expr>":
            if len(fn.params) != len(scope.params):
                raise _Failure(
                    _reject(
                        ARITY_OR_TYPE,
                        f"summary takes {len(fn.params)} parameters, source takes {len(scope.params)}",
                        fn.expr_node,
                    )
                )
            mapping = {p: name for p, (name, _) in zip(fn.params, scope.params)}
            body = rename_free(body, mapping)
            params = tuple(name for name, _ in scope.params)
            for declared, (name, actual) in zip(fn.annotations, scope.params):
                if declared is not None and declared is not actual:
                    raise _Failure(
                        _reject(ARITY_OR_TYPE, f"parameter '{name}' annotated {declared}", fn.expr_node)
                    )
            env.update(scope.params)
        elif scope is not None and kind is CandidateKind.PS:
            env.update(scope.params)
        elif scope is not None:
            for p in fn.params:
                if p not in scope.variables:
                    raise _Failure(_reject(ARITY_OR_TYPE, f"unknown variable '{p}'", fn.expr_node))
            env.update(scope.variables)
        else:
            env.update(zip(fn.params, fn.annotations))
            if kind is CandidateKind.INV or fn.name == "<expr>":
                for node in walk(body):
                    if isinstance(node, Var) and node.name not in env:
                        env[node.name] = None

        try:
            found = self.checker.infer(body, env)
        except UnknownOperator as e:
            raise _Failure(_reject(UNKNOWN_FUNCTION, str(e), fn.expr_node)) from None
        except (IRTypeError, ArityMismatch) as e:
            raise _Failure(_reject(ARITY_OR_TYPE, str(e), fn.expr_node)) from None

        expected = SourceType.BOOL if kind is CandidateKind.INV else None
        if kind is CandidateKind.PS and scope is not None:
            expected = scope.return_type
        if expected is not None and found is not None and found is not expected:
            raise _Failure(_reject(ARITY_OR_TYPE, f"expected {expected}, found {found}", fn.expr_node))
        return FunctionDef(fn.name, params, body)


def rename_free(body: IRExpr, mapping: Mapping[str, str]) -> IRExpr:
    """
    Rename free variables, first renaming lambda parameters that would capture
    a new name.
    """
    mapping = {k: v for k, v in mapping.items() if k != v}
    if not mapping:
        return body
    targets = set(mapping.values())
    clashing = {
        p for n in walk(body) if isinstance(n, Lambda) for p in n.params if p in targets
    }
    if clashing:
        body = _rename_lambda_params(body, {p: f"{p}_" for p in clashing})
    return substitute(body, {k: Var(v) for k, v in mapping.items()})


def _rename_lambda_params(e: IRExpr, renames: Mapping[str, str]) -> IRExpr:
    if isinstance(e, Lambda):
        local = {p: renames[p] for p in e.params if p in renames}
        params = tuple(local.get(p, p) for p in e.params)
        body = substitute(e.body, {p: Var(n) for p, n in local.items()})
        return Lambda(params, _rename_lambda_params(body, renames))
    return map_children(e, lambda c: _rename_lambda_params(c, renames))


def parse_candidate(
    text: str,
    dsl: DslDefinition,
    kind: CandidateKind,
    scope: Optional[CandidateScope] = None,
) -> ParseResult:
    """
    Parse candidate text into IR or a Rejection.

    Checks run in order: structure, name resolution, typing. Program
    summaries bind their parameters to the source parameters by position
    when a scope is given.
    """
    result = CandidateParser(dsl, scope).parse(text, kind)
    if isinstance(result, Rejection):
        logger.debug(f"candidate rejected: {result}")
    return result
