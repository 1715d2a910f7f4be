"""
Candidate expression IR, executable operator semantics and DSL containers.
"""
from .dsl import (
    DslDefinition,
    EnumerationGrammar,
    InvariantExample,
    OperatorDef,
    RewriteRule,
    recursion_problems,
    render_operator_semantics,
)
from .evaluator import DEFAULT_FUEL, Evaluator, eval_ir, kind_of
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
    MetaVar,
    Slice,
    Var,
)
from .printer import CanonicalForm, expr_depth, expr_size, normalize_candidate, print_ir
from .syntax import parse_expr
from .typecheck import IRTypeChecker

__all__ = [
    "Arith",
    "BoolLit",
    "BoolOp",
    "Call",
    "CanonicalForm",
    "Closure",
    "Compare",
    "DEFAULT_FUEL",
    "DslDefinition",
    "EnumerationGrammar",
    "Evaluator",
    "IRExpr",
    "IRTypeChecker",
    "Index",
    "IntLit",
    "InvariantExample",
    "Lambda",
    "Len",
    "MetaVar",
    "OperatorDef",
    "RewriteRule",
    "Slice",
    "Var",
    "eval_ir",
    "expr_depth",
    "expr_size",
    "kind_of",
    "normalize_candidate",
    "parse_expr",
    "print_ir",
    "recursion_problems",
    "render_operator_semantics",
]
