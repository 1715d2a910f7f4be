"""
DSL definition containers: operators, rewrite rules, one-shot example and
enumeration grammar.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..types import AnyType, FunctionType, SourceType
from .nodes import Call, IntLit, IRExpr, Slice, Var, called_ops, walk


@dataclass(frozen=True)
class OperatorDef:
    """
    One DSL operator.

    Attributes:
        name: Operator name as used in candidates
        params: Ordered (name, type) pairs; lambda parameters have FunctionType
        returns: Result type
        body: Semantics in candidate syntax; None for builtin operators
        prompt_text: Python rendering shown to the model
        origin: "evidenced" or "completion"
        hidden: Helper operator, not offered to candidates
        builtin: Structural primitive implementing this operator
    """

    name: str
    params: Tuple[Tuple[str, AnyType], ...]
    returns: SourceType
    body: Optional[IRExpr]
    prompt_text: str = ""
    origin: str = "evidenced"
    hidden: bool = False
    builtin: Optional[str] = None

    @property
    def param_names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.params)

    @property
    def param_types(self) -> Tuple[AnyType, ...]:
        return tuple(t for _, t in self.params)

    @property
    def is_higher_order(self) -> bool:
        return any(isinstance(t, FunctionType) for t in self.param_types)

    @property
    def signature(self) -> str:
        params = ", ".join(f"{n}: {t}" for n, t in self.params)
        return f"{self.name}({params}) -> {self.returns}"


@dataclass(frozen=True)
class RewriteRule:
    """
    Codegen rule: a pattern over IR with ``?metavars`` and a text template
    whose ``{holes}`` name those metavariables. Output of a non-atomic rule
    is parenthesized when it becomes an operand of an infix operator.
    """

    pattern: IRExpr
    template: str
    priority: int = 0
    where: Tuple[Tuple[str, str], ...] = ()
    atomic: bool = True
    source: str = ""

    @property
    def head(self) -> Optional[str]:
        return self.pattern.op if isinstance(self.pattern, Call) else None


@dataclass(frozen=True)
class InvariantExample:
    """One-shot example for invariant prompts: source, summary and one invariant per loop."""

    source: str
    ps: str
    invariants: Tuple[str, ...]


@dataclass(frozen=True)
class EnumerationGrammar:
    constants: Tuple[int, ...] = (0, 1)
    arith: Tuple[str, ...] = ("+", "*")
    compare: Tuple[str, ...] = ()


@dataclass(frozen=True)
class DslDefinition:
    name: str
    extension: str
    operators: Tuple[OperatorDef, ...]
    rules: Tuple[RewriteRule, ...] = ()
    invariant_example: Optional[InvariantExample] = None
    enumeration: EnumerationGrammar = field(default_factory=EnumerationGrammar)
    index_style: str = "brackets"
    output_template: str = "{expr}"

    def __post_init__(self) -> None:
        object.__setattr__(self, "_by_name", {op.name: op for op in self.operators})

    def operator(self, name: str) -> Optional[OperatorDef]:
        by_name: Dict[str, OperatorDef] = self._by_name  # type: ignore[attr-defined]
        return by_name.get(name)

    def has_operator(self, name: str) -> bool:
        return self.operator(name) is not None

    @property
    def public_operators(self) -> Tuple[OperatorDef, ...]:
        return tuple(op for op in self.operators if not op.hidden)


def render_operator_semantics(dsl: DslDefinition) -> str:
    """Prompt texts of the visible operators, in catalog order, separated by blank lines."""
    blocks = [op.prompt_text.strip("\n") for op in dsl.public_operators if op.prompt_text.strip()]
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def _is_tail_slice(arg: IRExpr, containers: Tuple[str, ...]) -> bool:
    return (
        isinstance(arg, Slice)
        and isinstance(arg.base, Var)
        and arg.base.name in containers
        and isinstance(arg.lo, IntLit)
        and arg.lo.value >= 1
        and arg.hi is None
    )


def recursion_problems(dsl: DslDefinition) -> List[str]:
    """
    Termination problems in operator bodies.

    Every self-call must pass ``p[k:]`` (k >= 1) for some list or matrix
    parameter ``p``, and calls between distinct operators must not form a
    cycle.
    """
    problems: List[str] = []
    graph: Dict[str, frozenset] = {}
    for op in dsl.operators:
        if op.body is None:
            continue
        containers = tuple(
            n for n, t in op.params if isinstance(t, SourceType) and t.is_container
        )
        for node in walk(op.body):
            if isinstance(node, Call) and node.op == op.name:
                if not any(_is_tail_slice(a, containers) for a in node.args):
                    problems.append(f"{op.name}: recursive call without a shrinking argument")
        graph[op.name] = frozenset(
            n for n in called_ops(op.body) if n != op.name and dsl.has_operator(n)
        )

    state: Dict[str, int] = {}

    def visit(name: str, path: Tuple[str, ...]) -> None:
        if state.get(name) == 2:
            return
        if state.get(name) == 1:
            problems.append(f"mutual recursion: {' -> '.join(path + (name,))}")
            return
        state[name] = 1
        for callee in sorted(graph.get(name, ())):
            visit(callee, path + (name,))
        state[name] = 2

    for name in graph:
        visit(name, ())
    return problems
