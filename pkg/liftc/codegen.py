"""
Code generation: rewrite a verified program summary into the concrete syntax
of its DSL using the rewrite rules shipped with the catalog.
"""
import logging
from typing import Dict, List, Optional, Tuple, Union

from .errors import NoRuleMatches
from .ir.dsl import DslDefinition, RewriteRule
from .ir.nodes import (
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
    children,
)
from .ir.printer import print_ir

logger = logging.getLogger(__name__)

Binding = Union[IRExpr, str]

_PREC = {"or": 1, "and": 2, "not": 3, "compare": 4, "+": 5, "-": 5, "*": 6, "/": 6, "%": 6}
_ATOM = 9


def _label(e: IRExpr) -> tuple:
    """Non-expression fields of a node, used for structural matching."""
    if isinstance(e, (Arith, Compare, BoolOp)):
        return (e.op,)
    if isinstance(e, Var):
        return (e.name,)
    if isinstance(e, (IntLit, BoolLit)):
        return (e.value,)
    if isinstance(e, Slice):
        return (e.lo is None, e.hi is None)
    return ()


def _satisfies(kind: str, e: IRExpr) -> bool:
    if kind == "var":
        return isinstance(e, Var)
    if kind == "lambda":
        return isinstance(e, Lambda)
    if kind == "call":
        return isinstance(e, Call)
    return isinstance(e, IntLit)


def match(pattern: IRExpr, e: IRExpr, where: Dict[str, str]) -> Optional[Dict[str, Binding]]:
    """
    Match ``e`` against a rule pattern.

    Returns:
        Metavariable bindings (expressions, or parameter names for lambda
        parameter metavariables), or None when the pattern does not apply
    """
    bindings: Dict[str, Binding] = {}

    def go(p: IRExpr, x: IRExpr) -> bool:
        if isinstance(p, MetaVar):
            kind = where.get(p.name)
            if kind is not None and not _satisfies(kind, x):
                return False
            bindings[p.name] = x
            return True
        if isinstance(p, Lambda):
            if not isinstance(x, Lambda) or len(p.params) != len(x.params):
                return False
            for pp, xp in zip(p.params, x.params):
                if pp.startswith("?"):
                    bindings[pp[1:]] = xp
                elif pp != xp:
                    return False
            return go(p.body, x.body)
        if isinstance(p, Call):
            if not isinstance(x, Call) or p.op != x.op or len(p.args) != len(x.args):
                return False
            return all(go(pa, xa) for pa, xa in zip(p.args, x.args))
        if type(p) is not type(x) or _label(p) != _label(x):
            return False
        return all(go(pc, xc) for pc, xc in zip(children(p), children(x)))

    return bindings if go(pattern, e) else None


class Emitter:
    """
    Bottom-up renderer for one DSL.

    Rules are tried by descending priority, then in catalog order.
    """

    def __init__(self, dsl: DslDefinition):
        self.dsl = dsl
        order = sorted(range(len(dsl.rules)), key=lambda i: (-dsl.rules[i].priority, i))
        self.rules: Tuple[RewriteRule, ...] = tuple(dsl.rules[i] for i in order)

    def emit(self, e: IRExpr) -> str:
        return self._show(e)[0]

    def _wrap(self, e: IRExpr, limit: int) -> str:
        text, prec = self._show(e)
        return f"({text})" if prec < limit else text

    def _show(self, e: IRExpr) -> Tuple[str, int]:
        if isinstance(e, Var):
            return e.name, _ATOM
        if isinstance(e, IntLit):
            return str(e.value), (7 if e.value < 0 else _ATOM)
        if isinstance(e, BoolLit):
            return ("True" if e.value else "False"), _ATOM
        if isinstance(e, Call):
            return self._call(e)
        if isinstance(e, Lambda):
            return f"lambda {', '.join(e.params)}: {self.emit(e.body)}", 0
        if isinstance(e, Index):
            return self._index(e), _ATOM
        if isinstance(e, Slice):
            lo = self.emit(e.lo) if e.lo is not None else ""
            hi = self.emit(e.hi) if e.hi is not None else ""
            return f"{self._wrap(e.base, _ATOM)}[{lo}:{hi}]", _ATOM
        if isinstance(e, Len):
            return f"len({self.emit(e.base)})", _ATOM
        if isinstance(e, Arith):
            p = _PREC[e.op]
            return f"{self._wrap(e.lhs, p)} {e.op} {self._wrap(e.rhs, p + 1)}", p
        if isinstance(e, Compare):
            p = _PREC["compare"]
            return f"{self._wrap(e.lhs, p + 1)} {e.op} {self._wrap(e.rhs, p + 1)}", p
        if isinstance(e, BoolOp) and e.op == "not":
            return f"not {self._wrap(e.operands[0], _PREC['not'])}", _PREC["not"]
        if isinstance(e, BoolOp):
            p = _PREC[e.op]
            return f" {e.op} ".join(self._wrap(o, p + 1) for o in e.operands), p
        raise NoRuleMatches(f"cannot emit {e!r}", e)

    def _index(self, e: Index) -> str:
        if self.dsl.index_style == "brackets":
            return f"{self._wrap(e.base, _ATOM)}[{self.emit(e.index)}]"
        indices: List[str] = []
        node: IRExpr = e
        while isinstance(node, Index):
            indices.append(self.emit(node.index))
            node = node.base
        return f"{self._wrap(node, _ATOM)}({', '.join(reversed(indices))})"

    def _call(self, e: Call) -> Tuple[str, int]:
        for rule in self.rules:
            if rule.head != e.op:
                continue
            bindings = match(rule.pattern, e, dict(rule.where))
            if bindings is None:
                continue
            rendered = {
                name: value if isinstance(value, str) else self.emit(value)
                for name, value in bindings.items()
            }
            return rule.template.format(**rendered), (_ATOM if rule.atomic else 0)
        raise NoRuleMatches(f"no rewrite rule matches '{print_ir(e)}'", e)


def emit_target(ps: IRExpr, dsl: DslDefinition) -> str:
    """
    Render a program summary in the DSL's concrete syntax.

    Args:
        ps: Verified program summary
        dsl: DSL whose rewrite rules and output template apply

    Returns:
        Target code text

    Raises:
        NoRuleMatches: A call in ``ps`` is covered by no rule
    """
    text = Emitter(dsl).emit(ps)
    return dsl.output_template.format(expr=text)


def check_rule_coverage(dsl: DslDefinition) -> List[str]:
    """Visible operators that head no rewrite rule, in catalog order."""
    heads = {rule.head for rule in dsl.rules}
    return [op.name for op in dsl.public_operators if op.name not in heads]


def normalize_whitespace(text: str) -> str:
    return " ".join(text.split())
