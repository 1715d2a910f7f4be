"""
Printing, canonicalization and size metrics for IR expressions.

Printed text is valid candidate surface syntax and parses back to the same
tree.
"""
import hashlib
from dataclasses import dataclass
from typing import Dict

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
    children,
    map_children,
)

# Python precedence levels for the subset we print
_PREC = {
    "lambda": 0,
    "or": 1,
    "and": 2,
    "not": 3,
    "compare": 4,
    "+": 5,
    "-": 5,
    "*": 6,
    "/": 6,
    "%": 6,
    "atom": 9,
}


def _prec(e: IRExpr) -> int:
    if isinstance(e, Lambda):
        return _PREC["lambda"]
    if isinstance(e, BoolOp):
        return _PREC[e.op]
    if isinstance(e, Compare):
        return _PREC["compare"]
    if isinstance(e, Arith):
        return _PREC[e.op]
    if isinstance(e, IntLit) and e.value < 0:
        return 7
    return _PREC["atom"]


class _Printer:
    def __init__(self, full_parens: bool):
        self.full = full_parens

    def wrap(self, child: IRExpr, limit: int) -> str:
        text = self.show(child)
        if self.full and isinstance(child, (Arith, Compare, BoolOp)):
            return text
        return f"({text})" if _prec(child) < limit else text

    def show(self, e: IRExpr) -> str:
        if isinstance(e, Var):
            return e.name
        if isinstance(e, MetaVar):
            return f"?{e.name}"
        if isinstance(e, BoolLit):
            return "True" if e.value else "False"
        if isinstance(e, IntLit):
            return str(e.value)
        if isinstance(e, Call):
            return f"{e.op}({', '.join(self.show(a) for a in e.args)})"
        if isinstance(e, Lambda):
            return f"lambda {', '.join(e.params)}: {self.show(e.body)}"
        if isinstance(e, Index):
            return f"{self.wrap(e.base, _PREC['atom'])}[{self.show(e.index)}]"
        if isinstance(e, Slice):
            lo = self.show(e.lo) if e.lo is not None else ""
            hi = self.show(e.hi) if e.hi is not None else ""
            return f"{self.wrap(e.base, _PREC['atom'])}[{lo}:{hi}]"
        if isinstance(e, Len):
            return f"len({self.show(e.base)})"
        if isinstance(e, Arith):
            p = _PREC[e.op]
            text = f"{self.wrap(e.lhs, p)} {e.op} {self.wrap(e.rhs, p + 1)}"
        elif isinstance(e, Compare):
            p = _PREC["compare"]
            text = f"{self.wrap(e.lhs, p + 1)} {e.op} {self.wrap(e.rhs, p + 1)}"
        elif isinstance(e, BoolOp) and e.op == "not":
            text = f"not {self.wrap(e.operands[0], _PREC['not'])}"
        elif isinstance(e, BoolOp):
            p = _PREC[e.op]
            text = f" {e.op} ".join(self.wrap(o, p + 1) for o in e.operands)
        else:
            raise TypeError(f"cannot print {e!r}")
        return f"({text})" if self.full else text


def print_ir(e: IRExpr) -> str:
    """Readable candidate syntax with minimal parentheses."""
    return _Printer(full_parens=False).show(e)


@dataclass(frozen=True)
class CanonicalForm:
    text: str
    digest: str


def _alpha_rename(e: IRExpr, mapping: Dict[str, str], counter: list) -> IRExpr:
    if isinstance(e, Var):
        return Var(mapping.get(e.name, e.name))
    if isinstance(e, Lambda):
        inner = dict(mapping)
        params = []
        for p in e.params:
            fresh = f"_{counter[0]}"
            counter[0] += 1
            inner[p] = fresh
            params.append(fresh)
        return Lambda(tuple(params), _alpha_rename(e.body, inner, counter))
    if isinstance(e, Call):
        op = mapping.get(e.op, e.op)
        return Call(op, tuple(_alpha_rename(a, mapping, counter) for a in e.args))
    return map_children(e, lambda c: _alpha_rename(c, mapping, counter))


def alpha_normalize(e: IRExpr) -> IRExpr:
    """Rename lambda parameters to ``_0``, ``_1``, ... in pre-order."""
    return _alpha_rename(e, {}, [0])


def normalize_candidate(e: IRExpr) -> CanonicalForm:
    """
    Canonical text and 64-bit hash of a candidate.

    Lambda parameters are renamed positionally and every compound operator
    application is parenthesized; operands are never reordered.
    """
    text = _Printer(full_parens=True).show(alpha_normalize(e))
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).hexdigest()
    return CanonicalForm(text, digest)


def expr_size(e: IRExpr) -> int:
    """
    Number of operator applications: Arith, Compare, BoolOp and Call nodes.

    Leaves, indexing, slicing and ``len`` count zero; a lambda counts its body.
    """
    own = 1 if isinstance(e, (Arith, Compare, BoolOp, Call)) else 0
    return own + sum(expr_size(c) for c in children(e))


def expr_depth(e: IRExpr) -> int:
    """Height of the application tree under the same counting rule as expr_size."""
    inner = max((expr_depth(c) for c in children(e)), default=0)
    return inner + (1 if isinstance(e, (Arith, Compare, BoolOp, Call)) else 0)
