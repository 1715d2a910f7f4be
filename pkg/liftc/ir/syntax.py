"""
Conversion from Python expression syntax (via the ``ast`` module) to IR.

Only the restricted candidate language is accepted. Anything else raises
:class:`UnsupportedConstruct` carrying a stable rejection reason and the
source location of the offending node.
"""
import ast
from typing import Optional

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
    Slice,
    Var,
)
from .primitives import ITE

# Rejection reasons
LOOP_CONSTRUCT = "LoopConstruct"
COMPREHENSION = "Comprehension"
MULTIPLE_STATEMENTS = "MultipleStatements"
UNKNOWN_FUNCTION = "UnknownFunction"
UNSUPPORTED_SYNTAX = "UnsupportedSyntax"
ARITY_OR_TYPE = "ArityOrType"
NOT_A_FUNCTION_DEF = "NotAFunctionDef"


class UnsupportedConstruct(Exception):
    """Raised while converting syntax that falls outside the candidate language."""

    def __init__(self, reason: str, detail: str, node: Optional[ast.AST] = None):
        super().__init__(f"{reason}: {detail}")
        self.reason = reason
        self.detail = detail
        self.line = getattr(node, "lineno", 0) or 0
        self.col = (getattr(node, "col_offset", -1) or 0) + 1 if node is not None else 0


_ARITH = {
    ast.Add: "+",
    ast.Sub: "-",
    ast.Mult: "*",
    ast.Div: "/",
    ast.FloorDiv: "/",
    ast.Mod: "%",
}

_UNSUPPORTED_BINOPS = {
    ast.Pow: "**",
    ast.LShift: "<<",
    ast.RShift: ">>",
    ast.BitOr: "|",
    ast.BitXor: "^",
    ast.BitAnd: "&",
    ast.MatMult: "@",
}

_COMPARE = {
    ast.Lt: "<",
    ast.LtE: "<=",
    ast.Gt: ">",
    ast.GtE: ">=",
    ast.Eq: "==",
    ast.NotEq: "!=",
}

_UNSUPPORTED_COMPARE = {ast.In: "in", ast.NotIn: "not in", ast.Is: "is", ast.IsNot: "is not"}

_LOOPS = (ast.ListComp, ast.GeneratorExp, ast.SetComp, ast.DictComp)

_TOKENS = {
    ast.List: "[",
    ast.Tuple: "(",
    ast.Dict: "{",
    ast.Set: "{",
    ast.Attribute: ".",
    ast.Starred: "*",
    ast.NamedExpr: ":=",
    ast.JoinedStr: "f-string",
    ast.Await: "await",
    ast.Yield: "yield",
    ast.YieldFrom: "yield",
}


def _unsupported(node: ast.AST, token: str) -> UnsupportedConstruct:
    return UnsupportedConstruct(UNSUPPORTED_SYNTAX, token, node)


class ExprConverter:
    """Pre-order walk from a Python expression AST to IR."""

    def convert(self, node: ast.AST) -> IRExpr:
        if isinstance(node, _LOOPS):
            raise UnsupportedConstruct(LOOP_CONSTRUCT, "comprehension", node)
        if isinstance(node, ast.Name):
            return Var(node.id)
        if isinstance(node, ast.Constant):
            return self._constant(node)
        if isinstance(node, ast.UnaryOp):
            return self._unary(node)
        if isinstance(node, ast.BinOp):
            return self._binop(node)
        if isinstance(node, ast.BoolOp):
            op = "and" if isinstance(node.op, ast.And) else "or"
            return BoolOp(op, tuple(self.convert(v) for v in node.values))
        if isinstance(node, ast.Compare):
            return self._compare(node)
        if isinstance(node, ast.IfExp):
            return Call(ITE, (self.convert(node.test), self.convert(node.body), self.convert(node.orelse)))
        if isinstance(node, ast.Call):
            return self._call(node)
        if isinstance(node, ast.Subscript):
            return self._subscript(node)
        if isinstance(node, ast.Lambda):
            raise _unsupported(node, "lambda")
        for kind, token in _TOKENS.items():
            if isinstance(node, kind):
                raise _unsupported(node, token)
        raise _unsupported(node, type(node).__name__)

    def _constant(self, node: ast.Constant) -> IRExpr:
        value = node.value
        if isinstance(value, bool):
            return BoolLit(value)
        if isinstance(value, int):
            return IntLit(value)
        if isinstance(value, str):
            return self._raise(node, '"')
        if value is None:
            return self._raise(node, "None")
        return self._raise(node, repr(value))

    def _raise(self, node: ast.AST, token: str) -> IRExpr:
        raise _unsupported(node, token)

    def _unary(self, node: ast.UnaryOp) -> IRExpr:
        if isinstance(node.op, ast.Not):
            return BoolOp("not", (self.convert(node.operand),))
        if isinstance(node.op, ast.UAdd):
            return self.convert(node.operand)
        if isinstance(node.op, ast.USub):
            operand = self.convert(node.operand)
            if isinstance(operand, IntLit):
                return IntLit(-operand.value)
            return Arith("-", IntLit(0), operand)
        raise _unsupported(node, "~")

    def _binop(self, node: ast.BinOp) -> IRExpr:
        if isinstance(node.op, ast.Mult) and (
            isinstance(node.left, ast.List) or isinstance(node.right, ast.List)
        ):
            raise UnsupportedConstruct(COMPREHENSION, "list replication", node)
        op = _ARITH.get(type(node.op))
        if op is None:
            raise _unsupported(node, _UNSUPPORTED_BINOPS.get(type(node.op), type(node.op).__name__))
        return Arith(op, self.convert(node.left), self.convert(node.right))

    def _compare(self, node: ast.Compare) -> IRExpr:
        operands = [node.left] + list(node.comparators)
        parts = []
        for i, op_node in enumerate(node.ops):
            op = _COMPARE.get(type(op_node))
            if op is None:
                raise _unsupported(node, _UNSUPPORTED_COMPARE.get(type(op_node), "?"))
            parts.append(Compare(op, self.convert(operands[i]), self.convert(operands[i + 1])))
        if len(parts) == 1:
            return parts[0]
        return BoolOp("and", tuple(parts))

    def _call(self, node: ast.Call) -> IRExpr:
        if not isinstance(node.func, ast.Name):
            if isinstance(node.func, ast.Attribute):
                raise _unsupported(node.func, ".")
            raise _unsupported(node.func, "(")
        if node.keywords:
            raise _unsupported(node.keywords[0].value, "=")
        for arg in node.args:
            if isinstance(arg, ast.Starred):
                raise _unsupported(arg, "*")
        name = node.func.id
        if name == "len":
            if len(node.args) != 1 or isinstance(node.args[0], ast.Lambda):
                raise UnsupportedConstruct(ARITY_OR_TYPE, "len takes one argument", node)
            return Len(self.convert(node.args[0]))
        args = tuple(
            self._lambda(a) if isinstance(a, ast.Lambda) else self.convert(a) for a in node.args
        )
        return Call(name, args)

    def _lambda(self, node: ast.Lambda) -> IRExpr:
        spec = node.args
        if spec.vararg or spec.kwarg:
            raise _unsupported(node, "*")
        if spec.defaults or spec.kw_defaults or spec.kwonlyargs:
            raise _unsupported(node, "=")
        params = tuple(a.arg for a in getattr(spec, "posonlyargs", [])) + tuple(
            a.arg for a in spec.args
        )
        return Lambda(params, self.convert(node.body))

    def _subscript(self, node: ast.Subscript) -> IRExpr:
        base = self.convert(node.value)
        index = node.slice
        if isinstance(index, ast.Slice):
            if index.step is not None:
                raise _unsupported(index.step, "::")
            lo = self.convert(index.lower) if index.lower is not None else None
            hi = self.convert(index.upper) if index.upper is not None else None
            return Slice(base, lo, hi)
        return Index(base, self.convert(index))


def parse_expr(text: str) -> IRExpr:
    """
    Parse one expression in candidate syntax into IR without name resolution.

    Raises:
        UnsupportedConstruct: Syntax outside the candidate language
        SyntaxError: Text is not a Python expression
    """
    tree = ast.parse(text.strip(), mode="eval")
    return ExprConverter().convert(tree.body)
