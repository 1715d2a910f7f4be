"""
SMT-LIB encoding of verification conditions.

Lists and matrices become the algebraic datatypes ``IntList`` and
``IntMatrix``; DSL operators become recursive function definitions.
Higher-order operators are specialized per lambda argument: every distinct
(operator, lambda) pair yields a first-order function whose extra
parameters carry the lambda's captured variables, and applications of the
functional parameter are replaced by the lambda body.

In bounded mode every recursive definition is unrolled to a fixed depth and
all containers are assumed to have at most ``k`` elements, which makes the
query decidable at the price of only covering small inputs.
"""
import logging
from dataclasses import dataclass
from graphlib import TopologicalSorter
from typing import Callable, Dict, List, Optional, Set, Tuple, Union

from ..errors import UnencodableConstruct
from ..ir.dsl import DslDefinition, OperatorDef
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
    Slice,
    Var,
    free_vars,
)
from ..ir.primitives import ITE, PRIMITIVES
from ..ir.printer import alpha_normalize, print_ir
from ..types import FunctionType, SourceType
from .vcgen import RECTANGULAR, HoareVC

logger = logging.getLogger(__name__)

SORTS = {
    SourceType.INT: "Int",
    SourceType.BOOL: "Bool",
    SourceType.INT_LIST: "IntList",
    SourceType.INT_MATRIX: "IntMatrix",
}
_DEFAULT_VALUE = {"Int": "0", "Bool": "false", "IntList": "inil", "IntMatrix": "mnil"}

PRELUDE = """(set-logic ALL)
(set-option :produce-models true)
(declare-datatypes ((IntList 0)) (((inil) (icons (ihead Int) (itail IntList)))))
(declare-datatypes ((IntMatrix 0)) (((mnil) (mcons (mhead IntList) (mtail IntMatrix)))))
(define-fun tdiv ((a Int) (b Int)) Int
  (ite (>= a 0)
    (ite (> b 0) (div a b) (- (div a (- b))))
    (ite (> b 0) (- (div (- a) b)) (div (- a) (- b)))))
(define-fun tmod ((a Int) (b Int)) Int (- a (* b (tdiv a b))))"""


def unroll_depth(k: int) -> int:
    """Unrolling depth used for container bound ``k``."""
    return 2 * (k + 3)


@dataclass(frozen=True)
class FunRef:
    """Reference to a recursive function; resolved to a concrete name at render time."""

    name: str


SExpr = Union[str, int, FunRef, Tuple["SExpr", ...]]


def render(s: SExpr, resolve: Callable[[str], str]) -> str:
    if isinstance(s, tuple):
        return "(" + " ".join(render(x, resolve) for x in s) + ")"
    if isinstance(s, FunRef):
        return resolve(s.name)
    if isinstance(s, bool):
        return "true" if s else "false"
    if isinstance(s, int):
        return str(s) if s >= 0 else f"(- {-s})"
    return s


def _refs(s: SExpr) -> Set[str]:
    if isinstance(s, FunRef):
        return {s.name}
    if isinstance(s, tuple):
        out: Set[str] = set()
        for x in s:
            out |= _refs(x)
        return out
    return set()


@dataclass(frozen=True)
class SmtFunction:
    name: str
    params: Tuple[Tuple[str, str], ...]
    sort: str
    body: SExpr

    @property
    def callees(self) -> Set[str]:
        return _refs(self.body) - {self.name}

    def signature(self, name: str) -> str:
        params = " ".join(f"({p} {s})" for p, s in self.params)
        return f"{name} ({params}) {self.sort}"


def _tester(ctor: str) -> str:
    return f"(_ is {ctor})"


def _sequence_helpers(p: str, sort: str, elem: str, cons: str, nil: str, head: str, tail: str) -> List[SmtFunction]:
    is_cons = _tester(cons)
    f = {name: FunRef(f"{p}{name}") for name in ("len", "get", "drop", "take", "append", "set", "concat")}
    step = ("and", (">", "n", 0), (is_cons, "l"))
    return [
        SmtFunction(f"{p}len", (("l", sort),), "Int", ("ite", (is_cons, "l"), ("+", 1, (f["len"], (tail, "l"))), 0)),
        SmtFunction(
            f"{p}get",
            (("l", sort), ("i", "Int")),
            elem,
            ("ite", (is_cons, "l"), ("ite", ("=", "i", 0), (head, "l"), (f["get"], (tail, "l"), ("-", "i", 1))), _DEFAULT_VALUE[elem]),
        ),
        SmtFunction(f"{p}drop", (("l", sort), ("n", "Int")), sort, ("ite", step, (f["drop"], (tail, "l"), ("-", "n", 1)), "l")),
        SmtFunction(
            f"{p}take",
            (("l", sort), ("n", "Int")),
            sort,
            ("ite", step, (cons, (head, "l"), (f["take"], (tail, "l"), ("-", "n", 1))), nil),
        ),
        SmtFunction(
            f"{p}append",
            (("l", sort), ("x", elem)),
            sort,
            ("ite", (is_cons, "l"), (cons, (head, "l"), (f["append"], (tail, "l"), "x")), (cons, "x", nil)),
        ),
        SmtFunction(
            f"{p}set",
            (("l", sort), ("i", "Int"), ("x", elem)),
            sort,
            (
                "ite",
                (is_cons, "l"),
                ("ite", ("=", "i", 0), (cons, "x", (tail, "l")), (cons, (head, "l"), (f["set"], (tail, "l"), ("-", "i", 1), "x"))),
                nil,
            ),
        ),
        SmtFunction(
            f"{p}concat",
            (("l", sort), ("r", sort)),
            sort,
            ("ite", (is_cons, "l"), (cons, (head, "l"), (f["concat"], (tail, "l"), "r")), "r"),
        ),
    ]


def _helpers() -> List[SmtFunction]:
    rows = _tester("mcons")
    return (
        _sequence_helpers("i", "IntList", "Int", "icons", "inil", "ihead", "itail")
        + _sequence_helpers("m", "IntMatrix", "IntList", "mcons", "mnil", "mhead", "mtail")
        + [
            SmtFunction(
                "mrect",
                (("l", "IntMatrix"), ("n", "Int")),
                "Bool",
                ("ite", (rows, "l"), ("and", ("=", (FunRef("ilen"), ("mhead", "l")), "n"), (FunRef("mrect"), ("mtail", "l"), "n")), "true"),
            ),
            SmtFunction(
                "mbounded",
                (("l", "IntMatrix"), ("n", "Int")),
                "Bool",
                ("ite", (rows, "l"), ("and", ("<=", (FunRef("ilen"), ("mhead", "l")), "n"), (FunRef("mbounded"), ("mtail", "l"), "n")), "true"),
            ),
        ]
    )


HELPERS: Tuple[SmtFunction, ...] = tuple(_helpers())

_PRIMITIVE_ENCODING: Dict[str, SExpr] = {
    "list_prepend": "icons",
    "list_append": FunRef("iappend"),
    "list_set": FunRef("iset"),
    "list_concat": FunRef("iconcat"),
    "matrix_prepend": "mcons",
    "matrix_append": FunRef("mappend"),
    "matrix_set": FunRef("mset"),
    "matrix_concat": FunRef("mconcat"),
}


@dataclass(frozen=True)
class _Term:
    sexpr: SExpr
    type: SourceType


@dataclass(frozen=True)
class _Fn:
    """A lambda argument with the terms its free variables are bound to."""

    params: Tuple[str, ...]
    body: IRExpr
    param_types: Tuple[SourceType, ...]
    captured: Tuple[Tuple[str, _Term], ...]

    @property
    def key(self) -> tuple:
        shape = print_ir(alpha_normalize(Lambda(self.params, self.body)))
        return (shape, tuple((name, term.type) for name, term in self.captured))


_Binding = Union[_Term, _Fn]


class _Encoder:
    def __init__(self, dsl: DslDefinition):
        self.dsl = dsl
        self.functions: Dict[str, Optional[SmtFunction]] = {}
        self.names: Dict[tuple, str] = {}

    def formula(self, e: IRExpr, env: Dict[str, _Binding]) -> SExpr:
        sexpr, type_ = self.term(e, env)
        if type_ is not SourceType.BOOL:
            raise UnencodableConstruct(f"expected a formula, found {type_}: {print_ir(e)}", e)
        return sexpr

    def term(self, e: IRExpr, env: Dict[str, _Binding]) -> Tuple[SExpr, SourceType]:
        if isinstance(e, IntLit):
            return e.value, SourceType.INT
        if isinstance(e, BoolLit):
            return ("true" if e.value else "false"), SourceType.BOOL
        if isinstance(e, Var):
            bound = env.get(e.name)
            if not isinstance(bound, _Term):
                raise UnencodableConstruct(f"unbound variable '{e.name}'", e)
            return bound.sexpr, bound.type
        if isinstance(e, Arith):
            a, _ = self.term(e.lhs, env)
            b, _ = self.term(e.rhs, env)
            head = {"/": "tdiv", "%": "tmod"}.get(e.op, e.op)
            return (head, a, b), SourceType.INT
        if isinstance(e, Compare):
            a, _ = self.term(e.lhs, env)
            b, _ = self.term(e.rhs, env)
            if e.op == "==":
                return ("=", a, b), SourceType.BOOL
            if e.op == "!=":
                return ("not", ("=", a, b)), SourceType.BOOL
            return (e.op, a, b), SourceType.BOOL
        if isinstance(e, BoolOp):
            operands = tuple(self.term(o, env)[0] for o in e.operands)
            return (e.op,) + operands, SourceType.BOOL
        if isinstance(e, Index):
            base, type_ = self.term(e.base, env)
            index, _ = self.term(e.index, env)
            return (FunRef(self._prefix(type_, e) + "get"), base, index), type_.element
        if isinstance(e, Slice):
            return self._slice(e, env)
        if isinstance(e, Len):
            base, type_ = self.term(e.base, env)
            return (FunRef(self._prefix(type_, e) + "len"), base), SourceType.INT
        if isinstance(e, Call):
            return self._call(e, env)
        raise UnencodableConstruct(f"cannot encode {print_ir(e)}", e)

    def _prefix(self, type_: SourceType, e: IRExpr) -> str:
        if type_ is SourceType.INT_LIST:
            return "i"
        if type_ is SourceType.INT_MATRIX:
            return "m"
        raise UnencodableConstruct(f"not a list or matrix: {print_ir(e)}", e)

    def _slice(self, e: Slice, env: Dict[str, _Binding]) -> Tuple[SExpr, SourceType]:
        base, type_ = self.term(e.base, env)
        p = self._prefix(type_, e)
        result: SExpr = base
        lo: Optional[SExpr] = self.term(e.lo, env)[0] if e.lo is not None else None
        if lo is not None:
            result = (FunRef(p + "drop"), result, lo)
        if e.hi is not None:
            hi, _ = self.term(e.hi, env)
            count = hi if lo is None else ("-", hi, ("ite", (">", lo, 0), lo, 0))
            result = (FunRef(p + "take"), result, count)
        return result, type_

    def _call(self, e: Call, env: Dict[str, _Binding]) -> Tuple[SExpr, SourceType]:
        if e.op == RECTANGULAR:
            m, _ = self.term(e.args[0], env)
            first_row = (FunRef("ilen"), (FunRef("mget"), m, 0))
            return (FunRef("mrect"), m, first_row), SourceType.BOOL
        bound = env.get(e.op)
        if isinstance(bound, _Fn):
            return self._apply(bound, e, env)
        op = self.dsl.operator(e.op)
        builtin = op.builtin if op is not None else None
        if e.op == ITE or builtin == ITE:
            cond, _ = self.term(e.args[0], env)
            a, type_ = self.term(e.args[1], env)
            b, _ = self.term(e.args[2], env)
            return ("ite", cond, a, b), type_
        if op is not None and op.body is not None:
            return self._specialized_call(op, e, env)
        name = builtin or e.op
        prim = PRIMITIVES.get(name)
        if prim is None:
            raise UnencodableConstruct(f"unknown operator '{e.op}'", e)
        if name == "list_empty":
            return "inil", prim.ret
        if name == "matrix_empty":
            return "mnil", prim.ret
        args = tuple(self.term(a, env)[0] for a in e.args)
        return (_PRIMITIVE_ENCODING[name],) + args, prim.ret

    def _apply(self, fn: _Fn, e: Call, env: Dict[str, _Binding]) -> Tuple[SExpr, SourceType]:
        if len(e.args) != len(fn.params):
            raise UnencodableConstruct(f"'{e.op}' applied to {len(e.args)} arguments", e)
        inner: Dict[str, _Binding] = dict(fn.captured)
        for name, type_, arg in zip(fn.params, fn.param_types, e.args):
            inner[name] = _Term(self.term(arg, env)[0], type_)
        return self.term(fn.body, inner)

    def _function_arg(self, arg: IRExpr, type_: FunctionType, env: Dict[str, _Binding]) -> _Fn:
        if isinstance(arg, Var) and isinstance(env.get(arg.name), _Fn):
            return env[arg.name]  # type: ignore[return-value]
        if not isinstance(arg, Lambda) or len(arg.params) != len(type_.params):
            raise UnencodableConstruct(f"expected a lambda of type {type_}: {print_ir(arg)}", arg)
        captured = []
        for name in sorted(free_vars(arg)):
            bound = env.get(name)
            if not isinstance(bound, _Term):
                raise UnencodableConstruct(f"lambda captures unsupported binding '{name}'", arg)
            captured.append((name, bound))
        return _Fn(arg.params, arg.body, type_.params, tuple(captured))

    def _specialized_call(self, op: OperatorDef, e: Call, env: Dict[str, _Binding]) -> Tuple[SExpr, SourceType]:
        if len(e.args) != len(op.params):
            raise UnencodableConstruct(f"'{op.name}' takes {len(op.params)} arguments", e)
        args: List[SExpr] = []
        fns: List[Tuple[str, _Fn]] = []
        for (name, type_), arg in zip(op.params, e.args):
            if isinstance(type_, FunctionType):
                fns.append((name, self._function_arg(arg, type_, env)))
            else:
                args.append(self.term(arg, env)[0])
        smt_name = self._specialize(op, fns)
        args += [term.sexpr for _, fn in fns for _, term in fn.captured]
        if not args:
            return FunRef(smt_name), op.returns
        return (FunRef(smt_name),) + tuple(args), op.returns

    def _specialize(self, op: OperatorDef, fns: List[Tuple[str, _Fn]]) -> str:
        key = (op.name, tuple(fn.key for _, fn in fns))
        if key in self.names:
            return self.names[key]
        if fns:
            count = sum(1 for k in self.names if k[0] == op.name)
            name = f"op_{op.name}__{count}"
        else:
            name = f"op_{op.name}"
        self.names[key] = name
        self.functions[name] = None

        params: List[Tuple[str, str]] = []
        env: Dict[str, _Binding] = {}
        for pname, ptype in op.params:
            if isinstance(ptype, SourceType):
                params.append((f"p_{pname}", SORTS[ptype]))
                env[pname] = _Term(f"p_{pname}", ptype)
        for j, (pname, fn) in enumerate(fns):
            captured = []
            for cname, term in fn.captured:
                symbol = f"c{j}_{cname}"
                params.append((symbol, SORTS[term.type]))
                captured.append((cname, _Term(symbol, term.type)))
            env[pname] = _Fn(fn.params, fn.body, fn.param_types, tuple(captured))
        assert op.body is not None
        body, _ = self.term(op.body, env)
        self.functions[name] = SmtFunction(name, tuple(params), SORTS[op.returns], body)
        return name


@dataclass(frozen=True)
class SmtScript:
    """
    A self-contained solver query; ``unsat`` means the condition holds.

    Attributes:
        text: SMT-LIB 2.6 script
        bound: Container bound for bounded queries, None otherwise
        description: Which condition the script encodes
    """

    text: str
    bound: Optional[int] = None
    description: str = ""


def _definitions(functions: List[SmtFunction], bound: Optional[int]) -> Tuple[List[str], Callable[[str], str]]:
    if bound is None:
        signatures = " ".join(f"({fn.signature(fn.name)})" for fn in functions)
        bodies = " ".join(render(fn.body, lambda n: n) for fn in functions)
        return [f"(define-funs-rec ({signatures})\n  ({bodies}))"], (lambda n: n)

    depth = unroll_depth(bound)
    by_name = {fn.name: fn for fn in functions}
    order = list(TopologicalSorter({fn.name: fn.callees for fn in functions}).static_order())
    lines: List[str] = []
    for d in range(depth + 1):
        for name in order:
            fn = by_name[name]
            if d == 0:
                body = _DEFAULT_VALUE[fn.sort]
            else:
                body = render(fn.body, lambda n, d=d, own=name: f"{n}__{d - 1}" if n == own else f"{n}__{d}")
            lines.append(f"(define-fun {fn.signature(f'{name}__{d}')} {body})")
    return lines, (lambda n: f"{n}__{depth}")


def encode_smt(vc: HoareVC, dsl: DslDefinition, bound: Optional[int] = None) -> SmtScript:
    """
    Encode one verification condition as a solver query.

    Args:
        vc: Condition to encode
        dsl: DSL whose operators appear in the condition
        bound: When set, unroll recursion and assume every container has at
            most ``bound`` elements

    Returns:
        Script whose satisfiability means the condition is refuted

    Raises:
        UnencodableConstruct: A construct has no encoding
    """
    encoder = _Encoder(dsl)
    env: Dict[str, _Binding] = {name: _Term(f"v_{name}", type_) for name, type_ in vc.declarations}
    hypotheses: List[SExpr] = [encoder.formula(h, env) for h in vc.hypotheses]
    goal = encoder.formula(vc.conclusion, env)
    if bound is not None:
        for name, type_ in vc.declarations:
            if type_ is SourceType.INT_LIST:
                hypotheses.append(("<=", (FunRef("ilen"), f"v_{name}"), bound))
            elif type_ is SourceType.INT_MATRIX:
                hypotheses.append(("<=", (FunRef("mlen"), f"v_{name}"), bound))
                hypotheses.append((FunRef("mbounded"), f"v_{name}", bound))

    functions = list(HELPERS) + [fn for fn in encoder.functions.values() if fn is not None]
    definitions, resolve = _definitions(functions, bound)
    mode = f" (bounded, k={bound})" if bound is not None else ""
    lines = [f"; {vc.describe()}{mode}", PRELUDE, *definitions]
    lines += [f"(declare-const v_{name} {SORTS[type_]})" for name, type_ in vc.declarations]
    lines += [f"(assert {render(h, resolve)})" for h in hypotheses]
    lines += [f"(assert (not {render(goal, resolve)}))", "(check-sat)", "(get-model)"]
    logger.debug(f"Encoded {vc.describe()}{mode} with {len(encoder.functions)} operator definitions")
    return SmtScript(text="\n".join(lines) + "\n", bound=bound, description=vc.describe())
