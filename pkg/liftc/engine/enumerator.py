"""
Bottom-up enumerative search over a DSL grammar.

Terms are built in increasing ``expr_size`` from typed productions: the
grammar's arithmetic and comparison operators, ``ite`` when the DSL offers
it, and the DSL's visible operators. Lambda arguments come from a separate
bank per function type whose terminals are the lambda parameters, the
program's integer parameters, the lengths of its containers and the
containers indexed by the lambda parameters. Lambda bodies do not contain
further higher-order calls.

With pruning on, a term whose values on a fixed set of states equal those of
an earlier term of the same type is dropped (observational equivalence).
"""
import itertools
import logging
import random
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from ..errors import EnumerationExhausted, LiftError
from ..frontend import format_expr, interpret_source, loop_structure
from ..frontend.ast import Decl, SourceProgram, VarRef
from ..frontend.loops import program_variables
from ..ir.dsl import DslDefinition
from ..ir.evaluator import eval_ir
from ..ir.nodes import (
    Arith,
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
    substitute,
)
from ..ir.primitives import ITE
from ..ir.printer import alpha_normalize, print_ir
from ..ir.syntax import parse_expr
from ..types import AnyType, FunctionType, SourceType
from ..verifier.differential import StateGenerator, program_constants

logger = logging.getLogger(__name__)

INT, BOOL = SourceType.INT, SourceType.BOOL

PRUNING_STATES = 8
# Step budget for one evaluation of one term on one state.
TERM_FUEL = 20_000
_MAX_STATE_DRAWS = 200
_LAMBDA_NAMES = ("i", "j", "k", "l", "a", "b", "x", "y", "z")


class _Fault:
    """Signature entry for an evaluation that failed."""

    def __repr__(self) -> str:
        return "<fault>"


FAULT = _Fault()

Row = Mapping[str, Any]
Signature = Tuple[Any, ...]


@dataclass(frozen=True)
class Production:
    """
    One grammar production.

    Attributes:
        returns: Result type
        args: Argument types; FunctionType arguments are filled with lambdas
        build: Builds the term from its arguments
        label: Name used in logs
    """

    returns: SourceType
    args: Tuple[AnyType, ...]
    build: Callable[..., IRExpr]
    label: str


def arith_production(op: str) -> Production:
    return Production(INT, (INT, INT), lambda a, b: Arith(op, a, b), op)


def compare_production(op: str) -> Production:
    return Production(BOOL, (INT, INT), lambda a, b: Compare(op, a, b), op)


def call_production(name: str, args: Sequence[AnyType], returns: SourceType) -> Production:
    return Production(returns, tuple(args), lambda *xs: Call(name, tuple(xs)), name)


def size_splits(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """Every tuple of ``parts`` non-negative sizes summing to ``total``, in lexicographic order."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in size_splits(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class BuiltTerm:
    term: IRExpr
    type: SourceType
    signature: Optional[Signature]
    fresh: bool


class TermBank:
    """
    Typed terms of one variable context, grown one size at a time.

    Args:
        terminals: Size-0 terms with their types, in enumeration order
        productions: Productions tried at every size, in order
        rows: States on which every built term is evaluated
        prune: Drop terms whose values on ``rows`` repeat an earlier term of the same type
        dsl: DSL used to evaluate terms on ``rows``
        lambdas: Source of lambda arguments of a given function type and body size
    """

    def __init__(
        self,
        terminals: Sequence[Tuple[IRExpr, SourceType]],
        productions: Sequence[Production],
        rows: Sequence[Row] = (),
        dsl: Optional[DslDefinition] = None,
        lambdas: Optional[Callable[[FunctionType, int], Sequence[IRExpr]]] = None,
        prune: bool = True,
    ):
        if rows and dsl is None:
            raise ValueError("pruning rows need a DSL to evaluate terms")
        self.terminals = list(terminals)
        self.productions = list(productions)
        self.rows = list(rows)
        self.dsl = dsl
        self.lambdas = lambdas
        self.prune = prune and bool(rows)
        self.size = -1
        self._terms: Dict[Tuple[SourceType, int], List[IRExpr]] = {}
        self._seen: Dict[SourceType, set] = {}

    def terms(self, type_: SourceType, size: int) -> List[IRExpr]:
        """Banked terms of exactly ``size``; the bank must have grown that far."""
        return self._terms.get((type_, size), [])

    def signature(self, term: IRExpr) -> Optional[Signature]:
        if not self.rows:
            return None
        assert self.dsl is not None
        values = []
        for row in self.rows:
            try:
                values.append(eval_ir(term, row, self.dsl, TERM_FUEL))
            except LiftError:
                values.append(FAULT)
        return tuple(values)

    def grow(self) -> List[BuiltTerm]:
        """
        Build every term of the next size.

        Returns:
            All terms built, fresh or not, in construction order; only fresh
            ones join the bank
        """
        self.size += 1
        built: List[BuiltTerm] = []
        for term, type_ in self._candidates(self.size):
            sig = self.signature(term)
            fresh = self._admit(term, type_, sig)
            built.append(BuiltTerm(term, type_, sig, fresh))
        return built

    def grow_to(self, size: int) -> None:
        while self.size < size:
            self.grow()

    def _admit(self, term: IRExpr, type_: SourceType, sig: Optional[Signature]) -> bool:
        if self.prune and sig is not None:
            seen = self._seen.setdefault(type_, set())
            try:
                if sig in seen:
                    return False
                seen.add(sig)
            except TypeError:
                # unhashable value, keep the term
                pass
        self._terms.setdefault((type_, self.size), []).append(term)
        return True

    def _candidates(self, size: int) -> Iterator[Tuple[IRExpr, SourceType]]:
        if size == 0:
            yield from self.terminals
            return
        for production in self.productions:
            for split in size_splits(size - 1, len(production.args)):
                pools = [self._pool(t, s) for t, s in zip(production.args, split)]
                for args in itertools.product(*pools):
                    yield production.build(*args), production.returns

    def _pool(self, type_: AnyType, size: int) -> Sequence[IRExpr]:
        if isinstance(type_, FunctionType):
            return self.lambdas(type_, size) if self.lambdas is not None else ()
        return self.terms(type_, size)


def _first_order(types: Sequence[AnyType]) -> bool:
    return all(isinstance(t, SourceType) for t in types)


def grammar_productions(dsl: DslDefinition, higher_order: bool) -> List[Production]:
    """Arithmetic, comparisons, ``ite`` and the DSL's visible operators, in that order."""
    productions = [arith_production(op) for op in dsl.enumeration.arith]
    productions += [compare_production(op) for op in dsl.enumeration.compare]
    ite_op = dsl.operator(ITE)
    if ite_op is not None and not ite_op.hidden:
        productions.append(call_production(ITE, (BOOL, INT, INT), INT))
    for op in dsl.public_operators:
        if op.name == ITE or op.builtin == ITE:
            continue
        if not higher_order and not _first_order(op.param_types):
            continue
        productions.append(call_production(op.name, op.param_types, op.returns))
    return productions


def pruning_states(program: SourceProgram, seed: int, count: int = PRUNING_STATES) -> List[Dict[str, Any]]:
    """
    Random inputs on which the source runs without a fault.

    Returns:
        Up to ``count`` states, each with the program result under ``"__result__"``
    """
    generator = StateGenerator(program, seed)
    states: List[Dict[str, Any]] = []
    for _ in range(_MAX_STATE_DRAWS):
        if len(states) == count:
            break
        state = generator.draw()
        try:
            result = interpret_source(program, state)
        except LiftError:
            continue
        states.append({**state, "__result__": result})
    return states


def _dims(program: SourceProgram, state: Row) -> Tuple[int, ...]:
    for p in program.params:
        if p.type is SourceType.INT_MATRIX:
            m = state[p.name]
            return (len(m), len(m[0]) if m else 0)
    for p in program.params:
        if p.type is SourceType.INT_LIST:
            return (len(state[p.name]),)
    return ()


class GrammarEnumerator:
    """
    Program-summary candidates for one source program, in increasing size.

    Args:
        program: Source program
        dsl: Target DSL
        max_size: Largest expr_size tried
        candidate_limit: Most target-typed candidates examined
        prune: Observational-equivalence pruning
        io_filter: Only yield candidates that agree with the source on the pruning states
        seed: Seed for the pruning states
    """

    def __init__(
        self,
        program: SourceProgram,
        dsl: DslDefinition,
        max_size: int = 8,
        candidate_limit: int = 300_000,
        prune: bool = True,
        io_filter: bool = True,
        seed: int = 0,
    ):
        self.program = program
        self.dsl = dsl
        self.max_size = max_size
        self.candidate_limit = candidate_limit
        self.prune = prune
        self.io_filter = io_filter
        self.count = 0
        self.target = program.return_type

        states = pruning_states(program, seed)
        self.expected: Signature = tuple(s.pop("__result__") for s in states)
        self.states = states
        rows = states if prune or io_filter else []
        constants = list(dict.fromkeys(tuple(dsl.enumeration.constants) + tuple(program_constants(program))))
        self.constants = [IntLit(c) for c in constants]
        self.taken = set(program_variables(program))
        self._lambda_banks: Dict[FunctionType, Tuple[TermBank, Tuple[str, ...]]] = {}
        self._rng = random.Random(seed + 1)
        self.bank = TermBank(
            self._top_terminals(),
            grammar_productions(dsl, higher_order=True),
            rows=rows,
            dsl=dsl,
            lambdas=self._lambdas,
            prune=prune,
        )
        self._stream = self._search()
        self._finished = ""

    def _top_terminals(self) -> List[Tuple[IRExpr, SourceType]]:
        out: List[Tuple[IRExpr, SourceType]] = []
        for p in self.program.params:
            out.append((Var(p.name), p.type))
        for p in self.program.params:
            if p.type.is_container:
                out.append((Len(Var(p.name)), INT))
        out += [(c, INT) for c in self.constants]
        return out

    def _lambda_params(self, arity: int) -> Tuple[str, ...]:
        free = [n for n in _LAMBDA_NAMES if n not in self.taken]
        free += [f"x{k}" for k in range(arity) if f"x{k}" not in self.taken]
        return tuple(free[:arity])

    def _lambda_rows(self, params: Tuple[str, ...]) -> List[Row]:
        rows: List[Row] = []
        for state in self.states:
            dims = _dims(self.program, state)
            index_binding = {
                p: self._rng.randrange(max(dims[k] if k < len(dims) else 1, 1)) for k, p in enumerate(params)
            }
            value_binding = {p: self._rng.randint(-256, 256) for p in params}
            rows.append({**state, **index_binding})
            rows.append({**state, **value_binding})
        return rows

    def _lambda_bank(self, ftype: FunctionType) -> Tuple[TermBank, Tuple[str, ...]]:
        if ftype in self._lambda_banks:
            return self._lambda_banks[ftype]
        params = self._lambda_params(len(ftype.params))
        terminals: List[Tuple[IRExpr, SourceType]] = [(Var(p), t) for p, t in zip(params, ftype.params)]
        ints = [p for p, t in zip(params, ftype.params) if t is INT]
        for p in self.program.params:
            if p.type is INT:
                terminals.append((Var(p.name), INT))
            elif p.type is BOOL:
                terminals.append((Var(p.name), BOOL))
        for p in self.program.params:
            if p.type is SourceType.INT_LIST:
                terminals += [(Index(Var(p.name), Var(q)), INT) for q in ints]
            elif p.type is SourceType.INT_MATRIX:
                terminals += [
                    (Index(Index(Var(p.name), Var(q)), Var(r)), INT) for q, r in itertools.product(ints, ints)
                ]
        for p in self.program.params:
            if p.type.is_container:
                terminals.append((Len(Var(p.name)), INT))
        terminals += [(c, INT) for c in self.constants]
        rows = self._lambda_rows(params) if self.prune else []
        bank = TermBank(terminals, grammar_productions(self.dsl, higher_order=False), rows=rows, dsl=self.dsl)
        self._lambda_banks[ftype] = (bank, params)
        return bank, params

    def _lambdas(self, ftype: FunctionType, size: int) -> List[IRExpr]:
        bank, params = self._lambda_bank(ftype)
        bank.grow_to(size)
        return [Lambda(params, body) for body in bank.terms(ftype.ret, size)]

    def _search(self) -> Iterator[IRExpr]:
        while self.bank.size < self.max_size:
            size = self.bank.size + 1
            logger.debug(f"Enumerating size {size}")
            for built in self.bank.grow():
                if built.type is not self.target:
                    continue
                matches = self.io_filter and built.signature == self.expected
                if not built.fresh and not matches:
                    continue
                self.count += 1
                if self.count > self.candidate_limit:
                    raise EnumerationExhausted(f"candidate limit {self.candidate_limit} reached")
                if not self.io_filter or matches:
                    yield built.term
            logger.info(f"Enumerated all candidates up to size {size}, {self.count} so far")
        raise EnumerationExhausted(f"no candidate up to size {self.max_size}")

    def take(self, n: int) -> List[IRExpr]:
        """
        The next ``n`` candidates.

        Raises:
            EnumerationExhausted: The grammar ran out before the first of them
        """
        out: List[IRExpr] = []
        while len(out) < n:
            try:
                out.append(next(self._stream))
            except EnumerationExhausted as e:
                self._finished = str(e)
                break
            except StopIteration:
                break
        if not out and n > 0:
            raise EnumerationExhausted(self._finished or "enumeration finished")
        return out


def _copied_param(program: SourceProgram) -> Optional[str]:
    """The parameter the returned list is initialized from, if any."""
    for stmt in program.body:
        if isinstance(stmt, Decl) and stmt.name == program.return_var and isinstance(stmt.init, VarRef):
            return stmt.init.name
    return None


def invariant_template(program: SourceProgram, ps: IRExpr) -> List[IRExpr]:
    """
    Invariants instantiated from a summary, one per loop.

    Each invariant bounds its own index and the indices of the enclosing
    loops, then equates the returned variable with the summary applied to
    the container parameters cut at the outermost index. When the returned
    list starts as a copy of a parameter, the untouched suffix of that
    parameter is appended.
    """
    loops = loop_structure(program)
    if not loops:
        return []
    body = alpha_normalize(ps)
    containers = [p.name for p in program.params if p.type.is_container]
    copied = _copied_param(program)
    out: List[IRExpr] = []
    stack: List[Any] = []
    for loop in loops:
        while stack and stack[-1].nesting_depth >= loop.nesting_depth:
            stack.pop()
        stack.append(loop)
        outer = Var(stack[0].index_var)
        prefix = substitute(body, {c: Slice(Var(c), None, outer) for c in containers})
        if copied is not None:
            prefix = Call("list_concat", (prefix, Slice(Var(copied), outer, None)))
        bounds: List[IRExpr] = []
        for l in stack:
            index = Var(l.index_var)
            bounds.append(Compare(">=", index, parse_expr(format_expr(l.start))))
            op = "<=" if l is loop else "<"
            bounds.append(Compare(op, index, parse_expr(format_expr(l.bound))))
        out.append(BoolOp("and", tuple(bounds) + (Compare("==", Var(program.return_var), prefix),)))
    return out


def invariant_text(program: SourceProgram, invs: Sequence[IRExpr]) -> str:
    """Render invariants as ``invariant1``, ``invariant2``, ... function definitions."""
    blocks = []
    for k, inv in enumerate(invs, start=1):
        params = ", ".join(sorted(free_vars(inv)))
        blocks.append(f"def invariant{k}({params}):\n    return {print_ir(inv)}\n")
    return "\n".join(blocks)


def summary_text(program: SourceProgram, ps: IRExpr) -> str:
    params = ", ".join(program.param_names)
    return f"def {program.name}({params}):\n    return {print_ir(ps)}\n"

