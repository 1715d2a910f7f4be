"""
Differential testing of a candidate summary against the source interpreter.

A cheap filter run before any solver query: random inputs are drawn from a
seeded generator and the summary's value is compared with the program's
result.
"""
import logging
import random
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Optional, Sequence

from ..errors import EvalError, RuntimeFault
from ..frontend.ast import BoolConst, IntConst, SourceProgram
from ..frontend.interpreter import interpret_source
from ..ir.dsl import DslDefinition
from ..ir.evaluator import DEFAULT_FUEL, eval_ir
from ..ir.nodes import IRExpr
from ..types import SourceType

logger = logging.getLogger(__name__)

INT_RANGE = (-256, 256)
MAX_LIST_LENGTH = 8
MAX_MATRIX_DIM = 4
# Share of integers drawn near constants that appear in the program.
NEAR_CONSTANT_RATE = 0.1


@dataclass(frozen=True)
class Counterexample:
    """
    An input on which the summary and the program disagree.

    Attributes:
        state: Parameter bindings
        expected: Program result, None when the program faulted
        actual: Summary value, None when its evaluation failed
        detail: Evaluation error text, if any
    """

    state: Dict[str, Any]
    expected: Any
    actual: Any
    detail: str = ""

    def describe(self) -> str:
        if self.detail:
            return f"on {self.state}: {self.detail}"
        return f"on {self.state}: expected {self.expected}, got {self.actual}"


def program_constants(program: SourceProgram) -> Sequence[int]:
    """Integer literals of ``program``, sorted and without duplicates."""
    found = set()

    def visit(node: Any) -> None:
        if isinstance(node, IntConst):
            found.add(node.value)
        elif isinstance(node, BoolConst):
            return
        elif isinstance(node, tuple):
            for item in node:
                visit(item)
        elif hasattr(node, "__dataclass_fields__"):
            for name in node.__dataclass_fields__:
                visit(getattr(node, name))

    visit(program.body)
    return sorted(found)


class StateGenerator:
    """
    Seeded random inputs for a program's parameters.

    All list parameters of one state share a length in ``[0, 8]``; all
    matrix parameters share dimensions in ``[0, 4] x [1, 4]``, where a matrix
    without rows is the empty tuple. Integers are uniform in ``[-256, 256]``,
    except that a small share is drawn next to the program's own constants.
    """

    def __init__(self, program: SourceProgram, seed: int = 0):
        self.program = program
        self.rng = random.Random(seed)
        self.near = [c + d for c in program_constants(program) for d in (-1, 0, 1)]

    def integer(self) -> int:
        if self.near and self.rng.random() < NEAR_CONSTANT_RATE:
            return self.rng.choice(self.near)
        return self.rng.randint(*INT_RANGE)

    def draw(self) -> Dict[str, Any]:
        length = self.rng.randint(0, MAX_LIST_LENGTH)
        rows = self.rng.randint(0, MAX_MATRIX_DIM)
        cols = self.rng.randint(1, MAX_MATRIX_DIM)
        state: Dict[str, Any] = {}
        for param in self.program.params:
            if param.type is SourceType.INT:
                state[param.name] = self.integer()
            elif param.type is SourceType.BOOL:
                state[param.name] = self.rng.random() < 0.5
            elif param.type is SourceType.INT_LIST:
                state[param.name] = tuple(self.integer() for _ in range(length))
            else:
                state[param.name] = tuple(tuple(self.integer() for _ in range(cols)) for _ in range(rows))
        return state

    def states(self, count: int) -> Iterable[Dict[str, Any]]:
        for _ in range(count):
            yield self.draw()


def differential_check(
    program: SourceProgram,
    ps: IRExpr,
    dsl: DslDefinition,
    samples: int = 1000,
    seed: int = 0,
    fuel: int = DEFAULT_FUEL,
) -> Optional[Counterexample]:
    """
    Compare a summary with the program on random inputs.

    Inputs on which the program itself faults are outside its domain and are
    skipped; any evaluation error of the summary counts as a mismatch.

    Args:
        program: Source program
        ps: Candidate summary over the program parameters
        dsl: DSL giving the summary's operator semantics
        samples: Number of inputs to try
        seed: Generator seed
        fuel: Evaluation step budget per input

    Returns:
        The first counterexample found, or None when every input agreed
    """
    generator = StateGenerator(program, seed)
    skipped = 0
    for state in generator.states(samples):
        try:
            expected = interpret_source(program, state)
        except RuntimeFault:
            skipped += 1
            continue
        try:
            actual = eval_ir(ps, state, dsl, fuel)
        except (EvalError, RuntimeFault) as e:
            return Counterexample(state, expected, None, f"{type(e).__name__}: {e}")
        if actual != expected:
            return Counterexample(state, expected, actual)
    if skipped:
        logger.debug(f"Skipped {skipped} inputs on which '{program.name}' faults")
    return None
