"""
Prompt builders for program-summary, invariant and joint queries.

Prompts are pure functions of their inputs: the same inputs give the same
text byte for byte.
"""
import logging
import re
from typing import List, Sequence

from ..catalog import invariant_example
from ..errors import NoExampleDefined, NoLoops
from ..frontend import loop_structure, parse_source
from ..ir.dsl import DslDefinition, render_operator_semantics
from ..ir.nodes import IRExpr
from ..ir.printer import print_ir
from .models import PromptMessage

logger = logging.getLogger(__name__)

FEEDBACK_LINE = (
    "These generated programs are incorrect. Do not generate the same. Please generate another program."
)

SYSTEM_MESSAGE = "You are an expert programmer who rewrites imperative code into domain-specific languages."

_PS_TASK = (
    "Your task is to rewrite the `{name}` function below using only the provided functions and "
    "constants, so that the rewritten Python function is semantically equivalent to it."
)

_INV_TASK = (
    "Your task is to prove that the assertion at the end of the `{name}` function holds by finding "
    "one loop invariant per loop, using the defined functions."
)

_JOINT_TASK = (
    "Your task is to rewrite the `{name}` function below using only the provided functions and "
    "constants, and to prove the rewrite correct by also giving one loop invariant per loop."
)

_RULES = [
    "Do not use for or while loops, and do not use list comprehensions.",
    "Only call the defined functions below and `len`; do not use any other Python built-in or library function.",
    "Each function body must be a single return statement.",
    "Inline all expressions in the return statement; do not introduce intermediate variables.",
    "Integer division `//` rounds toward zero.",
]

_INV_RULES = [
    "Write a separate invariant function for each loop, named invariant1, invariant2, ... from the "
    "outermost loop inwards, in the order the loops appear.",
    "Each invariant takes the loop variables and the data it mentions as parameters and returns a "
    "boolean: bounds on the loop indices joined with `and`, then for every variable the loop "
    "modifies an equality `variable == <expression over the defined functions>`.",
]

_INV_TEMPLATE = """def invariant1(i: int, data: List[int], ret: int) -> bool:
    return i >= 0 and i <= len(data) and ret == <expression over the defined functions>"""


def _numbered(rules: Sequence[str]) -> str:
    return "\n".join(f"{k}. {rule}" for k, rule in enumerate(rules, start=1))


def _feedback(incorrect: Sequence[str]) -> str:
    if not incorrect:
        return ""
    blocks = "\n\n".join(text.strip("\n") for text in incorrect)
    return f"\n\n{blocks}\n\n{FEEDBACK_LINE}"


def _messages(user: str) -> List[PromptMessage]:
    return [PromptMessage(role="system", content=SYSTEM_MESSAGE), PromptMessage(role="user", content=user)]


def with_assertion(source_text: str, return_var: str, ps: IRExpr) -> str:
    """Insert ``assert(ret == <ps>);`` before the final return statement."""
    returns = list(re.finditer(rf"^([ \t]*)return\s+{re.escape(return_var)}\s*;", source_text, re.M))
    assertion = f"assert({return_var} == {print_ir(ps)});"
    if not returns:
        return f"{source_text.rstrip()}\n// {assertion}\n"
    last = returns[-1]
    indent = last.group(1)
    return source_text[: last.start()] + f"{indent}{assertion}\n" + source_text[last.start() :]


def _example_block(dsl: DslDefinition) -> str:
    try:
        return invariant_example(dsl) + "\n"
    except NoExampleDefined:
        logger.warning(f"DSL '{dsl.name}' has no invariant example, building a zero-shot prompt")
        return ""


def build_ps_prompt(source_text: str, dsl: DslDefinition, incorrect_sols: Sequence[str]) -> List[PromptMessage]:
    """
    Zero-shot program-summary prompt.

    Args:
        source_text: Source program text
        dsl: Target DSL whose operator semantics are shown
        incorrect_sols: Earlier parsed-but-wrong summaries, in the order they were recorded

    Returns:
        System and user messages
    """
    program = parse_source(source_text)
    user = (
        _PS_TASK.format(name=program.name)
        + "\n\nInstructions:\n"
        + _numbered(_RULES)
        + "\n\n# Defined functions\n\n"
        + render_operator_semantics(dsl)
        + f"\n// Function to rewrite\n\n{source_text.strip()}\n"
        + _feedback(incorrect_sols)
    )
    return _messages(user)


def build_inv_prompt(
    source_text: str,
    dsl: DslDefinition,
    ps: IRExpr,
    incorrect_invs: Sequence[str],
) -> List[PromptMessage]:
    """
    One-shot invariant prompt for a fixed program summary.

    The source is shown with an assertion equating its return variable with
    the summary.

    Raises:
        NoLoops: The source has no loop
    """
    program = parse_source(source_text)
    loops = loop_structure(program)
    if not loops:
        raise NoLoops(f"'{program.name}' has no loops")
    asserted = with_assertion(source_text.strip() + "\n", program.return_var, ps)
    example = _example_block(dsl)
    target = f"Example {2 if example else 1}:\n\n{asserted}"
    user = (
        _INV_TASK.format(name=program.name)
        + "\n\nInstructions:\n"
        + _numbered(_RULES[:4] + _INV_RULES)
        + f"\n\nTemplate:\n\n{_INV_TEMPLATE}\n"
        + "\n# Defined functions\n\n"
        + render_operator_semantics(dsl)
        + "\n"
        + example
        + target
        + f"\nGive {len(loops)} loop invariant{'s' if len(loops) > 1 else ''} for the function above."
        + _feedback(incorrect_invs)
    )
    return _messages(user)


def build_joint_prompt(source_text: str, dsl: DslDefinition, incorrect: Sequence[str]) -> List[PromptMessage]:
    """
    Single-phase prompt asking for the summary and the invariants together.

    For loop-free sources this is the program-summary prompt.
    """
    program = parse_source(source_text)
    loops = loop_structure(program)
    if not loops:
        return build_ps_prompt(source_text, dsl, incorrect)
    user = (
        _JOINT_TASK.format(name=program.name)
        + "\n\nInstructions:\n"
        + _numbered(
            _RULES
            + [f"Name the rewritten function `{program.name}`."]
            + _INV_RULES
        )
        + f"\n\nTemplate:\n\n{_INV_TEMPLATE}\n"
        + "\n# Defined functions\n\n"
        + render_operator_semantics(dsl)
        + "\n"
        + _example_block(dsl)
        + f"// Function to rewrite and prove\n\n{source_text.strip()}\n"
        + f"\nGive the rewritten function and {len(loops)} loop invariant{'s' if len(loops) > 1 else ''}."
        + _feedback(incorrect)
    )
    return _messages(user)
