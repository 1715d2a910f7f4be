"""
DSL catalog: loads and validates the ``.dsl`` definition files shipped in
``liftc/dsl``.

A catalog file is YAML (see ``docs/dsl-format.md``). Loading checks the
document schema, parses every operator body, rewrite-rule pattern and the
one-shot invariant example, type-checks the bodies and rejects recursion
that is not structural.
"""
import logging
import re
import string
from dataclasses import replace
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .candidates import CandidateKind, CandidateScope, Rejection, parse_candidate, validate_invariant_shape
from .errors import EvalError, MalformedDslFile, NoExampleDefined, SourceError, UnknownDsl
from .frontend import loop_structure, parse_source
from .ir.dsl import (
    DslDefinition,
    EnumerationGrammar,
    InvariantExample,
    OperatorDef,
    RewriteRule,
    recursion_problems,
)
from .ir.nodes import Call, IRExpr, Lambda, MetaVar, Var, map_children, walk
from .ir.primitives import STRUCTURAL_NAMES
from .ir.syntax import UnsupportedConstruct, parse_expr
from .ir.typecheck import IRTypeChecker, unify
from .types import SourceType, parse_type

logger = logging.getLogger(__name__)

DSL_DIR = Path(__file__).parent / "dsl"
DSL_NAMES = ("mapreduce", "netpacket", "taco", "tensor")

_METAVAR = re.compile(r"\?([A-Za-z_]\w*)")
_MV_PREFIX = "__mv_"


# Document schema


class OperatorSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = Field(pattern=r"^[A-Za-z_]\w*$")
    params: List[str] = Field(default_factory=list)
    returns: str
    body: Optional[str] = None
    prompt: str = ""
    origin: Literal["evidenced", "completion"] = "evidenced"
    hidden: bool = False
    builtin: Optional[str] = None


class RuleSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    pattern: str
    template: str
    priority: int = 0
    where: Dict[str, Literal["var", "lambda", "call", "int"]] = Field(default_factory=dict)
    atomic: bool = True


class ExampleSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    source: str
    ps: str
    invariants: List[str] = Field(min_length=1)


class GrammarSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    constants: List[int] = Field(default_factory=lambda: [0, 1])
    arith: List[Literal["+", "-", "*", "/", "%"]] = Field(default_factory=lambda: ["+", "*"])
    compare: List[Literal["<", "<=", ">", ">=", "==", "!="]] = Field(default_factory=list)


class DslFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    extension: str = Field(pattern=r"^\.\w+$")
    index_style: Literal["brackets", "parens"] = "brackets"
    output_template: str = "{expr}"
    operators: List[OperatorSpec] = Field(default_factory=list)
    rules: List[RuleSpec] = Field(default_factory=list)
    invariant_example: Optional[ExampleSpec] = None
    enumeration: GrammarSpec = Field(default_factory=GrammarSpec)


# Conversion


def _parse(text: str, where: str) -> IRExpr:
    try:
        return parse_expr(text)
    except UnsupportedConstruct as e:
        raise MalformedDslFile(f"{where}: unsupported syntax {e.detail!r}") from None
    except SyntaxError as e:
        raise MalformedDslFile(f"{where}: {e.msg}") from None


def _operator(spec: OperatorSpec) -> OperatorDef:
    params = []
    for entry in spec.params:
        name, sep, type_text = entry.partition(":")
        if not sep:
            raise MalformedDslFile(f"{spec.name}: parameter '{entry}' has no type")
        try:
            params.append((name.strip(), parse_type(type_text)))
        except ValueError as e:
            raise MalformedDslFile(f"{spec.name}: {e}") from None
    try:
        returns = parse_type(spec.returns)
    except ValueError as e:
        raise MalformedDslFile(f"{spec.name}: {e}") from None
    if not isinstance(returns, SourceType):
        raise MalformedDslFile(f"{spec.name}: operators cannot return functions")
    if spec.builtin is None and spec.body is None:
        raise MalformedDslFile(f"{spec.name}: needs a body or a builtin")
    if spec.builtin is not None and spec.builtin not in STRUCTURAL_NAMES:
        raise MalformedDslFile(f"{spec.name}: unknown builtin '{spec.builtin}'")
    body = _parse(spec.body, spec.name) if spec.body is not None else None
    return OperatorDef(
        name=spec.name,
        params=tuple(params),
        returns=returns,
        body=body,
        prompt_text=spec.prompt,
        origin=spec.origin,
        hidden=spec.hidden,
        builtin=spec.builtin,
    )


def _check_bodies(dsl: DslDefinition) -> None:
    checker = IRTypeChecker(dsl, allow_hidden=True)
    for op in dsl.operators:
        if op.body is None:
            continue
        try:
            unify(op.returns, checker.infer(op.body, dict(op.params)))
        except EvalError as e:
            raise MalformedDslFile(f"{op.name}: {e}") from None
    problems = recursion_problems(dsl)
    if problems:
        raise MalformedDslFile("; ".join(problems))


def _to_pattern(e: IRExpr) -> IRExpr:
    if isinstance(e, Var) and e.name.startswith(_MV_PREFIX):
        return MetaVar(e.name[len(_MV_PREFIX) :])
    if isinstance(e, Lambda):
        params = tuple(
            "?" + p[len(_MV_PREFIX) :] if p.startswith(_MV_PREFIX) else p for p in e.params
        )
        return Lambda(params, _to_pattern(e.body))
    return map_children(e, _to_pattern)


def pattern_metavars(pattern: IRExpr) -> List[str]:
    """Metavariable names in pre-order, lambda-parameter metavariables included."""
    names: List[str] = []
    for node in walk(pattern):
        if isinstance(node, MetaVar):
            names.append(node.name)
        elif isinstance(node, Lambda):
            names.extend(p[1:] for p in node.params if p.startswith("?"))
    return names


def _rule(spec: RuleSpec, dsl: DslDefinition) -> RewriteRule:
    where = f"rule '{spec.pattern}'"
    pattern = _to_pattern(_parse(_METAVAR.sub(lambda m: _MV_PREFIX + m.group(1), spec.pattern), where))
    if not isinstance(pattern, Call):
        raise MalformedDslFile(f"{where}: pattern must be an operator call")
    for node in walk(pattern):
        if isinstance(node, Call):
            op = dsl.operator(node.op)
            if op is None or op.hidden:
                raise MalformedDslFile(f"{where}: '{node.op}' is not a registered operator")
    names = pattern_metavars(pattern)
    if len(names) != len(set(names)):
        raise MalformedDslFile(f"{where}: metavariables must be distinct")
    try:
        holes = {field for _, field, _, _ in string.Formatter().parse(spec.template) if field is not None}
    except ValueError as e:
        raise MalformedDslFile(f"{where}: {e}") from None
    unbound = sorted(holes - set(names))
    if unbound:
        raise MalformedDslFile(f"{where}: template hole '{unbound[0]}' is not bound by the pattern")
    stray = sorted(set(spec.where) - set(names))
    if stray:
        raise MalformedDslFile(f"{where}: constraint on unknown metavariable '{stray[0]}'")
    return RewriteRule(
        pattern=pattern,
        template=spec.template,
        priority=spec.priority,
        where=tuple(sorted(spec.where.items())),
        atomic=spec.atomic,
        source=spec.pattern,
    )


def _example(spec: ExampleSpec, dsl: DslDefinition) -> InvariantExample:
    try:
        program = parse_source(spec.source)
    except SourceError as e:
        raise MalformedDslFile(f"invariant example: {e}") from None
    scope = CandidateScope.of(program)
    ps = parse_candidate(spec.ps, dsl, CandidateKind.PS, scope)
    if isinstance(ps, Rejection):
        raise MalformedDslFile(f"invariant example summary rejected: {ps}")
    invs = parse_candidate("\n".join(spec.invariants), dsl, CandidateKind.INV, scope)
    if isinstance(invs, Rejection):
        raise MalformedDslFile(f"invariant example rejected: {invs}")
    violation = validate_invariant_shape(invs.exprs, loop_structure(program), dsl)
    if violation is not None:
        raise MalformedDslFile(f"invariant example: {violation}")
    return InvariantExample(
        source=spec.source.strip("\n"),
        ps=spec.ps.strip("\n"),
        invariants=tuple(text.strip("\n") for text in spec.invariants),
    )


def build_dsl(document: DslFile) -> DslDefinition:
    """
    Turn a schema-checked catalog document into a validated DslDefinition.

    Raises:
        MalformedDslFile: On any semantic problem in operators, rules or example
    """
    operators = tuple(_operator(spec) for spec in document.operators)
    seen: Dict[str, int] = {}
    for op in operators:
        seen[op.name] = seen.get(op.name, 0) + 1
        if seen[op.name] > 1:
            raise MalformedDslFile(f"operator '{op.name}' defined twice")
    grammar = EnumerationGrammar(
        constants=tuple(document.enumeration.constants),
        arith=tuple(document.enumeration.arith),
        compare=tuple(document.enumeration.compare),
    )
    dsl = DslDefinition(
        name=document.name,
        extension=document.extension,
        operators=operators,
        enumeration=grammar,
        index_style=document.index_style,
        output_template=document.output_template,
    )
    _check_bodies(dsl)
    dsl = replace(dsl, rules=tuple(_rule(spec, dsl) for spec in document.rules))
    if document.invariant_example is not None:
        dsl = replace(dsl, invariant_example=_example(document.invariant_example, dsl))
    return dsl


def load_dsl_file(path: Path) -> DslDefinition:
    """
    Load and validate one catalog file.

    Raises:
        MalformedDslFile: Unreadable YAML, schema violation or semantic problem
    """
    try:
        with open(path, "r", encoding="utf-8") as file:
            raw = yaml.safe_load(file)
    except (OSError, yaml.YAMLError) as e:
        raise MalformedDslFile(f"{path}: {e}") from None
    try:
        document = DslFile.model_validate(raw)
    except ValidationError as e:
        raise MalformedDslFile(f"{path}: {e}") from None
    try:
        dsl = build_dsl(document)
    except MalformedDslFile as e:
        raise MalformedDslFile(f"{path}: {e}") from None
    logger.debug(f"Loaded DSL '{dsl.name}' with {len(dsl.operators)} operators and {len(dsl.rules)} rules")
    return dsl


@lru_cache(maxsize=None)
def load_dsl(name: str) -> DslDefinition:
    """
    Load a shipped DSL by name.

    Args:
        name: One of mapreduce, netpacket, taco, tensor

    Returns:
        Validated DslDefinition, shared between callers

    Raises:
        UnknownDsl: No catalog file with that name
        MalformedDslFile: The catalog file is invalid
    """
    path = DSL_DIR / f"{name}.dsl"
    if not re.fullmatch(r"\w+", name) or not path.is_file():
        raise UnknownDsl(f"unknown DSL '{name}' (available: {', '.join(available_dsls())})")
    return load_dsl_file(path)


def available_dsls() -> Tuple[str, ...]:
    return tuple(sorted(p.stem for p in DSL_DIR.glob("*.dsl")))


def invariant_example(dsl: DslDefinition) -> str:
    """
    One-shot example block for invariant prompts.

    Raises:
        NoExampleDefined: The DSL has no loop-bearing example (loop-free domains)
    """
    example: Optional[InvariantExample] = dsl.invariant_example
    if example is None:
        raise NoExampleDefined(f"DSL '{dsl.name}' defines no invariant example")
    lines = [
        "Example 1:",
        "",
        example.source,
        "",
        "The function above is equal to:",
        "",
        example.ps,
        "",
        f"Loop invariants, one per loop, outermost first ({len(example.invariants)} loops):",
        "",
        "\n\n".join(example.invariants),
    ]
    return "\n".join(lines) + "\n"
