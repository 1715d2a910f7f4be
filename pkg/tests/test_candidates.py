import pytest
from hypothesis import given, settings, strategies as st

from liftc.candidates import (
    CandidateKind,
    CandidateScope,
    ParsedCandidate,
    Rejection,
    parse_candidate,
    validate_invariant_shape,
)
from liftc.candidates.shape import enclosing_indices
from liftc.catalog import load_dsl
from liftc.engine.extract import extract_code
from liftc.frontend import loop_structure, parse_source
from liftc.ir import print_ir

from .conftest import BENCHMARKS, FIXTURES, read_jsonl, read_source

REJECTIONS = FIXTURES / "rejections" / "screen_blend"


@pytest.fixture
def screen_blend():
    return parse_source(read_source("tensor_screen_blend"))


@pytest.fixture
def conditional_sum():
    return parse_source(read_source("conditional_sum"))


def _replay_text(name: str, phase: str, index: int = 0) -> str:
    texts = [e["text"] for e in read_jsonl(BENCHMARKS / name / "replay.jsonl") if e["phase"] == phase]
    return extract_code(texts[index])


@pytest.mark.parametrize(
    "entry", read_jsonl(REJECTIONS / "syntactic.jsonl"), ids=lambda e: e["reason"]
)
def test_syntactic_rejections(entry, screen_blend, tensor):
    result = parse_candidate(entry["text"], tensor, CandidateKind.PS, CandidateScope.of(screen_blend))

    assert isinstance(result, Rejection)
    assert (result.reason, result.detail) == (entry["reason"], entry["detail"])
    assert result.line > 0


@pytest.mark.parametrize("entry", read_jsonl(REJECTIONS / "semantic.jsonl"))
def test_semantically_wrong_candidates_still_parse(entry, screen_blend, tensor):
    result = parse_candidate(entry["text"], tensor, CandidateKind.PS, CandidateScope.of(screen_blend))

    assert isinstance(result, ParsedCandidate)


def test_unknown_function_is_rejected(conditional_sum, mapreduce):
    result = parse_candidate(_replay_text("conditional_sum", "ps", 0), mapreduce, CandidateKind.PS, CandidateScope.of(conditional_sum))

    assert isinstance(result, Rejection)
    assert (result.reason, result.detail) == ("UnknownFunction", "filter")


def test_summary_params_bind_by_position(conditional_sum, mapreduce):
    text = "def f(xs: List[int]) -> int:\n    return reduce(xs, lambda a, b: a + b)\n"
    result = parse_candidate(text, mapreduce, CandidateKind.PS, CandidateScope.of(conditional_sum))

    assert isinstance(result, ParsedCandidate)
    assert print_ir(result.expr) == "reduce(data, lambda a, b: a + b)"
    assert result.functions[0].params == ("data",)


def test_binding_renames_clashing_lambda_params(conditional_sum, mapreduce):
    text = "def f(xs):\n    return reduce(map(xs, lambda data: data + 1), lambda a, b: a + b)\n"
    result = parse_candidate(text, mapreduce, CandidateKind.PS, CandidateScope.of(conditional_sum))

    assert isinstance(result, ParsedCandidate)
    assert print_ir(result.expr) == "reduce(map(data, lambda data_: data_ + 1), lambda a, b: a + b)"


def test_wrong_arity_is_rejected(conditional_sum, mapreduce):
    text = "def f(xs, n):\n    return reduce(xs, lambda a, b: a + b)\n"
    result = parse_candidate(text, mapreduce, CandidateKind.PS, CandidateScope.of(conditional_sum))

    assert isinstance(result, Rejection)
    assert result.reason == "ArityOrType"


def test_wrong_return_type_is_rejected(conditional_sum, mapreduce):
    text = "def f(xs):\n    return map(xs, lambda x: x)\n"
    result = parse_candidate(text, mapreduce, CandidateKind.PS, CandidateScope.of(conditional_sum))

    assert isinstance(result, Rejection)
    assert result.reason == "ArityOrType"


@pytest.mark.parametrize(
    "text, reason",
    [
        ("def f(xs):\n    for x in xs:\n        pass\n    return 0\n", "LoopConstruct"),
        ("def f(xs):\n    y = 1\n    return y\n", "MultipleStatements"),
        ("x = 1\n", "NotAFunctionDef"),
        ("def f(xs):\n    return xs.count(1)\n", "UnsupportedSyntax"),
        ("def f(xs:\n", "UnsupportedSyntax"),
    ],
)
def test_structural_rejections(text, reason, mapreduce):
    result = parse_candidate(text, mapreduce, CandidateKind.PS)

    assert isinstance(result, Rejection)
    assert result.reason == reason


def test_a_second_summary_def_is_rejected(mapreduce):
    text = "def f(xs):\n    return reduce(xs, lambda a, b: a + b)\n\ndef g(xs):\n    return 0\n"

    assert parse_candidate(text, mapreduce, CandidateKind.PS).reason == "MultipleStatements"  # type: ignore[union-attr]


def test_bare_expression_is_accepted(mapreduce):
    result = parse_candidate("reduce(data, lambda a, b: a + b)", mapreduce, CandidateKind.PS)

    assert isinstance(result, ParsedCandidate)


def test_invariant_params_must_be_program_variables(conditional_sum, mapreduce):
    text = "def invariant1(i, data, acc):\n    return i >= 0 and acc == reduce(data[:i], lambda a, b: a + b)\n"
    result = parse_candidate(text, mapreduce, CandidateKind.INV, CandidateScope.of(conditional_sum))

    assert isinstance(result, Rejection)
    assert "acc" in result.detail


def test_replayed_invariants_fit_the_template(screen_blend, tensor):
    loops = loop_structure(screen_blend)
    parsed = parse_candidate(_replay_text("tensor_screen_blend", "inv"), tensor, CandidateKind.INV, CandidateScope.of(screen_blend))

    assert isinstance(parsed, ParsedCandidate)
    assert len(parsed.exprs) == 2
    assert validate_invariant_shape(parsed.exprs, loops, tensor) is None


def test_enclosing_indices(screen_blend):
    assert enclosing_indices(loop_structure(screen_blend)) == [frozenset({"row"}), frozenset({"row", "col"})]


def test_trivial_invariant_fails_the_template(conditional_sum, mapreduce):
    parsed = parse_candidate("def invariant1(i):\n    return True\n", mapreduce, CandidateKind.INV, CandidateScope.of(conditional_sum))
    assert isinstance(parsed, ParsedCandidate)

    violation = validate_invariant_shape(parsed.exprs, loop_structure(conditional_sum), mapreduce)

    assert violation is not None
    assert violation.detail == "missing equality conjunct"


def test_invariant_count_must_match_loops(screen_blend, tensor):
    parsed = parse_candidate(_replay_text("tensor_screen_blend", "inv"), tensor, CandidateKind.INV, CandidateScope.of(screen_blend))
    assert isinstance(parsed, ParsedCandidate)

    violation = validate_invariant_shape(parsed.exprs[:1], loop_structure(screen_blend), tensor)

    assert violation is not None
    assert violation.loop == -1


def test_bounds_must_come_first(conditional_sum, mapreduce):
    text = (
        "def invariant1(i, data, total):\n"
        "    return total == reduce(data[:i], lambda a, b: a + b) and i >= 0\n"
    )
    parsed = parse_candidate(text, mapreduce, CandidateKind.INV, CandidateScope.of(conditional_sum))
    assert isinstance(parsed, ParsedCandidate)

    violation = validate_invariant_shape(parsed.exprs, loop_structure(conditional_sum), mapreduce)

    assert violation is not None
    assert violation.conjunct == 1


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=200))
def test_parser_never_raises(text):
    result = parse_candidate(text, load_dsl("tensor"), CandidateKind.PS)

    assert isinstance(result, (ParsedCandidate, Rejection))
