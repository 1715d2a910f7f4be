import warnings

import pytest
from hypothesis import assume, given, strategies as st

from liftc.errors import DivisionByZero, IndexOutOfBounds, NonCanonicalLoop, SourceSyntaxError, SourceTypeError
from liftc.frontend import interpret_source, loop_structure, parse_source, pretty_print, program_variables
from liftc.frontend.grammar import _build
from liftc.types import SourceType

from .conftest import BENCHMARKS

DIVIDE = """
int divide(int a, int b) {
    int q = a / b;
    int r = a % b;
    int out = q * 1000 + r;
    return out;
}
"""


def test_parse_conditional_sum(conditional_sum_text):
    program = parse_source(conditional_sum_text)

    assert program.name == "conditional_sum"
    assert program.param_names == ("data",)
    assert program.return_var == "total"
    assert program.return_type is SourceType.INT


def test_interpret_conditional_sum(conditional_sum_text):
    program = parse_source(conditional_sum_text)

    assert interpret_source(program, {"data": [99, 150, 3]}) == 102
    assert interpret_source(program, {"data": []}) == 0


def test_interpret_screen_blend_uses_integer_division(screen_blend_text):
    program = parse_source(screen_blend_text)

    assert interpret_source(program, {"base": [[255]], "active": [[255]]}) == ((255,),)
    assert interpret_source(program, {"base": [[100, 0]], "active": [[100, 7]]}) == ((161, 7),)


def test_interpret_does_not_mutate_state(conditional_sum_text):
    program = parse_source(conditional_sum_text)
    state = {"data": [1, 2, 3]}

    interpret_source(program, state)

    assert state == {"data": [1, 2, 3]}


def test_in_place_update_copies_parameter():
    program = parse_source((BENCHMARKS / "taco_fourth_power" / "source.src").read_text())

    assert interpret_source(program, {"arr": [1, 2, -3]}) == (1, 16, 81)


def test_loop_structure_single_loop(conditional_sum_text):
    [loop] = loop_structure(parse_source(conditional_sum_text))

    assert loop.index_var == "i"
    assert loop.nesting_depth == 0
    assert {"total", "i"} <= loop.modified_vars
    assert {"data", "total", "i"} <= loop.live_names


def test_loop_structure_nested(screen_blend_text):
    outer, inner = loop_structure(parse_source(screen_blend_text))

    assert (outer.index_var, outer.nesting_depth) == ("row", 0)
    assert (inner.index_var, inner.nesting_depth) == ("col", 1)
    assert "row_vec" in inner.live_names
    assert "out" in outer.modified_vars


def test_loop_free_program_has_no_loops():
    program = parse_source((BENCHMARKS / "netpacket_flowlet" / "source.src").read_text())

    assert loop_structure(program) == []


def test_program_variables(screen_blend_text):
    names = program_variables(parse_source(screen_blend_text))

    assert names["base"] is SourceType.INT_MATRIX
    assert names["row_vec"] is SourceType.INT_LIST
    assert names["col"] is SourceType.INT


def test_descending_loop_is_not_canonical():
    text = """
    int down(int n) {
        int s = 0;
        for (int i = n; i > 0; i--) {
            s = s + i;
        }
        return s;
    }
    """
    with pytest.raises(NonCanonicalLoop):
        parse_source(text)


def test_empty_text_is_a_syntax_error():
    with pytest.raises(SourceSyntaxError):
        parse_source("")


def test_syntax_error_reports_location():
    with pytest.raises(SourceSyntaxError) as info:
        parse_source("int f(int a) {\n    int b = ;\n    return b;\n}\n")

    assert info.value.line >= 1
    assert info.value.format("f.src").startswith("f.src:")


def test_type_error_on_list_assigned_to_int():
    with pytest.raises(SourceTypeError):
        parse_source("int f(int[] a) {\n    int x = a;\n    return x;\n}\n")


def test_division_by_zero_is_reported():
    with pytest.raises(DivisionByZero):
        interpret_source(parse_source(DIVIDE), {"a": 1, "b": 0})


def test_index_out_of_bounds_is_reported():
    text = "int first(int[] a) {\n    int x = a[0];\n    return x;\n}\n"
    with pytest.raises(IndexOutOfBounds) as info:
        interpret_source(parse_source(text), {"a": []})

    assert info.value.line == 2


@given(st.integers(-1000, 1000), st.integers(-50, 50))
def test_division_truncates_toward_zero(a, b):
    assume(b != 0)
    q = abs(a) // abs(b) * (1 if (a >= 0) == (b > 0) else -1)
    r = a - b * q

    assert interpret_source(parse_source(DIVIDE), {"a": a, "b": b}) == q * 1000 + r


@pytest.mark.parametrize("path", sorted(BENCHMARKS.glob("*/source.src")), ids=lambda p: p.parent.name)
def test_pretty_print_round_trip(path):
    program = parse_source(path.read_text(encoding="utf-8"))

    assert parse_source(pretty_print(program)) == program


def test_grammar_builds_without_deprecation_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("error", DeprecationWarning)
        grammar = _build()

    [program] = grammar.parse_string("int pick(int[] a, int b) { return b; }", parse_all=True)
    assert [p.name for p in program.params] == ["a", "b"]
