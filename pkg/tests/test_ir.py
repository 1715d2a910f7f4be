import pytest
from hypothesis import given, strategies as st

from liftc.catalog import load_dsl
from liftc.errors import DivisionByZero, FuelExhausted, IRTypeError, UnknownOperator
from liftc.ir import IRTypeChecker, eval_ir, expr_size, normalize_candidate, parse_expr, print_ir
from liftc.ir.dsl import DslDefinition, OperatorDef
from liftc.ir.evaluator import unfolding
from liftc.ir.nodes import Arith, BoolOp, Call, Compare, IntLit, Lambda, Var, free_vars, ite, substitute
from liftc.ir.printer import alpha_normalize
from liftc.types import SourceType

CONDITIONAL_SUM = "reduce(map(data, lambda x: ite(x < 100, x, 0)), lambda a, b: a + b)"


def test_eval_conditional_sum(mapreduce):
    ps = parse_expr(CONDITIONAL_SUM)

    assert eval_ir(ps, {"data": (99, 150, 3)}, mapreduce) == 102
    assert eval_ir(ps, {"data": ()}, mapreduce) == 0


def test_eval_map_builds_a_list(mapreduce):
    assert eval_ir(parse_expr("map(data, lambda x: x * 3)"), {"data": (1, -2)}, mapreduce) == (3, -6)


def test_eval_tensor_screen_blend(tensor):
    ps = parse_expr(
        "matrix_elemwise_sub(matrix_elemwise_add(base, active), "
        "matrix_scalar_div(matrix_elemwise_mul(base, active), 255))"
    )
    env = {"base": ((255, 100),), "active": ((255, 100),)}

    assert eval_ir(ps, env, tensor) == ((255, 161),)


def test_eval_taco_index_expression(taco):
    ps = parse_expr("tensor1(arr, lambda i: arr[i] * arr[i] * arr[i] * arr[i])")

    assert eval_ir(ps, {"arr": (1, 2, -3)}, taco) == (1, 16, 81)


def test_eval_division_truncates(mapreduce):
    assert eval_ir(parse_expr("0 - 7 / 2"), {}, mapreduce) == -3
    assert eval_ir(parse_expr("(0 - 7) / 2"), {}, mapreduce) == -3
    with pytest.raises(DivisionByZero):
        eval_ir(parse_expr("1 / 0"), {}, mapreduce)


def test_eval_unknown_operator(mapreduce):
    with pytest.raises(UnknownOperator):
        eval_ir(Call("filter", (Var("data"),)), {"data": ()}, mapreduce)


def test_eval_runs_out_of_fuel(mapreduce):
    ps = parse_expr("map(data, lambda x: x + 1)")

    with pytest.raises(FuelExhausted):
        eval_ir(ps, {"data": tuple(range(200))}, mapreduce, fuel=10)


def test_typecheck_infers_container_types(mapreduce):
    checker = IRTypeChecker(mapreduce, allow_hidden=False)

    assert checker.infer(parse_expr(CONDITIONAL_SUM), {"data": SourceType.INT_LIST}) is SourceType.INT
    assert checker.infer(parse_expr("map(data, lambda x: x)"), {"data": SourceType.INT_LIST}) is SourceType.INT_LIST


def test_typecheck_rejects_int_for_list(mapreduce):
    checker = IRTypeChecker(mapreduce, allow_hidden=False)

    with pytest.raises(IRTypeError):
        checker.infer(parse_expr("map(n, lambda x: x)"), {"n": SourceType.INT})


@pytest.mark.parametrize(
    "text", [CONDITIONAL_SUM, "tensor1(arr[:i], lambda k: arr[k] + 1)", "a - (b - c)", "not (x < y) or z == 1"]
)
def test_print_ir_round_trips_through_parse(text):
    e = parse_expr(text)

    assert parse_expr(print_ir(e)) == e


def test_print_ir_keeps_needed_parentheses():
    assert print_ir(parse_expr("a - (b - c)")) == "a - (b - c)"
    assert print_ir(parse_expr("(a * b) + c")) == "a * b + c"


def test_normalization_ignores_lambda_names():
    a = normalize_candidate(parse_expr("map(data, lambda x: x * 3)"))
    b = normalize_candidate(parse_expr("map(data, lambda value: value * 3)"))

    assert a == b


def test_normalization_keeps_operand_order():
    a = normalize_candidate(parse_expr("a + b"))
    b = normalize_candidate(parse_expr("b + a"))

    assert a.digest != b.digest


def test_alpha_normalize_is_positional():
    e = alpha_normalize(parse_expr("reduce(map(d, lambda x: x), lambda a, b: a + b)"))

    assert print_ir(e) == "reduce(map(d, lambda _0: _0), lambda _1, _2: _1 + _2)"


def test_expr_size_counts_applications():
    body = parse_expr("arr[i] * arr[i] * arr[i] * arr[i]")

    assert expr_size(body) == 3
    assert expr_size(Call("tensor1", (Var("arr"), Lambda(("i",), body)))) == 4
    assert expr_size(parse_expr("len(data)")) == 0
    assert expr_size(parse_expr(CONDITIONAL_SUM)) == 5


def test_substitute_respects_lambda_binding():
    e = parse_expr("map(data, lambda data: data + n)")
    out = substitute(e, {"data": Var("xs"), "n": IntLit(2)})

    assert print_ir(out) == "map(xs, lambda data: data + 2)"
    assert free_vars(out) == {"xs"}


@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6))
def test_arith_matches_python(a, b):
    env = {"a": a, "b": b}
    e = Arith("-", Arith("+", Var("a"), Var("b")), Arith("*", Var("a"), IntLit(2)))

    assert eval_ir(e, env, load_dsl("mapreduce")) == (a + b) - a * 2


def test_eval_long_lists_without_deep_recursion(mapreduce, tensor):
    data = tuple(range(5000))

    assert eval_ir(parse_expr("reduce(data, lambda a, b: a + b)"), {"data": data}, mapreduce) == sum(data)
    assert eval_ir(parse_expr("map(data, lambda x: x * 2)"), {"data": data}, mapreduce) == tuple(2 * x for x in data)
    rows = tuple((i, -i) for i in range(1500))
    doubled = eval_ir(parse_expr("matrix_elemwise_add(a, a)"), {"a": rows}, tensor)
    assert doubled == tuple((2 * i, -2 * i) for i in range(1500))


def test_eval_long_tensor_index_expression(taco):
    arr = tuple(range(2000))

    assert eval_ir(parse_expr("sum1(arr, lambda i: arr[i])"), {"arr": arr}, taco) == sum(arr)


def _count_positive() -> DslDefinition:
    body = parse_expr("ite(len(a) < 1, 0, ite(a[0] > 0, 1 + count_pos(a[1:]), count_pos(a[1:])))")
    op = OperatorDef("count_pos", (("a", SourceType.INT_LIST),), SourceType.INT, body)
    return DslDefinition("counting", ".x", (op,))


def test_unfolding_needs_one_unconditional_self_call(mapreduce):
    reduce_op = mapreduce.operator("reduce")
    [count_pos] = _count_positive().operators

    assert unfolding(reduce_op.name, reduce_op.body) is not None
    assert unfolding(count_pos.name, count_pos.body) is None


def test_deep_recursion_is_reported_as_fuel_exhaustion():
    dsl = _count_positive()
    e = parse_expr("count_pos(a)")

    assert eval_ir(e, {"a": (3, -1, 4)}, dsl) == 2
    with pytest.raises(FuelExhausted):
        eval_ir(e, {"a": tuple(range(20000))}, dsl, fuel=10**8)


def _fold_right(xs, f, init=0):
    acc = init
    for x in reversed(xs):
        acc = f(x, acc)
    return acc


INT_LISTS = st.lists(st.integers(-1000, 1000), max_size=40).map(tuple)


@given(INT_LISTS)
def test_map_matches_iterative_reference(data):
    e = parse_expr("map(data, lambda x: ite(x < 100, x * 3 + 1, 0 - x))")

    assert eval_ir(e, {"data": data}, load_dsl("mapreduce")) == tuple(x * 3 + 1 if x < 100 else -x for x in data)


@given(INT_LISTS)
def test_reduce_matches_iterative_reference(data):
    dsl = load_dsl("mapreduce")

    assert eval_ir(parse_expr("reduce(data, lambda a, b: a + b)"), {"data": data}, dsl) == sum(data)
    assert eval_ir(parse_expr("reduce(data, lambda a, b: a - b)"), {"data": data}, dsl) == _fold_right(
        data, lambda a, b: a - b
    )


_NAMES = st.sampled_from(["a", "b", "x"])
_ATOMS = st.one_of(_NAMES.map(Var), st.integers(0, 50).map(IntLit))
_ARITH = st.recursive(
    _ATOMS, lambda inner: st.builds(Arith, st.sampled_from(["+", "-", "*"]), inner, inner), max_leaves=6
)
_COMPARE = st.builds(Compare, st.sampled_from(["<", "<=", ">", ">=", "==", "!="]), _ARITH, _ARITH)
_CONDS = st.one_of(_COMPARE, st.builds(lambda l, r: BoolOp("and", (l, r)), _COMPARE, _COMPARE))
_INTS = st.recursive(_ARITH, lambda inner: st.builds(ite, _CONDS, inner, inner), max_leaves=4)
_SUMMARIES = st.one_of(
    _INTS,
    _INTS.map(lambda body: Call("map", (Var("data"), Lambda(("x",), body)))),
    _INTS.map(
        lambda body: Call(
            "reduce",
            (Call("map", (Var("data"), Lambda(("x",), body))), Lambda(("a", "b"), Arith("+", Var("a"), Var("b")))),
        )
    ),
)


@given(_SUMMARIES)
def test_print_ir_round_trips(e):
    assert parse_expr(print_ir(e)) == e


@given(_SUMMARIES)
def test_normalization_is_idempotent(e):
    canonical = normalize_candidate(e)

    assert normalize_candidate(parse_expr(canonical.text)) == canonical
    assert normalize_candidate(alpha_normalize(e)) == canonical


@given(_SUMMARIES, st.integers(-50, 50), st.integers(-50, 50), INT_LISTS)
def test_eval_is_pure(e, a, b, data):
    dsl = load_dsl("mapreduce")
    env = {"a": a, "b": b, "x": 7, "data": data}
    before = dict(env)

    first = eval_ir(e, env, dsl)

    assert env == before
    assert eval_ir(e, env, dsl) == first
