import json
from collections import Counter

import pytest

from liftc.candidates import CandidateKind, CandidateScope, ParsedCandidate, parse_candidate
from liftc.config import RunConfig
from liftc.driver import load_benchmark
from liftc.engine.extract import extract_code
from liftc.errors import IndexOutOfBounds, SolverLaunchError, SolverProtocolError
from liftc.frontend import interpret_source, parse_source
from liftc.ir import parse_expr
from liftc.ir.nodes import BoolOp, Compare, Len, Var
from liftc.verifier import Rejected, Verdict, Verified, differential_check, encode_smt, generate_vcs, verify
from liftc.verifier.differential import StateGenerator
from liftc.verifier.smt import SmtScript
from liftc.verifier.solver import parse_solver_output, run_solver, solve_all
from liftc.verifier.vcgen import VCKind, in_bounds, index_safety

from .conftest import BENCHMARKS, FIXTURES, SAT_SOLVER, SLEEP_SOLVER, UNSAT_SOLVER, read_jsonl, read_source

SCREEN_BLEND_PS = (
    "matrix_elemwise_sub(matrix_elemwise_add(base, active), "
    "matrix_scalar_div(matrix_elemwise_mul(base, active), 255))"
)
CONDITIONAL_SUM_PS = "reduce(map(data, lambda x: ite(x < 100, x, 0)), lambda a, b: a + b)"
CONDITIONAL_SUM_INV = (
    "i >= 0 and i <= len(data) and total == reduce(map(data[:i], lambda x: ite(x < 100, x, 0)), lambda a, b: a + b)"
)


@pytest.fixture
def screen_blend():
    return parse_source(read_source("tensor_screen_blend"))


@pytest.fixture
def conditional_sum():
    return parse_source(read_source("conditional_sum"))


@pytest.fixture
def screen_blend_invs(screen_blend, tensor):
    [text] = [e["text"] for e in read_jsonl(BENCHMARKS / "tensor_screen_blend" / "replay.jsonl") if e["phase"] == "inv"]
    parsed = parse_candidate(extract_code(text), tensor, CandidateKind.INV, CandidateScope.of(screen_blend))
    assert isinstance(parsed, ParsedCandidate)
    return parsed.exprs


def _config(solver_cmd: str, **overrides) -> RunConfig:
    return RunConfig.model_validate({"solver_cmd": solver_cmd, "vc_timeout": 10, "diff_samples": 200, **overrides})


def test_state_generator_is_seeded(screen_blend):
    a = list(StateGenerator(screen_blend, seed=3).states(20))
    b = list(StateGenerator(screen_blend, seed=3).states(20))

    assert a == b
    for state in a:
        assert len(state["base"]) == len(state["active"])
        assert len({len(row) for row in state["base"] + state["active"]}) <= 1


def test_state_generator_draws_empty_matrices(screen_blend):
    rows = [len(state["base"]) for state in StateGenerator(screen_blend, seed=5).states(200)]

    assert 0 in rows
    assert max(rows) == 4


def test_correct_summary_passes_differential(screen_blend, tensor):
    assert differential_check(screen_blend, parse_expr(SCREEN_BLEND_PS), tensor, samples=300) is None


@pytest.mark.parametrize("entry", read_jsonl(FIXTURES / "rejections" / "screen_blend" / "semantic.jsonl"))
def test_wrong_summaries_get_counterexamples(entry, screen_blend, tensor):
    parsed = parse_candidate(entry["text"], tensor, CandidateKind.PS, CandidateScope.of(screen_blend))
    assert isinstance(parsed, ParsedCandidate)

    cex = differential_check(screen_blend, parsed.expr, tensor, samples=1000)

    assert cex is not None
    assert set(cex.state) == {"base", "active"}
    assert cex.describe().startswith("on ")


def test_differential_reports_summary_faults(conditional_sum, mapreduce):
    cex = differential_check(conditional_sum, parse_expr("reduce(data, lambda a, b: a / 0)"), mapreduce, samples=50)

    assert cex is not None
    assert "DivisionByZero" in cex.detail


def test_vcs_for_nested_loops(screen_blend, screen_blend_invs):
    vcs = generate_vcs(screen_blend, parse_expr(SCREEN_BLEND_PS), screen_blend_invs)
    kinds = [vc.kind for vc in vcs]

    assert len(vcs) == 5
    assert kinds.count(VCKind.INITIATION) == 2
    assert kinds.count(VCKind.PRESERVATION) == 2
    assert kinds.count(VCKind.POSTCONDITION) == 1
    assert [vc.loop for vc in vcs if vc.kind is VCKind.POSTCONDITION] == [None]


def test_vcs_for_single_loop(conditional_sum):
    vcs = generate_vcs(conditional_sum, parse_expr(CONDITIONAL_SUM_PS), [parse_expr(CONDITIONAL_SUM_INV)])

    assert sorted(vc.describe() for vc in vcs) == ["initiation of loop 0", "postcondition", "preservation of loop 0"]


def test_loop_free_program_has_only_postconditions():
    program = parse_source(read_source("netpacket_flowlet"))
    ps = parse_expr("ite(now - last_time > 5, write_state(hop, new_hop), read_state(hop))")

    vcs = generate_vcs(program, ps, [])

    assert vcs
    assert {vc.kind for vc in vcs} == {VCKind.POSTCONDITION}


def test_encode_smt(conditional_sum, mapreduce):
    vcs = generate_vcs(conditional_sum, parse_expr(CONDITIONAL_SUM_PS), [parse_expr(CONDITIONAL_SUM_INV)])

    script = encode_smt(vcs[1], mapreduce)
    bounded = encode_smt(vcs[1], mapreduce, bound=4)

    assert "(check-sat)" in script.text
    assert "define-funs-rec" in script.text
    assert "define-funs-rec" not in bounded.text
    assert bounded.bound == 4


@pytest.mark.parametrize(
    "stdout, verdict, model",
    [
        ("unsat\n", Verdict.VERIFIED, ""),
        ("sat\n(model (define-fun v_i () Int 3))\n", Verdict.REFUTED, "(model (define-fun v_i () Int 3))"),
        ("unknown\n", Verdict.UNKNOWN, ""),
        ("(warning)\nunsat\n", Verdict.VERIFIED, ""),
    ],
)
def test_parse_solver_output(stdout, verdict, model):
    outcome = parse_solver_output(stdout, 0.5)

    assert (outcome.verdict, outcome.model, outcome.elapsed) == (verdict, model, 0.5)


def test_solver_output_without_verdict():
    with pytest.raises(SolverProtocolError):
        parse_solver_output("(error \"parse\")\n", 0.0)


def test_run_solver_with_stub():
    assert run_solver(SmtScript("(check-sat)\n"), UNSAT_SOLVER, 10).verdict is Verdict.VERIFIED
    refuted = run_solver(SmtScript("(check-sat)\n"), SAT_SOLVER, 10)
    assert (refuted.verdict, refuted.model) == (Verdict.REFUTED, "(model)")


def test_run_solver_times_out():
    outcome = run_solver(SmtScript("(check-sat)\n"), SLEEP_SOLVER, 1)

    assert outcome.verdict is Verdict.TIMED_OUT
    assert outcome.elapsed < 10


@pytest.mark.anyio
async def test_solve_all_keeps_script_order():
    scripts = [SmtScript("(check-sat)\n", description=f"vc {i}") for i in range(5)]

    outcomes = await solve_all(scripts, UNSAT_SOLVER, 10, max_parallel=2)

    assert [o.verdict for o in outcomes] == [Verdict.VERIFIED] * 5


def test_missing_solver_binary():
    with pytest.raises(SolverLaunchError):
        run_solver(SmtScript("(check-sat)\n"), "liftc-no-such-solver", 5)


def test_verify_accepts_when_solver_says_unsat(screen_blend, screen_blend_invs, tensor, tmp_path):
    result = verify(parse_expr(SCREEN_BLEND_PS), screen_blend_invs, screen_blend, tensor, _config(UNSAT_SOLVER), tmp_path)

    assert isinstance(result, Verified)
    assert result.bound is None
    assert len(result.reports) == 5
    verdicts = json.loads((tmp_path / "verdicts.json").read_text())
    assert {v["verdict"] for v in verdicts} == {"verified"}
    assert sorted(p.name for p in tmp_path.glob("*.smt2")) == [f"vc-{i}.smt2" for i in range(5)]


def test_verify_rejects_when_solver_says_sat(conditional_sum, mapreduce):
    result = verify(
        parse_expr(CONDITIONAL_SUM_PS),
        [parse_expr(CONDITIONAL_SUM_INV)],
        conditional_sum,
        mapreduce,
        _config(SAT_SOLVER),
    )

    assert isinstance(result, Rejected)
    assert result.stage == "solver"
    assert "(model)" in result.detail


def test_verify_falls_back_to_bounded_check(conditional_sum, mapreduce):
    unknown = "sh -c 'echo unknown' stub"
    result = verify(
        parse_expr(CONDITIONAL_SUM_PS),
        [parse_expr(CONDITIONAL_SUM_INV)],
        conditional_sum,
        mapreduce,
        _config(unknown, bound_k=3),
    )

    assert isinstance(result, Rejected)
    assert "(bounded, k=3)" in result.detail
    assert all(r.bound == 3 for r in result.reports)


def test_verify_without_fallback_reports_unknown(conditional_sum, mapreduce):
    result = verify(
        parse_expr(CONDITIONAL_SUM_PS),
        [parse_expr(CONDITIONAL_SUM_INV)],
        conditional_sum,
        mapreduce,
        _config("sh -c 'echo unknown' stub", bounded_fallback=False),
    )

    assert isinstance(result, Rejected)
    assert result.detail.endswith("unknown")


def test_verify_runs_differential_first(conditional_sum, mapreduce):
    wrong = parse_expr("reduce(map(data, lambda x: ite(x > 100, x, 0)), lambda a, b: a + b)")

    result = verify(wrong, [parse_expr(CONDITIONAL_SUM_INV)], conditional_sum, mapreduce, _config(UNSAT_SOLVER))

    assert isinstance(result, Rejected)
    assert result.stage == "differential"
    assert result.counterexample is not None
    assert result.reports == ()


@pytest.mark.solver
def test_cvc5_proves_conditional_sum(conditional_sum, mapreduce):
    result = verify(
        parse_expr(CONDITIONAL_SUM_PS),
        [parse_expr(CONDITIONAL_SUM_INV)],
        conditional_sum,
        mapreduce,
        _config("cvc5", vc_timeout=60),
    )

    assert isinstance(result, Verified)


@pytest.mark.solver
def test_cvc5_refutes_a_wrong_invariant(conditional_sum, mapreduce):
    wrong_inv = parse_expr("i >= 0 and i <= len(data) and total == reduce(data[:i], lambda a, b: a + b)")

    result = verify(
        parse_expr(CONDITIONAL_SUM_PS),
        [wrong_inv],
        conditional_sum,
        mapreduce,
        _config("cvc5", vc_timeout=60, bounded_fallback=False),
    )

    assert isinstance(result, Rejected)
    assert result.stage == "solver"


OUT_OF_RANGE_PS = f"ite(len(data) > 9, data[len(data)] - data[len(data)] + {CONDITIONAL_SUM_PS}, {CONDITIONAL_SUM_PS})"


def test_postcondition_requires_summary_reads_in_range(conditional_sum):
    vcs = generate_vcs(conditional_sum, parse_expr(OUT_OF_RANGE_PS), [parse_expr(CONDITIONAL_SUM_INV)])
    [post] = [vc for vc in vcs if vc.kind is VCKind.POSTCONDITION]

    assert isinstance(post.conclusion, BoolOp) and post.conclusion.op == "and"
    equal, *facts = post.conclusion.operands
    assert isinstance(equal, Compare) and equal.op == "=="
    guard = Compare(">", Len(Var("data")), parse_expr("9"))
    expected = BoolOp("or", (BoolOp("not", (guard,)), in_bounds(Var("data"), Len(Var("data")))))
    assert facts == [expected, expected]


def test_index_reads_inside_lambdas_add_no_bounds_facts():
    assert index_safety(parse_expr(CONDITIONAL_SUM_PS)) == []
    assert index_safety(parse_expr("reduce(map(data, lambda x: data[x]), lambda a, b: a + b)")) == []


def test_short_circuit_operands_guard_later_reads():
    [fact] = index_safety(parse_expr("len(data) > 0 and data[0] > 3"))

    guard = Compare(">", Len(Var("data")), parse_expr("0"))
    assert fact == BoolOp("or", (BoolOp("not", (guard,)), in_bounds(Var("data"), parse_expr("0"))))


def test_summary_without_index_reads_keeps_a_plain_postcondition(conditional_sum):
    vcs = generate_vcs(conditional_sum, parse_expr(CONDITIONAL_SUM_PS), [parse_expr(CONDITIONAL_SUM_INV)])
    [post] = [vc for vc in vcs if vc.kind is VCKind.POSTCONDITION]

    assert isinstance(post.conclusion, Compare)


def test_source_reads_are_assumed_in_range(conditional_sum):
    vcs = generate_vcs(conditional_sum, parse_expr(CONDITIONAL_SUM_PS), [parse_expr(CONDITIONAL_SUM_INV)])
    [preservation] = [vc for vc in vcs if vc.kind is VCKind.PRESERVATION]
    [index] = [name for name, _ in preservation.declarations if name.startswith("i__")]

    assert in_bounds(Var("data"), Var(index)) in preservation.hypotheses


@pytest.mark.solver
def test_cvc5_rejects_out_of_range_summary_reads(conditional_sum, mapreduce):
    result = verify(
        parse_expr(OUT_OF_RANGE_PS),
        [parse_expr(CONDITIONAL_SUM_INV)],
        conditional_sum,
        mapreduce,
        _config("cvc5", vc_timeout=60, diff_samples=0, bounded_fallback=False),
    )

    assert isinstance(result, Rejected)
    assert result.stage == "solver"


def test_inputs_on_which_the_program_faults_are_skipped(mapreduce):
    program = parse_source("int size(int[] data) {\n    int x = data[0];\n    x = len(data);\n    return x;\n}\n")
    with pytest.raises(IndexOutOfBounds):
        interpret_source(program, {"data": ()})

    assert differential_check(program, parse_expr("len(data)"), mapreduce, samples=200) is None
    assert differential_check(program, parse_expr("len(data) + 0 * data[0]"), mapreduce, samples=200) is None


# Oracle equivalence

MUTANTS = read_jsonl(FIXTURES / "mutants" / "summaries.jsonl")
BENCHMARK_NAMES = sorted(p.name for p in BENCHMARKS.iterdir() if p.is_dir())


def _replay_invs(bench, program):
    texts = [e["text"] for e in read_jsonl(bench.replay) if e["phase"] == "inv"]
    if not texts:
        return []
    parsed = parse_candidate(extract_code(texts[-1]), bench.dsl, CandidateKind.INV, CandidateScope.of(program))
    assert isinstance(parsed, ParsedCandidate)
    return parsed.exprs


@pytest.mark.parametrize("name", BENCHMARK_NAMES)
def test_expected_summaries_agree_with_their_programs(name):
    bench = load_benchmark(BENCHMARKS / name)
    program = parse_source(bench.source_text)
    parsed = parse_candidate(bench.expected_ps, bench.dsl, CandidateKind.PS, CandidateScope.of(program))
    assert isinstance(parsed, ParsedCandidate)

    assert differential_check(program, parsed.expr, bench.dsl, samples=10_000) is None


def test_every_benchmark_has_five_mutants():
    per_benchmark = Counter(m["benchmark"] for m in MUTANTS)

    assert set(per_benchmark) == set(BENCHMARK_NAMES)
    assert min(per_benchmark.values()) >= 5


def test_differential_check_kills_the_mutants():
    survivors = []
    for mutant in MUTANTS:
        bench = load_benchmark(BENCHMARKS / mutant["benchmark"])
        program = parse_source(bench.source_text)
        if differential_check(program, parse_expr(mutant["ps"]), bench.dsl, samples=1000) is None:
            survivors.append(mutant["ps"])

    assert len(survivors) <= 0.05 * len(MUTANTS), survivors


@pytest.mark.solver
@pytest.mark.parametrize("mutant", MUTANTS, ids=lambda m: f"{m['benchmark']}-{m['mutation']}")
def test_cvc5_verifier_rejects_every_mutant(mutant):
    bench = load_benchmark(BENCHMARKS / mutant["benchmark"])
    program = parse_source(bench.source_text)

    result = verify(
        parse_expr(mutant["ps"]), _replay_invs(bench, program), program, bench.dsl, _config("cvc5", vc_timeout=60)
    )

    assert isinstance(result, Rejected)
