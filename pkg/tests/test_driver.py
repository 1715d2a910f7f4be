import json
import shutil
from types import SimpleNamespace

import pytest

from liftc.catalog import load_dsl
from liftc.cli import EXIT_ERROR, EXIT_OK, EXIT_UNSOLVED, main
from liftc.config import RunConfig
from liftc.driver import Status, gen_synthetic_benchmarks, load_benchmark, run_benchmark, run_suite, transpile_code
from liftc.driver.synthetic import MAX_LENGTH
from liftc.errors import MalformedBenchmark

from .conftest import BENCHMARKS, FIXTURES, UNSAT_SOLVER, read_jsonl, read_source, replay_config

# replays whose verified summary differs in form from expected_ps.txt
REWORDED = {"netpacket_flowlet", "taco_additive_chain"}
CONDITIONAL_SUM_TARGET = "map(lambda i: i if i < 100 else 0).reduce(lambda a, b: a + b)"


def _suite_config(out_dir=None) -> RunConfig:
    return RunConfig.model_validate(
        {"solver_cmd": UNSAT_SOLVER, "vc_timeout": 10, "diff_samples": 200, "out_dir": out_dir}
    )


def _write_replay(path, entries):
    path.write_text("".join(json.dumps(e, sort_keys=True) + "\n" for e in entries), encoding="utf-8")
    return path


def _events(result):
    return [e["event"] for e in result.trace]


def test_transpile_conditional_sum_from_replay(mapreduce):
    config = replay_config(BENCHMARKS / "conditional_sum" / "replay.jsonl")

    result = transpile_code(read_source("conditional_sum"), mapreduce, config)

    assert result.status is Status.SOLVED
    assert result.target_code == CONDITIONAL_SUM_TARGET
    assert _events(result) == ["ps-query", "parse-reject", "ps-query", "inv-query", "verify", "solved"]
    assert result.stats.counts() == {
        "ps_candidates": 2,
        "inv_candidates": 1,
        "syntactic_rejects": 1,
        "semantic_rejects": 0,
        "enumeration_count": None,
        "ps_queries": 2,
        "inv_queries": 1,
        "verify_attempts": 1,
    }
    assert len(result.invs) == 1


def test_transpile_writes_run_artifacts(mapreduce, tmp_path):
    config = replay_config(BENCHMARKS / "conditional_sum" / "replay.jsonl", out_dir=tmp_path)

    transpile_code(read_source("conditional_sum"), mapreduce, config, run_id="cs-0")

    run = tmp_path / "cs-0"
    assert (run / "output.spark").read_text() == CONDITIONAL_SUM_TARGET + "\n"
    assert [e["event"] for e in read_jsonl(run / "trace.jsonl")][-1] == "solved"
    assert sorted(p.name for p in (run / "prompts").iterdir()) == ["001-ps.txt", "002-ps.txt", "003-inv.txt"]
    assert (run / "attempt-1" / "verdicts.json").is_file()
    assert json.loads((run / "config.json").read_text())["solver_cmd"] == UNSAT_SOLVER


def test_wrong_summaries_are_fed_back_once(mapreduce, tmp_path):
    wrong = "def conditional_sum(data):\n    return reduce(map(data, lambda x: ite(x > 100, x, 0)), lambda a, b: a + b)\n"
    renamed = wrong.replace("lambda x: ite(x > 100, x, 0)", "lambda v: ite(v > 100, v, 0)")
    replay = _write_replay(tmp_path / "replay.jsonl", [{"phase": "ps", "text": wrong}, {"phase": "ps", "text": renamed}])

    result = transpile_code(read_source("conditional_sum"), mapreduce, replay_config(replay))

    assert result.status is Status.UNSOLVED
    assert _events(result) == [
        "ps-query",
        "screen-reject",
        "incorrect-mark",
        "ps-query",
        "seen-skip",
        "ps-query",
        "exhausted",
    ]
    assert result.incorrect_ps_sols == [wrong]
    assert result.stats.semantic_rejects == 1
    assert result.stats.verify_attempts == 0


def test_repeated_unparseable_summaries_are_rejected_each_time(mapreduce, tmp_path):
    filtered, correct, inv = read_jsonl(BENCHMARKS / "conditional_sum" / "replay.jsonl")
    replay = _write_replay(tmp_path / "replay.jsonl", [filtered, filtered, correct, inv])

    result = transpile_code(read_source("conditional_sum"), mapreduce, replay_config(replay))

    assert result.status is Status.SOLVED
    assert _events(result) == [
        "ps-query",
        "parse-reject",
        "ps-query",
        "parse-reject",
        "ps-query",
        "inv-query",
        "verify",
        "solved",
    ]
    assert result.stats.syntactic_rejects == 2

def test_semantic_rejections_leave_the_benchmark_unsolved(tensor):
    bench = FIXTURES / "rejections" / "screen_blend" / "semantic_only"

    result = transpile_code((bench / "source.src").read_text(), tensor, replay_config(bench / "replay.jsonl"))

    assert result.status is Status.UNSOLVED
    assert result.stats.semantic_rejects == 2
    assert result.stats.syntactic_rejects == 0
    assert result.target_code is None


def test_bad_invariants_are_rejected_by_shape(mapreduce, tmp_path):
    ps = "def conditional_sum(data):\n    return reduce(map(data, lambda x: ite(x < 100, x, 0)), lambda a, b: a + b)\n"
    replay = _write_replay(
        tmp_path / "replay.jsonl",
        [
            {"phase": "ps", "text": ps},
            {"phase": "inv", "text": "def invariant1(i):\n    return True\n"},
        ],
    )

    result = transpile_code(read_source("conditional_sum"), mapreduce, replay_config(replay))

    assert result.status is Status.UNSOLVED
    assert "shape-reject" in _events(result)
    assert _events(result)[-1] == "exhausted"
    assert result.stats.syntactic_rejects == 1


def test_single_phase_joint_replay(mapreduce):
    bench = FIXTURES / "joint" / "conditional_sum"
    config = replay_config(bench / "replay.jsonl", phase="single")

    result = transpile_code((bench / "source.src").read_text(), mapreduce, config)

    assert result.status is Status.SOLVED
    assert result.target_code == CONDITIONAL_SUM_TARGET
    assert _events(result).count("joint-query") == 2
    assert result.stats.semantic_rejects == 1
    assert result.stats.verify_attempts == 2


def test_loop_free_benchmark_skips_invariants(netpacket):
    bench = BENCHMARKS / "netpacket_sampling"

    result = transpile_code((bench / "source.src").read_text(), netpacket, replay_config(bench / "replay.jsonl"))

    assert result.status is Status.SOLVED
    assert "inv-query" not in _events(result)
    assert result.stats.semantic_rejects == 1


def test_enumerative_search_solves_scale_list(mapreduce):
    config = RunConfig.model_validate(
        {"solver_cmd": UNSAT_SOLVER, "vc_timeout": 10, "diff_samples": 200, "provider": {"kind": "enum", "max_size": 3}}
    )

    result = transpile_code(read_source("scale_list"), mapreduce, config)

    assert result.status is Status.SOLVED
    assert result.stats.enumeration_count is not None and result.stats.enumeration_count >= 1
    assert result.target_code is not None and result.target_code.startswith("map(lambda ")


def test_replay_solves_synthetic_benchmarks_the_enumerator_cannot(tmp_path):
    benches = gen_synthetic_benchmarks(42, 10, (5, 10), tmp_path / "benches")
    enum_config = RunConfig.model_validate(
        {"solver_cmd": UNSAT_SOLVER, "vc_timeout": 10, "diff_samples": 200, "provider": {"kind": "enum", "max_size": 2}}
    )

    replayed = [run_benchmark(bench, _suite_config(tmp_path / "runs"), replay=True) for bench in benches]
    enumerated = [run_benchmark(bench, enum_config) for bench in benches]

    assert [e.status for e in replayed] == ["Solved"] * 10
    assert sum(e.status == "Solved" for e in enumerated) < 10
    assert all(e.counts["enumeration_count"] > 0 for e in enumerated)


def test_run_timeout_stops_the_search(mapreduce, monkeypatch):
    ticks = iter(range(0, 10**6, 10))
    monkeypatch.setattr("liftc.driver.transpile.time", SimpleNamespace(monotonic=lambda: float(next(ticks))))
    config = replay_config(BENCHMARKS / "conditional_sum" / "replay.jsonl", run_timeout=5)

    result = transpile_code(read_source("conditional_sum"), mapreduce, config)

    assert result.status is Status.UNSOLVED
    assert _events(result) == ["timed-out"]
    assert result.stats.ps_queries == 0


@pytest.mark.parametrize("name", sorted(p.name for p in BENCHMARKS.iterdir() if p.is_dir()))
def test_benchmark_replays_solve(name, tmp_path):
    entry = run_benchmark(BENCHMARKS / name, _suite_config(tmp_path), replay=True)

    assert entry.status == "Solved", entry.error
    assert entry.target_code
    assert entry.matches_expected is (name not in REWORDED)


def test_load_benchmark_rejects_unknown_dsl(tmp_path):
    bench = tmp_path / "bad"
    bench.mkdir()
    (bench / "source.src").write_text(read_source("scale_list"))
    (bench / "dsl.txt").write_text("sql\n")

    with pytest.raises(MalformedBenchmark):
        load_benchmark(bench)


def test_suite_records_missing_replay_as_error(tmp_path):
    bench = tmp_path / "benches" / "no_replay"
    bench.mkdir(parents=True)
    (bench / "source.src").write_text(read_source("scale_list"))
    (bench / "dsl.txt").write_text("mapreduce\n")

    report = run_suite(tmp_path / "benches", _suite_config(), replay=True)

    [entry] = report.entries
    assert entry.status == "Error"
    assert "replay.jsonl" in entry.error
    assert not report.all_solved


def test_suite_over_empty_directory(tmp_path):
    report = run_suite(tmp_path, _suite_config())

    assert report.entries == []
    assert report.to_table().endswith("solved 0/0\n")


def test_suite_reports_are_deterministic(tmp_path):
    benches = tmp_path / "benches"
    for name in ("conditional_sum", "scale_list", "netpacket_flowlet"):
        shutil.copytree(BENCHMARKS / name, benches / name)

    first = run_suite(benches, _suite_config(tmp_path / "a"), jobs=2, replay=True)
    second = run_suite(benches, _suite_config(tmp_path / "b"), jobs=1, replay=True)

    assert first.all_solved and second.all_solved
    assert [e.name for e in first.entries] == ["conditional_sum", "netpacket_flowlet", "scale_list"]
    assert (tmp_path / "a" / "report.json").read_text() == (tmp_path / "b" / "report.json").read_text()
    assert (tmp_path / "a" / "report.txt").read_text() == (tmp_path / "b" / "report.txt").read_text()
    assert "timings" not in (tmp_path / "a" / "report.json").read_text()
    assert set(json.loads((tmp_path / "a" / "timings.json").read_text())) == {e.name for e in first.entries}


def test_synthetic_benchmarks_are_reproducible(tmp_path):
    a = gen_synthetic_benchmarks(7, 4, (5, 10), tmp_path / "a")
    b = gen_synthetic_benchmarks(7, 4, (5, 10), tmp_path / "b")

    assert [p.name for p in a] == ["synth-01", "synth-02", "synth-03", "synth-04"]
    for x, y in zip(a, b):
        for name in ("source.src", "dsl.txt", "expected_ps.txt", "replay.jsonl"):
            assert (x / name).read_bytes() == (y / name).read_bytes()


def test_synthetic_expression_lengths(tmp_path):
    for bench in gen_synthetic_benchmarks(1, 6, (3, 4), tmp_path):
        expected = (bench / "expected_ps.txt").read_text()
        assert 3 <= expected.count("arr[i]") <= 4
        assert load_benchmark(bench).dsl is load_dsl("taco")


def test_synthetic_benchmark_solves_from_its_replay(tmp_path):
    [bench] = gen_synthetic_benchmarks(3, 1, (6, 6), tmp_path / "benches")

    entry = run_benchmark(bench, _suite_config(tmp_path / "runs"), replay=True)

    assert entry.status == "Solved", entry.error
    assert entry.matches_expected is True


@pytest.mark.parametrize("bounds", [(0, 3), (5, MAX_LENGTH + 1), (6, 5)])
def test_synthetic_length_range_is_checked(bounds, tmp_path):
    with pytest.raises(ValueError):
        gen_synthetic_benchmarks(0, 1, bounds, tmp_path)


# Command line


def test_cli_transpile(tmp_path, capsys):
    code = main(
        [
            "transpile",
            "--source",
            str(BENCHMARKS / "conditional_sum" / "source.src"),
            "--dsl",
            "mapreduce",
            "--replay-file",
            str(BENCHMARKS / "conditional_sum" / "replay.jsonl"),
            "--solver",
            UNSAT_SOLVER,
            "--diff-samples",
            "100",
            "--out",
            str(tmp_path),
        ]
    )

    assert code == EXIT_OK
    assert capsys.readouterr().out.strip() == CONDITIONAL_SUM_TARGET
    assert (tmp_path / "source-0" / "output.spark").is_file()


def test_cli_transpile_unsolved(tmp_path, capsys):
    bench = FIXTURES / "rejections" / "screen_blend" / "semantic_only"
    code = main(
        [
            "transpile",
            "--source",
            str(bench / "source.src"),
            "--dsl",
            "tensor",
            "--replay-file",
            str(bench / "replay.jsonl"),
            "--solver",
            UNSAT_SOLVER,
            "--out",
            str(tmp_path),
        ]
    )

    assert code == EXIT_UNSOLVED
    assert capsys.readouterr().out.strip() == "Unsolved"


def test_cli_suite_with_replays(tmp_path, capsys):
    benches = tmp_path / "benches"
    shutil.copytree(BENCHMARKS / "scale_list", benches / "scale_list")

    code = main(["suite", str(benches), "--provider", "replay", "--solver", UNSAT_SOLVER, "--out", str(tmp_path / "out")])

    assert code == EXIT_OK
    assert "solved 1/1" in capsys.readouterr().out
    assert (tmp_path / "out" / "report.json").is_file()


def test_cli_gen_bench(tmp_path, capsys):
    code = main(["gen-bench", "--seed", "2", "--count", "2", "--out", str(tmp_path)])

    assert code == EXIT_OK
    assert len(capsys.readouterr().out.splitlines()) == 2
    assert (tmp_path / "synth-02" / "replay.jsonl").is_file()


def test_cli_reports_bad_input(tmp_path):
    assert main(["gen-bench", "--min-len", "0", "--out", str(tmp_path)]) == EXIT_ERROR
    assert main(["transpile", "--source", str(tmp_path / "missing.src"), "--dsl", "taco", "--out", str(tmp_path)]) == EXIT_ERROR


def test_cli_rejects_invalid_configuration(tmp_path):
    code = main(
        [
            "transpile",
            "--source",
            str(BENCHMARKS / "scale_list" / "source.src"),
            "--dsl",
            "mapreduce",
            "--provider",
            "enum",
            "--phase",
            "single",
            "--out",
            str(tmp_path),
        ]
    )

    assert code == EXIT_ERROR
