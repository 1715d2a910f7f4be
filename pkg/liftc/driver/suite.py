"""
Benchmark suites: run the transpile loop over a directory of benchmark
descriptors and write machine-readable and plain-text reports.

A benchmark is a directory holding ``source.src`` and ``dsl.txt`` (the DSL
name), optionally ``replay.jsonl`` and ``expected_ps.txt``.
"""
import json
import logging
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Any, Dict, List, Optional

import anyio

from ..candidates import CandidateKind, CandidateScope
from ..catalog import load_dsl
from ..config import RunConfig
from ..engine.models import make_candidate
from ..errors import DslError, MalformedBenchmark, ProviderError, SolverLaunchError, SourceError
from ..frontend import parse_source
from ..ir.dsl import DslDefinition
from ..ir.printer import normalize_candidate, print_ir
from .transpile import TranspileResult, transpile_code

logger = logging.getLogger(__name__)

_RECORDED_ERRORS = (MalformedBenchmark, SourceError, ProviderError, SolverLaunchError)


@dataclass(frozen=True)
class Benchmark:
    name: str
    path: Path
    source_text: str
    dsl: DslDefinition
    replay: Optional[Path]
    expected_ps: Optional[str]


def load_benchmark(path: Path) -> Benchmark:
    """
    Read one benchmark directory.

    Raises:
        MalformedBenchmark: ``source.src`` or ``dsl.txt`` is missing, or the DSL is unknown
    """
    source = path / "source.src"
    dsl_file = path / "dsl.txt"
    for required in (source, dsl_file):
        if not required.is_file():
            raise MalformedBenchmark(f"{path.name}: missing {required.name}")
    dsl_name = dsl_file.read_text(encoding="utf-8").strip()
    try:
        dsl = load_dsl(dsl_name)
    except DslError as e:
        raise MalformedBenchmark(f"{path.name}: {e}") from e
    replay = path / "replay.jsonl"
    expected = path / "expected_ps.txt"
    return Benchmark(
        name=path.name,
        path=path,
        source_text=source.read_text(encoding="utf-8"),
        dsl=dsl,
        replay=replay if replay.is_file() else None,
        expected_ps=expected.read_text(encoding="utf-8") if expected.is_file() else None,
    )


@dataclass
class SuiteEntry:
    name: str
    status: str
    dsl: Optional[str] = None
    error: Optional[str] = None
    ps: Optional[str] = None
    target_code: Optional[str] = None
    bound: Optional[int] = None
    matches_expected: Optional[bool] = None
    counts: Dict[str, Any] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, Any]:
        return {k: v for k, v in vars(self).items() if k != "timings"}


@dataclass
class SuiteReport:
    entries: List[SuiteEntry] = field(default_factory=list)

    @property
    def solved(self) -> int:
        return sum(1 for e in self.entries if e.status == "Solved")

    @property
    def all_solved(self) -> bool:
        return all(e.status == "Solved" for e in self.entries)

    def to_json(self) -> str:
        body = {
            "benchmarks": [e.as_dict() for e in self.entries],
            "solved": self.solved,
            "total": len(self.entries),
        }
        return json.dumps(body, indent=2, sort_keys=True) + "\n"

    def timings_json(self) -> str:
        return json.dumps({e.name: e.timings for e in self.entries}, indent=2, sort_keys=True) + "\n"

    def to_table(self) -> str:
        header = ("benchmark", "dsl", "status", "ps", "inv", "syn", "sem", "expected")
        rows = [header]
        for e in self.entries:
            c = e.counts
            expected = "-" if e.matches_expected is None else ("yes" if e.matches_expected else "no")
            rows.append(
                (
                    e.name,
                    e.dsl or "-",
                    e.status,
                    str(c.get("ps_candidates", "-")),
                    str(c.get("inv_candidates", "-")),
                    str(c.get("syntactic_rejects", "-")),
                    str(c.get("semantic_rejects", "-")),
                    expected,
                )
            )
        widths = [max(len(r[k]) for r in rows) for k in range(len(header))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
        lines.append(f"solved {self.solved}/{len(self.entries)}")
        return "\n".join(lines) + "\n"


def _canonical_expected(benchmark: Benchmark) -> Optional[str]:
    if benchmark.expected_ps is None:
        return None
    scope = CandidateScope.of(parse_source(benchmark.source_text))
    candidate = make_candidate(benchmark.expected_ps, CandidateKind.PS, benchmark.dsl, scope)
    if candidate.canonical is None:
        logger.warning(f"{benchmark.name}: expected_ps.txt does not parse: {candidate.rejection}")
    return candidate.canonical


def _entry(benchmark: Benchmark, result: TranspileResult) -> SuiteEntry:
    entry = SuiteEntry(
        name=benchmark.name,
        status=result.status.value,
        dsl=benchmark.dsl.name,
        counts=result.stats.counts(),
        timings={**result.timings.as_dict(), "solver": round(result.stats.solver_seconds, 3)},
    )
    if result.ps is not None:
        entry.ps = print_ir(result.ps)
        entry.target_code = result.target_code
        entry.bound = result.bound
        expected = _canonical_expected(benchmark)
        if expected is not None:
            entry.matches_expected = normalize_candidate(result.ps).text == expected
    return entry


def run_benchmark(path: Path, config: RunConfig, replay: bool = False) -> SuiteEntry:
    """
    Run one benchmark, turning recordable failures into an error entry.

    Args:
        path: Benchmark directory
        config: Run configuration
        replay: Use the benchmark's own ``replay.jsonl`` as the provider
    """
    try:
        benchmark = load_benchmark(path)
        if replay:
            if benchmark.replay is None:
                raise MalformedBenchmark(f"{path.name}: missing replay.jsonl")
            data = config.model_dump()
            data["provider"] = {"kind": "replay", "path": benchmark.replay}
            config = RunConfig.model_validate(data)
        result = transpile_code(benchmark.source_text, benchmark.dsl, config, run_id=f"{path.name}-{config.seed}")
    except _RECORDED_ERRORS as e:
        logger.error(f"Benchmark {path.name} failed: {e}")
        return SuiteEntry(name=path.name, status="Error", error=f"{type(e).__name__}: {e}")
    return _entry(benchmark, result)


def run_suite(benchmark_dir: Path, config: RunConfig, jobs: int = 1, replay: bool = False) -> SuiteReport:
    """
    Run every benchmark directory under ``benchmark_dir``.

    Reports are written to ``config.out_dir`` when set: ``report.json`` and
    ``report.txt`` hold statuses and counts and are identical across
    identical runs; ``timings.json`` holds the per-phase seconds.

    Args:
        benchmark_dir: Directory of benchmark directories
        config: Run configuration shared by all benchmarks
        jobs: Benchmarks run concurrently
        replay: Run each benchmark against its own replay file

    Returns:
        Entries in benchmark name order
    """
    paths = sorted(p for p in Path(benchmark_dir).iterdir() if p.is_dir()) if Path(benchmark_dir).is_dir() else []
    logger.info(f"Running {len(paths)} benchmarks from {benchmark_dir} with {jobs} jobs")
    entries: Dict[str, SuiteEntry] = {}

    async def run_all() -> None:
        limiter = anyio.CapacityLimiter(max(jobs, 1))

        async def run_one(path: Path) -> None:
            entries[path.name] = await anyio.to_thread.run_sync(
                partial(run_benchmark, path, config, replay), limiter=limiter
            )

        async with anyio.create_task_group() as tg:
            for path in paths:
                tg.start_soon(run_one, path)

    anyio.run(run_all)
    report = SuiteReport([entries[p.name] for p in paths])
    if config.out_dir is not None:
        config.out_dir.mkdir(parents=True, exist_ok=True)
        (config.out_dir / "report.json").write_text(report.to_json(), encoding="utf-8")
        (config.out_dir / "report.txt").write_text(report.to_table(), encoding="utf-8")
        (config.out_dir / "timings.json").write_text(report.timings_json(), encoding="utf-8")
    logger.info(f"Suite finished: {report.solved}/{len(report.entries)} solved")
    return report
