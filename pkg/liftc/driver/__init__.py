"""
The transpile loop, benchmark suites and synthetic benchmark generation.
"""
from .runs import RunRecorder
from .suite import Benchmark, SuiteEntry, SuiteReport, load_benchmark, run_benchmark, run_suite
from .synthetic import gen_synthetic_benchmarks
from .transpile import PhaseTimings, Status, TranspileResult, TranspileStats, transpile_code

__all__ = [
    "Benchmark",
    "PhaseTimings",
    "RunRecorder",
    "Status",
    "SuiteEntry",
    "SuiteReport",
    "TranspileResult",
    "TranspileStats",
    "gen_synthetic_benchmarks",
    "load_benchmark",
    "run_benchmark",
    "run_suite",
    "transpile_code",
]
