"""
Command-line entry point: ``liftc transpile``, ``liftc suite`` and ``liftc gen-bench``.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from pydantic import ValidationError

from .__about__ import __version__
from .catalog import DSL_NAMES, load_dsl
from .config import ConfigLoader, RunConfig, Settings, build_run_config
from .driver import gen_synthetic_benchmarks, run_suite, transpile_code
from .errors import LiftError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNSOLVED = 1
EXIT_ERROR = 2


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--provider", choices=("live", "replay", "enum"), help="Candidate source")
    parser.add_argument("--replay-file", type=Path, help="Recorded responses for the replay provider")
    parser.add_argument("--backend", choices=("http", "bedrock"), help="Live provider transport")
    parser.add_argument("--endpoint", help="Chat completions URL for the live provider")
    parser.add_argument("--model", help="Model name for the live provider")
    parser.add_argument("--temperature", type=float)
    parser.add_argument("--api-key-env", help="Environment variable holding the API key")
    parser.add_argument("--ps-budget", type=int, help="Summary queries")
    parser.add_argument("--inv-budget", type=int, help="Invariant queries per summary")
    parser.add_argument("--n", type=int, help="Candidates per query")
    parser.add_argument("--phase", choices=("two", "single"))
    parser.add_argument("--solver", help="SMT solver command line")
    parser.add_argument("--vc-timeout", type=float, help="Seconds per verification condition")
    parser.add_argument("--run-timeout", type=float, help="Seconds for the whole search per source")
    parser.add_argument("--diff-samples", type=int, help="Differential-test inputs, 0 disables")
    parser.add_argument("--no-screen", action="store_true", help="Skip differential screening of summaries")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", type=Path, help="Directory for run artifacts and reports")
    parser.add_argument("--config", type=Path, help="YAML profile file")
    parser.add_argument("--profile", help="Profile name within --config")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="liftc", description="Lift imperative loops into DSL programs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", help="debug, info, warning or error")
    commands = parser.add_subparsers(dest="command", required=True)

    transpile = commands.add_parser("transpile", help="Lift one source file")
    transpile.add_argument("--source", type=Path, required=True)
    transpile.add_argument("--dsl", choices=DSL_NAMES, required=True)
    _add_run_options(transpile)

    suite = commands.add_parser("suite", help="Run every benchmark in a directory")
    suite.add_argument("directory", type=Path)
    suite.add_argument("--jobs", type=int, default=1, help="Benchmarks run concurrently")
    _add_run_options(suite)

    gen = commands.add_parser("gen-bench", help="Write synthetic benchmarks")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--count", type=int, default=10)
    gen.add_argument("--min-len", type=int, default=5)
    gen.add_argument("--max-len", type=int, default=10)
    gen.add_argument("--out", type=Path, required=True)
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    provider: Dict[str, Any] = {}
    kind = args.provider or ("replay" if args.replay_file else None)
    if kind:
        provider["kind"] = kind
    for key, value in (
        ("path", args.replay_file),
        ("backend", args.backend),
        ("endpoint_url", args.endpoint),
        ("model_name", args.model),
        ("temperature", args.temperature),
        ("api_key_env", args.api_key_env),
    ):
        if value is not None:
            provider[key] = value
    budget = {
        key: value
        for key, value in (("ps_queries", args.ps_budget), ("inv_queries", args.inv_budget), ("n", args.n))
        if value is not None
    }
    overrides: Dict[str, Any] = {
        "provider": provider or None,
        "budget": budget or None,
        "phase": args.phase,
        "solver_cmd": args.solver,
        "vc_timeout": args.vc_timeout,
        "run_timeout": args.run_timeout,
        "diff_samples": args.diff_samples,
        "seed": args.seed,
        "out_dir": args.out,
    }
    if args.no_screen:
        overrides["screen_ps"] = False
    return overrides


def _run_config(args: argparse.Namespace, settings: Settings, overrides: Dict[str, Any]) -> RunConfig:
    config_file = args.config or settings.config_file
    profile: Optional[Dict[str, Any]] = None
    if config_file is not None:
        profile = ConfigLoader(config_file).get_profile(args.profile or settings.profile)
    return build_run_config(settings, profile, overrides)


def _transpile(args: argparse.Namespace, settings: Settings) -> int:
    config = _run_config(args, settings, _overrides(args))
    dsl = load_dsl(args.dsl)
    source_text = args.source.read_text(encoding="utf-8")
    result = transpile_code(source_text, dsl, config, run_id=f"{args.source.stem}-{config.seed}")
    if not result.solved:
        logger.info(f"{args.source} is unsolved after {result.stats.ps_candidates} summaries")
        print("Unsolved")
        return EXIT_UNSOLVED
    print(result.target_code)
    return EXIT_OK


def _suite(args: argparse.Namespace, settings: Settings) -> int:
    overrides = _overrides(args)
    # replay without a file means each benchmark's own replay.jsonl
    replay = overrides["provider"] is not None and overrides["provider"].get("kind") == "replay" and not args.replay_file
    if replay:
        overrides["provider"] = {"kind": "enum"}
        phase = overrides.pop("phase")
        config = _run_config(args, settings, overrides)
        if phase is not None:
            config = config.model_copy(update={"phase": phase})
    else:
        config = _run_config(args, settings, overrides)
    report = run_suite(args.directory, config, jobs=args.jobs, replay=replay)
    sys.stdout.write(report.to_table())
    return EXIT_OK if report.all_solved else EXIT_UNSOLVED


def _gen_bench(args: argparse.Namespace) -> int:
    written = gen_synthetic_benchmarks(args.seed, args.count, (args.min_len, args.max_len), args.out)
    for path in written:
        print(path)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the command line.

    Returns:
        0 when every requested benchmark is Solved, 1 when some are not,
        2 on configuration or input errors
    """
    args = build_parser().parse_args(argv)
    settings = Settings()
    logging.basicConfig(
        level=getattr(logging, (args.log_level or settings.log_level).upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    try:
        if args.command == "transpile":
            return _transpile(args, settings)
        if args.command == "suite":
            return _suite(args, settings)
        return _gen_bench(args)
    except ValidationError as e:
        logger.error(f"Invalid configuration: {e}")
    except (LiftError, OSError, ValueError) as e:
        logger.error(f"{type(e).__name__}: {e}")
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
