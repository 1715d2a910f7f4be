"""
liftc: lift imperative loop programs into verified DSL programs.
"""
from .__about__ import __version__
from .catalog import load_dsl
from .codegen import emit_target
from .config import RunConfig, Settings
from .driver import TranspileResult, run_suite, transpile_code
from .frontend import parse_source
from .verifier import verify

__all__ = [
    "RunConfig",
    "Settings",
    "TranspileResult",
    "__version__",
    "emit_target",
    "load_dsl",
    "parse_source",
    "run_suite",
    "transpile_code",
    "verify",
]
