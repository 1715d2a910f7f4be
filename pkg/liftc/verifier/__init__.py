"""
Verification of candidate summaries and invariants.
"""
from .differential import Counterexample, StateGenerator, differential_check
from .smt import SmtScript, encode_smt, unroll_depth
from .solver import SolverOutcome, Verdict, parse_solver_output, run_solver, run_solver_async, solve_all
from .vcgen import HoareVC, VCKind, generate_vcs
from .verify import Rejected, VcReport, Verified, VerifyResult, verify, verify_async

__all__ = [
    "Counterexample",
    "HoareVC",
    "Rejected",
    "SmtScript",
    "SolverOutcome",
    "StateGenerator",
    "VCKind",
    "VcReport",
    "Verdict",
    "Verified",
    "VerifyResult",
    "differential_check",
    "encode_smt",
    "generate_vcs",
    "parse_solver_output",
    "run_solver",
    "run_solver_async",
    "solve_all",
    "unroll_depth",
    "verify",
    "verify_async",
]
