"""
Candidate verification: differential pre-filter, then every verification
condition through the SMT solver, with an optional bounded retry for
conditions the solver leaves undecided.
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import anyio

from ..config import RunConfig
from ..frontend.ast import SourceProgram
from ..ir.dsl import DslDefinition
from ..ir.nodes import IRExpr
from .differential import Counterexample, differential_check
from .smt import SmtScript, encode_smt
from .solver import SolverOutcome, Verdict, solve_all
from .vcgen import HoareVC, generate_vcs

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VcReport:
    """How one verification condition was discharged."""

    index: int
    description: str
    verdict: Verdict
    elapsed: float
    bound: Optional[int] = None


@dataclass(frozen=True)
class Verified:
    """All conditions hold; ``bound`` is set when some needed the bounded fallback."""

    bound: Optional[int] = None
    reports: Tuple[VcReport, ...] = ()

    @property
    def solver_seconds(self) -> float:
        return sum(r.elapsed for r in self.reports)


@dataclass(frozen=True)
class Rejected:
    stage: str
    detail: str
    counterexample: Optional[Counterexample] = None
    reports: Tuple[VcReport, ...] = field(default=())

    @property
    def solver_seconds(self) -> float:
        return sum(r.elapsed for r in self.reports)


VerifyResult = Union[Verified, Rejected]


def _persist(artifact_dir: Optional[Path], name: str, text: str) -> None:
    if artifact_dir is None:
        return
    artifact_dir.mkdir(parents=True, exist_ok=True)
    (artifact_dir / name).write_text(text, encoding="utf-8")


async def _solve(
    vcs: Sequence[HoareVC],
    dsl: DslDefinition,
    config: RunConfig,
    bound: Optional[int],
    indices: Sequence[int],
    artifact_dir: Optional[Path],
) -> List[SolverOutcome]:
    scripts: List[SmtScript] = []
    suffix = "-bounded" if bound is not None else ""
    for i in indices:
        script = encode_smt(vcs[i], dsl, bound)
        _persist(artifact_dir, f"vc-{i}{suffix}.smt2", script.text)
        scripts.append(script)
    return await solve_all(scripts, config.solver_cmd, config.vc_timeout, config.max_parallel_solvers)


async def verify_async(
    ps: IRExpr,
    invs: Sequence[IRExpr],
    program: SourceProgram,
    dsl: DslDefinition,
    config: RunConfig,
    artifact_dir: Optional[Path] = None,
) -> VerifyResult:
    """
    Check that ``ps`` with ``invs`` is a verified lifting of ``program``.

    Args:
        ps: Parsed program summary
        invs: One shape-validated invariant per loop
        program: Source program
        dsl: Target DSL
        config: Solver command, timeouts, differential sample count and fallback settings
        artifact_dir: Where to store the solver scripts and verdicts, if anywhere

    Returns:
        Verified, or Rejected with stage ``differential`` or ``solver``

    Raises:
        SolverLaunchError: The solver could not be started
        SolverProtocolError: The solver output has no verdict
        InvariantCountMismatch: ``invs`` does not match the loop count
    """
    if config.diff_samples > 0:
        cex = differential_check(program, ps, dsl, config.diff_samples, config.seed, config.fuel)
        if cex is not None:
            logger.info(f"Differential check rejected the candidate {cex.describe()}")
            return Rejected("differential", cex.describe(), counterexample=cex)

    vcs = generate_vcs(program, ps, invs)
    everything = list(range(len(vcs)))
    outcomes = await _solve(vcs, dsl, config, None, everything, artifact_dir)
    reports = {i: VcReport(i, vcs[i].describe(), o.verdict, o.elapsed) for i, o in zip(everything, outcomes)}

    def finish(result: VerifyResult) -> VerifyResult:
        verdicts = [
            {
                "vc": r.index,
                "kind": r.description,
                "verdict": r.verdict.value,
                "bound": r.bound,
                "elapsed": round(r.elapsed, 3),
            }
            for r in sorted(reports.values(), key=lambda r: (r.index, r.bound is not None))
        ]
        _persist(artifact_dir, "verdicts.json", json.dumps(verdicts, indent=2) + "\n")
        return result

    refuted = [i for i, o in zip(everything, outcomes) if o.verdict is Verdict.REFUTED]
    if refuted:
        detail = f"{vcs[refuted[0]].describe()} refuted: {outcomes[refuted[0]].model[:300]}"
        logger.info(f"Solver rejected the candidate: {vcs[refuted[0]].describe()}")
        return finish(Rejected("solver", detail, reports=tuple(reports.values())))

    undecided = [i for i, o in zip(everything, outcomes) if o.verdict is not Verdict.VERIFIED]
    if not undecided:
        logger.info(f"All {len(vcs)} verification conditions hold")
        return finish(Verified(None, tuple(reports.values())))

    if not config.bounded_fallback:
        first = undecided[0]
        detail = f"{vcs[first].describe()}: {outcomes[first].verdict.value}"
        return finish(Rejected("solver", detail, reports=tuple(reports.values())))

    logger.info(f"Retrying {len(undecided)} undecided conditions with containers bounded by {config.bound_k}")
    retried = await _solve(vcs, dsl, config, config.bound_k, undecided, artifact_dir)
    for i, o in zip(undecided, retried):
        reports[i] = VcReport(i, vcs[i].describe(), o.verdict, reports[i].elapsed + o.elapsed, config.bound_k)
    failed = [(i, o) for i, o in zip(undecided, retried) if o.verdict is not Verdict.VERIFIED]
    if failed:
        i, o = failed[0]
        detail = f"{vcs[i].describe()} (bounded, k={config.bound_k}): {o.verdict.value}"
        if o.verdict is Verdict.REFUTED:
            detail += f": {o.model[:300]}"
        return finish(Rejected("solver", detail, reports=tuple(reports.values())))
    return finish(Verified(config.bound_k, tuple(reports.values())))


def verify(
    ps: IRExpr,
    invs: Sequence[IRExpr],
    program: SourceProgram,
    dsl: DslDefinition,
    config: RunConfig,
    artifact_dir: Optional[Path] = None,
) -> VerifyResult:
    """Blocking wrapper around :func:`verify_async`."""
    return anyio.run(verify_async, ps, invs, program, dsl, config, artifact_dir)
