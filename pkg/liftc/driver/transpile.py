"""
The transpile loop: search for a program summary with invariants that the
verifier accepts, then emit target code.

Two-phase mode asks for summaries, screens each one, and for every
surviving summary asks for invariants until one set verifies or the
per-summary budget runs out. Single-phase mode asks for both at once.
"""
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple

from ..candidates import validate_invariant_shape
from ..codegen import emit_target
from ..config import EnumerativeProviderConfig, RunConfig
from ..engine import get_inv_sols_for_ps, get_joint_sols, get_ps_sols
from ..engine.models import Candidate
from ..engine.providers import Provider, make_provider
from ..errors import EnumerationExhausted, ReplayExhausted, UnencodableConstruct, WrongProvider
from ..frontend import LoopInfo, SourceProgram, loop_structure, parse_source
from ..ir.dsl import DslDefinition
from ..ir.nodes import IRExpr
from ..ir.printer import print_ir
from ..verifier import Rejected, Verified, VerifyResult, differential_check, verify
from .runs import RunRecorder

logger = logging.getLogger(__name__)

_EXHAUSTION = (ReplayExhausted, EnumerationExhausted)


class Status(str, Enum):
    SOLVED = "Solved"
    UNSOLVED = "Unsolved"


@dataclass
class TranspileStats:
    ps_candidates: int = 0
    inv_candidates: int = 0
    syntactic_rejects: int = 0
    semantic_rejects: int = 0
    solver_seconds: float = 0.0
    enumeration_count: Optional[int] = None
    ps_queries: int = 0
    inv_queries: int = 0
    verify_attempts: int = 0

    def counts(self) -> Dict[str, Any]:
        """Everything but timings, for deterministic reports."""
        return {
            "ps_candidates": self.ps_candidates,
            "inv_candidates": self.inv_candidates,
            "syntactic_rejects": self.syntactic_rejects,
            "semantic_rejects": self.semantic_rejects,
            "enumeration_count": self.enumeration_count,
            "ps_queries": self.ps_queries,
            "inv_queries": self.inv_queries,
            "verify_attempts": self.verify_attempts,
        }


@dataclass
class PhaseTimings:
    generation: float = 0.0
    screening: float = 0.0
    verification: float = 0.0
    total: float = 0.0

    def as_dict(self) -> Dict[str, float]:
        return {k: round(v, 3) for k, v in vars(self).items()}


@dataclass
class TranspileResult:
    """
    Outcome of one transpile run.

    Attributes:
        status: Solved or Unsolved
        ps: Verified summary when solved
        invs: Its invariants, one per loop
        target_code: Emitted DSL code when solved
        bound: Container bound when the bounded fallback was needed
        stats: Candidate and reject counts
        timings: Seconds per phase
        incorrect_ps_sols: Summaries fed back as incorrect, in order
        trace: Ordered trace events
    """

    status: Status
    ps: Optional[IRExpr] = None
    invs: Tuple[IRExpr, ...] = ()
    target_code: Optional[str] = None
    bound: Optional[int] = None
    stats: TranspileStats = field(default_factory=TranspileStats)
    timings: PhaseTimings = field(default_factory=PhaseTimings)
    incorrect_ps_sols: List[str] = field(default_factory=list)
    trace: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return self.status is Status.SOLVED


class _Search:
    """State of one transpile run."""

    def __init__(
        self,
        source_text: str,
        program: SourceProgram,
        dsl: DslDefinition,
        config: RunConfig,
        provider: Provider,
        recorder: RunRecorder,
    ):
        self.source_text = source_text
        self.program = program
        self.loops: List[LoopInfo] = loop_structure(program)
        self.dsl = dsl
        self.config = config
        self.provider = provider
        self.recorder = recorder
        self.stats = TranspileStats()
        self.timings = PhaseTimings()
        self.incorrect_ps_sols: List[str] = []
        self.seen_ps_sols: Set[str] = set()
        self.solution: Optional[Tuple[IRExpr, Tuple[IRExpr, ...], Verified]] = None
        self.deadline = time.monotonic() + config.run_timeout if config.run_timeout is not None else None
        self.timed_out = False

    def _expired(self, phase: str) -> bool:
        if self.timed_out:
            return True
        if self.deadline is None or time.monotonic() < self.deadline:
            return False
        self.timed_out = True
        self.recorder.trace("timed-out", phase=phase)
        logger.warning(f"Run timeout of {self.config.run_timeout}s reached during {phase} search")
        return True

    # two-phase

    def run_two_phase(self) -> None:
        budget = self.config.budget
        for iteration in range(min(budget.num_iters, budget.ps_queries)):
            if self._expired("ps"):
                return
            self.stats.ps_queries += 1
            self.recorder.trace("ps-query", iteration=iteration, incorrect=len(self.incorrect_ps_sols))
            started = time.monotonic()
            try:
                candidates = get_ps_sols(
                    budget.n, self.source_text, self.dsl, list(self.incorrect_ps_sols), self.provider, self.recorder
                )
            except _EXHAUSTION as e:
                self.recorder.trace("exhausted", phase="ps", detail=str(e))
                logger.warning(f"Summary source exhausted: {e}")
                return
            finally:
                self.timings.generation += time.monotonic() - started
            logger.info(f"Iteration {iteration}: {len(candidates)} summary candidates")
            for candidate in candidates:
                if self._expired("ps") or self._try_ps(candidate):
                    return

    def _key(self, candidate: Any) -> str:
        return candidate.hash if candidate.hash is not None else f"raw:{candidate.raw_text}"

    def _mark_incorrect(self, candidate: Candidate) -> None:
        self.incorrect_ps_sols.append(candidate.raw_text)
        self.recorder.trace("incorrect-mark", ps=candidate.canonical)

    def _try_ps(self, candidate: Candidate) -> bool:
        """True ends the search: solved, or out of time."""
        self.stats.ps_candidates += 1
        key = self._key(candidate)
        if key in self.seen_ps_sols:
            self.recorder.trace("seen-skip", ps=candidate.canonical)
            return False
        if candidate.parsed is None:
            self.stats.syntactic_rejects += 1
            self.recorder.trace("parse-reject", reason=str(candidate.rejection))
            return False
        self.seen_ps_sols.add(key)
        ps = candidate.parsed.expr

        if not self.loops:
            result = self._verify(ps, ())
            if isinstance(result, Verified):
                self.solution = (ps, (), result)
                return True
            self.stats.semantic_rejects += 1
            self._mark_incorrect(candidate)
            return False

        if self.config.screen_ps and self.config.diff_samples > 0:
            started = time.monotonic()
            cex = differential_check(
                self.program, ps, self.dsl, self.config.diff_samples, self.config.seed, self.config.fuel
            )
            self.timings.screening += time.monotonic() - started
            if cex is not None:
                self.stats.semantic_rejects += 1
                self.recorder.trace("screen-reject", ps=candidate.canonical, detail=cex.describe())
                self._mark_incorrect(candidate)
                return False

        if self._search_invariants(ps):
            return True
        if self.timed_out:
            return True
        self.stats.semantic_rejects += 1
        self._mark_incorrect(candidate)
        return False

    def _search_invariants(self, ps: IRExpr) -> bool:
        incorrect_invs: List[str] = []
        seen_invs: Set[str] = set()
        n = self.config.budget.n
        for _ in range(self.config.budget.inv_queries):
            if self._expired("inv"):
                return False
            self.stats.inv_queries += 1
            self.recorder.trace("inv-query", ps=print_ir(ps), incorrect=len(incorrect_invs))
            started = time.monotonic()
            try:
                candidates = get_inv_sols_for_ps(
                    n, ps, self.source_text, self.dsl, list(incorrect_invs), self.provider, self.recorder
                )
            except _EXHAUSTION as e:
                self.recorder.trace("exhausted", phase="inv", detail=str(e))
                return False
            finally:
                self.timings.generation += time.monotonic() - started
            for candidate in candidates:
                if self._expired("inv"):
                    return False
                self.stats.inv_candidates += 1
                key = self._key(candidate)
                if key in seen_invs:
                    self.recorder.trace("inv-seen-skip", invs=candidate.canonical)
                    continue
                if candidate.parsed is None:
                    self.stats.syntactic_rejects += 1
                    self.recorder.trace("inv-parse-reject", reason=str(candidate.rejection))
                    continue
                seen_invs.add(key)
                invs = candidate.parsed.exprs
                violation = validate_invariant_shape(invs, self.loops, self.dsl)
                if violation is not None:
                    self.stats.syntactic_rejects += 1
                    self.recorder.trace("shape-reject", detail=str(violation))
                    incorrect_invs.append(candidate.raw_text)
                    continue
                result = self._verify(ps, invs)
                if isinstance(result, Verified):
                    self.solution = (ps, invs, result)
                    return True
                self.stats.semantic_rejects += 1
                incorrect_invs.append(candidate.raw_text)
        return False

    # single-phase

    def run_single_phase(self) -> None:
        budget = self.config.budget
        incorrect: List[str] = []
        for iteration in range(min(budget.num_iters, budget.ps_queries)):
            if self._expired("joint"):
                return
            self.stats.ps_queries += 1
            self.recorder.trace("joint-query", iteration=iteration, incorrect=len(incorrect))
            started = time.monotonic()
            try:
                candidates = get_joint_sols(
                    budget.n, self.source_text, self.dsl, list(incorrect), self.provider, self.recorder
                )
            except _EXHAUSTION as e:
                self.recorder.trace("exhausted", phase="joint", detail=str(e))
                return
            finally:
                self.timings.generation += time.monotonic() - started
            for candidate in candidates:
                if self._expired("joint"):
                    return
                self.stats.ps_candidates += 1
                key = self._key(candidate)
                if key in self.seen_ps_sols:
                    self.recorder.trace("seen-skip")
                    continue
                if candidate.rejection is not None:
                    self.stats.syntactic_rejects += 1
                    self.recorder.trace("parse-reject", reason=str(candidate.rejection))
                    continue
                self.seen_ps_sols.add(key)
                parsed_ps, parsed_invs = candidate.result  # type: ignore[misc]
                ps = parsed_ps.expr
                invs = parsed_invs.exprs if parsed_invs is not None else ()
                if invs:
                    self.stats.inv_candidates += 1
                violation = validate_invariant_shape(invs, self.loops, self.dsl) if self.loops else None
                if violation is not None:
                    self.stats.syntactic_rejects += 1
                    self.recorder.trace("shape-reject", detail=str(violation))
                else:
                    result = self._verify(ps, invs)
                    if isinstance(result, Verified):
                        self.solution = (ps, invs, result)
                        return
                    self.stats.semantic_rejects += 1
                incorrect.append(candidate.raw_text)
                self.incorrect_ps_sols.append(candidate.raw_text)
                self.recorder.trace("incorrect-mark", ps=print_ir(ps))

    # verification

    def _verify(self, ps: IRExpr, invs: Sequence[IRExpr]) -> VerifyResult:
        self.stats.verify_attempts += 1
        config = self.config
        if config.screen_ps and self.loops and config.phase == "two":
            # the summary already passed the same differential check
            config = config.model_copy(update={"diff_samples": 0})
        started = time.monotonic()
        try:
            result = verify(ps, invs, self.program, self.dsl, config, self.recorder.next_attempt())
        except UnencodableConstruct as e:
            result = Rejected("solver", f"unencodable: {e}")
        finally:
            self.timings.verification += time.monotonic() - started
        self.stats.solver_seconds += result.solver_seconds
        fields: Dict[str, Any] = {"ps": print_ir(ps), "invs": len(invs)}
        if isinstance(result, Verified):
            fields.update(verdict="verified", bound=result.bound)
        else:
            fields.update(verdict="rejected", stage=result.stage)
        self.recorder.trace("verify", **fields)
        logger.info(f"Verification {fields['verdict']} for {fields['ps']}")
        return result


def _enumeration_count(provider: Provider, config: RunConfig) -> Optional[int]:
    if not isinstance(config.provider, EnumerativeProviderConfig):
        return None
    try:
        return provider.enumeration_count()
    except WrongProvider:
        return None


def transpile_code(
    source_text: str,
    dsl: DslDefinition,
    config: RunConfig,
    provider: Optional[Provider] = None,
    run_id: Optional[str] = None,
) -> TranspileResult:
    """
    Lift a source program into ``dsl``.

    Args:
        source_text: Source program text
        dsl: Target DSL
        config: Budgets, provider, solver and phase settings
        provider: Candidate source; built from ``config.provider`` when omitted
        run_id: Run directory name under ``config.out_dir``; no artifacts without it

    Returns:
        Solved with the summary, invariants and target code, or Unsolved

    Raises:
        SourceError: The source does not parse or type-check
        ProviderError: The live endpoint failed
        SolverLaunchError: The solver could not be started
    """
    started = time.monotonic()
    program = parse_source(source_text)
    provider = provider or make_provider(config.provider, config.seed)
    root = config.out_dir / run_id if config.out_dir is not None and run_id is not None else None
    recorder = RunRecorder(root)
    recorder.write_config(config)
    logger.info(f"Transpiling '{program.name}' to {dsl.name} ({config.phase}-phase, {provider.kind} provider)")

    search = _Search(source_text, program, dsl, config, provider, recorder)
    if config.phase == "single":
        search.run_single_phase()
    else:
        search.run_two_phase()

    search.stats.enumeration_count = _enumeration_count(provider, config)
    result = TranspileResult(
        status=Status.UNSOLVED,
        stats=search.stats,
        timings=search.timings,
        incorrect_ps_sols=search.incorrect_ps_sols,
        trace=recorder.events,
    )
    if search.solution is not None:
        ps, invs, verified = search.solution
        result.status = Status.SOLVED
        result.ps, result.invs, result.bound = ps, tuple(invs), verified.bound
        result.target_code = emit_target(ps, dsl)
        recorder.trace("solved", ps=print_ir(ps), bound=verified.bound)
        recorder.write_output(result.target_code, dsl.extension)
        logger.info(f"Solved '{program.name}': {result.target_code}")
    else:
        logger.info(f"No verified summary found for '{program.name}'")
    result.timings.total = time.monotonic() - started
    return result
