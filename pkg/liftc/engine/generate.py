"""
Candidate generation entry points used by the transpile loop.
"""
import logging
from typing import List, Optional, Sequence

from ..candidates import CandidateKind, CandidateScope
from ..frontend import loop_structure, parse_source
from ..ir.dsl import DslDefinition
from ..ir.nodes import IRExpr
from .models import Candidate, JointCandidate, make_candidate, make_joint_candidate
from .providers import ExchangeRecorder, Provider

logger = logging.getLogger(__name__)


def get_ps_sols(
    n: int,
    source_text: str,
    dsl: DslDefinition,
    incorrect: Sequence[str],
    provider: Provider,
    recorder: Optional[ExchangeRecorder] = None,
) -> List[Candidate]:
    """
    Ask ``provider`` for up to ``n`` program summaries and parse each one.

    Args:
        n: Candidates requested by this query
        source_text: Source program text
        dsl: Target DSL
        incorrect: Summaries already known to be wrong, oldest first
        provider: Candidate source
        recorder: Receives the prompt and the raw responses, if given

    Returns:
        Parsed or rejected candidates in provider order

    Raises:
        ProviderError: The live endpoint failed
        ReplayExhausted: No summaries left in the replay file
        EnumerationExhausted: The grammar has no further candidates
    """
    if n <= 0:
        return []
    scope = CandidateScope.of(parse_source(source_text))
    texts = provider.ps_texts(n, source_text, dsl, incorrect, recorder)
    return [make_candidate(text, CandidateKind.PS, dsl, scope) for text in texts]


def get_inv_sols_for_ps(
    n: int,
    ps: IRExpr,
    source_text: str,
    dsl: DslDefinition,
    incorrect: Sequence[str],
    provider: Provider,
    recorder: Optional[ExchangeRecorder] = None,
) -> List[Candidate]:
    """
    Ask for up to ``n`` invariant sets for ``ps``; each text holds one invariant per loop.

    Raises:
        NoLoops: The source has no loop
        ProviderError: The live endpoint failed
        ReplayExhausted: No invariants left in the replay file
        EnumerationExhausted: The template was already offered for ``ps``
    """
    if n <= 0:
        return []
    scope = CandidateScope.of(parse_source(source_text))
    texts = provider.inv_texts(n, ps, source_text, dsl, incorrect, recorder)
    return [make_candidate(text, CandidateKind.INV, dsl, scope) for text in texts]


def get_joint_sols(
    n: int,
    source_text: str,
    dsl: DslDefinition,
    incorrect: Sequence[str],
    provider: Provider,
    recorder: Optional[ExchangeRecorder] = None,
) -> List[JointCandidate]:
    """Single-phase query: each answer holds the summary followed by its invariants."""
    if n <= 0:
        return []
    program = parse_source(source_text)
    scope = CandidateScope.of(program)
    with_invariants = bool(loop_structure(program))
    texts = provider.joint_texts(n, source_text, dsl, incorrect, recorder)
    return [make_joint_candidate(text, dsl, scope, with_invariants) for text in texts]
