"""
Data models exchanged between prompt builders, providers and the driver.
"""
import hashlib
import logging
from dataclasses import dataclass
from typing import List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field

from ..candidates import (
    CandidateKind,
    CandidateParser,
    CandidateScope,
    ParsedCandidate,
    ParseResult,
    Rejection,
    parse_candidate,
)
from ..ir.dsl import DslDefinition
from ..ir.printer import normalize_candidate

logger = logging.getLogger(__name__)


class PromptMessage(BaseModel):
    model_config = ConfigDict(frozen=True)

    role: Literal["system", "user", "assistant"]
    content: str = Field(min_length=1)


def render_prompt(messages: Sequence[PromptMessage]) -> str:
    """Plain-text rendering used for run artifacts."""
    return "\n\n".join(f"### {m.role}\n{m.content}" for m in messages) + "\n"


def as_chat(messages: Sequence[PromptMessage]) -> List[dict]:
    return [{"role": m.role, "content": m.content} for m in messages]


@dataclass(frozen=True)
class Candidate:
    """
    One generated candidate.

    Attributes:
        kind: Program summary or invariant set
        raw_text: Text as produced by the provider
        result: Parsed candidate or the rejection
        hash: Canonical hash of the parsed expressions, None when rejected
        canonical: Canonical text of the parsed expressions, None when rejected
    """

    kind: CandidateKind
    raw_text: str
    result: ParseResult
    hash: Optional[str] = None
    canonical: Optional[str] = None

    @property
    def parsed(self) -> Optional[ParsedCandidate]:
        return self.result if isinstance(self.result, ParsedCandidate) else None

    @property
    def rejection(self) -> Optional[Rejection]:
        return self.result if isinstance(self.result, Rejection) else None


def make_candidate(text: str, kind: CandidateKind, dsl: DslDefinition, scope: Optional[CandidateScope]) -> Candidate:
    """Parse ``text`` and attach its canonical hash when it parses."""
    result = parse_candidate(text, dsl, kind, scope)
    if isinstance(result, Rejection):
        return Candidate(kind, text, result)
    canonical = "\n".join(normalize_candidate(e).text for e in result.exprs)
    return Candidate(kind, text, result, _digest(canonical), canonical)


def _digest(canonical: str) -> str:
    return hashlib.blake2b(canonical.encode("utf-8"), digest_size=8).hexdigest()


JointResult = Union[Tuple[ParsedCandidate, Optional[ParsedCandidate]], Rejection]


@dataclass(frozen=True)
class JointCandidate:
    """A summary and its invariants from one single-phase answer."""

    raw_text: str
    result: JointResult
    hash: Optional[str] = None

    @property
    def rejection(self) -> Optional[Rejection]:
        return self.result if isinstance(self.result, Rejection) else None


def make_joint_candidate(text: str, dsl: DslDefinition, scope: CandidateScope, with_invariants: bool) -> JointCandidate:
    result = CandidateParser(dsl, scope).parse_joint(text, with_invariants)
    if isinstance(result, Rejection):
        logger.debug(f"joint candidate rejected: {result}")
        return JointCandidate(text, result)
    ps, invs = result
    exprs = ps.exprs + (invs.exprs if invs is not None else ())
    return JointCandidate(text, result, _digest("\n".join(normalize_candidate(e).text for e in exprs)))
