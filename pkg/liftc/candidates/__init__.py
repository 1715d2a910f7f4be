"""
Candidate parsing and invariant template validation.
"""
from .parser import (
    CandidateKind,
    CandidateParser,
    CandidateScope,
    FunctionDef,
    ParsedCandidate,
    ParseResult,
    Rejection,
    parse_candidate,
)
from .shape import ShapeViolation, validate_invariant_shape

__all__ = [
    "CandidateKind",
    "CandidateParser",
    "CandidateScope",
    "FunctionDef",
    "ParseResult",
    "ParsedCandidate",
    "Rejection",
    "ShapeViolation",
    "parse_candidate",
    "validate_invariant_shape",
]
