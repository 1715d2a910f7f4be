"""
Prompt construction and candidate providers.
"""
from .enumerator import GrammarEnumerator, TermBank, invariant_template
from .extract import extract_code
from .generate import get_inv_sols_for_ps, get_joint_sols, get_ps_sols
from .models import Candidate, JointCandidate, PromptMessage, render_prompt
from .prompts import FEEDBACK_LINE, build_inv_prompt, build_joint_prompt, build_ps_prompt
from .providers import (
    BedrockProvider,
    EnumerativeProvider,
    ExchangeRecorder,
    LiveProvider,
    Provider,
    ReplayProvider,
    make_provider,
)

__all__ = [
    "BedrockProvider",
    "Candidate",
    "EnumerativeProvider",
    "ExchangeRecorder",
    "FEEDBACK_LINE",
    "GrammarEnumerator",
    "JointCandidate",
    "LiveProvider",
    "PromptMessage",
    "Provider",
    "ReplayProvider",
    "TermBank",
    "build_inv_prompt",
    "build_joint_prompt",
    "build_ps_prompt",
    "extract_code",
    "get_inv_sols_for_ps",
    "get_joint_sols",
    "get_ps_sols",
    "invariant_template",
    "make_provider",
    "render_prompt",
]
