"""
Candidate providers: a live chat endpoint, Bedrock, recorded replays and
the enumerative baseline.
"""
import json
import logging
from abc import ABC, abstractmethod
from collections import deque
from pathlib import Path
from typing import Deque, Dict, List, Optional, Protocol, Sequence, Tuple

import boto3
import httpx
from botocore.exceptions import BotoCoreError, ClientError

from ..config import (
    EnumerativeProviderConfig,
    LiveProviderConfig,
    ProviderConfig,
    ReplayProviderConfig,
    api_key,
)
from ..errors import EnumerationExhausted, ProviderError, ReplayExhausted, WrongProvider
from ..frontend import parse_source
from ..ir.dsl import DslDefinition
from ..ir.nodes import IRExpr
from ..ir.printer import normalize_candidate
from ..utils import CircuitBreaker
from .enumerator import GrammarEnumerator, invariant_template, invariant_text, summary_text
from .extract import extract_code
from .models import PromptMessage, as_chat, render_prompt
from .prompts import build_inv_prompt, build_joint_prompt, build_ps_prompt

logger = logging.getLogger(__name__)

PHASES = ("ps", "inv", "joint")


class ExchangeRecorder(Protocol):
    def record_exchange(self, phase: str, prompt: str, responses: Sequence[str]) -> None:
        ...


class Provider(ABC):
    """Source of candidate texts for the three query phases."""

    kind: str = ""

    @abstractmethod
    def ps_texts(
        self,
        n: int,
        source_text: str,
        dsl: DslDefinition,
        incorrect: Sequence[str],
        recorder: Optional[ExchangeRecorder] = None,
    ) -> List[str]:
        """Up to ``n`` program-summary texts."""

    @abstractmethod
    def inv_texts(
        self,
        n: int,
        ps: IRExpr,
        source_text: str,
        dsl: DslDefinition,
        incorrect: Sequence[str],
        recorder: Optional[ExchangeRecorder] = None,
    ) -> List[str]:
        """Up to ``n`` invariant-set texts for the summary ``ps``."""

    def joint_texts(
        self,
        n: int,
        source_text: str,
        dsl: DslDefinition,
        incorrect: Sequence[str],
        recorder: Optional[ExchangeRecorder] = None,
    ) -> List[str]:
        raise WrongProvider(f"{self.kind} provider cannot answer joint queries")

    def enumeration_count(self) -> int:
        raise WrongProvider(f"{self.kind} provider does not enumerate")


class ChatProvider(Provider):
    """Providers that answer prompts; the code is extracted from each response."""

    @abstractmethod
    def complete(self, messages: Sequence[PromptMessage], n: int, phase: str) -> List[str]:
        """Raw responses, in completion order."""

    def _ask(
        self,
        phase: str,
        messages: Sequence[PromptMessage],
        n: int,
        recorder: Optional[ExchangeRecorder],
    ) -> List[str]:
        if n <= 0:
            return []
        prompt = render_prompt(messages)
        logger.debug(f"{phase} prompt:\n{prompt}")
        responses: List[str] = []
        try:
            responses = self.complete(messages, n, phase)
        finally:
            if recorder is not None:
                recorder.record_exchange(phase, prompt, responses)
        for response in responses:
            logger.debug(f"{phase} response:\n{response}")
        return [extract_code(r) for r in responses]

    def ps_texts(
        self,
        n: int,
        source_text: str,
        dsl: DslDefinition,
        incorrect: Sequence[str],
        recorder: Optional[ExchangeRecorder] = None,
    ) -> List[str]:
        return self._ask("ps", build_ps_prompt(source_text, dsl, incorrect), n, recorder)

    def inv_texts(
        self,
        n: int,
        ps: IRExpr,
        source_text: str,
        dsl: DslDefinition,
        incorrect: Sequence[str],
        recorder: Optional[ExchangeRecorder] = None,
    ) -> List[str]:
        return self._ask("inv", build_inv_prompt(source_text, dsl, ps, incorrect), n, recorder)

    def joint_texts(
        self,
        n: int,
        source_text: str,
        dsl: DslDefinition,
        incorrect: Sequence[str],
        recorder: Optional[ExchangeRecorder] = None,
    ) -> List[str]:
        return self._ask("joint", build_joint_prompt(source_text, dsl, incorrect), n, recorder)


class LiveProvider(ChatProvider):
    """
    Chat-completions endpoint over HTTP.

    Sends ``{model, messages, temperature, n}`` with a bearer key taken from
    the configured environment variable and reads ``choices[*].message.content``.
    """

    kind = "live"

    def __init__(self, config: LiveProviderConfig, client: Optional[httpx.Client] = None):
        self.config = config
        self.client = client or httpx.Client(timeout=config.request_timeout)
        self.breaker = CircuitBreaker(config.circuit_failure_threshold, config.circuit_reset_timeout)

    def _headers(self) -> Dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = api_key(self.config.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        else:
            logger.warning(f"Environment variable {self.config.api_key_env} is not set, sending no API key")
        return headers

    def _post(self, payload: dict) -> List[str]:
        try:
            response = self.client.post(self.config.endpoint_url, json=payload, headers=self._headers())
        except httpx.HTTPError as e:
            logger.error(f"Request to {self.config.endpoint_url} failed: {e}")
            raise ProviderError(0, str(e)) from e
        if not response.is_success:
            logger.error(f"Endpoint answered {response.status_code}")
            raise ProviderError(response.status_code, response.text[:2000])
        try:
            choices = sorted(response.json()["choices"], key=lambda c: c.get("index", 0))
            return [c["message"]["content"] for c in choices]
        except (ValueError, KeyError, TypeError) as e:
            raise ProviderError(response.status_code, f"malformed response: {e}") from e

    def complete(self, messages: Sequence[PromptMessage], n: int, phase: str) -> List[str]:
        payload = {
            "model": self.config.model_name,
            "messages": as_chat(messages),
            "temperature": self.config.temperature,
            "n": n,
            "max_tokens": self.config.max_tokens,
        }
        logger.info(f"Requesting {n} {phase} completions from {self.config.model_name}")
        return self.breaker.call(self._post, payload)


class BedrockProvider(ChatProvider):
    """Bedrock runtime ``converse`` API; one call per completion."""

    kind = "live"

    def __init__(self, config: LiveProviderConfig, client: Optional[object] = None):
        self.config = config
        self.bedrock = client or boto3.client("bedrock-runtime")
        self.breaker = CircuitBreaker(config.circuit_failure_threshold, config.circuit_reset_timeout)

    def _converse(self, system: List[dict], messages: List[dict]) -> str:
        try:
            response = self.bedrock.converse(  # type: ignore[attr-defined]
                modelId=self.config.model_name,
                messages=messages,
                system=system,
                inferenceConfig={"maxTokens": self.config.max_tokens, "temperature": self.config.temperature},
            )
        except ClientError as e:
            status = e.response.get("ResponseMetadata", {}).get("HTTPStatusCode", 0)
            logger.error(f"Error invoking Bedrock model: {e}")
            raise ProviderError(status, str(e)) from e
        except BotoCoreError as e:
            logger.error(f"Error invoking Bedrock model: {e}")
            raise ProviderError(0, str(e)) from e
        return "".join(part.get("text", "") for part in response["output"]["message"]["content"])

    def complete(self, messages: Sequence[PromptMessage], n: int, phase: str) -> List[str]:
        system = [{"text": m.content} for m in messages if m.role == "system"]
        chat = [{"role": m.role, "content": [{"text": m.content}]} for m in messages if m.role != "system"]
        logger.info(f"Calling Bedrock model {self.config.model_name} for {n} {phase} completions")
        return [self.breaker.call(self._converse, system, chat) for _ in range(n)]


def load_replay(path: Path) -> Dict[str, Deque[str]]:
    """
    Read a replay file: one ``{"phase": ..., "text": ...}`` object per line.

    Raises:
        ValueError: A line is not such an object
    """
    queues: Dict[str, Deque[str]] = {phase: deque() for phase in PHASES}
    with open(path, "r", encoding="utf-8") as file:
        for number, line in enumerate(file, start=1):
            if not line.strip():
                continue
            entry = json.loads(line)
            if not isinstance(entry, dict) or entry.get("phase") not in PHASES or not isinstance(entry.get("text"), str):
                raise ValueError(f"{path}:{number}: expected {{'phase': 'ps'|'inv'|'joint', 'text': str}}")
            queues[entry["phase"]].append(entry["text"])
    return queues


class ReplayProvider(ChatProvider):
    """
    Pre-recorded responses, consumed in file order per phase.

    Prompts are still built and recorded.
    A query takes whatever is left when fewer than ``n`` entries remain;
    a query on an empty phase raises ReplayExhausted.
    """

    kind = "replay"

    def __init__(self, config: ReplayProviderConfig):
        self.path = config.path
        self.queues = load_replay(config.path)

    def complete(self, messages: Sequence[PromptMessage], n: int, phase: str) -> List[str]:
        queue = self.queues[phase]
        if not queue:
            logger.warning(f"Replay file {self.path} has no {phase} entries left")
            raise ReplayExhausted(f"no {phase} entries left in {self.path}")
        return [queue.popleft() for _ in range(min(n, len(queue)))]


class EnumerativeProvider(Provider):
    """Grammar enumeration for summaries, the summary-derived template for invariants."""

    kind = "enum"

    def __init__(self, config: EnumerativeProviderConfig, seed: int = 0):
        self.config = config
        self.seed = seed
        self._enumerators: Dict[Tuple[str, str], GrammarEnumerator] = {}
        self._templated: set = set()

    def enumerator(self, source_text: str, dsl: DslDefinition) -> GrammarEnumerator:
        key = (source_text, dsl.name)
        if key not in self._enumerators:
            self._enumerators[key] = GrammarEnumerator(
                parse_source(source_text),
                dsl,
                max_size=self.config.max_size,
                candidate_limit=self.config.candidate_limit,
                prune=self.config.prune,
                io_filter=self.config.io_filter,
                seed=self.seed,
            )
        return self._enumerators[key]

    def ps_texts(
        self,
        n: int,
        source_text: str,
        dsl: DslDefinition,
        incorrect: Sequence[str],
        recorder: Optional[ExchangeRecorder] = None,
    ) -> List[str]:
        if n <= 0:
            return []
        enumerator = self.enumerator(source_text, dsl)
        return [summary_text(enumerator.program, term) for term in enumerator.take(n)]

    def inv_texts(
        self,
        n: int,
        ps: IRExpr,
        source_text: str,
        dsl: DslDefinition,
        incorrect: Sequence[str],
        recorder: Optional[ExchangeRecorder] = None,
    ) -> List[str]:
        if n <= 0:
            return []
        key = (source_text, normalize_candidate(ps).digest)
        if key in self._templated:
            raise EnumerationExhausted("the invariant template was already offered for this summary")
        self._templated.add(key)
        program = parse_source(source_text)
        return [invariant_text(program, invariant_template(program, ps))]

    def enumeration_count(self) -> int:
        """Target-typed candidates examined so far, over every source."""
        return sum(e.count for e in self._enumerators.values())


def make_provider(config: ProviderConfig, seed: int = 0) -> Provider:
    """Instantiate the provider a configuration describes."""
    if isinstance(config, LiveProviderConfig):
        if config.backend == "bedrock":
            return BedrockProvider(config)
        return LiveProvider(config)
    if isinstance(config, ReplayProviderConfig):
        return ReplayProvider(config)
    return EnumerativeProvider(config, seed)
