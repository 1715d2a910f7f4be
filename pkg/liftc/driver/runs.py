"""
Run directory layout and artifact persistence.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from ..config import RunConfig

logger = logging.getLogger(__name__)


class RunRecorder:
    """
    Writes the artifacts of one transpile run under ``root``.

    Layout::

        config.json
        prompts/<nnn>-<phase>.txt
        responses/<nnn>-<phase>.txt
        attempt-<m>/vc-<n>.smt2, attempt-<m>/verdicts.json
        trace.jsonl
        output<ext>

    With ``root`` None nothing is written but the trace is still collected.
    """

    def __init__(self, root: Optional[Path]):
        self.root = root
        self.exchanges = 0
        self.attempts = 0
        self.events: List[Dict[str, Any]] = []
        if root is not None:
            root.mkdir(parents=True, exist_ok=True)
            # a rerun with the same identifier replaces the previous trace
            (root / "trace.jsonl").write_text("", encoding="utf-8")

    def _write(self, relative: str, text: str) -> None:
        if self.root is None:
            return
        path = self.root / relative
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")

    def write_config(self, config: RunConfig) -> None:
        self._write("config.json", config.model_dump_json(indent=2) + "\n")

    def record_exchange(self, phase: str, prompt: str, responses: Sequence[str]) -> None:
        self.exchanges += 1
        stem = f"{self.exchanges:03d}-{phase}.txt"
        self._write(f"prompts/{stem}", prompt)
        body = "".join(f"--- response {k} ---\n{text.rstrip()}\n" for k, text in enumerate(responses, start=1))
        self._write(f"responses/{stem}", body)

    def next_attempt(self) -> Optional[Path]:
        """Directory for the next verification attempt's scripts and verdicts."""
        self.attempts += 1
        if self.root is None:
            return None
        return self.root / f"attempt-{self.attempts}"

    def trace(self, event: str, **fields: Any) -> None:
        entry = {"event": event, **fields}
        self.events.append(entry)
        logger.debug(f"trace {entry}")
        if self.root is not None:
            with open(self.root / "trace.jsonl", "a", encoding="utf-8") as file:
                file.write(json.dumps(entry, sort_keys=True) + "\n")

    def write_output(self, text: str, extension: str) -> Optional[Path]:
        if self.root is None:
            return None
        self._write(f"output{extension}", text if text.endswith("\n") else text + "\n")
        return self.root / f"output{extension}"
