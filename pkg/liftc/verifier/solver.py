"""
External SMT solver invocation.

Each script is written to a temporary file and handed to the configured
solver command; the process is killed when it overruns its timeout.
"""
import logging
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence

import anyio
from anyio.abc import ByteReceiveStream

from ..errors import SolverLaunchError, SolverProtocolError
from .smt import SmtScript

logger = logging.getLogger(__name__)

_VERDICTS = ("sat", "unsat", "unknown")


class Verdict(str, Enum):
    VERIFIED = "verified"
    REFUTED = "refuted"
    UNKNOWN = "unknown"
    TIMED_OUT = "timed_out"


@dataclass(frozen=True)
class SolverOutcome:
    """
    Result of one solver run.

    Attributes:
        verdict: ``unsat`` maps to VERIFIED and ``sat`` to REFUTED
        elapsed: Wall-clock seconds
        model: Solver output after the verdict line (the model for REFUTED)
    """

    verdict: Verdict
    elapsed: float
    model: str = ""


def parse_solver_output(stdout: str, elapsed: float) -> SolverOutcome:
    """
    Map solver output to an outcome.

    Raises:
        SolverProtocolError: No ``sat``, ``unsat`` or ``unknown`` line
    """
    lines = stdout.splitlines()
    for i, line in enumerate(lines):
        token = line.strip()
        if token in _VERDICTS:
            rest = "\n".join(lines[i + 1 :]).strip()
            if token == "unsat":
                return SolverOutcome(Verdict.VERIFIED, elapsed)
            if token == "sat":
                return SolverOutcome(Verdict.REFUTED, elapsed, rest)
            return SolverOutcome(Verdict.UNKNOWN, elapsed)
    raise SolverProtocolError(f"solver produced no verdict: {stdout.strip()[:500]!r}")


async def _drain(stream: Optional[ByteReceiveStream], sink: List[bytes]) -> None:
    if stream is None:
        return
    async for chunk in stream:
        sink.append(chunk)


async def run_solver_async(script: SmtScript, solver_cmd: str, timeout: float) -> SolverOutcome:
    """
    Run the solver on one script.

    Args:
        script: Query to check
        solver_cmd: Command line; the script path is appended as last argument
        timeout: Seconds before the solver process is killed

    Returns:
        Outcome; TIMED_OUT when the timeout expired

    Raises:
        SolverLaunchError: The command could not be started
        SolverProtocolError: The output contains no verdict
    """
    with tempfile.TemporaryDirectory(prefix="liftc-") as tmp:
        path = Path(tmp) / "query.smt2"
        path.write_text(script.text, encoding="utf-8")
        command = shlex.split(solver_cmd) + [str(path)]
        start = time.monotonic()
        try:
            process = await anyio.open_process(command, stdout=subprocess.PIPE, stderr=subprocess.PIPE)
        except OSError as e:
            raise SolverLaunchError(f"cannot start solver '{solver_cmd}': {e}") from e

        stdout: List[bytes] = []
        stderr: List[bytes] = []
        async with process:
            with anyio.move_on_after(timeout) as scope:
                async with anyio.create_task_group() as tg:
                    tg.start_soon(_drain, process.stdout, stdout)
                    tg.start_soon(_drain, process.stderr, stderr)
                await process.wait()
            if scope.cancelled_caught:
                with anyio.CancelScope(shield=True):
                    process.kill()
                    await process.wait()
                elapsed = time.monotonic() - start
                logger.info(f"Solver timed out after {elapsed:.2f}s on {script.description}")
                return SolverOutcome(Verdict.TIMED_OUT, elapsed)

        elapsed = time.monotonic() - start
        text = b"".join(stdout).decode("utf-8", errors="replace")
        try:
            outcome = parse_solver_output(text, elapsed)
        except SolverProtocolError:
            err = b"".join(stderr).decode("utf-8", errors="replace").strip()
            if err:
                logger.error(f"Solver stderr: {err[:500]}")
            raise
        logger.debug(f"Solver answered {outcome.verdict.value} in {elapsed:.2f}s on {script.description}")
        return outcome


def run_solver(script: SmtScript, solver_cmd: str, timeout: float) -> SolverOutcome:
    """Blocking wrapper around :func:`run_solver_async`."""
    return anyio.run(run_solver_async, script, solver_cmd, timeout)


async def solve_all(
    scripts: Sequence[SmtScript],
    solver_cmd: str,
    timeout: float,
    max_parallel: int = 4,
) -> List[SolverOutcome]:
    """
    Run several scripts with at most ``max_parallel`` solver processes alive.

    Returns:
        Outcomes in the order of ``scripts``
    """
    limiter = anyio.CapacityLimiter(max(1, max_parallel))
    results: List[Optional[SolverOutcome]] = [None] * len(scripts)

    async def one(i: int, script: SmtScript) -> None:
        async with limiter:
            results[i] = await run_solver_async(script, solver_cmd, timeout)

    async with anyio.create_task_group() as tg:
        for i, script in enumerate(scripts):
            tg.start_soon(one, i, script)
    return [r for r in results if r is not None]
