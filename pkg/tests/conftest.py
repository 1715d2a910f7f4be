import json
import os
import shutil
from pathlib import Path
from typing import Any, Dict, List

import pytest

from liftc.catalog import load_dsl
from liftc.config import RunConfig

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
BENCHMARKS = FIXTURES / "benchmarks"

# Solver stand-ins: the script path is appended as ``$1`` and ignored.
UNSAT_SOLVER = "sh -c 'echo unsat' stub"
SAT_SOLVER = "sh -c 'echo sat; echo \"(model)\"' stub"
SLEEP_SOLVER = "sh -c 'exec sleep 30' stub"
LIVE_ENV = ("LLM_API_KEY", "LIFTC_LIVE_ENDPOINT", "LIFTC_LIVE_MODEL")


def pytest_collection_modifyitems(config: pytest.Config, items: List[pytest.Item]) -> None:
    skips: Dict[str, pytest.MarkDecorator] = {}
    if shutil.which("cvc5") is None:
        skips["solver"] = pytest.mark.skip(reason="cvc5 is not installed")
    if not all(os.environ.get(v) for v in LIVE_ENV):
        skips["live"] = pytest.mark.skip(reason="set " + ", ".join(LIVE_ENV) + " to run live tests")
    for item in items:
        for marker, skip in skips.items():
            if marker in item.keywords:
                item.add_marker(skip)


def read_source(name: str) -> str:
    return (BENCHMARKS / name / "source.src").read_text(encoding="utf-8")


def read_jsonl(path: Path) -> List[Dict[str, Any]]:
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


def replay_config(replay: Path, **overrides: Any) -> RunConfig:
    data: Dict[str, Any] = {
        "provider": {"kind": "replay", "path": replay},
        "solver_cmd": UNSAT_SOLVER,
        "vc_timeout": 10,
        "diff_samples": 200,
    }
    data.update(overrides)
    return RunConfig.model_validate(data)


@pytest.fixture
def anyio_backend():
    return "asyncio"


@pytest.fixture
def mapreduce():
    return load_dsl("mapreduce")


@pytest.fixture
def netpacket():
    return load_dsl("netpacket")


@pytest.fixture
def taco():
    return load_dsl("taco")


@pytest.fixture
def tensor():
    return load_dsl("tensor")


@pytest.fixture
def conditional_sum_text() -> str:
    return read_source("conditional_sum")


@pytest.fixture
def screen_blend_text() -> str:
    return read_source("tensor_screen_blend")
