"""
Synthetic element-wise benchmarks over a random chain of ``arr[i]`` terms.
"""
import json
import logging
import random
from pathlib import Path
from typing import List, Tuple

logger = logging.getLogger(__name__)

MIN_LENGTH = 1
MAX_LENGTH = 12
_OPS = ("+", "-", "*")

_SOURCE = """\
int[] {name}(int[] arr) {{
    int[] out = [];
    for (int i = 0; i < len(arr); i++) {{
        push(out, {body});
    }}
    return out;
}}
"""

_PS = """\
def {name}(arr: List[int]) -> List[int]:
    return tensor1(arr, lambda i: {body})
"""

_INV = """\
def invariant1(i: int, arr: List[int], out: List[int]) -> bool:
    return i >= 0 and i <= len(arr) and out == tensor1(arr[:i], lambda j: {lam_body})
"""


def _render(ops: Tuple[str, ...], term: str) -> str:
    parts = [term]
    for op in ops:
        parts.extend((op, term))
    return " ".join(parts)


def gen_synthetic_benchmarks(
    seed: int,
    count: int,
    len_range: Tuple[int, int],
    out_dir: Path,
) -> List[Path]:
    """
    Write ``count`` benchmark directories under ``out_dir``.

    Each benchmark maps ``arr`` element-wise through an expression of
    ``arr[i]`` terms joined by ``+``, ``-`` and ``*``; its length (number of
    terms) is drawn uniformly from ``len_range``. The ground-truth summary
    goes to ``expected_ps.txt`` and, together with its invariant, to
    ``replay.jsonl``. Output is a function of ``seed`` alone.

    Args:
        seed: Generator seed
        count: Benchmarks to write
        len_range: Inclusive expression length range within [1, 12]
        out_dir: Parent directory, created if missing

    Returns:
        Benchmark directories in generation order

    Raises:
        ValueError: ``len_range`` is empty or outside [1, 12]
    """
    low, high = len_range
    if not MIN_LENGTH <= low <= high <= MAX_LENGTH:
        raise ValueError(f"length range must lie within [{MIN_LENGTH}, {MAX_LENGTH}], got [{low}, {high}]")
    rng = random.Random(seed)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    for k in range(1, count + 1):
        length = rng.randint(low, high)
        ops = tuple(rng.choice(_OPS) for _ in range(length - 1))
        name = f"synth_{k:02d}"
        bench = out_dir / f"synth-{k:02d}"
        bench.mkdir(exist_ok=True)
        ps = _PS.format(name=name, body=_render(ops, "arr[i]"))
        inv = _INV.format(lam_body=_render(ops, "arr[j]"))
        (bench / "source.src").write_text(_SOURCE.format(name=name, body=_render(ops, "arr[i]")), encoding="utf-8")
        (bench / "dsl.txt").write_text("taco\n", encoding="utf-8")
        (bench / "expected_ps.txt").write_text(ps, encoding="utf-8")
        replay = [{"phase": "ps", "text": ps}, {"phase": "inv", "text": inv}]
        (bench / "replay.jsonl").write_text(
            "".join(json.dumps(entry, sort_keys=True) + "\n" for entry in replay), encoding="utf-8"
        )
        logger.debug(f"Wrote {bench.name} with expression length {length}")
        written.append(bench)
    logger.info(f"Generated {len(written)} synthetic benchmarks in {out_dir}")
    return written
