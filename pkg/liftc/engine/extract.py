"""
Candidate text extraction from model responses.
"""
import re
from typing import List

_FENCE = re.compile(r"```[ \t]*([A-Za-z0-9_+-]*)[^\n]*\n(.*?)```", re.S)
_CODE_LANGS = ("", "python", "py", "python3")
_CODE_START = re.compile(r"^(def |from |import |@)")


def _looks_like_code(line: str) -> bool:
    return not line.strip() or line[0] in " \t#" or bool(_CODE_START.match(line)) or line.startswith("return ")


def extract_code(response: str) -> str:
    """
    Code part of a response.

    Python (or untagged) fenced blocks are concatenated when present.
    Otherwise prose before the first definition and after the last code
    line is dropped; a response with no definition is returned stripped.
    """
    blocks: List[str] = [body for lang, body in _FENCE.findall(response) if lang.lower() in _CODE_LANGS]
    if blocks:
        return "\n".join(block.strip("\n") for block in blocks) + "\n"
    lines = response.strip("\n").splitlines()
    starts = [k for k, line in enumerate(lines) if _CODE_START.match(line)]
    if not starts:
        return response.strip() + "\n"
    lines = lines[starts[0] :]
    while lines and not _looks_like_code(lines[-1]):
        lines.pop()
    return "\n".join(lines).strip("\n") + "\n"
