"""
Value types shared by the source language, the IR and the verifier.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Tuple, Union


class SourceType(Enum):
    """First-order value types."""

    INT = "int"
    BOOL = "bool"
    INT_LIST = "int[]"
    INT_MATRIX = "int[][]"

    def __str__(self) -> str:
        return self.value

    @property
    def is_container(self) -> bool:
        return self in (SourceType.INT_LIST, SourceType.INT_MATRIX)

    @property
    def element(self) -> "SourceType":
        """Type obtained by indexing a value of this type."""
        if self is SourceType.INT_LIST:
            return SourceType.INT
        if self is SourceType.INT_MATRIX:
            return SourceType.INT_LIST
        raise ValueError(f"type {self.value} cannot be indexed")


@dataclass(frozen=True)
class FunctionType:
    """Type of a lambda argument, e.g. ``(int, int) -> int``."""

    params: Tuple[SourceType, ...]
    ret: SourceType

    def __str__(self) -> str:
        inner = ", ".join(p.value for p in self.params)
        return f"({inner}) -> {self.ret.value}"


AnyType = Union[SourceType, FunctionType]

_BY_TEXT = {t.value: t for t in SourceType}


def parse_type(text: str) -> AnyType:
    """
    Parse a type string such as ``int[]`` or ``(int, int) -> int``.

    Raises:
        ValueError: If the text names no known type
    """
    text = text.strip()
    if text in _BY_TEXT:
        return _BY_TEXT[text]
    if text.startswith("(") and "->" in text:
        args, _, ret = text.rpartition("->")
        args = args.strip()
        if not args.endswith(")"):
            raise ValueError(f"malformed function type: {text!r}")
        inner = args[1:-1].strip()
        params = tuple(_first_order(p) for p in inner.split(",")) if inner else ()
        return FunctionType(params, _first_order(ret))
    raise ValueError(f"unknown type: {text!r}")


def _first_order(text: str) -> SourceType:
    result = parse_type(text)
    if not isinstance(result, SourceType):
        raise ValueError(f"higher-order type not allowed here: {text!r}")
    return result
