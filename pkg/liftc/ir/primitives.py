"""
Structural primitives available to every DSL.

``ite`` is lazy and polymorphic and is handled by the evaluator and the type
checker directly; the rest are strict functions over integer lists and
matrices.
"""
from typing import Any, Callable, Dict, NamedTuple, Tuple

from ..types import SourceType

INT, LIST, MATRIX = SourceType.INT, SourceType.INT_LIST, SourceType.INT_MATRIX


class Primitive(NamedTuple):
    params: Tuple[SourceType, ...]
    ret: SourceType
    impl: Callable[..., Any]


def _set(seq: tuple, index: int, value: Any) -> tuple:
    if index < 0 or index >= len(seq):
        return seq
    return seq[:index] + (value,) + seq[index + 1 :]


PRIMITIVES: Dict[str, Primitive] = {
    "list_empty": Primitive((), LIST, lambda: ()),
    "list_prepend": Primitive((INT, LIST), LIST, lambda x, xs: (x,) + xs),
    "list_append": Primitive((LIST, INT), LIST, lambda xs, x: xs + (x,)),
    "list_set": Primitive((LIST, INT, INT), LIST, _set),
    "list_concat": Primitive((LIST, LIST), LIST, lambda a, b: a + b),
    "matrix_empty": Primitive((), MATRIX, lambda: ()),
    "matrix_prepend": Primitive((LIST, MATRIX), MATRIX, lambda r, m: (r,) + m),
    "matrix_append": Primitive((MATRIX, LIST), MATRIX, lambda m, r: m + (r,)),
    "matrix_set": Primitive((MATRIX, INT, LIST), MATRIX, _set),
    "matrix_concat": Primitive((MATRIX, MATRIX), MATRIX, lambda a, b: a + b),
}

ITE = "ite"

STRUCTURAL_NAMES = frozenset(PRIMITIVES) | {ITE}
