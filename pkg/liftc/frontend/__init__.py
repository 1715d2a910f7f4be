"""
Source frontend: parse, check, print and run programs in the imperative source language.
"""
from .ast import LoopInfo, Param, SourceProgram
from .checker import check_program
from .grammar import parse_program_text
from .interpreter import interpret_source
from .loops import loop_structure, program_variables
from .printer import format_expr, pretty_print


def parse_source(text: str) -> SourceProgram:
    """
    Parse and type-check source text.

    Raises:
        SourceSyntaxError: If the text does not match the grammar
        SourceTypeError: If the program is ill-typed
        NonCanonicalLoop: If a loop is not in canonical form
    """
    return check_program(parse_program_text(text))


__all__ = [
    "LoopInfo",
    "Param",
    "SourceProgram",
    "format_expr",
    "interpret_source",
    "loop_structure",
    "parse_source",
    "pretty_print",
    "program_variables",
]
