"""
pyparsing grammar for the source language.

Parse actions build AST nodes directly. Compound assignments, ``x++`` and
``x--`` are desugared here, and every ``for`` header is normalized to the
canonical ``index < bound`` / ``index + 1`` form or rejected with
NonCanonicalLoop.
"""
import logging
from typing import Any, List

import pyparsing as pp
from pyparsing import (
    DelimitedList,
    Group,
    Keyword,
    Literal,
    MatchFirst,
    OpAssoc,
    Optional,
    ParserElement,
    Regex,
    Suppress,
    Word,
    ZeroOrMore,
    alphanums,
    alphas,
    cpp_style_comment,
    infix_notation,
    nums,
    one_of,
)

from ..errors import NonCanonicalLoop, SourceSyntaxError
from ..types import SourceType
from .ast import (
    Assign,
    Binary,
    BoolConst,
    Decl,
    EmptyList,
    For,
    If,
    IndexExpr,
    IntConst,
    LenExpr,
    Param,
    Push,
    Return,
    SourceProgram,
    Unary,
    VarRef,
)

ParserElement.enable_packrat()

logger = logging.getLogger(__name__)

KEYWORDS = ("int", "bool", "for", "if", "else", "return", "true", "false", "len", "push")


def _where(s: str, loc: int) -> dict:
    return {"line": pp.lineno(loc, s), "col": pp.col(loc, s)}


def _type_action(toks: pp.ParseResults) -> SourceType:
    return SourceType("".join(toks[0].split()))


def _int_action(s: str, loc: int, toks: pp.ParseResults) -> IntConst:
    return IntConst(int(toks[0]), **_where(s, loc))


def _bool_action(s: str, loc: int, toks: pp.ParseResults) -> BoolConst:
    return BoolConst(toks[0] == "true", **_where(s, loc))


def _len_action(s: str, loc: int, toks: pp.ParseResults) -> LenExpr:
    return LenExpr(toks[0], **_where(s, loc))


def _empty_action(s: str, loc: int, toks: pp.ParseResults) -> EmptyList:
    return EmptyList(**_where(s, loc))


def _access_action(s: str, loc: int, toks: pp.ParseResults) -> Any:
    where = _where(s, loc)
    node: Any = VarRef(toks[0], **where)
    for index in toks[1:]:
        node = IndexExpr(node, index, **where)
    return node


def _unary_action(s: str, loc: int, toks: pp.ParseResults) -> Unary:
    items = list(toks[0])
    node = items[-1]
    for op in reversed(items[:-1]):
        node = Unary(op, node, **_where(s, loc))
    return node


def _binary_action(s: str, loc: int, toks: pp.ParseResults) -> Binary:
    items = list(toks[0])
    node = items[0]
    for i in range(1, len(items), 2):
        node = Binary(items[i], node, items[i + 1], **_where(s, loc))
    return node


def _assign_action(s: str, loc: int, toks: pp.ParseResults) -> Assign:
    target, op, expr = toks[0], toks[1], toks[2]
    where = _where(s, loc)
    if op != "=":
        expr = Binary(op[0], target, expr, **where)
    return Assign(target, expr, **where)


def _incdec_action(s: str, loc: int, toks: pp.ParseResults) -> Assign:
    name = toks[0] if toks[0] not in ("++", "--") else toks[1]
    op = toks[1] if toks[0] == name else toks[0]
    where = _where(s, loc)
    target = VarRef(name, **where)
    return Assign(target, Binary(op[0], target, IntConst(1, **where), **where), **where)


def _decl_action(s: str, loc: int, toks: pp.ParseResults) -> Decl:
    init = toks[2] if len(toks) > 2 else None
    return Decl(toks[1], toks[0], init, **_where(s, loc))


def _push_action(s: str, loc: int, toks: pp.ParseResults) -> Push:
    return Push(toks[0], toks[1], **_where(s, loc))


def _return_action(s: str, loc: int, toks: pp.ParseResults) -> Return:
    return Return(toks[0], **_where(s, loc))


def _if_action(s: str, loc: int, toks: pp.ParseResults) -> If:
    orelse = tuple(toks[2]) if len(toks) > 2 else ()
    return If(toks[0], tuple(toks[1]), orelse, **_where(s, loc))


def _is_step(index: str, update: List[Any]) -> bool:
    if update in (["++", index], [index, "++"]):
        return True
    if len(update) != 3 or update[0] != index:
        return False
    op, expr = update[1], update[2]
    if op == "+=":
        return expr == IntConst(1)
    if op == "=":
        return expr == Binary("+", VarRef(index), IntConst(1))
    return False


def _for_action(s: str, loc: int, toks: pp.ParseResults) -> For:
    where = _where(s, loc)
    init, guard, update, body = toks[0], toks[1], list(toks[2]), toks[3]
    declares = len(init) == 3
    index, start = init[-2], init[-1]
    if not (isinstance(guard, Binary) and guard.op == "<" and guard.lhs == VarRef(index)):
        raise NonCanonicalLoop(f"loop guard must have the form '{index} < bound'", **where)
    if not _is_step(index, update):
        raise NonCanonicalLoop(f"loop step must increment '{index}' by one", **where)
    return For(index, start, guard.rhs, tuple(body), declares, **where)


def _program_action(s: str, loc: int, toks: pp.ParseResults) -> SourceProgram:
    ret_type, name, params, body = toks[0], toks[1], toks[2], tuple(toks[3])
    last = body[-1] if body else None
    return_var = last.name if isinstance(last, Return) else ""
    return SourceProgram(
        name=name,
        params=tuple(Param(p[1], p[0]) for p in params),
        body=body,
        return_type=ret_type,
        return_var=return_var,
    )


def _build() -> ParserElement:
    LPAR, RPAR, LBRACE, RBRACE, LBRACK, RBRACK, SEMI, COMMA = map(Suppress, "(){}[];,")
    kw = {k: Keyword(k) for k in KEYWORDS}

    ident = (~MatchFirst(list(kw.values())) + Word(alphas + "_", alphanums + "_")).set_name(
        "identifier"
    )
    type_ = Regex(r"int\b(\s*\[\s*\]){0,2}|bool\b").set_parse_action(_type_action).set_name("type")

    expr = pp.Forward().set_name("expression")
    int_lit = Word(nums).set_parse_action(_int_action)
    bool_lit = (kw["true"] | kw["false"]).set_parse_action(_bool_action)
    len_call = (Suppress(kw["len"]) + LPAR + expr + RPAR).set_parse_action(_len_action)
    empty = (Literal("[") + Literal("]")).set_parse_action(_empty_action)
    access = (ident + ZeroOrMore(LBRACK + expr + RBRACK)).set_parse_action(_access_action)
    atom = int_lit | bool_lit | len_call | empty | access

    expr <<= infix_notation(
        atom,
        [
            (one_of("! -"), 1, OpAssoc.RIGHT, _unary_action),
            (one_of("* / %"), 2, OpAssoc.LEFT, _binary_action),
            (one_of("+ -"), 2, OpAssoc.LEFT, _binary_action),
            (one_of("< <= > >="), 2, OpAssoc.LEFT, _binary_action),
            (one_of("== !="), 2, OpAssoc.LEFT, _binary_action),
            (Literal("&&"), 2, OpAssoc.LEFT, _binary_action),
            (Literal("||"), 2, OpAssoc.LEFT, _binary_action),
        ],
    )

    stmt = pp.Forward().set_name("statement")
    block = LBRACE + ZeroOrMore(stmt) + RBRACE
    body = Group(block) | Group(stmt)

    lvalue = (ident + ZeroOrMore(LBRACK + expr + RBRACK)).set_parse_action(_access_action)
    decl = (type_ + ident + Optional(Suppress("=") + expr) + SEMI).set_parse_action(_decl_action)
    assign = (lvalue + one_of("= += -= *=") + expr + SEMI).set_parse_action(_assign_action)
    incdec = ((ident + one_of("++ --")) | (one_of("++ --") + ident)) + SEMI
    incdec.set_parse_action(_incdec_action)
    push = (Suppress(kw["push"]) + LPAR + ident + COMMA + expr + RPAR + SEMI).set_parse_action(
        _push_action
    )
    ret = (Suppress(kw["return"]) + ident + SEMI).set_parse_action(_return_action)
    if_ = (
        Suppress(kw["if"]) + LPAR + expr + RPAR + body + Optional(Suppress(kw["else"]) + body)
    ).set_parse_action(_if_action)

    for_init = Group(Optional(kw["int"]) + ident + Suppress("=") + expr)
    for_update = Group(
        (ident + one_of("++ --"))
        | (one_of("++ --") + ident)
        | (ident + one_of("= += -= *=") + expr)
    )
    for_ = (
        Suppress(kw["for"]) + LPAR + for_init + SEMI + expr + SEMI + for_update + RPAR + body
    ).set_parse_action(_for_action)

    stmt <<= for_ | if_ | ret | push | decl | incdec | assign

    param = Group(type_ + ident)
    program = (
        type_ + ident + LPAR + Group(Optional(DelimitedList(param))) + RPAR + Group(block)
    ).set_parse_action(_program_action)
    full = program + pp.StringEnd()
    full.ignore(cpp_style_comment)
    return full


_PROGRAM = _build()


def parse_program_text(text: str) -> SourceProgram:
    """
    Parse source text into an unchecked SourceProgram.

    Raises:
        SourceSyntaxError: If the text does not match the grammar
        NonCanonicalLoop: If a for header is not canonical
    """
    try:
        result = _PROGRAM.parse_string(text, parse_all=True)
    except pp.ParseBaseException as e:
        logger.debug(f"source parse failed at {e.lineno}:{e.col}: {e.msg}")
        raise SourceSyntaxError(e.msg, e.lineno, e.col) from None
    return result[0]
