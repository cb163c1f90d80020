"""pyparsing grammar for `.tl` programs."""
from functools import lru_cache
from typing import List

import pyparsing
from pyparsing import (
    Forward,
    Group,
    Keyword,
    Literal,
    Optional,
    ParserElement,
    Suppress,
    Word,
    ZeroOrMore,
    alphanums,
    alphas,
    dbl_slash_comment,
    delimited_list,
    infix_notation,
    nums,
    one_of,
    OpAssoc,
)

from core.errors import SourceError
from .source import (
    FunctionDecl,
    SAssert,
    SAssign,
    SAssume,
    SBinary,
    SCall,
    SCond,
    SExprStmt,
    SField,
    SIf,
    SInt,
    SNondet,
    SNull,
    SourceProgram,
    SReturn,
    SUnary,
    SVar,
    SWhile,
)

ParserElement.enable_packrat()

RELATIONS = {"==": "=", "!=": "!=", "<=": "<=", ">=": ">=", "<": "<", ">": ">"}


def _fold_binary(tokens):
    items = tokens[0]
    result = items[0]
    for i in range(1, len(items), 2):
        result = SBinary(items[i], result, items[i + 1])
    return result


def _fold_unary(tokens):
    items = tokens[0]
    result = items[-1]
    for op in reversed(items[:-1]):
        result = SUnary(op, result)
    return result


def _fold_fields(tokens):
    result = tokens[0]
    for name in tokens[1:]:
        result = SField(result, name)
    return result


def _line_of(text: str, loc: int) -> int:
    return pyparsing.lineno(loc, text)


@lru_cache(maxsize=1)
def _grammar():
    IF, ELSE, WHILE, RETURN = map(Keyword, ["if", "else", "while", "return"])
    ASSERT, ASSUME, NULL = map(Keyword, ["assert", "assume", "NULL"])
    TYPE = Keyword("int") | Keyword("void") | Keyword("struct") + Word(alphas, alphanums + "_")
    reserved = IF | ELSE | WHILE | RETURN | ASSERT | ASSUME | NULL | Keyword("int") \
        | Keyword("void") | Keyword("struct")

    LPAREN, RPAREN, LBRACE, RBRACE, SEMI = map(Suppress, "(){};")
    ARROW = Suppress("->")

    ident = (~reserved + Word(alphas + "_", alphanums + "_")).set_name("identifier")

    expr = Forward()
    integer = Word(nums).set_parse_action(lambda t: SInt(int(t[0])))
    null = NULL.copy().set_parse_action(lambda: SNull())
    nondet = Literal("?").set_parse_action(lambda: SNondet())
    call = (ident + LPAREN + Group(Optional(delimited_list(expr))) + RPAREN).set_parse_action(
        lambda t: SCall(t[0], tuple(t[1]))
    )
    variable = ident.copy().set_parse_action(lambda t: SVar(t[0]))
    base = integer | null | nondet | call | variable | (LPAREN + expr + RPAREN)
    access = (base + ZeroOrMore(ARROW + ident)).set_parse_action(_fold_fields)

    expr <<= infix_notation(access, [
        (one_of("- !"), 1, OpAssoc.RIGHT, _fold_unary),
        (Literal("*"), 2, OpAssoc.LEFT, _fold_binary),
        (one_of("+ -"), 2, OpAssoc.LEFT, _fold_binary),
    ])

    relation = one_of("== != <= >= < >")
    comparison = (expr + relation + expr).set_parse_action(
        lambda t: SCond(RELATIONS[t[1]], t[0], t[2])
    )
    nondet_cond = Literal("?").set_parse_action(lambda: SCond())
    cond = comparison | nondet_cond

    stmt = Forward()
    block = Group(LBRACE - ZeroOrMore(stmt) + RBRACE)
    body = block | Group(stmt)

    lvalue = (variable + ZeroOrMore(ARROW + ident)).set_parse_action(_fold_fields)
    assign = (lvalue + Suppress("=") + expr + SEMI).set_parse_action(
        lambda s, loc, t: SAssign(t[0], t[1], _line_of(s, loc))
    )
    declaration = (TYPE + Optional(Suppress("*")) + variable
                   + Optional(Suppress("=") + expr) + SEMI).set_parse_action(
        lambda s, loc, t: SAssign(t[-2], t[-1], _line_of(s, loc))
        if len(t) >= 2 and not isinstance(t[-1], str) and isinstance(t[-2], SVar) else []
    )
    call_stmt = (call + SEMI).set_parse_action(
        lambda s, loc, t: SExprStmt(t[0], _line_of(s, loc))
    )
    if_stmt = (IF - LPAREN + cond + RPAREN + body + Optional(Suppress(ELSE) + body)).set_parse_action(
        lambda s, loc, t: SIf(t[1], list(t[2]), list(t[3]) if len(t) > 3 else [], _line_of(s, loc))
    )
    conds = Group(cond + ZeroOrMore(Suppress("&&") + cond))
    while_stmt = (WHILE - LPAREN + conds + RPAREN + body).set_parse_action(
        lambda s, loc, t: SWhile(list(t[1]), list(t[2]), _line_of(s, loc))
    )
    return_stmt = (RETURN - Optional(expr) + SEMI).set_parse_action(
        lambda s, loc, t: SReturn(t[1] if len(t) > 1 else None, _line_of(s, loc))
    )
    assert_stmt = (ASSERT - LPAREN + cond + RPAREN + SEMI).set_parse_action(
        lambda s, loc, t: SAssert(t[1], _line_of(s, loc))
    )
    assume_stmt = (ASSUME - LPAREN + cond + RPAREN + SEMI).set_parse_action(
        lambda s, loc, t: SAssume(t[1], _line_of(s, loc))
    )
    stmt <<= (if_stmt | while_stmt | return_stmt | assert_stmt | assume_stmt
              | declaration | call_stmt | assign)

    param = Suppress(Optional(TYPE + Optional("*"))) + ident
    function = (Optional(Suppress(TYPE + Optional("*"))) + ident + LPAREN
                + Group(Optional(delimited_list(param))) + RPAREN + block).set_parse_action(
        lambda s, loc, t: FunctionDecl(t[0], list(t[1]), list(t[2]), _line_of(s, loc))
    )
    program = ZeroOrMore(function)
    program.ignore(dbl_slash_comment)
    return program


def parse(text: str) -> SourceProgram:
    """Parses program text; raises SourceError with the position of the problem."""
    try:
        functions: List[FunctionDecl] = list(_grammar().parse_string(text, parse_all=True))
    except pyparsing.ParseBaseException as exc:
        raise SourceError(exc.msg, exc.lineno, exc.col) from None

    seen = set()
    for function in functions:
        if function.name in seen:
            raise SourceError(f"duplicate function {function.name}", function.line, 1)
        seen.add(function.name)
    return SourceProgram(functions=functions)
