"""Surface syntax tree of the toy pointer language, and its pretty-printer."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union


@dataclass(frozen=True)
class SVar:
    name: str


@dataclass(frozen=True)
class SInt:
    value: int


@dataclass(frozen=True)
class SNull:
    pass


@dataclass(frozen=True)
class SNondet:
    pass


@dataclass(frozen=True)
class SUnary:
    op: str
    arg: "SExpr"


@dataclass(frozen=True)
class SBinary:
    op: str
    left: "SExpr"
    right: "SExpr"


@dataclass(frozen=True)
class SField:
    base: "SExpr"
    field: str


@dataclass(frozen=True)
class SCall:
    callee: str
    args: Tuple["SExpr", ...]


SExpr = Union[SVar, SInt, SNull, SNondet, SUnary, SBinary, SField, SCall]


@dataclass(frozen=True)
class SCond:
    """A comparison, or the nondeterministic condition when `op` is None."""
    op: Optional[str] = None
    left: Optional[SExpr] = None
    right: Optional[SExpr] = None

    @property
    def nondet(self) -> bool:
        return self.op is None


@dataclass
class SAssign:
    target: Union[SVar, SField]
    expr: SExpr
    line: int = 0


@dataclass
class SExprStmt:
    call: SCall
    line: int = 0


@dataclass
class SIf:
    cond: SCond
    then: List["SStmt"]
    orelse: List["SStmt"] = field(default_factory=list)
    line: int = 0


@dataclass
class SWhile:
    conds: List[SCond]
    body: List["SStmt"]
    line: int = 0


@dataclass
class SReturn:
    expr: Optional[SExpr] = None
    line: int = 0


@dataclass
class SAssert:
    cond: SCond
    line: int = 0


@dataclass
class SAssume:
    cond: SCond
    line: int = 0


SStmt = Union[SAssign, SExprStmt, SIf, SWhile, SReturn, SAssert, SAssume]


@dataclass
class FunctionDecl:
    name: str
    params: List[str]
    body: List[SStmt]
    line: int = 0


@dataclass
class SourceProgram:
    functions: List[FunctionDecl] = field(default_factory=list)

    def function(self, name: str) -> Optional[FunctionDecl]:
        return next((f for f in self.functions if f.name == name), None)


# -- pretty printing ------------------------------------------------------------

_PRECEDENCE = {"+": 1, "-": 1, "*": 2}


def render_expr(expr: SExpr, parent: int = 0) -> str:
    if isinstance(expr, SVar):
        return expr.name
    if isinstance(expr, SInt):
        return str(expr.value)
    if isinstance(expr, SNull):
        return "NULL"
    if isinstance(expr, SNondet):
        return "?"
    if isinstance(expr, SUnary):
        return f"{expr.op}{render_expr(expr.arg, 3)}"
    if isinstance(expr, SBinary):
        level = _PRECEDENCE[expr.op]
        # left-associative: the right operand needs parentheses at equal level
        text = f"{render_expr(expr.left, level)} {expr.op} {render_expr(expr.right, level + 1)}"
        return f"({text})" if level < parent else text
    if isinstance(expr, SField):
        return f"{render_expr(expr.base, 4)}->{expr.field}"
    if isinstance(expr, SCall):
        return f"{expr.callee}({', '.join(render_expr(a) for a in expr.args)})"
    raise TypeError(f"not an expression: {expr!r}")


def render_cond(cond: SCond) -> str:
    if cond.nondet:
        return "?"
    op = "==" if cond.op == "=" else cond.op
    return f"{render_expr(cond.left)} {op} {render_expr(cond.right)}"


def _render_block(stmts: List[SStmt], indent: int) -> List[str]:
    lines = []
    for stmt in stmts:
        lines.extend(_render_stmt(stmt, indent))
    return lines


def _render_stmt(stmt: SStmt, indent: int) -> List[str]:
    pad = "    " * indent
    if isinstance(stmt, SAssign):
        return [f"{pad}{render_expr(stmt.target)} = {render_expr(stmt.expr)};"]
    if isinstance(stmt, SExprStmt):
        return [f"{pad}{render_expr(stmt.call)};"]
    if isinstance(stmt, SReturn):
        if stmt.expr is None:
            return [f"{pad}return;"]
        return [f"{pad}return {render_expr(stmt.expr)};"]
    if isinstance(stmt, SAssert):
        return [f"{pad}assert({render_cond(stmt.cond)});"]
    if isinstance(stmt, SAssume):
        return [f"{pad}assume({render_cond(stmt.cond)});"]
    if isinstance(stmt, SIf):
        lines = [f"{pad}if ({render_cond(stmt.cond)}) {{"]
        lines += _render_block(stmt.then, indent + 1)
        if stmt.orelse:
            lines.append(f"{pad}}} else {{")
            lines += _render_block(stmt.orelse, indent + 1)
        lines.append(f"{pad}}}")
        return lines
    if isinstance(stmt, SWhile):
        cond = " && ".join(render_cond(c) for c in stmt.conds)
        lines = [f"{pad}while ({cond}) {{"]
        lines += _render_block(stmt.body, indent + 1)
        lines.append(f"{pad}}}")
        return lines
    raise TypeError(f"not a statement: {stmt!r}")


def render_source(program: SourceProgram) -> str:
    """Prints `program` in surface syntax; the output parses back to an
    equivalent program."""
    chunks = []
    for function in program.functions:
        lines = [f"int {function.name}({', '.join(function.params)}) {{"]
        lines += _render_block(function.body, 1)
        lines.append("}")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n"
