"""Variables and expressions of the symbolic-heap language."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Iterator, Mapping, Optional, Union


class VarKind(str, Enum):
    """Kinds of variables that may occur in a formula."""
    PROGRAM = "program"
    LOGICAL = "logical"
    ANCHOR = "anchor"


@dataclass(frozen=True, order=True)
class Var:
    name: str
    kind: VarKind = VarKind.LOGICAL

    @property
    def is_program(self) -> bool:
        return self.kind == VarKind.PROGRAM

    @property
    def is_logical(self) -> bool:
        # anchors are logical variables too
        return self.kind != VarKind.PROGRAM

    @property
    def is_anchor(self) -> bool:
        return self.kind == VarKind.ANCHOR

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class Null:
    def __str__(self) -> str:
        return "NULL"


@dataclass(frozen=True, order=True)
class Const:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, order=True)
class UnOp:
    op: str
    arg: "Expr"

    def __str__(self) -> str:
        return f"{self.op}{_wrap(self.arg)}"


@dataclass(frozen=True, order=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} {self.op} {_wrap(self.right)}"


Expr = Union[Null, Const, Var, UnOp, BinOp]

NULL = Null()

UNARY_OPS = ("-", "!")
BINARY_OPS = ("+", "-", "*")


def _wrap(expr: Expr) -> str:
    if isinstance(expr, BinOp):
        return f"({expr})"
    return str(expr)


def program_var(name: str) -> Var:
    return Var(name, VarKind.PROGRAM)


def anchor_of(var: Var) -> Var:
    """The anchor variable recording the entry value of a program variable."""
    return Var(var.name.upper(), VarKind.ANCHOR)


def return_var(function: str) -> Var:
    return Var(f"return_{function}", VarKind.PROGRAM)


def expr_vars(expr: Expr) -> Iterator[Var]:
    if isinstance(expr, Var):
        yield expr
    elif isinstance(expr, UnOp):
        yield from expr_vars(expr.arg)
    elif isinstance(expr, BinOp):
        yield from expr_vars(expr.left)
        yield from expr_vars(expr.right)


def expr_var_set(expr: Expr) -> FrozenSet[Var]:
    return frozenset(expr_vars(expr))


def substitute_expr(expr: Expr, mapping: Mapping[Var, Expr]) -> Expr:
    if isinstance(expr, Var):
        return mapping.get(expr, expr)
    if isinstance(expr, UnOp):
        return UnOp(expr.op, substitute_expr(expr.arg, mapping))
    if isinstance(expr, BinOp):
        return BinOp(
            expr.op,
            substitute_expr(expr.left, mapping),
            substitute_expr(expr.right, mapping),
        )
    return expr


def apply_unary(op: str, value: int) -> int:
    if op == "-":
        return -value
    if op == "!":
        return 1 if value == 0 else 0
    raise ValueError(f"unknown unary operator {op!r}")


def apply_binary(op: str, left: int, right: int) -> int:
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    raise ValueError(f"unknown binary operator {op!r}")


def constant_value(expr: Expr) -> Optional[int]:
    """Folds an expression built only from constants and NULL."""
    if isinstance(expr, Null):
        return 0
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, UnOp):
        inner = constant_value(expr.arg)
        return None if inner is None else apply_unary(expr.op, inner)
    if isinstance(expr, BinOp):
        left = constant_value(expr.left)
        right = constant_value(expr.right)
        if left is None or right is None:
            return None
        return apply_binary(expr.op, left, right)
    return None


def evaluate(expr: Expr, env: Mapping[Var, int]) -> Optional[int]:
    """Evaluates an expression; None when some variable is unbound."""
    if isinstance(expr, Var):
        return env.get(expr)
    if isinstance(expr, UnOp):
        inner = evaluate(expr.arg, env)
        return None if inner is None else apply_unary(expr.op, inner)
    if isinstance(expr, BinOp):
        left = evaluate(expr.left, env)
        right = evaluate(expr.right, env)
        if left is None or right is None:
            return None
        return apply_binary(expr.op, left, right)
    return constant_value(expr)


class FreshNames:
    """Supplies fresh logical variables l1, l2, ... for one analysis."""

    def __init__(self, prefix: str = "l", start: int = 1):
        self.prefix = prefix
        self.counter = start

    def fresh(self) -> Var:
        var = Var(f"{self.prefix}{self.counter}", VarKind.LOGICAL)
        self.counter += 1
        return var

    def fresh_map(self, variables) -> Dict[Var, Var]:
        return {v: self.fresh() for v in sorted(variables)}
