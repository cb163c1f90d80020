"""Symbolic heaps: a pure part and a spatial part, rendered canonically."""
from __future__ import annotations

import operator
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

from .terms import (
    Expr,
    NULL,
    Var,
    evaluate,
    expr_var_set,
    expr_vars,
    substitute_expr,
)

LS_BLOCK = 0

NEGATION = {
    "=": "!=",
    "!=": "=",
    "<": ">=",
    ">=": "<",
    ">": "<=",
    "<=": ">",
}
RELATIONS = tuple(NEGATION)
_COMPARE = {
    "=": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}


@dataclass(frozen=True)
class PureAtom:
    op: str
    left: Expr
    right: Expr

    @staticmethod
    def make(op: str, left: Expr, right: Expr) -> "PureAtom":
        """Builds an atom in canonical orientation."""
        if op == ">":
            op, left, right = "<", right, left
        elif op == ">=":
            op, left, right = "<=", right, left
        if op in ("=", "!=") and str(right) < str(left):
            left, right = right, left
        return PureAtom(op, left, right)

    def negate(self) -> "PureAtom":
        return PureAtom.make(NEGATION[self.op], self.left, self.right)

    def vars(self) -> FrozenSet[Var]:
        return expr_var_set(self.left) | expr_var_set(self.right)

    def substitute(self, mapping: Mapping[Var, Expr]) -> "PureAtom":
        return PureAtom.make(
            self.op,
            substitute_expr(self.left, mapping),
            substitute_expr(self.right, mapping),
        )

    def ground_truth(self) -> Optional[bool]:
        """The truth value of a variable-free atom, None otherwise."""
        if self.vars():
            return None
        left, right = evaluate(self.left, {}), evaluate(self.right, {})
        if left is None or right is None:
            return None
        return _COMPARE[self.op](left, right)

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"


def eq(left: Expr, right: Expr) -> PureAtom:
    return PureAtom.make("=", left, right)


def neq(left: Expr, right: Expr) -> PureAtom:
    return PureAtom.make("!=", left, right)


@dataclass(frozen=True)
class PointsTo:
    source: Expr
    field: str
    value: Expr

    def vars(self) -> FrozenSet[Var]:
        return expr_var_set(self.source) | expr_var_set(self.value)

    def substitute(self, mapping: Mapping[Var, Expr]) -> "PointsTo":
        return PointsTo(
            substitute_expr(self.source, mapping),
            self.field,
            substitute_expr(self.value, mapping),
        )

    def __str__(self) -> str:
        return f"{self.source}.{self.field} |-> {self.value}"


@dataclass(frozen=True)
class Segment:
    """Zero or more chained copies of a registered block from head to tail.

    Block 0 is the list segment whose block is a single `next` cell.
    """
    block: int
    head: Expr
    tail: Expr

    @property
    def is_list(self) -> bool:
        return self.block == LS_BLOCK

    def vars(self) -> FrozenSet[Var]:
        return expr_var_set(self.head) | expr_var_set(self.tail)

    def substitute(self, mapping: Mapping[Var, Expr]) -> "Segment":
        return Segment(
            self.block,
            substitute_expr(self.head, mapping),
            substitute_expr(self.tail, mapping),
        )

    def __str__(self) -> str:
        if self.is_list:
            return f"ls({self.head},{self.tail})"
        return f"iter[{self.block}]({self.head},{self.tail})"


def list_seg(head: Expr, tail: Expr) -> Segment:
    return Segment(LS_BLOCK, head, tail)


def iter_seg(block: int, head: Expr, tail: Expr) -> Segment:
    return Segment(block, head, tail)


SpatialAtom = Union[PointsTo, Segment]


def _spatial_key(atom: SpatialAtom) -> Tuple[int, str]:
    return (0 if isinstance(atom, PointsTo) else 1, str(atom))


@dataclass(frozen=True)
class SymbolicHeap:
    pure: FrozenSet[PureAtom] = field(default_factory=frozenset)
    spatial: Tuple[SpatialAtom, ...] = ()

    @staticmethod
    def of(
        pure: Iterable[PureAtom] = (),
        spatial: Iterable[SpatialAtom] = (),
    ) -> "SymbolicHeap":
        return SymbolicHeap(
            frozenset(pure),
            tuple(sorted(spatial, key=_spatial_key)),
        )

    # -- queries -----------------------------------------------------------

    def vars(self) -> FrozenSet[Var]:
        result = set()
        for atom in self.pure:
            result |= atom.vars()
        for atom in self.spatial:
            result |= atom.vars()
        return frozenset(result)

    def program_vars(self) -> FrozenSet[Var]:
        return frozenset(v for v in self.vars() if v.is_program)

    def logical_vars(self) -> FrozenSet[Var]:
        return frozenset(v for v in self.vars() if v.is_logical)

    def atoms(self) -> List[Union[PureAtom, SpatialAtom]]:
        return sorted(self.pure, key=str) + list(self.spatial)

    def points_to(self) -> Iterator[PointsTo]:
        return (a for a in self.spatial if isinstance(a, PointsTo))

    def segments(self) -> Iterator[Segment]:
        return (a for a in self.spatial if isinstance(a, Segment))

    def binding(self, var: Var) -> Optional[Expr]:
        """The value a program variable is bound to by an `x = e` atom."""
        for atom in sorted(self.pure, key=str):
            if atom.op != "=":
                continue
            if atom.left == var:
                return atom.right
            if atom.right == var:
                return atom.left
        return None

    @property
    def is_emp(self) -> bool:
        return not self.spatial

    # -- construction ------------------------------------------------------

    def star(self, other: "SymbolicHeap") -> "SymbolicHeap":
        return SymbolicHeap.of(self.pure | other.pure, self.spatial + other.spatial)

    def with_pure(self, *atoms: PureAtom) -> "SymbolicHeap":
        return SymbolicHeap(self.pure | frozenset(atoms), self.spatial)

    def with_spatial(self, *atoms: SpatialAtom) -> "SymbolicHeap":
        return SymbolicHeap.of(self.pure, self.spatial + tuple(atoms))

    def without_pure(self, atoms: Iterable[PureAtom]) -> "SymbolicHeap":
        return SymbolicHeap(self.pure - frozenset(atoms), self.spatial)

    def without_spatial(self, atoms: Iterable[SpatialAtom]) -> "SymbolicHeap":
        remaining = list(self.spatial)
        for atom in atoms:
            remaining.remove(atom)
        return SymbolicHeap(self.pure, tuple(remaining))

    def pure_only(self) -> "SymbolicHeap":
        return SymbolicHeap(self.pure, ())

    def spatial_only(self) -> "SymbolicHeap":
        return SymbolicHeap(frozenset(), self.spatial)

    def substitute(self, mapping: Mapping[Var, Expr]) -> "SymbolicHeap":
        if not mapping:
            return self
        return SymbolicHeap.of(
            (a.substitute(mapping) for a in self.pure),
            (a.substitute(mapping) for a in self.spatial),
        )

    def drop_trivial(self) -> "SymbolicHeap":
        """Removes `e = e` atoms and true atoms over constants."""
        return SymbolicHeap(
            frozenset(a for a in self.pure
                      if not (a.op == "=" and a.left == a.right) and a.ground_truth() is not True),
            self.spatial,
        )

    def __str__(self) -> str:
        pure = " /\\ ".join(sorted(str(a) for a in self.pure)) or "true"
        spatial = " * ".join(str(a) for a in self.spatial) or "emp"
        return f"{pure} ; {spatial}"


EMP = SymbolicHeap()


@dataclass(frozen=True)
class Disjunction:
    disjuncts: Tuple[SymbolicHeap, ...]

    def __post_init__(self):
        if not self.disjuncts:
            raise ValueError("a disjunction needs at least one disjunct")

    def vars(self) -> FrozenSet[Var]:
        result = frozenset()
        for d in self.disjuncts:
            result |= d.vars()
        return result

    def __iter__(self):
        return iter(self.disjuncts)

    def __len__(self) -> int:
        return len(self.disjuncts)

    def __str__(self) -> str:
        return " \\/ ".join(f"({d})" for d in self.disjuncts)


def null_eq(var: Expr) -> PureAtom:
    return eq(var, NULL)


def atom_vars(atom) -> FrozenSet[Var]:
    return atom.vars()


def all_vars(atoms: Iterable) -> FrozenSet[Var]:
    result = set()
    for atom in atoms:
        result |= atom.vars()
    return frozenset(result)


def occurrences(heap: SymbolicHeap, var: Var) -> int:
    count = 0
    for atom in heap.atoms():
        if isinstance(atom, PureAtom):
            exprs = (atom.left, atom.right)
        elif isinstance(atom, PointsTo):
            exprs = (atom.source, atom.value)
        else:
            exprs = (atom.head, atom.tail)
        for expr in exprs:
            count += sum(1 for v in expr_vars(expr) if v == var)
    return count
