"""Structural operations on symbolic heaps: substitution, reachability,
restriction, normalisation and clean-up."""
from __future__ import annotations

from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .formula import (
    PointsTo,
    PureAtom,
    SymbolicHeap,
    EMP,
    eq,
    occurrences,
)
from .terms import Expr, FreshNames, Var, VarKind, expr_var_set, expr_vars


def subst(heap: SymbolicHeap, x: Var, y: Var) -> SymbolicHeap:
    """`heap[x/y]`: rename `y` to `x`; a program variable `x` is set equal instead."""
    if y not in heap.vars():
        return heap
    if x.is_program:
        return heap.with_pure(eq(x, y))
    return heap.substitute({y: x})


def reach_set(heap: SymbolicHeap, seeds: Iterable[Var]) -> FrozenSet[Var]:
    reached: Set[Var] = set(seeds)
    if not reached:
        return frozenset()
    changed = True
    while changed:
        changed = False
        for atom in heap.spatial:
            if isinstance(atom, PointsTo):
                source, target = atom.source, atom.value
            else:
                source, target = atom.head, atom.tail
            if expr_var_set(source) and expr_var_set(source) <= reached:
                new = expr_var_set(target) - reached
                if new:
                    reached |= new
                    changed = True
        for atom in heap.pure:
            if atom.op != "=":
                continue
            for side, other in ((atom.left, atom.right), (atom.right, atom.left)):
                if isinstance(side, Var) and side not in reached \
                        and expr_var_set(other) <= reached:
                    reached.add(side)
                    changed = True
    return frozenset(reached)


def restrict(heap: SymbolicHeap, seeds: Iterable[Var]) -> SymbolicHeap:
    """The sub-formula whose atoms only mention variables reachable from `seeds`."""
    reached = reach_set(heap, seeds)
    if not reached:
        return EMP
    return SymbolicHeap.of(
        (a for a in heap.pure if a.vars() <= reached),
        (a for a in heap.spatial if a.vars() <= reached),
    )


def remainder(heap: SymbolicHeap, part: SymbolicHeap) -> SymbolicHeap:
    """`heap` without the atoms of `part` (multiset difference on the spatial side)."""
    spatial = list(heap.spatial)
    for atom in part.spatial:
        if atom in spatial:
            spatial.remove(atom)
    return SymbolicHeap.of(heap.pure - part.pure, spatial)


def normalize(heap: SymbolicHeap, names: FreshNames) -> SymbolicHeap:
    """Rewrites `heap` so every program variable occurs only as `x = l`."""
    mapping: Dict[Var, Expr] = {}
    for var in sorted(heap.program_vars()):
        mapping[var] = logical_binding(heap, var) or names.fresh()
    if not mapping:
        return heap.drop_trivial()
    body = heap.substitute(mapping).drop_trivial()
    return body.with_pure(*(eq(var, value) for var, value in mapping.items()))


def logical_binding(heap: SymbolicHeap, var: Var) -> Optional[Var]:
    """The logical variable a program variable is bound to, if any."""
    for atom in sorted(heap.pure, key=str):
        if atom.op != "=":
            continue
        for side, other in ((atom.left, atom.right), (atom.right, atom.left)):
            if side == var and isinstance(other, Var) and other.is_logical:
                return other
    return None


def bindings(heap: SymbolicHeap) -> Dict[Var, Var]:
    """Program variable to logical representative, for a normalised heap."""
    result = {}
    for var in sorted(heap.program_vars()):
        bound = logical_binding(heap, var)
        if bound is not None:
            result[var] = bound
    return result


def drop_program_vars(heap: SymbolicHeap, keep: Iterable[Var] = ()) -> SymbolicHeap:
    """Removes the bindings of program variables outside `keep`."""
    kept = set(keep)
    return SymbolicHeap(
        frozenset(a for a in heap.pure
                  if all(not v.is_program or v in kept for v in a.vars())),
        heap.spatial,
    )


def eliminate_equalities(heap: SymbolicHeap, rigid: Iterable[Var]) -> SymbolicHeap:
    """Substitutes away non-rigid logical variables equal to another term."""
    fixed = set(rigid)
    current = heap
    changed = True
    while changed:
        changed = False
        for atom in sorted(current.pure, key=str):
            if atom.op != "=":
                continue
            for side, other in ((atom.left, atom.right), (atom.right, atom.left)):
                if not isinstance(side, Var) or not side.is_logical or side in fixed:
                    continue
                if side in expr_var_set(other):
                    continue
                if not isinstance(other, Var) and _is_compound(other):
                    continue
                current = current.without_pure([atom]).substitute({side: other}).drop_trivial()
                changed = True
                break
            if changed:
                break
    return current


def _is_compound(expr: Expr) -> bool:
    return bool(expr_var_set(expr)) and not isinstance(expr, Var)


def eliminate_shared_equalities(pre: SymbolicHeap, posts: Sequence[SymbolicHeap]
                                ) -> Tuple[SymbolicHeap, List[SymbolicHeap]]:
    """Substitutes away logical variables the precondition equates with a
    variable or a constant, in the precondition and in every post."""
    posts = list(posts)
    changed = True
    while changed:
        changed = False
        for atom in sorted(pre.pure, key=str):
            if atom.op != "=":
                continue
            for side, other in ((atom.left, atom.right), (atom.right, atom.left)):
                if not isinstance(side, Var) or side.kind != VarKind.LOGICAL:
                    continue
                if side in expr_var_set(other) or _is_compound(other):
                    continue
                mapping = {side: other}
                pre = pre.without_pure([atom]).substitute(mapping).drop_trivial()
                posts = [p.substitute(mapping) for p in posts]
                changed = True
                break
            if changed:
                break
    return pre, posts


def gc(heap: SymbolicHeap, rigid: Iterable[Var]) -> SymbolicHeap:
    """Drops pure atoms mentioning an existential that occurs nowhere else."""
    fixed = set(rigid)
    current = heap
    changed = True
    while changed:
        changed = False
        for atom in sorted(current.pure, key=str):
            lonely = [v for v in atom.vars()
                      if v.is_logical and v not in fixed and occurrences(current, v) == 1]
            if lonely:
                current = current.without_pure([atom])
                changed = True
                break
    return current


def canonical_rename(heaps: Sequence[SymbolicHeap],
                     prefix: str = "l") -> List[SymbolicHeap]:
    """Renames non-anchor logical variables to l1, l2, ... jointly across `heaps`.

    Atoms are visited in the order of their rendering with logical names
    masked, so alpha-equivalent inputs produce the same output.
    """
    logicals = sorted({v for h in heaps for v in h.vars()
                       if v.kind == VarKind.LOGICAL})
    placeholder = {v: Var(f"_{i}", VarKind.LOGICAL) for i, v in enumerate(logicals)}
    masked_of = {v: Var("_", VarKind.LOGICAL) for v in logicals}

    order: List[Var] = []
    for heap in heaps:
        atoms = heap.atoms()
        atoms.sort(key=lambda a: str(a.substitute(masked_of)))
        for atom in atoms:
            for var in _ordered_vars(atom):
                if var in placeholder and var not in order:
                    order.append(var)
    mapping = {v: Var(f"{prefix}{i + 1}", VarKind.LOGICAL) for i, v in enumerate(order)}
    # two-step so existing names never collide with new ones
    staged = [h.substitute(placeholder) for h in heaps]
    back = {placeholder[v]: mapping[v] for v in order}
    return [h.substitute(back) for h in staged]


def _ordered_vars(atom) -> List[Var]:
    if isinstance(atom, PureAtom):
        exprs = (atom.left, atom.right)
    elif isinstance(atom, PointsTo):
        exprs = (atom.source, atom.value)
    else:
        exprs = (atom.head, atom.tail)
    result = []
    for expr in exprs:
        for var in expr_vars(expr):
            if var not in result:
                result.append(var)
    return result
