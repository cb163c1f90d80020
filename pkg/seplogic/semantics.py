"""Concrete semantics of symbolic heaps: a model checker and a bounded model
enumerator used as the test oracle."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from .blocks import block_registry
from .formula import PointsTo, PureAtom, Segment, SpatialAtom, SymbolicHeap, eq, neq
from .terms import Expr, FreshNames, Var, evaluate, expr_var_set

LOCATIONS: Tuple[int, ...] = tuple(range(101, 109))
SMALL_NATURALS: Tuple[int, ...] = (0, 1, 2, 3)

Cell = Tuple[int, str]


@dataclass(frozen=True)
class Configuration:
    """A stack and a heap, or the error configuration."""
    stack: FrozenSet[Tuple[Var, int]] = frozenset()
    heap: FrozenSet[Tuple[Cell, int]] = frozenset()
    error: bool = False

    @staticmethod
    def make(stack: Mapping[Var, int], heap: Mapping[Cell, int]) -> "Configuration":
        return Configuration(frozenset(stack.items()), frozenset(heap.items()))

    @property
    def s(self) -> Dict[Var, int]:
        return dict(self.stack)

    @property
    def h(self) -> Dict[Cell, int]:
        return dict(self.heap)

    def with_stack(self, stack: Mapping[Var, int]) -> "Configuration":
        return Configuration(frozenset(stack.items()), self.heap)

    def footprint(self) -> Set[int]:
        values = {v for _, v in self.stack}
        for (loc, _), value in self.heap:
            values.add(loc)
            values.add(value)
        return values

    def render(self) -> Dict[str, Dict[str, int]]:
        return {
            "stack": {str(v): n for v, n in sorted(self.stack, key=lambda p: p[0].name)},
            "heap": {f"{loc}.{f}": n for (loc, f), n in sorted(self.heap)},
        }

    def __str__(self) -> str:
        if self.error:
            return "err"
        stack = ", ".join(f"{v}={n}" for v, n in sorted(self.stack, key=lambda p: p[0].name))
        heap = ", ".join(f"{loc}.{f}->{n}" for (loc, f), n in sorted(self.heap))
        return f"[{stack}] {{{heap}}}"


ERR = Configuration(error=True)


def holds(atom: PureAtom, env: Mapping[Var, int]) -> Optional[bool]:
    left, right = evaluate(atom.left, env), evaluate(atom.right, env)
    if left is None or right is None:
        return None
    return {
        "=": left == right,
        "!=": left != right,
        "<": left < right,
        "<=": left <= right,
        ">": left > right,
        ">=": left >= right,
    }[atom.op]


def _solve_pure(atoms: Sequence[PureAtom], env: Dict[Var, int],
                pool: Sequence[int], needed: Sequence[Var] = ()) -> Iterator[Dict[Var, int]]:
    """Extensions of `env` satisfying every atom; equalities are solved
    directly, remaining variables range over `pool`."""
    for atom in atoms:
        if holds(atom, env) is False:
            return
    for atom in atoms:
        if atom.op != "=":
            continue
        for side, other in ((atom.left, atom.right), (atom.right, atom.left)):
            if isinstance(side, Var) and side not in env:
                value = evaluate(other, env)
                if value is not None:
                    yield from _solve_pure(atoms, {**env, side: value}, pool, needed)
                    return
    unbound = sorted({v for a in atoms for v in a.vars() if v not in env}
                     | {v for v in needed if v not in env})
    if not unbound:
        yield env
        return
    var = unbound[0]
    for value in pool:
        yield from _solve_pure(atoms, {**env, var: value}, pool, needed)


class _ModelSearch:
    """Backtracking search for witnesses of the logical variables."""

    def __init__(self, pool: Sequence[int]):
        self.pool = list(pool)
        self.names = FreshNames("_w")

    def _bind(self, expr: Expr, env: Dict[Var, int],
              candidates: Iterable[int]) -> Iterator[Dict[Var, int]]:
        if evaluate(expr, env) is not None:
            yield env
            return
        unbound = sorted(v for v in expr_var_set(expr) if v not in env)
        if isinstance(expr, Var):
            for value in dict.fromkeys(candidates):
                yield {**env, expr: value}
            return
        for values in itertools.product(self.pool, repeat=len(unbound)):
            yield {**env, **dict(zip(unbound, values))}

    def _unify(self, expr: Expr, value: int, env: Dict[Var, int]) -> Iterator[Dict[Var, int]]:
        for extended in self._bind(expr, env, [value]):
            if evaluate(expr, extended) == value:
                yield extended

    def match(self, atoms: List[SpatialAtom], heap: Dict[Cell, int],
              env: Dict[Var, int]) -> Iterator[Dict[Var, int]]:
        if not atoms:
            if not heap:
                yield env
            return
        atom, rest = atoms[0], atoms[1:]
        if isinstance(atom, PointsTo):
            sources = [loc for (loc, f) in heap if f == atom.field]
            for env1 in self._bind(atom.source, env, sources):
                key = (evaluate(atom.source, env1), atom.field)
                if key not in heap:
                    continue
                remaining = {k: v for k, v in heap.items() if k != key}
                for env2 in self._unify(atom.value, heap[key], env1):
                    yield from self.match(rest, remaining, env2)
            return

        locations = sorted({loc for (loc, _) in heap}) + self.pool
        for env1 in self._bind(atom.head, env, locations):
            for env2 in self._bind(atom.tail, env1, locations):
                head, tail = evaluate(atom.head, env2), evaluate(atom.tail, env2)
                if head == tail:
                    yield from self.match(rest, heap, env2)
                    continue
                if not heap:
                    continue
                middle = self.names.fresh()
                body, _ = block_registry.get(atom.block).instantiate(atom.head, middle, self.names)
                unrolled = body + [Segment(atom.block, middle, atom.tail)]
                yield from self.match(unrolled + rest, heap, env2)


def _spatial_order(atoms: Sequence[SpatialAtom]) -> List[SpatialAtom]:
    return sorted(atoms, key=lambda a: (isinstance(a, Segment), str(a)))


def models(conf: Configuration, heap: SymbolicHeap) -> bool:
    """`conf |= heap`, with logical variables missing from the stack existential."""
    if conf.error:
        return False
    stack = conf.s
    if any(v.is_program and v not in stack for v in heap.vars()):
        return False
    pool = sorted(conf.footprint() | set(SMALL_NATURALS))
    search = _ModelSearch(pool)
    for env in search.match(_spatial_order(heap.spatial), conf.h, stack):
        for _ in _solve_pure(list(heap.pure), env, pool):
            return True
    return False


# -- enumeration ---------------------------------------------------------------


def _expand(atoms: List[SpatialAtom], cells_left: int,
            names: FreshNames) -> Iterator[Tuple[List[PureAtom], List[PointsTo]]]:
    """Segment-free unfoldings of `atoms` with at most `cells_left` cells."""
    if not atoms:
        yield [], []
        return
    atom, rest = atoms[0], atoms[1:]
    if isinstance(atom, PointsTo):
        if cells_left < 1:
            return
        for pure, cells in _expand(rest, cells_left - 1, names):
            yield pure, [atom] + cells
        return
    for pure, cells in _expand(rest, cells_left, names):
        yield [eq(atom.head, atom.tail)] + pure, cells
    if cells_left < 1:
        return
    middle = names.fresh()
    body, _ = block_registry.get(atom.block).instantiate(atom.head, middle, names)
    unrolled = body + [Segment(atom.block, middle, atom.tail)]
    for pure, cells in _expand(unrolled + rest, cells_left, names):
        yield [neq(atom.head, atom.tail)] + pure, cells


@dataclass
class _Assignment:
    pure: List[PureAtom]
    cells: List[PointsTo]
    max_cells: int
    sources: List[Var] = field(default_factory=list)

    def candidates(self, var: Var, env: Dict[Var, int]) -> List[int]:
        used = sorted({v for v in env.values() if v in LOCATIONS})
        fresh = [loc for loc in LOCATIONS if loc not in used][:1]
        if var in self.sources:
            return used + fresh
        return [0, 1, 2] + used + fresh

    def consistent(self, env: Dict[Var, int]) -> bool:
        for atom in self.pure:
            if holds(atom, env) is False:
                return False
        seen: Set[Cell] = set()
        for cell in self.cells:
            loc = evaluate(cell.source, env)
            if loc is None:
                continue
            if loc == 0 or (loc, cell.field) in seen:
                return False
            seen.add((loc, cell.field))
        return True

    def solutions(self, order: List[Var], env: Dict[Var, int]) -> Iterator[Dict[Var, int]]:
        if not self.consistent(env):
            return
        for atom in self.pure:
            if atom.op != "=":
                continue
            for side, other in ((atom.left, atom.right), (atom.right, atom.left)):
                if isinstance(side, Var) and side not in env:
                    value = evaluate(other, env)
                    if value is not None:
                        yield from self.solutions(order, {**env, side: value})
                        return
        pending = [v for v in order if v not in env]
        if not pending:
            yield env
            return
        var = pending[0]
        for value in self.candidates(var, env):
            yield from self.solutions(order, {**env, var: value})


def enumerate_models(heap: SymbolicHeap, max_cells: int = 4,
                     limit: Optional[int] = 4000,
                     fixed: Optional[Mapping[Var, int]] = None) -> List[Configuration]:
    """Models of `heap` with at most `max_cells` cells over the location pool.

    The stack covers exactly `vars(heap)`; locations are handed out lowest
    first so isomorphic heaps are mostly produced once.
    """
    names = FreshNames("_n")
    found: Dict[Configuration, None] = {}
    stack_vars = sorted(heap.vars())
    for pure, cells in _expand(_spatial_order(heap.spatial), max_cells, names):
        assignment = _Assignment(list(heap.pure) + pure, cells, max_cells)
        assignment.sources = [c.source for c in cells if isinstance(c.source, Var)]
        variables = set(stack_vars)
        for atom in assignment.pure:
            variables |= atom.vars()
        for cell in cells:
            variables |= cell.vars()
        order = list(dict.fromkeys(assignment.sources)) + sorted(
            v for v in variables if v not in assignment.sources)
        for env in assignment.solutions(order, dict(fixed or {})):
            memory: Dict[Cell, int] = {}
            for cell in cells:
                memory[(evaluate(cell.source, env), cell.field)] = evaluate(cell.value, env)
            if len(memory) != len(cells):
                continue
            conf = Configuration.make({v: env[v] for v in stack_vars}, memory)
            found.setdefault(conf, None)
            if limit is not None and len(found) >= limit:
                return list(found)
    return list(found)
