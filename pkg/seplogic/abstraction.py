"""Abstraction: folding consecutive block copies into segments.

Every fusion is only a proposal; it is kept when the original formula entails
the folded one, so the result is always implied by the input.
"""
from __future__ import annotations

from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

from loguru import logger

from .blocks import block_registry
from .entailment import SpatialMatcher, entails
from .formula import LS_BLOCK, PointsTo, Segment, SpatialAtom, SymbolicHeap, occurrences
from .terms import Expr, FreshNames, Var, expr_var_set

# (start, end, atoms used, variables strictly inside)
Piece = Tuple[Expr, Expr, Tuple[SpatialAtom, ...], frozenset]


def _minus(atoms: Sequence[SpatialAtom], used: Iterable[SpatialAtom]) -> List[SpatialAtom]:
    rest = list(atoms)
    for atom in used:
        rest.remove(atom)
    return rest


def _pieces(heap: SymbolicHeap, block_id: int, start: Expr) -> Iterator[Piece]:
    """Segments and raw block copies of `block_id` starting at `start`."""
    for atom in heap.segments():
        if atom.block == block_id and atom.head == start:
            yield start, atom.tail, (atom,), frozenset()

    block = block_registry.get(block_id)
    names = FreshNames("_f")
    middle = names.fresh()
    body, fresh = block.instantiate(start, middle, names)
    matcher = SpatialMatcher(heap.spatial_only(), set(fresh) | {middle}, names)
    result = matcher.run(SymbolicHeap.of((), body))
    if result.stuck or result.missing.spatial:
        return
    if any(v.name.startswith("_f") for v in result.frame.vars()):
        return  # the match needed an unfolding
    end = result.substitution.get(middle)
    if end is None:
        return
    used = tuple(_minus(heap.spatial, result.frame.spatial))
    inside = frozenset(v for e in fresh if e in result.substitution
                       for v in expr_var_set(result.substitution[e]))
    yield start, end, used, inside


def _private(heap: SymbolicHeap, variables: Iterable[Var], used: Sequence[SpatialAtom]) -> bool:
    """The variables occur only inside the atoms `used`."""
    inner = SymbolicHeap.of((), used)
    return all(
        isinstance(v, Var) and v.is_logical and occurrences(heap, v) == occurrences(inner, v)
        for v in variables
    )


def _proposals(heap: SymbolicHeap, block_id: int) -> Iterator[SymbolicHeap]:
    starts = sorted({a.source for a in heap.points_to()} | {a.head for a in heap.segments()},
                    key=str)
    for start in starts:
        for _, middle, used1, inside1 in _pieces(heap, block_id, start):
            if not isinstance(middle, Var):
                continue
            rest = SymbolicHeap.of(heap.pure, _minus(heap.spatial, used1))
            for _, end, used2, inside2 in _pieces(rest, block_id, middle):
                used = used1 + used2
                if end == start or not _private(heap, {middle} | inside1 | inside2, used):
                    continue
                spatial = _minus(heap.spatial, used) + [Segment(block_id, start, end)]
                yield SymbolicHeap.of(heap.pure, spatial)


def fold_block(heap: SymbolicHeap, block_id: int) -> SymbolicHeap:
    """Repeatedly fuses adjacent copies of one block while the fusion is entailed."""
    current = heap
    progress = True
    while progress:
        progress = False
        for candidate in _proposals(current, block_id):
            if entails(current, candidate).proved:
                logger.debug(f"abstraction: {current} ~> {candidate}")
                current = candidate
                progress = True
                break
    return current


def abstract(heap: SymbolicHeap, blocks: Optional[Iterable[int]] = None) -> SymbolicHeap:
    """The abstraction of `heap`; every result is entailed by its input."""
    if blocks is None:
        blocks = [LS_BLOCK] + sorted({a.block for a in heap.segments()} - {LS_BLOCK})
    current = heap
    for block_id in blocks:
        current = fold_block(current, block_id)
    return current
