"""Registered block shapes for iterated segments.

A block is the spatial footprint of one step along a segment, written over the
head parameter `$h`, the tail parameter `$t` and existentials `$e1, $e2, ...`.
`seg(h, t)` holds when `h = t` on the empty heap, or when `h != t` and the heap
splits into one copy of the block from `h` to some `m` and `seg(m, t)`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

from loguru import logger

from core.errors import AnalysisFailure
from core.models import FailureStage

from .formula import LS_BLOCK, PointsTo, Segment, SpatialAtom
from .terms import Expr, FreshNames, Var, VarKind, expr_vars

HEAD = Var("$h", VarKind.LOGICAL)
TAIL = Var("$t", VarKind.LOGICAL)


def _source(atom: SpatialAtom) -> Expr:
    return atom.source if isinstance(atom, PointsTo) else atom.head


def _target(atom: SpatialAtom) -> Expr:
    return atom.value if isinstance(atom, PointsTo) else atom.tail


@dataclass(frozen=True)
class Block:
    block_id: int
    cells: Tuple[SpatialAtom, ...]
    depth: int

    @property
    def existentials(self) -> Tuple[Var, ...]:
        seen: List[Var] = []
        for atom in self.cells:
            for var in sorted(atom.vars()):
                if var not in (HEAD, TAIL) and var not in seen:
                    seen.append(var)
        return tuple(seen)

    def head_fields(self) -> Tuple[str, ...]:
        return tuple(a.field for a in self.cells
                     if isinstance(a, PointsTo) and a.source == HEAD)

    def instantiate(self, head: Expr, tail: Expr,
                    names: FreshNames) -> Tuple[List[SpatialAtom], List[Var]]:
        """One copy of the block from `head` to `tail` with fresh existentials."""
        fresh = [names.fresh() for _ in self.existentials]
        mapping: Dict[Var, Expr] = dict(zip(self.existentials, fresh))
        mapping[HEAD] = head
        mapping[TAIL] = tail
        return [a.substitute(mapping) for a in self.cells], fresh

    def render(self) -> str:
        return " * ".join(str(a) for a in self.cells)


class BlockRegistry:
    """Process-wide table of block shapes; block 0 is the list block."""

    def __init__(self, max_depth: int = 2):
        self.max_depth = max_depth
        self.blocks: Dict[int, Block] = {}
        self.by_shape: Dict[str, int] = {}
        self.reset()

    def reset(self):
        """Forget every block except the built-in list block."""
        ls_block = Block(LS_BLOCK, (PointsTo(HEAD, "next", TAIL),), 1)
        self.blocks = {LS_BLOCK: ls_block}
        self.by_shape = {ls_block.render(): LS_BLOCK}

    def get(self, block_id: int) -> Block:
        try:
            return self.blocks[block_id]
        except KeyError:
            raise AnalysisFailure(FailureStage.ABSTRACTION, f"unknown block {block_id}")

    def lookup(self, cells: Iterable[SpatialAtom]) -> Optional[int]:
        return self.by_shape.get(_render(self._canonical(list(cells))))

    def register(self, cells: Iterable[SpatialAtom]) -> int:
        """Registers a block written over HEAD and TAIL; returns its id.

        Variables other than HEAD and TAIL become the block's existentials.
        """
        canonical = self._canonical(list(cells))
        key = _render(canonical)
        if key in self.by_shape:
            return self.by_shape[key]

        depth = 1 + max(
            (self.get(a.block).depth for a in canonical if isinstance(a, Segment)),
            default=0,
        )
        if depth > self.max_depth:
            raise AnalysisFailure(
                FailureStage.ABSTRACTION,
                f"block nesting depth {depth} exceeds max {self.max_depth}: {key}",
            )

        block_id = max(self.blocks) + 1
        self.blocks[block_id] = Block(block_id, canonical, depth)
        self.by_shape[key] = block_id
        logger.debug(f"registered block iter[{block_id}]: {key}")
        return block_id

    def _canonical(self, cells: List[SpatialAtom]) -> Tuple[SpatialAtom, ...]:
        if not any(isinstance(a, PointsTo) and a.source == HEAD and a.field == "next"
                   for a in cells):
            raise AnalysisFailure(
                FailureStage.ABSTRACTION,
                f"block head owns no next cell: {_render(cells)}",
            )
        if not any(TAIL in set(expr_vars(_target(a))) for a in cells):
            raise AnalysisFailure(
                FailureStage.ABSTRACTION,
                f"block does not reach its tail: {_render(cells)}",
            )

        # Rename existentials in breadth-first order from the head.
        names: Dict[Var, Var] = {HEAD: HEAD, TAIL: TAIL}
        ordered: List[SpatialAtom] = []
        remaining = list(cells)
        frontier: List[Expr] = [HEAD]
        while frontier:
            current = frontier.pop(0)
            here = [a for a in remaining if _source(a) == current]
            here.sort(key=_atom_order)
            for atom in here:
                remaining.remove(atom)
                ordered.append(atom)
                for var in expr_vars(_target(atom)):
                    if var not in names:
                        names[var] = Var(f"$e{len(names) - 1}", VarKind.LOGICAL)
                        frontier.append(var)
        if remaining:
            raise AnalysisFailure(
                FailureStage.ABSTRACTION,
                f"block is not connected from its head: {_render(cells)}",
            )
        return tuple(a.substitute(names) for a in ordered)


def _atom_order(atom: SpatialAtom):
    if isinstance(atom, PointsTo):
        return (0, atom.field, "")
    return (1, str(atom.block), "")


def _render(cells: Iterable[SpatialAtom]) -> str:
    return " * ".join(str(a) for a in cells)


# Global registry instance
block_registry = BlockRegistry()
