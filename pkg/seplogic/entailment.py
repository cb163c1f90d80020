"""Entailment with frame inference by spatial subtraction.

The same matcher runs in two modes. In proving mode every atom of the right
formula must be discharged from the left one. In abducing mode the atoms that
cannot be discharged are collected as the missing part instead.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from loguru import logger

from .blocks import block_registry
from .formula import (
    PointsTo,
    PureAtom,
    Segment,
    SpatialAtom,
    SymbolicHeap,
    eq,
    neq,
)
from .ops import logical_binding
from .pure import PureSolver, heap_facts
from .terms import NULL, Expr, FreshNames, Var, expr_var_set, substitute_expr


class EntailmentVerdict(str, Enum):
    PROVED = "proved"
    UNKNOWN = "unknown"


@dataclass
class EntailmentResult:
    verdict: EntailmentVerdict
    frame: SymbolicHeap
    missing: SymbolicHeap = field(default_factory=SymbolicHeap)
    substitution: Dict[Var, Expr] = field(default_factory=dict)
    reason: str = ""
    stuck: bool = False

    @property
    def proved(self) -> bool:
        return self.verdict == EntailmentVerdict.PROVED


class _Stuck(Exception):
    """Raised inside the matcher when an atom cannot be discharged."""


class SpatialMatcher:
    """Subtracts the atoms of a right formula from a left formula."""

    def __init__(
        self,
        left: SymbolicHeap,
        existentials: Iterable[Var],
        names: FreshNames,
        abduce: bool = False,
        prefer: Iterable[Var] = (),
    ):
        self.left = left
        self.names = names
        self.abduce = abduce
        self.prefer = frozenset(prefer)
        self.existentials = set(existentials)
        self.pure: List[PureAtom] = list(left.pure)
        self.cells: List[SpatialAtom] = list(left.spatial)
        self.history: List[SpatialAtom] = list(left.spatial)
        self.sigma: Dict[Var, Expr] = {}
        self.missing_pure: List[PureAtom] = []
        self.missing_spatial: List[SpatialAtom] = []
        self.obligations: List[PureAtom] = []
        self._refresh()
        # segments that are provably empty vanish
        for atom in list(self.cells):
            if isinstance(atom, Segment) and self.solver.same(atom.head, atom.tail):
                self.cells.remove(atom)

    # -- bookkeeping --------------------------------------------------------

    def _refresh(self):
        current = SymbolicHeap.of(self.pure, self.history)
        self.solver = PureSolver(self.pure + heap_facts(current))

    def _snapshot(self):
        return (list(self.pure), list(self.cells), list(self.history), dict(self.sigma),
                list(self.obligations), set(self.existentials), self.solver)

    def _restore(self, snapshot):
        (self.pure, self.cells, self.history, self.sigma,
         self.obligations, self.existentials, self.solver) = snapshot

    def _unbound(self, expr: Expr) -> FrozenSet[Var]:
        return frozenset(v for v in expr_var_set(expr)
                         if v in self.existentials and v not in self.sigma)

    def resolve(self, expr: Expr) -> Expr:
        """Applies the instantiation and replaces program variables by their
        left-hand logical binding."""
        previous = None
        while previous != expr:
            previous = expr
            expr = substitute_expr(expr, self.sigma)
        mapping = {}
        for var in expr_var_set(expr):
            if var.is_program:
                bound = logical_binding(self.left, var)
                if bound is not None:
                    mapping[var] = bound
        return substitute_expr(expr, mapping) if mapping else expr

    def _bind(self, var: Var, value: Expr):
        self.sigma[var] = value

    def _settle(self, wanted: Expr, found: Expr):
        """Makes `wanted` (right side) agree with `found` (left side)."""
        wanted = self.resolve(wanted)
        if isinstance(wanted, Var) and wanted in self.existentials and wanted not in self.sigma:
            self._bind(wanted, found)
        elif not self.solver.same(wanted, found):
            self.obligations.append(eq(wanted, found))

    # -- allocation facts ---------------------------------------------------

    def _owns_next(self, x: Expr, exclude: Optional[SpatialAtom] = None) -> Optional[SpatialAtom]:
        for atom in self.history:
            if atom is exclude:
                continue
            if isinstance(atom, PointsTo):
                if atom.field == "next" and self.solver.same(atom.source, x):
                    return atom
            elif self.solver.same(atom.head, x) and self.solver.proves(neq(atom.head, atom.tail)):
                return atom
        return None

    def _ends_in_null(self, x: Expr, exclude: Optional[SpatialAtom] = None) -> bool:
        if self.solver.same(x, NULL):
            return True
        return any(
            isinstance(a, Segment) and a is not exclude
            and self.solver.same(a.head, x) and self.solver.same(a.tail, NULL)
            for a in self.history
        )

    def distinct(self, x: Expr, y: Expr) -> bool:
        """Whether `x != y` follows from the pure part or from separation."""
        if self.solver.unsat or self.solver.proves(neq(x, y)):
            return True
        for a, b in ((x, y), (y, x)):
            owner = self._owns_next(a)
            if owner is None:
                continue
            if self.solver.same(b, NULL):
                return True
            if self._owns_next(b, exclude=owner) is not None:
                return True
            if self._ends_in_null(b, exclude=owner):
                return True
        return False

    def _terminates(self, tail: Expr, consumed: SpatialAtom) -> bool:
        """`tail` cannot be a head inside the segment `consumed`."""
        return (self.solver.same(tail, NULL)
                or self._owns_next(tail, exclude=consumed) is not None
                or self._ends_in_null(tail, exclude=consumed))

    # -- spatial steps ------------------------------------------------------

    def _find_cell(self, source: Expr, field_name: str) -> Optional[PointsTo]:
        for atom in self.cells:
            if isinstance(atom, PointsTo) and atom.field == field_name \
                    and self.solver.same(atom.source, source):
                return atom
        return None

    def _unfold_at(self, source: Expr, field_name: str) -> bool:
        """Unfolds a non-empty left segment whose head cell has `field_name`."""
        for atom in self.cells:
            if not isinstance(atom, Segment) or not self.solver.same(atom.head, source):
                continue
            block = block_registry.get(atom.block)
            if field_name not in block.head_fields():
                continue
            if not self.distinct(atom.head, atom.tail):
                continue
            middle = self.names.fresh()
            body, _ = block.instantiate(atom.head, middle, self.names)
            rest = Segment(atom.block, middle, atom.tail)
            self.cells.remove(atom)
            self.history = [a for a in self.history if a is not atom]
            self.cells.extend(body + [rest])
            self.history.extend(body + [rest])
            self.pure.append(neq(atom.head, atom.tail))
            self._refresh()
            return True
        return False

    def consume_cell(self, atom: PointsTo, allow_abduce: bool = True):
        source = self.resolve(atom.source)
        if self._unbound(source):
            raise _Stuck(f"unbound source in {atom}")
        cell = self._find_cell(source, atom.field)
        if cell is None and self._unfold_at(source, atom.field):
            cell = self._find_cell(source, atom.field)
        if cell is None:
            if self.abduce and allow_abduce:
                self.missing_spatial.append(PointsTo(source, atom.field, self.resolve(atom.value)))
                return
            raise _Stuck(f"no cell for {atom}")
        self.cells.remove(cell)
        self._settle(atom.value, cell.value)

    def consume_segment(self, atom: Segment, allow_abduce: bool = True):
        head = self.resolve(atom.head)
        tail = self.resolve(atom.tail)
        if self._unbound(head):
            raise _Stuck(f"unbound head in {atom}")
        if isinstance(tail, Var) and tail in self._unbound(tail):
            for candidate in self.cells:
                if isinstance(candidate, Segment) and candidate.block == atom.block \
                        and self.solver.same(candidate.head, head):
                    self._bind(tail, candidate.tail)
                    tail = candidate.tail
                    break
            else:
                raise _Stuck(f"unbound tail in {atom}")

        snapshot = self._snapshot()
        try:
            self._consume_segment(atom.block, head, tail)
        except _Stuck:
            if not (self.abduce and allow_abduce):
                raise
            self._restore(snapshot)
            self.missing_spatial.append(Segment(atom.block, head, tail))

    def _consume_segment(self, block_id: int, head: Expr, tail: Expr):
        block = block_registry.get(block_id)
        while not self.solver.same(head, tail):
            left_seg = next(
                (a for a in self.cells if isinstance(a, Segment) and a.block == block_id
                 and self.solver.same(a.head, head)),
                None,
            )
            if left_seg is not None:
                self.cells.remove(left_seg)
                if self.solver.same(left_seg.tail, tail):
                    return
                if not self._terminates(tail, left_seg):
                    raise _Stuck(f"cannot append to {left_seg} up to {tail}")
                head = left_seg.tail
                continue

            if not self.distinct(head, tail):
                raise _Stuck(f"cannot show {head} != {tail} to unroll iter[{block_id}]")
            middle = self.names.fresh()
            body, fresh = block.instantiate(head, middle, self.names)
            self.existentials |= set(fresh) | {middle}
            cells = [a for a in body if isinstance(a, PointsTo)]
            while cells:
                ready = next((c for c in cells if not self._unbound(self.resolve(c.source))), None)
                if ready is None:
                    raise _Stuck(f"disconnected copy of iter[{block_id}]")
                cells.remove(ready)
                self.consume_cell(ready, allow_abduce=False)
            for nested in (a for a in body if isinstance(a, Segment)):
                self.consume_segment(nested, allow_abduce=False)
            head = self.resolve(middle)
            if self._unbound(head):
                raise _Stuck(f"unbound step in iter[{block_id}]")

    # -- driver -------------------------------------------------------------

    def _bind_equalities(self, atoms: Iterable[PureAtom]):
        changed = True
        while changed:
            changed = False
            for atom in atoms:
                if atom.op != "=":
                    continue
                for side, other in ((atom.left, atom.right), (atom.right, atom.left)):
                    side_r = substitute_expr(side, self.sigma)
                    if isinstance(side_r, Var) and side_r in self.existentials \
                            and side_r not in self.sigma and not self._unbound(other):
                        value = self.resolve(other)
                        if side_r not in expr_var_set(value):
                            self._bind(side_r, value)
                            changed = True

    def run(self, right: SymbolicHeap) -> EntailmentResult:
        try:
            self._bind_equalities(right.pure)

            pending = [a for a in right.spatial if isinstance(a, PointsTo)]
            while pending:
                ready = [a for a in pending if not self._unbound(self.resolve(a.source))]
                if not ready:
                    raise _Stuck(f"unbound source in {pending[0]}")
                ready.sort(key=lambda a: str(self.resolve(a.source)))
                pending.remove(ready[0])
                self.consume_cell(ready[0])
                self._bind_equalities(right.pure)

            segments = [a for a in right.spatial if isinstance(a, Segment)]
            while segments:
                ready = [a for a in segments if not self._unbound(self.resolve(a.head))]
                if not ready:
                    raise _Stuck(f"unbound head in {segments[0]}")
                ready.sort(key=lambda a: str(self.resolve(a.head)))
                segments.remove(ready[0])
                self.consume_segment(ready[0])
                self._bind_equalities(right.pure)

            for atom in list(right.pure) + self.obligations:
                goal = PureAtom.make(atom.op, self.resolve(atom.left), self.resolve(atom.right))
                if goal.op == "=" and goal.left == goal.right:
                    continue
                if not self._unbound(goal.left) and not self._unbound(goal.right) \
                        and self.solver.proves(goal):
                    continue
                if self.abduce:
                    self.missing_pure.append(goal)
                else:
                    raise _Stuck(f"cannot prove {goal}")
        except _Stuck as stuck:
            logger.debug(f"entailment stuck: {stuck}")
            return EntailmentResult(
                EntailmentVerdict.UNKNOWN,
                frame=SymbolicHeap.of(self.pure, self.cells),
                substitution=dict(self.sigma),
                reason=str(stuck),
                stuck=True,
            )

        missing = SymbolicHeap.of(self.missing_pure, self.missing_spatial)
        frame = SymbolicHeap.of(self.pure, self.cells)
        proved = not self.cells and not missing.pure and not missing.spatial
        return EntailmentResult(
            EntailmentVerdict.PROVED if proved else EntailmentVerdict.UNKNOWN,
            frame=frame,
            missing=missing,
            substitution=dict(self.sigma),
            reason="" if proved else "leftover heap" if self.cells else "missing atoms",
        )


def entails(phi: SymbolicHeap, psi: SymbolicHeap,
            names: Optional[FreshNames] = None) -> EntailmentResult:
    """Decides `phi |- psi` soundly; logical variables of `psi` absent from
    `phi` are existential."""
    existentials = {v for v in psi.logical_vars() if v not in phi.vars()}
    matcher = SpatialMatcher(phi, existentials, names or FreshNames("_u"))
    if matcher.solver.unsat:
        return EntailmentResult(EntailmentVerdict.PROVED, frame=SymbolicHeap())
    return matcher.run(psi)


def entails_with_frame(phi: SymbolicHeap, psi: SymbolicHeap,
                       names: Optional[FreshNames] = None) -> EntailmentResult:
    """Like `entails` but a leftover spatial frame does not block the proof."""
    existentials = {v for v in psi.logical_vars() if v not in phi.vars()}
    matcher = SpatialMatcher(phi, existentials, names or FreshNames("_u"))
    if matcher.solver.unsat:
        return EntailmentResult(EntailmentVerdict.PROVED, frame=SymbolicHeap())
    result = matcher.run(psi)
    if result.reason == "leftover heap":
        result.verdict = EntailmentVerdict.PROVED
        result.reason = ""
    return result


def distinct(heap: SymbolicHeap, x: Expr, y: Expr) -> bool:
    return SpatialMatcher(heap, (), FreshNames("_u")).distinct(x, y)


def representatives(matcher: SpatialMatcher, heap: SymbolicHeap) -> SymbolicHeap:
    """Rewrites the variables of `heap` to preferred members of their left-hand
    equality classes: anchors first, then preferred variables, then logicals."""
    mapping: Dict[Var, Expr] = {}
    for var in heap.vars():
        members = [m for m in matcher.solver.members(var) if not m.is_program]
        if not members:
            continue

        def rank(m: Var) -> Tuple[int, str]:
            if m.is_anchor:
                return (0, m.name)
            if m in matcher.prefer:
                return (1, m.name)
            return (2, m.name)

        best = min(members, key=rank)
        if best != var:
            mapping[var] = best
    return heap.substitute(mapping) if mapping else heap
