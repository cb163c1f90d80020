"""Shape extrapolation: from the footprint of one iteration to a segment
covering any number of iterations."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Tuple

from loguru import logger

from core.errors import AnalysisFailure
from core.models import ConditionCertificate, FailureStage
from seplogic.abstraction import abstract
from seplogic.blocks import HEAD, TAIL, block_registry
from seplogic.entailment import entails
from seplogic.formula import EMP, PointsTo, Segment, SymbolicHeap, eq
from seplogic.ops import restrict
from seplogic.terms import NULL, Expr, FreshNames, Var, anchor_of
from .exit_condition import ExitCondition, anchored
from .partition import Partition


def _source(atom) -> Expr:
    return atom.source if isinstance(atom, PointsTo) else atom.head


@dataclass
class ExtrapolatedShapes:
    """One segment per traversal variable, over the block its iteration
    footprint forms. `q` coincides with `p` since the body changes no cells."""
    blocks: Dict[Var, int] = field(default_factory=dict)
    havocked: Tuple[Var, ...] = ()

    @property
    def traversal(self) -> Tuple[Var, ...]:
        return tuple(self.blocks)

    def p(self, heads: Mapping[Var, Expr], tails: Mapping[Var, Expr]) -> SymbolicHeap:
        return SymbolicHeap.of((), [
            Segment(block, heads[x], tails[x]) for x, block in self.blocks.items()
            if heads[x] != tails[x]
        ])

    q = p


def _footprints(part: Partition) -> Dict[Var, SymbolicHeap]:
    sources = {_source(a) for a in part.transf_pre.spatial}
    footprints = {}
    for var in part.changed:
        if anchor_of(var) in sources:
            footprints[var] = restrict(part.transf_pre.spatial_only(), [anchor_of(var)])
    covered = Counter(a for fp in footprints.values() for a in fp.spatial)
    if covered != Counter(part.transf_pre.spatial):
        raise AnalysisFailure(
            FailureStage.ABSTRACTION,
            f"iteration footprint {part.transf_pre.spatial_only()} does not split "
            f"into disjoint parts owned by the loop variables",
        )
    return footprints


def shape_extrapolate(part: Partition, transf: Dict[Var, Var],
                      names: FreshNames) -> ExtrapolatedShapes:
    """Derives one block per traversal variable and checks by abstraction
    that two consecutive iterations fold into a single segment."""
    if Counter(part.transf_pre.spatial) != Counter(part.transf_curr.spatial):
        raise AnalysisFailure(
            FailureStage.SPATIAL_CHANGE,
            f"loop body changes the heap: {part.transf_pre.spatial_only()} "
            f"becomes {part.transf_curr.spatial_only()}",
        )
    if not part.changed:
        raise AnalysisFailure(FailureStage.TRANSF_MAP, "no variable changes inside the loop")

    shapes = ExtrapolatedShapes()
    for var, footprint in _footprints(part).items():
        anchor, value = anchor_of(var), transf[var]
        block = block_registry.register(
            footprint.substitute({anchor: HEAD, value: TAIL}).spatial)

        # two consecutive iterations: the first one ends in a fresh middle,
        # the latest one starts there
        middle = names.fresh()
        first = footprint.substitute({value: middle})
        inner = {v: names.fresh() for v in footprint.logical_vars() if v not in (anchor, value)}
        inner[anchor] = middle
        latest = footprint.substitute(inner)
        joined = SymbolicHeap.of(
            [eq(var, value)],
            first.spatial + latest.spatial + (Segment(block, value, NULL),),
        )
        theta = abstract(joined, [block])
        expected = {Segment(block, anchor, value), Segment(block, value, NULL)}
        if set(theta.spatial) != expected or len(theta.spatial) != 2:
            raise AnalysisFailure(
                FailureStage.ABSTRACTION,
                f"two iterations of {var} do not fold into one segment: {theta}",
            )
        logger.debug(f"extrapolated {var}: iter[{block}]({anchor},{value})")
        shapes.blocks[var] = block

    shapes.havocked = tuple(v for v in part.changed if v not in shapes.blocks)
    return shapes


def exit_values(shapes: ExtrapolatedShapes, header: ExitCondition,
                names: FreshNames) -> Dict[Var, Expr]:
    """Exit(x) over initial values; a fresh value for variables the loop
    condition does not bound."""
    exit_map = header.exit_map
    return {x: anchored(exit_map[x]) if x in exit_map else names.fresh()
            for x in shapes.traversal}


def check_conditions(shapes: ExtrapolatedShapes, part: Partition, transf: Dict[Var, Var],
                     header: ExitCondition, exits: Dict[Var, Expr]) -> List[ConditionCertificate]:
    """Discharges the side conditions of the extrapolated shapes; raises on
    the first one that is not proved."""
    anchors = {x: anchor_of(x) for x in shapes.traversal}
    values = {x: transf[x] for x in shapes.traversal}
    programs = {x: x for x in shapes.traversal}
    program_exits = {x: exits[x] for x in shapes.traversal}
    for x, y in header.conjuncts:
        if x in program_exits:
            program_exits[x] = y

    obligations: List[Tuple[str, SymbolicHeap, SymbolicHeap]] = []
    for label, shape, transf_part in (("p", shapes.p, part.transf_pre),
                                      ("q", shapes.q, part.transf_curr)):
        obligations.append((
            f"one iteration is an instance of {label}",
            transf_part.star(shape(values, exits)),
            shape(anchors, values).star(shape(values, exits)),
        ))
    for x, y in header.conjuncts:
        obligations.append((
            f"{x} = {y} empties p",
            shapes.p(programs, program_exits).with_pure(eq(x, y)),
            EMP,
        ))
    obligations.append((
        "q is empty before the first iteration",
        shapes.q(anchors, programs).with_pure(*(eq(anchors[x], x) for x in shapes.traversal)),
        EMP,
    ))

    certificates = []
    for condition, left, right in obligations:
        proved = entails(left, right).proved
        certificates.append(ConditionCertificate(
            condition=condition, statement=f"{left} |- {right}", proved=proved))
        if not proved:
            raise AnalysisFailure(FailureStage.CONDITION_CHECK, f"cannot prove {left} |- {right}")
    return certificates
