"""Loop invariant and final state built from the extrapolated shapes."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from biabduction.contracts import Contract
from core.models import ContractKind
from engine.base import final_contract
from frontend.statements import Function
from seplogic.formula import PureAtom, SymbolicHeap, eq
from seplogic.ops import drop_program_vars
from seplogic.terms import Expr, FreshNames, Var, anchor_of
from .exit_condition import ExitCondition, anchored
from .partition import Partition
from .shapes import ExtrapolatedShapes


@dataclass
class InvariantState:
    pre: SymbolicHeap
    curr: SymbolicHeap
    # per-iteration values; renamed apart when checking preservation
    middles: Dict[Var, Var] = field(default_factory=dict)
    havoc: Dict[Var, Var] = field(default_factory=dict)

    def generalized(self, names: FreshNames) -> SymbolicHeap:
        """`curr` with every per-iteration value existential."""
        renaming = {v: names.fresh() for v in list(self.middles.values()) + list(self.havoc.values())}
        return self.curr.substitute(renaming)


def _anchors(shapes: ExtrapolatedShapes) -> Dict[Var, Expr]:
    return {x: anchor_of(x) for x in shapes.traversal}


def build_invariant(shapes: ExtrapolatedShapes, part: Partition, exits: Dict[Var, Expr],
                    names: FreshNames) -> InvariantState:
    """pre: const * p(X, m) * p(m, Exit); curr: const * q(X, m) * p(m, Exit)
    with x = m for traversal variables and the other changed ones unconstrained."""
    middles = {x: names.fresh() for x in shapes.traversal}
    havoc = {h: names.fresh() for h in shapes.havocked}
    anchors = _anchors(shapes)

    pre = drop_program_vars(part.const_part) \
        .star(shapes.p(anchors, middles)).star(shapes.p(middles, exits))
    curr = part.const_part \
        .star(shapes.q(anchors, middles)).star(shapes.p(middles, exits)) \
        .with_pure(*(eq(x, m) for x, m in middles.items())) \
        .with_pure(*(eq(h, v) for h, v in havoc.items()))
    return InvariantState(pre, curr, middles, havoc)


def _exit_states(shapes: ExtrapolatedShapes, part: Partition, header: ExitCondition,
                 exits: Dict[Var, Expr], names: FreshNames) -> List[SymbolicHeap]:
    """One state per loop-condition conjunct that became false."""
    anchors = _anchors(shapes)
    states = []
    for x, y in header.conjuncts:
        ends = {v: exits[v] if v == x else names.fresh() for v in shapes.traversal}
        bindings: List[PureAtom] = [eq(v, e) for v, e in ends.items()]
        bindings += [eq(h, names.fresh()) for h in shapes.havocked if h != x]
        if x not in ends:
            bindings.append(eq(x, anchored(y)))
        states.append(
            part.const_part.star(shapes.q(anchors, ends)).star(shapes.p(ends, exits))
            .with_pure(*bindings)
        )
    return states


def build_final(shapes: ExtrapolatedShapes, part: Partition, header: ExitCondition,
                exits: Dict[Var, Expr], function: Function,
                names: FreshNames) -> Tuple[Contract, List[Contract]]:
    """The call contract (unguarded final state) and the reported contracts:
    the entered one, guarded by the entering condition, and one never-entered
    contract per conjunct."""
    pre = drop_program_vars(part.const_part).star(shapes.p(_anchors(shapes), exits))
    posts = _exit_states(shapes, part, header, exits, names)
    call_contract = final_contract(pre, posts, function, ContractKind.LOOP_SUMMARY)

    guards = header.anchored_guards()
    entered = final_contract(pre.with_pure(*guards), [p.with_pure(*guards) for p in posts],
                             function, ContractKind.LOOP_SUMMARY)
    reported = [entered]
    for x, y in header.conjuncts:
        stop = eq(anchor_of(x), anchored(y))
        untouched = SymbolicHeap.of([stop] + [eq(v, anchor_of(v)) for v in function.outputs])
        reported.append(final_contract(SymbolicHeap.of([stop]), [untouched], function,
                                       ContractKind.LOOP_SUMMARY))
    return call_contract, reported
