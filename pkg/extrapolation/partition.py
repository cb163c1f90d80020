"""Splitting the state after one iteration into its constant and transforming parts."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

from loguru import logger

from core.errors import AnalysisFailure
from core.models import FailureStage
from seplogic.formula import SymbolicHeap, eq
from seplogic.ops import logical_binding, remainder, restrict
from seplogic.pure import solver_for
from seplogic.terms import Var, anchor_of


@dataclass
class Partition:
    changed: Tuple[Var, ...]
    unchanged: Tuple[Var, ...]
    const_part: SymbolicHeap
    transf_pre: SymbolicHeap
    transf_curr: SymbolicHeap


def partition(pre: SymbolicHeap, curr: SymbolicHeap, variables: Sequence[Var]) -> Partition:
    """A variable is unchanged when the current state proves it still holds
    its initial value. The constant part is what the unchanged variables
    reach; facts about changed variables never belong to it."""
    solver = solver_for(curr)
    unchanged = tuple(v for v in variables if solver.proves(eq(v, anchor_of(v))))
    changed = tuple(v for v in variables if v not in unchanged)

    reached = restrict(curr, unchanged)
    const_part = SymbolicHeap.of(
        (a for a in reached.pure if not any(v.is_program and v in changed for v in a.vars())),
        reached.spatial,
    )
    result = Partition(
        changed,
        unchanged,
        const_part,
        remainder(pre, const_part),
        remainder(curr, const_part),
    )
    logger.debug(f"partition: changed={list(map(str, changed))} const={const_part}")
    return result


def build_transf_map(curr: SymbolicHeap, part: Partition) -> Dict[Var, Var]:
    """The value each changed variable holds after one iteration."""
    transf = {}
    for var in part.changed:
        value = logical_binding(curr, var)
        if value is None:
            raise AnalysisFailure(FailureStage.TRANSF_MAP, f"no value derivable for {var}")
        transf[var] = value
    return transf
