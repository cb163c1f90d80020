"""Biabduction: the missing part and the frame of a demand against a state."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional

from loguru import logger

from core.errors import AnalysisFailure
from core.models import FailureStage
from seplogic.entailment import SpatialMatcher, entails, representatives
from seplogic.formula import SymbolicHeap
from seplogic.ops import reach_set
from seplogic.pure import Verdict, satisfiable
from seplogic.terms import Expr, FreshNames, Var, substitute_expr


@dataclass
class BiabSolution:
    """`Q * missing |- demand[substitution] * frame`."""
    missing: SymbolicHeap
    frame: SymbolicHeap
    substitution: Dict[Var, Expr] = field(default_factory=dict)

    def instantiate(self, heap: SymbolicHeap) -> SymbolicHeap:
        """Applies the instantiation found for the demand's local variables."""
        mapping = {}
        for var in heap.logical_vars():
            value = var
            while isinstance(value, Var) and value in self.substitution:
                value = self.substitution[value]
            if value != var:
                mapping[var] = substitute_expr(value, self.substitution)
        return heap.substitute(mapping)

    def certify(self, state: SymbolicHeap, demand: SymbolicHeap) -> bool:
        """Re-checks the defining entailment with the prover."""
        left = state.star(self.missing)
        right = self.instantiate(demand).star(self.frame.spatial_only())
        return entails(left, right).proved


def solve(state: SymbolicHeap, demand: SymbolicHeap, names: FreshNames,
          roots: Optional[Iterable[Var]] = None) -> BiabSolution:
    """Finds a missing part and a frame for `state` against `demand`, checked
    by the prover before it is returned.

    Logical variables of `demand` that do not occur in `state` are local to
    the demand and get instantiated. With `roots`, every variable of the
    missing part must be reachable from them.
    """
    local = {v for v in demand.logical_vars() if v not in state.vars()}
    matcher = SpatialMatcher(state, local, names, abduce=True, prefer=roots or ())
    if matcher.solver.unsat:
        raise AnalysisFailure(FailureStage.LEARNING, f"state is contradictory: {state}")
    result = matcher.run(demand)
    if result.stuck:
        raise AnalysisFailure(FailureStage.LEARNING, f"cannot match {demand}: {result.reason}")

    missing = representatives(matcher, result.missing)
    if missing.program_vars():
        raise AnalysisFailure(
            FailureStage.LEARNING,
            f"missing part mentions program variables: {missing}",
        )
    if roots is not None and (missing.pure or missing.spatial):
        reached = reach_set(state.star(missing), roots)
        stray = sorted(v for v in missing.vars() if v not in reached)
        if stray:
            raise AnalysisFailure(
                FailureStage.LEARNING,
                f"missing part {missing} mentions {', '.join(map(str, stray))}, "
                f"which is not reachable from the function inputs",
            )
    if missing.pure or missing.spatial:
        if satisfiable(state.star(missing)) != Verdict.SAT:
            raise AnalysisFailure(FailureStage.LEARNING, f"missing part {missing} contradicts {state}")

    solution = BiabSolution(missing, result.frame, dict(result.substitution))
    if not solution.certify(state, demand):
        raise AnalysisFailure(
            FailureStage.LEARNING,
            f"cannot certify {state} * {missing} |- {demand} * {result.frame.spatial_only()}",
        )
    logger.debug(f"biabduction: M = {missing} F = {result.frame}")
    return solution
