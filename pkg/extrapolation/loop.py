"""Analysis of loop functions by shape extrapolation.

One symbolic iteration of the body yields the footprint of a single
iteration; its shape is extrapolated to any number of iterations and the
resulting invariant is confirmed by a second iteration that may not learn.
"""
from __future__ import annotations

from typing import Dict, List, Optional, Tuple

from loguru import logger

from core.errors import AnalysisFailure
from core.guardrails import GuardrailEngine
from core.models import AnalysisStatus, FailureStage
from engine.base import BaseAnalyzer, FunctionSummary
from engine.world import ITERATION_END, World
from engine.worlds import WorldAnalyzer
from frontend.statements import Function
from seplogic.entailment import entails
from seplogic.formula import SymbolicHeap, eq
from seplogic.ops import normalize
from seplogic.terms import FreshNames, anchor_of
from .exit_condition import ExitCondition, exit_condition
from .invariant import InvariantState, build_final, build_invariant
from .partition import build_transf_map, partition
from .shapes import check_conditions, exit_values, shape_extrapolate


def _iteration_ends(worlds: List[World]) -> List[Tuple[SymbolicHeap, SymbolicHeap]]:
    return [(w.pre, p.heap) for w in worlds for p in w.posts if p.loc == ITERATION_END]


def first_iteration(function: Function, header: ExitCondition,
                    summaries: Dict[str, FunctionSummary], guardrails: GuardrailEngine,
                    names: FreshNames) -> Tuple[SymbolicHeap, SymbolicHeap]:
    """Runs the body once from `(true, x = X ...)` with the entering
    condition in the precondition."""
    start = SymbolicHeap.of([eq(v, anchor_of(v)) for v in function.program_vars()])
    pre = SymbolicHeap.of(header.anchored_guards())
    curr = normalize(start.with_pure(*header.guards()), names)
    if header.body_entry == function.cfg.entry:
        return pre, curr

    analyzer = WorldAnalyzer(summaries, guardrails, names=names)
    world = World(pre)
    world.add_post(header.body_entry, curr)
    worlds = analyzer.run(function, [world], stop_at_header=True)
    if analyzer.failures:
        raise analyzer.failures[0]
    ends = _iteration_ends(worlds)
    if len(ends) != 1:
        raise AnalysisFailure(
            FailureStage.TRANSF_MAP,
            f"one iteration ends in {len(ends)} states; the body must have a single path",
            function.name,
        )
    return ends[0]


def verification_iteration(inv: InvariantState, function: Function, header: ExitCondition,
                           summaries: Dict[str, FunctionSummary], guardrails: GuardrailEngine,
                           names: FreshNames):
    """Runs the body once from the invariant without learning and checks
    that every resulting state implies the invariant again."""
    curr = normalize(inv.curr.with_pure(*header.guards()), names)
    if header.body_entry == function.cfg.entry:
        ends = [(inv.pre, curr)]
    else:
        analyzer = WorldAnalyzer(summaries, guardrails, learning=False, names=names)
        world = World(inv.pre)
        world.add_post(header.body_entry, curr)
        worlds = analyzer.run(function, [world], stop_at_header=True)
        if analyzer.failures:
            failure = analyzer.failures[0]
            raise AnalysisFailure(FailureStage.VERIFICATION, failure.message, function.name)
        ends = _iteration_ends(worlds)
    if not ends:
        raise AnalysisFailure(FailureStage.VERIFICATION, "no iteration completes", function.name)

    target = inv.generalized(names)
    for _, state in ends:
        result = entails(state, target)
        if not result.proved:
            raise AnalysisFailure(
                FailureStage.VERIFICATION,
                f"{state} does not imply the invariant {target}: {result.reason}",
                function.name,
            )


class LoopAnalyzer(BaseAnalyzer):
    """Extrapolation-based analysis of one loop function."""

    def __init__(self, summaries: Dict[str, FunctionSummary],
                 guardrails: Optional[GuardrailEngine] = None,
                 skip_verification: bool = False,
                 names: Optional[FreshNames] = None):
        super().__init__("LOOP", summaries, guardrails, names)
        self.skip_verification = skip_verification

    def analyze(self, function: Function) -> FunctionSummary:
        logger.info(f"[{self.name}] analyzing {function.name}")
        iterations = 0
        certificates = []
        try:
            header = exit_condition(function)
            pre, curr = first_iteration(function, header, self.summaries, self.guardrails, self.names)
            iterations += 1
            logger.debug(f"[{self.name}] after one iteration: {pre} ~> {curr}")

            part = partition(pre, curr, function.program_vars())
            transf = build_transf_map(curr, part)
            shapes = shape_extrapolate(part, transf, self.names)
            exits = exit_values(shapes, header, self.names)
            certificates = check_conditions(shapes, part, transf, header, exits)
            inv = build_invariant(shapes, part, exits, self.names)
            logger.debug(f"[{self.name}] invariant: {inv.pre} ~> {inv.curr}")

            if self.skip_verification:
                logger.warning(f"[{self.name}] {function.name}: invariant not verified")
            else:
                verification_iteration(inv, function, header, self.summaries,
                                       self.guardrails, self.names)
                iterations += 1
            call_contract, reported = build_final(shapes, part, header, exits, function, self.names)
        except AnalysisFailure as failure:
            logger.info(f"[{self.name}] {function.name} failed at {failure.stage.value}: {failure.message}")
            summary = FunctionSummary.failed(function.name, failure.stage, failure.message)
            summary.iterations = iterations
            summary.certificates = certificates
            return summary

        return FunctionSummary(
            function.name,
            AnalysisStatus.ANALYZED,
            params=function.params,
            contracts=reported,
            call_contracts=[call_contract],
            iterations=iterations,
            certificates=certificates,
        )


def analyze_loop(function: Function, summaries: Dict[str, FunctionSummary],
                 guardrails: Optional[GuardrailEngine] = None,
                 skip_verification: bool = False) -> FunctionSummary:
    return LoopAnalyzer(summaries, guardrails, skip_verification).analyze(function)
