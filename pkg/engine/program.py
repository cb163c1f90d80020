"""Bottom-up analysis of a whole program."""
from __future__ import annotations

from typing import Dict, Optional

from loguru import logger

from core.guardrails import GuardrailEngine
from core.models import FailureStage
from core.state import SummaryStore
from extrapolation.loop import analyze_loop
from frontend.statements import Function, Program
from .base import FunctionSummary
from .worlds import WorldAnalyzer


def analyze_function(function: Function, summaries: Dict[str, FunctionSummary],
                     guardrails: Optional[GuardrailEngine] = None,
                     shared_learning: bool = True,
                     skip_verification: bool = False) -> FunctionSummary:
    if function.is_loop:
        return analyze_loop(function, summaries, guardrails, skip_verification)
    return WorldAnalyzer(summaries, guardrails, shared_learning=shared_learning).analyze(function)


def analyze_program(program: Program, guardrails: Optional[GuardrailEngine] = None,
                    store: Optional[SummaryStore] = None, shared_learning: bool = True,
                    skip_verification: bool = False) -> Dict[str, FunctionSummary]:
    """Analyzes callees before callers and publishes each summary once."""
    store = store if store is not None else SummaryStore()
    for name in program.call_order:
        function = program.functions[name]
        failed = [c for c in program.callees(name)
                  if store.get(c) is not None and not store.get(c).analyzed]
        if failed:
            summary = FunctionSummary.failed(
                name, FailureStage.CALLEE, f"callee {failed[0]} could not be analyzed")
        else:
            summary = analyze_function(function, store.summaries, guardrails,
                                       shared_learning, skip_verification)
        logger.info(f"[ANALYZE] {name}: {summary.status.value}")
        store.publish(summary)
    return {name: store.get(name) for name in program.call_order}
