from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

from loguru import logger

from biabduction.contracts import Contract
from core.guardrails import GuardrailEngine
from core.models import AnalysisStatus, ConditionCertificate, ContractKind, FailureStage
from frontend.statements import Function
from seplogic.formula import SymbolicHeap
from seplogic.ops import (
    canonical_rename, drop_program_vars, eliminate_equalities, eliminate_shared_equalities, gc,
)
from seplogic.terms import FreshNames, Var, anchor_of


@dataclass
class FunctionSummary:
    """What the analysis learned about one function.

    `contracts` are the reported contracts; `call_contracts` are the ones
    applied at call sites (they differ only for loop functions).
    """
    function: str
    status: AnalysisStatus
    params: Sequence[Var] = ()
    contracts: List[Contract] = field(default_factory=list)
    call_contracts: List[Contract] = field(default_factory=list)
    diagnostics: List[str] = field(default_factory=list)
    failure_stage: Optional[FailureStage] = None
    iterations: Optional[int] = None
    certificates: List[ConditionCertificate] = field(default_factory=list)

    @property
    def analyzed(self) -> bool:
        return self.status == AnalysisStatus.ANALYZED

    @staticmethod
    def failed(function: str, stage: FailureStage, message: str,
               diagnostics: Iterable[str] = ()) -> "FunctionSummary":
        return FunctionSummary(
            function,
            AnalysisStatus.FAILED,
            diagnostics=list(diagnostics) + [f"{stage.value}: {message}"],
            failure_stage=stage,
        )


def final_contract(pre: SymbolicHeap, posts: Sequence[SymbolicHeap], function: Function,
                   kind: ContractKind = ContractKind.FUNCTION) -> Contract:
    """Brings a (pre, exit posts) pair into reported form: only output
    bindings survive in posts, redundant equalities and lonely existentials
    are removed, and logical variables are renamed canonically."""
    anchors = {anchor_of(p) for p in function.params}
    pre = drop_program_vars(pre)
    pre, posts = eliminate_shared_equalities(pre.drop_trivial(), posts)
    rigid = set(pre.vars()) | anchors
    cleaned: Dict[str, SymbolicHeap] = {}
    for post in posts:
        heap = drop_program_vars(post, keep=function.outputs)
        heap = eliminate_equalities(heap, rigid)
        heap = gc(heap, rigid).drop_trivial()
        cleaned.setdefault(str(heap), heap)
    pre = gc(pre, anchors | {v for h in cleaned.values() for v in h.vars()})
    renamed = canonical_rename([pre] + list(cleaned.values()))
    return Contract(renamed[0], tuple(renamed[1:]), kind, tuple(function.params))


class BaseAnalyzer(ABC):
    """Common state of the per-function analyzers."""

    def __init__(self, name: str, summaries: Dict[str, FunctionSummary],
                 guardrails: Optional[GuardrailEngine] = None,
                 names: Optional[FreshNames] = None):
        self.name = name
        self.summaries = summaries
        self.guardrails = guardrails or GuardrailEngine()
        self.names = names or FreshNames()

    @abstractmethod
    def analyze(self, function: Function) -> FunctionSummary:
        pass

    def callee(self, name: str) -> FunctionSummary:
        summary = self.summaries.get(name)
        if summary is None:
            logger.warning(f"[{self.name}] no summary for {name}")
            return FunctionSummary.failed(name, FailureStage.CALLEE, "not analyzed")
        return summary
