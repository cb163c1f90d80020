import time
from pathlib import Path
from typing import Any, Dict, Optional

from loguru import logger

from .errors import AbducerError
from .guardrails import GuardrailEngine
from .models import (
    AnalysisReport,
    AnalysisStatus,
    ContractVars,
    ContractView,
    FunctionReport,
    PipelineStage,
)
from .state import SummaryStore

from biabduction.contracts import Contract
from engine.base import FunctionSummary
from engine.program import analyze_program
from frontend.lower import lower
from frontend.parser import parse
from frontend.statements import Program
from interpreter.oracle import check_contract_soundness
from seplogic.blocks import block_registry


def contract_view(contract: Contract) -> ContractView:
    heaps = [contract.pre] + list(contract.posts)
    variables = {v for h in heaps for v in h.vars()}
    return ContractView(
        pre=str(contract.pre),
        post=[str(p) for p in contract.posts],
        vars=ContractVars(
            anchors=sorted(v.name for v in variables if v.is_anchor),
            logicals=sorted((v.name for v in variables if v.is_logical and not v.is_anchor),
                            key=lambda n: (len(n), n)),
        ),
    )


def function_report(summary: FunctionSummary) -> FunctionReport:
    report = FunctionReport(
        function=summary.function,
        status=summary.status,
        contracts=[contract_view(c) for c in summary.contracts],
        diagnostics=list(summary.diagnostics),
        failure_stage=summary.failure_stage,
        iterations=summary.iterations,
        certificates=list(summary.certificates),
    )
    report.add_timeline_event("analyze", summary.status.value, {
        "contracts": len(summary.contracts),
    })
    return report


class AnalysisPipeline:
    """parse -> lower -> analyze -> (check) for one source file."""

    def __init__(self, guardrail_config: Optional[Dict[str, Any]] = None,
                 oracle_params: Optional[Dict[str, Any]] = None,
                 shared_learning: bool = True, skip_verification: bool = False):
        self.guardrails = GuardrailEngine(guardrail_config)
        self.oracle_params = {"samples": 200, "max_cells": 5, "loop_bound": 8, "seed": 0}
        if oracle_params:
            self.oracle_params.update(oracle_params)
        self.shared_learning = shared_learning
        self.skip_verification = skip_verification
        self.store = SummaryStore()

    def run(self, path: str, check: bool = False) -> AnalysisReport:
        started = time.time()
        report = AnalysisReport(path=str(path))
        context: Dict[str, Any] = {"path": Path(path)}

        # block ids are numbered per file
        block_registry.reset()
        block_registry.max_depth = self.guardrails.max_block_depth
        self.store = SummaryStore()

        try:
            self._run_parse(report, context)
            self._run_lower(report, context)
            self._run_analysis(report, context)
            if check:
                self._run_check(report, context)
            report.stage = PipelineStage.COMPLETED
            report.add_timeline_event("completed", "pipeline completed", {
                "seconds": round(time.time() - started, 3),
                **self.store.get_statistics(),
            })
        except (AbducerError, OSError) as e:
            logger.error(f"{path}: {e}")
            report.stage = PipelineStage.FAILED
            report.error = str(e)
            report.add_timeline_event("failed", f"pipeline failed: {e}")
        return report

    def _run_parse(self, report: AnalysisReport, context: Dict[str, Any]):
        logger.info(f"[PARSE] {context['path']}")
        report.stage = PipelineStage.PARSE

        text = context["path"].read_text(encoding="utf-8")
        context["source"] = parse(text)

        report.add_timeline_event("parse", "parsed", {
            "functions": len(context["source"].functions),
        })

    def _run_lower(self, report: AnalysisReport, context: Dict[str, Any]):
        logger.info("[LOWER] flattening and extracting loops")
        report.stage = PipelineStage.LOWER

        program: Program = lower(context["source"])
        context["program"] = program

        report.add_timeline_event("lower", "lowered", {
            "functions": len(program.functions),
            "loops": sum(1 for f in program.functions.values() if f.is_loop),
            "order": list(program.call_order),
        })

    def _run_analysis(self, report: AnalysisReport, context: Dict[str, Any]):
        logger.info("[ANALYZE] bottom-up over the call graph")
        report.stage = PipelineStage.ANALYZE

        summaries = analyze_program(context["program"], self.guardrails, self.store,
                                    self.shared_learning, self.skip_verification)
        report.functions = [function_report(s) for s in summaries.values()]

        stats = self.store.get_statistics()
        report.add_timeline_event("analyze", f"{stats['analyzed']}/{stats['total_functions']} analyzed",
                                  stats)

    def _run_check(self, report: AnalysisReport, context: Dict[str, Any]):
        params = self.oracle_params
        logger.info(f"[CHECK] samples={params['samples']} max_cells={params['max_cells']} "
                    f"loop_bound={params['loop_bound']} seed={params['seed']}")
        report.stage = PipelineStage.CHECK

        program: Program = context["program"]
        for entry in report.functions:
            if entry.status != AnalysisStatus.ANALYZED:
                continue
            summary = self.store.get(entry.function)
            function = program.functions[entry.function]
            for contract in summary.contracts:
                oracle = check_contract_soundness(
                    contract, function, program,
                    samples=params["samples"],
                    max_cells=params["max_cells"],
                    loop_bound=params["loop_bound"],
                    seed=params["seed"],
                    model_limit=self.guardrails.max_enumerated_models,
                )
                entry.oracle.append(oracle)
            violations = sum(len(r.violations) for r in entry.oracle)
            entry.add_timeline_event("check", f"{violations} violations", {
                "inconclusive": sum(r.inconclusive for r in entry.oracle),
            })

        report.add_timeline_event("check", "oracle finished", {
            "violations": sum(len(r.violations) for f in report.functions for r in f.oracle),
        })
