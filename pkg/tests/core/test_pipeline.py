from datetime import timedelta

import pytest

from core.errors import AbducerError
from core.guardrails import GuardrailEngine
from core.models import AnalysisStatus, FailureStage, PipelineStage
from core.pipeline import AnalysisPipeline, contract_view
from core.state import SummaryStore
from engine.base import FunctionSummary
from engine.program import analyze_program


def test_guardrail_defaults_and_overrides():
    engine = GuardrailEngine({"max_worlds": 3})
    assert engine.check_world_count(3).passed
    check = engine.check_world_count(4)
    assert not check.passed
    assert check.policy_violated == "max_worlds"
    assert engine.max_block_depth == 2
    assert not engine.check_worklist_steps(engine.config["max_worklist_steps"] + 1).passed


def test_world_limit_fails_the_function(load_program):
    summaries = analyze_program(load_program("nested"), GuardrailEngine({"max_worlds": 1}))
    assert summaries["nested"].failure_stage == FailureStage.WORLD_EXPLOSION


def test_summaries_are_published_once():
    store = SummaryStore()
    store.publish(FunctionSummary("f", AnalysisStatus.ANALYZED))
    with pytest.raises(AbducerError):
        store.publish(FunctionSummary("f", AnalysisStatus.ANALYZED))
    store.publish(FunctionSummary.failed("g", FailureStage.LEARNING, "no world survives"))
    stats = store.get_statistics()
    assert stats["analyzed"] == 1 and stats["failed"] == 1
    assert stats["failure_stages"] == {"learning": 1}
    assert [s.function for s in store.list_summaries(AnalysisStatus.FAILED)] == ["g"]


def test_contract_view_lists_variables(load_program):
    summary = analyze_program(load_program("nested"))["nested"]
    view = contract_view(summary.contracts[0])
    assert "X" in view.vars.anchors and set(view.vars.anchors) <= {"X", "Y", "Z"}
    assert all(name.startswith("l") for name in view.vars.logicals)
    assert view.pre == str(summary.contracts[0].pre)


def test_pipeline_analyzes_a_file(corpus_dir):
    report = AnalysisPipeline().run(str(corpus_dir / "nested.tl"))
    assert report.stage == PipelineStage.COMPLETED
    assert report.all_analyzed
    assert [f.function for f in report.functions] == ["nested"]
    assert [e.stage for e in report.timeline][:3] == ["parse", "lower", "analyze"]


def test_timeline_timestamps_are_utc(corpus_dir):
    report = AnalysisPipeline().run(str(corpus_dir / "nested.tl"))
    assert report.timeline
    for event in report.timeline:
        assert event.timestamp.utcoffset() == timedelta(0)
    for function in report.functions:
        assert all(e.timestamp.tzinfo is not None for e in function.timeline)


def test_pipeline_check_stage(corpus_dir):
    pipeline = AnalysisPipeline(oracle_params={"samples": 30})
    report = pipeline.run(str(corpus_dir / "two_branches.tl"), check=True)
    assert report.stage == PipelineStage.COMPLETED
    assert not report.has_violations
    assert all(f.oracle for f in report.functions)


def test_missing_file_fails(tmp_path):
    report = AnalysisPipeline().run(str(tmp_path / "absent.tl"))
    assert report.stage == PipelineStage.FAILED
    assert report.error


def test_parse_error_fails(tmp_path):
    source = tmp_path / "broken.tl"
    source.write_text("int f(struct node *x) {\n  x = ;\n}\n", encoding="utf-8")
    report = AnalysisPipeline().run(str(source))
    assert report.stage == PipelineStage.FAILED
    assert report.error.startswith("2:")
    assert report.functions == []
