"""Command-line entry point for abducer."""
import argparse
import json
import os
import sys
from pathlib import Path
from typing import List, Optional

import yaml
from dotenv import load_dotenv
from loguru import logger

from core.models import AnalysisReport, AnalysisStatus, CorpusReport, CorpusRow, PipelineStage
from core.pipeline import AnalysisPipeline

# Load environment variables from .env file
load_dotenv()

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_UNSOUND = 3

EXPECTATIONS_FILE = "expectations.yaml"


def configure_logging(verbose: int):
    level = "WARNING" if verbose <= 0 else "INFO" if verbose == 1 else "DEBUG"
    logger.remove()
    logger.add(sys.stderr, level=level, format="[{level}] {message}")


def make_pipeline(args) -> AnalysisPipeline:
    guardrails = {}
    if args.max_worlds is not None:
        guardrails["max_worlds"] = args.max_worlds
    return AnalysisPipeline(
        guardrail_config=guardrails,
        oracle_params={
            "samples": args.samples,
            "max_cells": args.max_cells,
            "loop_bound": args.loop_bound,
            "seed": args.seed,
        },
        shared_learning=not args.disable_shared_learning,
        skip_verification=args.skip_verification,
    )


def render_text(report: AnalysisReport) -> str:
    if report.stage == PipelineStage.FAILED:
        return f"{report.path}: error: {report.error}"
    lines = []
    for f in report.functions:
        lines.append(f"{f.function}: {f.status.value}")
        for c in f.contracts:
            lines.append(f"  pre:  {c.pre}")
            for post in c.post:
                lines.append(f"  post: {post}")
        for d in f.diagnostics:
            lines.append(f"  ! {d}")
        for r in f.oracle:
            verdict = r.note or ("ok" if r.passed else f"{len(r.violations)} violations")
            lines.append(f"  oracle: {verdict} ({r.samples} runs, {r.inconclusive} inconclusive)")
    return "\n".join(lines)


def emit(report: AnalysisReport, fmt: str):
    if fmt == "json":
        print(json.dumps(report.to_json_payload(), indent=2))
    else:
        print(render_text(report))


def cmd_analyze(args) -> int:
    report = make_pipeline(args).run(args.path)
    emit(report, args.format)
    if report.stage == PipelineStage.FAILED:
        print(f"error: {report.error}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK if report.all_analyzed else EXIT_FAILED


def cmd_check(args) -> int:
    report = make_pipeline(args).run(args.path, check=True)
    emit(report, args.format)
    if report.stage == PipelineStage.FAILED:
        print(f"error: {report.error}", file=sys.stderr)
        return EXIT_INPUT
    if report.has_violations:
        return EXIT_UNSOUND
    if not any(f.status == AnalysisStatus.ANALYZED for f in report.functions):
        return EXIT_FAILED
    return EXIT_OK


def corpus_row(path: Path, expectation: dict, report: AnalysisReport) -> CorpusRow:
    failed = [f for f in report.functions if f.status == AnalysisStatus.FAILED]
    stage = None
    if report.stage == PipelineStage.FAILED:
        stage = "input"
    elif failed:
        stage = failed[0].failure_stage.value if failed[0].failure_stage else None
    return CorpusRow(
        file=path.name,
        expected=expectation.get("expected", "pass"),
        actual="fail" if stage else "pass",
        stage=stage,
        expected_stage=expectation.get("stage"),
        iterations=[f.iterations for f in report.functions if f.iterations is not None],
        violations=sum(len(r.violations) for f in report.functions for r in f.oracle),
    )


def run_corpus(directory: Path, pipeline: AnalysisPipeline) -> CorpusReport:
    sidecar = directory / EXPECTATIONS_FILE
    expectations = {}
    if sidecar.exists():
        expectations = yaml.safe_load(sidecar.read_text(encoding="utf-8")) or {}

    corpus = CorpusReport()
    for path in sorted(directory.glob("*.tl")):
        report = pipeline.run(str(path), check=True)
        row = corpus_row(path, expectations.get(path.stem, {}), report)
        logger.info(f"[CORPUS] {row.file}: {row.actual} (expected {row.expected})")
        corpus.rows.append(row)
    return corpus


def render_corpus(corpus: CorpusReport) -> str:
    lines = [f"{'file':<20} {'expected':<9} {'result':<7} {'iterations':<11} note"]
    for row in corpus.rows:
        mark = "✓" if row.actual == "pass" else "×"
        note = row.stage or ""
        if row.violations:
            note = f"{row.violations} oracle violations"
        if not row.matches:
            note = f"MISMATCH {note}".strip()
        iterations = ",".join(map(str, row.iterations)) or "-"
        lines.append(f"{row.file:<20} {row.expected:<9} {mark:<7} {iterations:<11} {note}")
    return "\n".join(lines)


def cmd_corpus(args) -> int:
    directory = Path(args.path)
    if not directory.is_dir():
        print(f"error: {directory} is not a directory", file=sys.stderr)
        return EXIT_INPUT
    corpus = run_corpus(directory, make_pipeline(args))
    if args.format == "json":
        print(json.dumps([r.model_dump() for r in corpus.rows], indent=2))
    else:
        print(render_corpus(corpus))
    return EXIT_FAILED if corpus.mismatches else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abducer",
        description="Biabduction-based shape analysis with worlds and shape extrapolation",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "json"], default="text")
    common.add_argument("--verbose", type=int, default=0, help="0 warnings, 1 stages, 2 steps")
    common.add_argument("--seed", type=int, default=int(os.getenv("ABDUCER_SEED", "0")))
    common.add_argument("--samples", type=int, default=200)
    common.add_argument("--max-cells", type=int, default=5)
    common.add_argument("--loop-bound", type=int, default=8)
    common.add_argument("--max-worlds", type=int, default=None)
    common.add_argument("--disable-shared-learning", action="store_true",
                        help="learned antiframes only reach the learning post")
    common.add_argument("--skip-verification", action="store_true",
                        help="trust extrapolated invariants without re-checking them")

    commands = parser.add_subparsers(dest="command", required=True)
    analyze = commands.add_parser("analyze", parents=[common], help="infer contracts")
    analyze.add_argument("path")
    analyze.set_defaults(handler=cmd_analyze)

    check = commands.add_parser("check", parents=[common],
                                help="infer contracts and test them by execution")
    check.add_argument("path")
    check.set_defaults(handler=cmd_check)

    corpus = commands.add_parser("corpus", parents=[common],
                                 help="run a directory of programs against expectations")
    corpus.add_argument("path", nargs="?", default="corpus")
    corpus.set_defaults(handler=cmd_corpus)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
