"""Soundness oracle: runs functions on bounded models of a contract's
precondition and checks the outcomes against its postconditions."""
from __future__ import annotations

import random
from typing import Dict, List, Optional

from loguru import logger

from biabduction.contracts import Contract
from core.models import OracleReport, OracleViolation
from frontend.statements import Cond, Function, Program
from seplogic.formula import SymbolicHeap
from seplogic.semantics import Configuration, enumerate_models, models
from seplogic.terms import Var, anchor_of
from .execution import DEFAULT_LOOP_BOUND, Interpreter, nondet_pool

DEFAULT_SAMPLES = 200
DEFAULT_MAX_CELLS = 5
MODEL_LIMIT = 4000


def _draw(pre: SymbolicHeap, samples: int, max_cells: int, limit: int,
          rng: random.Random) -> Optional[List[Configuration]]:
    found = enumerate_models(pre, max_cells=max_cells, limit=limit)
    if not found:
        return None
    if len(found) > samples:
        return rng.sample(found, samples)
    return found


def _entry_stack(model: Configuration, params, rng: random.Random) -> Dict[Var, int]:
    """Anchor values for every parameter; anchors the precondition leaves
    open get an arbitrary small value."""
    anchors = model.s
    for param in params:
        anchor = anchor_of(param)
        if anchor not in anchors:
            anchors[anchor] = rng.choice(nondet_pool(model))
    return anchors


def check_contract_soundness(contract: Contract, function: Function, program: Program,
                             samples: int = DEFAULT_SAMPLES,
                             max_cells: int = DEFAULT_MAX_CELLS,
                             loop_bound: int = DEFAULT_LOOP_BOUND,
                             seed: int = 0,
                             model_limit: int = MODEL_LIMIT) -> OracleReport:
    """Executes `function` from sampled models of the precondition.

    A violation is either a run that reaches the error configuration or a
    final configuration satisfying none of the postconditions. Runs cut off
    by the loop bound are counted as inconclusive.
    """
    report = OracleReport(contract=str(contract))
    if samples <= 0:
        report.note = "no samples"
        return report

    rng = random.Random(seed)
    drawn = _draw(contract.pre, samples, max_cells, model_limit, rng)
    if drawn is None:
        report.note = "no models"
        return report

    interpreter = Interpreter(program, loop_bound)
    for model in drawn:
        logicals = _entry_stack(model, function.params, rng)
        entry = Configuration.make(
            {p: logicals[anchor_of(p)] for p in function.params}, model.h)
        outcome = interpreter.run_function(entry, function)
        report.samples += 1
        if outcome.bound_hit:
            report.inconclusive += 1

        if outcome.has_error:
            report.violations.append(OracleViolation(
                kind="err", detail=f"execution fails from {entry}", **model.render()))
            continue
        for final in outcome.finals():
            extended = final.with_stack({**final.s, **logicals})
            if not any(models(extended, post) for post in contract.posts):
                report.violations.append(OracleViolation(
                    kind="post", detail=f"{entry} ends in {final}", **model.render()))
                break

    if report.violations:
        logger.warning(f"[ORACLE] {function.name}: {len(report.violations)} violations "
                       f"in {report.samples} runs of {contract}")
    else:
        logger.debug(f"[ORACLE] {function.name}: {report.samples} runs, "
                     f"{report.inconclusive} inconclusive")
    return report


def check_preservation(state: SymbolicHeap, target: SymbolicHeap, guards: List[Cond],
                       function: Function, program: Program,
                       samples: int = DEFAULT_SAMPLES, max_cells: int = DEFAULT_MAX_CELLS,
                       seed: int = 0) -> OracleReport:
    """Checks on bounded models that one pass through a loop body started in
    `state` (with the loop condition holding) ends in `target`."""
    entered = state.with_pure(*(c.atom() for c in guards))
    report = OracleReport(contract=f"{entered} ~> {target}")
    rng = random.Random(seed)
    drawn = _draw(entered, samples, max_cells, MODEL_LIMIT, rng)
    if drawn is None:
        report.note = "no models"
        return report

    interpreter = Interpreter(program)
    for model in drawn:
        stack = model.s
        # uninitialised program variables read as 0
        for var in function.program_vars():
            stack.setdefault(var, 0)
        fixed = {v: n for v, n in stack.items() if v.is_anchor}
        outcome = interpreter.run_iteration(Configuration.make(stack, model.h), function)
        report.samples += 1
        if outcome.has_error:
            report.violations.append(OracleViolation(kind="err", **model.render()))
            continue
        for final in outcome.finals():
            if not models(final.with_stack({**final.s, **fixed}), target):
                report.violations.append(OracleViolation(
                    kind="post", detail=f"ends in {final}", **model.render()))
                break
    return report
