"""Reading the exit condition off a loop function's header."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from core.errors import AnalysisFailure
from core.models import FailureStage
from frontend.statements import Assume, Cond, Edge, Function, Operand, changed_vars
from seplogic.formula import PureAtom, neq
from seplogic.terms import Expr, Var, anchor_of


@dataclass
class ExitCondition:
    """The loop is entered while every `x != Exit(x)` conjunct holds."""
    conjuncts: List[Tuple[Var, Operand]]
    entering: List[Edge] = field(default_factory=list)
    body_entry: int = 0

    @property
    def exit_map(self) -> Dict[Var, Operand]:
        return dict(self.conjuncts)

    def guards(self) -> List[PureAtom]:
        """The entering condition over program variables."""
        return [neq(x, y) for x, y in self.conjuncts]

    def anchored_guards(self) -> List[PureAtom]:
        """The entering condition over the initial values."""
        return [neq(anchor_of(x), anchored(y)) for x, y in self.conjuncts]


def anchored(value: Operand) -> Expr:
    return anchor_of(value) if isinstance(value, Var) else value


def _orient(cond: Cond, written, function: str) -> Tuple[Var, Operand]:
    left, right = cond.left, cond.right
    if isinstance(left, Var) and isinstance(right, Var):
        if left in written and right in written:
            raise AnalysisFailure(
                FailureStage.EXIT_FORM,
                f"both sides of {cond} change inside the loop", function,
            )
        return (right, left) if right in written else (left, right)
    if isinstance(left, Var):
        return left, right
    if isinstance(right, Var):
        return right, left
    raise AnalysisFailure(FailureStage.EXIT_FORM, f"{cond} compares no variable", function)


def exit_condition(function: Function) -> ExitCondition:
    """Collects the chain of entering assumes at the loop header.

    Every conjunct must be an inequality `x != y` where `y` is NULL, an integer
    or a variable the loop never writes.
    """
    cfg = function.cfg
    written = changed_vars(cfg.edges)
    result = ExitCondition([])
    loc = cfg.entry
    while True:
        out = cfg.successors(loc)
        if len(out) != 2 or not all(isinstance(e.stmt, Assume) for e in out):
            break
        leaving = [e for e in out if e.target == cfg.exit]
        if len(leaving) != 1:
            break
        entering = next(e for e in out if e is not leaving[0])
        cond = entering.stmt.cond
        if cond.op != "!=":
            raise AnalysisFailure(
                FailureStage.EXIT_FORM,
                f"loop condition {cond} is not an inequality", function.name,
            )
        x, y = _orient(cond, written, function.name)
        if isinstance(y, Var) and y in written:
            raise AnalysisFailure(
                FailureStage.EXIT_FORM,
                f"exit target {y} changes inside the loop", function.name,
            )
        if x in result.exit_map:
            raise AnalysisFailure(
                FailureStage.EXIT_FORM,
                f"{x} is compared twice in the loop condition", function.name,
            )
        result.conjuncts.append((x, y))
        result.entering.append(entering)
        loc = entering.target
        if loc == cfg.entry:
            break

    if not result.conjuncts:
        raise AnalysisFailure(FailureStage.EXIT_FORM, "loop header has no exit test", function.name)
    result.body_entry = loc
    return result
