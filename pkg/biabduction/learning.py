"""Learning for a single analysis state (precondition, current state)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Set

from core.errors import AnalysisFailure
from core.models import FailureStage
from seplogic.formula import SymbolicHeap, eq
from seplogic.ops import normalize
from seplogic.pure import Verdict, satisfiable
from seplogic.terms import FreshNames, Var
from .contracts import Contract
from .solver import BiabSolution, solve


@dataclass
class Learned:
    pre: SymbolicHeap
    posts: List[SymbolicHeap]
    solution: BiabSolution


def forget(frame: SymbolicHeap, changed: Set[Var]) -> SymbolicHeap:
    """Drops the frame's facts about variables the statement overwrites."""
    return SymbolicHeap(
        frozenset(a for a in frame.pure if not (a.vars() & changed)),
        frame.spatial,
    )


def apply_post(solution: BiabSolution, contract: Contract, changed: Set[Var],
               names: FreshNames) -> List[SymbolicHeap]:
    """`post * F` for every postcondition of the contract, infeasible ones removed."""
    frame = forget(solution.frame, changed)
    posts = []
    for post in contract.posts:
        current = normalize(solution.instantiate(post).star(frame), names)
        unbound = [v for v in sorted(changed) if v not in current.vars()]
        if unbound:
            current = current.with_pure(*(eq(v, names.fresh()) for v in unbound))
        if satisfiable(current) == Verdict.UNSAT:
            continue
        posts.append(current)
    return posts


def learn(pre: SymbolicHeap, current: SymbolicHeap, contract: Contract,
          changed: Iterable[Var], names: FreshNames,
          roots: Optional[Iterable[Var]] = None) -> Learned:
    """One learning step: `P * M` becomes the precondition and
    `post * F` the new current states. Fails when `P * M` is not
    satisfiable."""
    solution = solve(current, contract.pre, names, roots)
    new_pre = pre.star(solution.missing)
    if solution.missing.pure or solution.missing.spatial:
        if satisfiable(new_pre) != Verdict.SAT:
            raise AnalysisFailure(
                FailureStage.LEARNING,
                f"learning fails: {new_pre} is not satisfiable",
            )
    posts = apply_post(solution, contract, set(changed), names)
    return Learned(new_pre, posts, solution)
