"""Concrete execution of statements, traces and whole functions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Set

from loguru import logger

from frontend.statements import (
    Assert,
    Assign,
    Assume,
    Call,
    Cond,
    Edge,
    Function,
    Load,
    LoopCall,
    Nondet,
    Program,
    Return,
    Statement,
    Store,
)
from seplogic.semantics import ERR, LOCATIONS, Configuration, holds
from seplogic.terms import Expr, Var, evaluate, expr_var_set

DEFAULT_LOOP_BOUND = 8
NONDET_VALUES = (0, 1, 2)


@dataclass
class Outcome:
    """Configurations a step may end in. `bound_hit` records that some path
    was cut off by the loop bound, so the set is incomplete."""
    configurations: Set[Configuration] = field(default_factory=set)
    bound_hit: bool = False

    @staticmethod
    def of(*configurations: Configuration) -> "Outcome":
        return Outcome(set(configurations))

    def merge(self, other: "Outcome"):
        self.configurations |= other.configurations
        self.bound_hit = self.bound_hit or other.bound_hit

    @property
    def has_error(self) -> bool:
        return ERR in self.configurations

    def finals(self) -> List[Configuration]:
        return sorted((c for c in self.configurations if not c.error), key=str)

    def __len__(self) -> int:
        return len(self.configurations)


def _value(expr: Expr, stack: Dict[Var, int]) -> int:
    # uninitialised variables read as 0
    env = {v: stack.get(v, 0) for v in expr_var_set(expr)}
    return evaluate(expr, env)


def _holds(cond: Cond, stack: Dict[Var, int]) -> bool:
    env = {v: stack.get(v, 0) for v in cond.vars()}
    return bool(holds(cond.atom(), env))


def nondet_pool(conf: Configuration) -> List[int]:
    """0, 1, 2 and the lowest location not yet in use."""
    used = conf.footprint()
    fresh = [loc for loc in LOCATIONS if loc not in used][:1]
    return list(NONDET_VALUES) + fresh


class Interpreter:
    """Reference semantics of the flattened language.

    Calls run the callee's CFG on a fresh stack holding only its
    parameters; the heap is shared.
    """

    def __init__(self, program: Optional[Program] = None, loop_bound: int = DEFAULT_LOOP_BOUND):
        self.program = program or Program()
        self.loop_bound = loop_bound

    def exec_stmt(self, conf: Configuration, stmt: Statement) -> Outcome:
        if conf.error:
            return Outcome.of(ERR)
        stack, heap = conf.s, conf.h

        if isinstance(stmt, Assign):
            if isinstance(stmt.expr, Nondet):
                return Outcome({Configuration.make({**stack, stmt.target: v}, heap)
                                for v in nondet_pool(conf)})
            stack[stmt.target] = _value(stmt.expr, stack)
            return Outcome.of(Configuration.make(stack, heap))

        if isinstance(stmt, Load):
            cell = (stack.get(stmt.source, 0), stmt.field)
            if cell not in heap:
                return Outcome.of(ERR)
            stack[stmt.target] = heap[cell]
            return Outcome.of(Configuration.make(stack, heap))

        if isinstance(stmt, Store):
            cell = (stack.get(stmt.target, 0), stmt.field)
            if cell not in heap:
                return Outcome.of(ERR)
            heap[cell] = _value(stmt.value, stack)
            return Outcome.of(Configuration.make(stack, heap))

        if isinstance(stmt, Return):
            stack[stmt.target] = _value(stmt.value, stack)
            return Outcome.of(Configuration.make(stack, heap))

        if isinstance(stmt, Assume):
            return Outcome.of(conf) if _holds(stmt.cond, stack) else Outcome()

        if isinstance(stmt, Assert):
            return Outcome.of(conf) if _holds(stmt.cond, stack) else Outcome.of(ERR)

        if isinstance(stmt, (Call, LoopCall)):
            return self._call(conf, stmt)

        raise TypeError(f"cannot execute {stmt}")

    def _call(self, conf: Configuration, stmt) -> Outcome:
        callee = self.program.function(stmt.callee)
        if callee is None:
            raise KeyError(f"unknown function {stmt.callee}")
        stack = conf.s
        entry = Configuration.make(
            {p: stack.get(a, 0) for p, a in zip(callee.params, stmt.args)}, conf.h)
        result = self.run_function(entry, callee)

        outcome = Outcome(bound_hit=result.bound_hit)
        for final in result.configurations:
            if final.error:
                outcome.configurations.add(ERR)
                continue
            after = dict(stack)
            if isinstance(stmt, Call):
                after[stmt.target] = final.s.get(callee.result, 0)
            else:
                after.update({v: final.s.get(v, 0) for v in stmt.outputs})
            outcome.configurations.add(Configuration.make(after, final.h))
        return outcome

    def exec_trace(self, conf: Configuration, trace: Iterable[Statement]) -> Outcome:
        """Executes the statements in order; the empty trace is the identity."""
        current = Outcome.of(conf)
        for stmt in trace:
            following = Outcome(bound_hit=current.bound_hit)
            for c in current.configurations:
                following.merge(self.exec_stmt(c, stmt))
            current = following
        return current

    def run_function(self, conf: Configuration, function: Function) -> Outcome:
        """All configurations reached at the exit along paths that take each
        back edge at most `loop_bound` times; error configurations included."""
        cfg = function.cfg
        back = {(e.source, e.target, e.stmt) for e in cfg.back_edges()}
        outcome = Outcome()
        # (location, configuration, back-edge uses)
        stack = [(cfg.entry, conf, ())]
        while stack:
            loc, current, used = stack.pop()
            if current.error:
                outcome.configurations.add(ERR)
                continue
            if loc == cfg.exit:
                outcome.configurations.add(current)
                continue
            for edge in cfg.successors(loc):
                counts = used
                if (edge.source, edge.target, edge.stmt) in back:
                    counts = _bump(used, edge)
                    if dict(counts)[_key(edge)] > self.loop_bound:
                        outcome.bound_hit = True
                        continue
                step = self.exec_stmt(current, edge.stmt)
                outcome.bound_hit = outcome.bound_hit or step.bound_hit
                for following in step.configurations:
                    stack.append((edge.target, following, counts))
        if outcome.bound_hit:
            logger.debug(f"{function.name}: loop bound {self.loop_bound} reached")
        return outcome

    def run_iteration(self, conf: Configuration, function: Function) -> Outcome:
        """Configurations back at the header after one pass through the body
        of a loop function; paths that leave the loop are dropped."""
        cfg = function.cfg
        outcome = Outcome()
        stack = [(cfg.entry, conf)]
        while stack:
            loc, current = stack.pop()
            for edge in cfg.successors(loc):
                for following in self.exec_stmt(current, edge.stmt).configurations:
                    if following.error:
                        outcome.configurations.add(ERR)
                    elif edge.target == cfg.entry:
                        outcome.configurations.add(following)
                    elif edge.target != cfg.exit:
                        stack.append((edge.target, following))
        return outcome


def _key(edge: Edge):
    return edge.source, edge.target


def _bump(used, edge: Edge):
    counts = dict(used)
    counts[_key(edge)] = counts.get(_key(edge), 0) + 1
    return tuple(sorted(counts.items()))
