"""Single-phase analysis with worlds.

Each world holds one candidate precondition shared by all of its current
states. Learning extends the shared precondition and every state at once;
branches whose condition is fixed by the function inputs split the world.
"""
from __future__ import annotations

from enum import Enum
from typing import Dict, Iterable, List, Optional, Set, Tuple

from loguru import logger

from biabduction.contracts import Contract, atomic_contract, instantiate_call
from biabduction.learning import apply_post
from biabduction.solver import BiabSolution, solve
from core.errors import AnalysisFailure
from core.guardrails import GuardrailEngine
from core.models import AnalysisStatus, FailureStage
from frontend.statements import Assume, Call, Cond, Edge, Function, LoopCall, written_vars
from seplogic.entailment import entails
from seplogic.formula import PureAtom, SymbolicHeap
from seplogic.ops import normalize, reach_set
from seplogic.pure import Verdict, satisfiable, solver_for
from seplogic.terms import FreshNames, Var, anchor_of, return_var
from .base import BaseAnalyzer, FunctionSummary, final_contract
from .world import ITERATION_END, Post, World, initial_world


class Classification(str, Enum):
    AS_ASSERT = "assume-as-assert"
    AS_ASSUME = "assume-as-assume"


def anchored_condition(current: SymbolicHeap, cond: Cond, pre_vars: Iterable[Var]) -> PureAtom:
    """`cond` with program variables replaced by their values in `current`,
    preferring anchors, then variables of the precondition."""
    solver = solver_for(current)
    known = set(pre_vars)
    mapping = {}
    for var in cond.vars():
        members = [m for m in solver.members(var) if not m.is_program]
        if not members:
            continue
        mapping[var] = min(members, key=lambda m: (0 if m.is_anchor else 1 if m in known else 2,
                                                   m.name))
    return cond.atom().substitute(mapping)


def classify_assume(world: World, post: Post, cond: Cond,
                    roots: Iterable[Var]) -> Tuple[Classification, PureAtom]:
    """Assume-as-assert when the condition only talks about values reachable
    from the function inputs, assume-as-assume otherwise."""
    atom = anchored_condition(post.heap, cond, world.pre.vars())
    # equalities with constants in `atom` must not make its own variables reachable
    reached = reach_set(world.pre, roots)
    if atom.vars() <= reached:
        return Classification.AS_ASSERT, atom
    return Classification.AS_ASSUME, atom


class WorldAnalyzer(BaseAnalyzer):
    """Worklist analysis of one function over a set of worlds.

    With `learning` off any nonempty missing part fails the run; with
    `shared_learning` off learned parts reach only the precondition and the
    learning post.
    """

    def __init__(self, summaries: Dict[str, FunctionSummary],
                 guardrails: Optional[GuardrailEngine] = None,
                 shared_learning: bool = True, learning: bool = True,
                 names: Optional[FreshNames] = None):
        super().__init__("WORLDS", summaries, guardrails, names)
        self.shared_learning = shared_learning
        self.learning = learning
        self.diagnostics: List[str] = []
        self.failures: List[AnalysisFailure] = []
        self._next_index = 0

    # -- entry points -------------------------------------------------------

    def analyze(self, function: Function) -> FunctionSummary:
        """Analyzes a loop-free function from its initial world."""
        logger.info(f"[{self.name}] analyzing {function.name}")
        self.diagnostics, self.failures = [], []
        try:
            worlds = self.run(function, [initial_world(function.program_vars(), function.cfg.entry)])
        except AnalysisFailure as failure:
            return FunctionSummary.failed(function.name, failure.stage, failure.message,
                                          self.diagnostics)
        return self.summarize(function, worlds)

    def summarize(self, function: Function, worlds: List[World]) -> FunctionSummary:
        contracts: List[Contract] = []
        for world in worlds:
            exits = world.exit_posts(function.cfg.exit)
            if not exits:
                self.diagnostics.append(f"world#{world.index} never reaches the exit")
                continue
            contracts.append(final_contract(world.pre, exits, function))
        if not contracts:
            failure = self.failures[-1] if self.failures else AnalysisFailure(
                FailureStage.LEARNING, "no world survives")
            return FunctionSummary.failed(function.name, failure.stage, failure.message,
                                          self.diagnostics)
        logger.info(f"[{self.name}] {function.name}: {len(contracts)} contracts")
        return FunctionSummary(
            function.name,
            AnalysisStatus.ANALYZED,
            params=function.params,
            contracts=contracts,
            call_contracts=contracts,
            diagnostics=list(self.diagnostics),
        )

    def run(self, function: Function, worlds: List[World],
            stop_at_header: bool = False) -> List[World]:
        """Drives every world to quiescence. With `stop_at_header`, edges back
        to the entry end in ITERATION_END instead."""
        roots = {anchor_of(p) for p in function.params}
        for world in worlds:
            world.index = self._new_index()
        live = list(worlds)
        steps = 0
        while True:
            item = self._next(live)
            if item is None:
                return live
            world, post = item
            steps += 1
            check = self.guardrails.check_worklist_steps(steps)
            if not check.passed:
                raise AnalysisFailure(FailureStage.WORLD_EXPLOSION, check.reason, function.name)

            post.done = True
            edges = self._edges(function, post.loc, stop_at_header)
            try:
                produced = self.step(function, world, post, edges, roots)
            except AnalysisFailure as failure:
                logger.debug(f"world#{world.index} fails: {failure}")
                self.diagnostics.append(f"world#{world.index}: {failure}")
                self.failures.append(failure)
                produced = []
            live.remove(world)
            live.extend(produced)
            live.sort(key=lambda w: w.index)

            check = self.guardrails.check_world_count(len(live))
            if not check.passed:
                raise AnalysisFailure(FailureStage.WORLD_EXPLOSION, check.reason, function.name)

    # -- worklist -----------------------------------------------------------

    def _new_index(self) -> int:
        index = self._next_index
        self._next_index += 1
        return index

    @staticmethod
    def _next(live: List[World]) -> Optional[Tuple[World, Post]]:
        for world in sorted(live, key=lambda w: w.index):
            pending = world.pending()
            if pending:
                return world, pending[0]
        return None

    @staticmethod
    def _edges(function: Function, loc: int, stop_at_header: bool) -> List[Edge]:
        if loc == ITERATION_END:
            return []
        edges = function.cfg.successors(loc)
        if stop_at_header:
            edges = [Edge(e.source, e.stmt, ITERATION_END) if e.target == function.cfg.entry else e
                     for e in edges]
        return edges

    def step(self, function: Function, world: World, post: Post, edges: List[Edge],
             roots: Set[Var]) -> List[World]:
        """Processes every outgoing edge of one post; returns the worlds that
        replace `world`."""
        if not edges:
            return [world]
        if len(edges) == 2 and all(isinstance(e.stmt, Assume) for e in edges):
            return self.branch(world, post, edges[0], edges[1], roots)
        if len(edges) != 1:
            raise AnalysisFailure(FailureStage.LOWERING,
                                  f"unsupported branching at {post.loc} in {function.name}")

        edge = edges[0]
        stmt = edge.stmt
        if isinstance(stmt, Assume):
            self.add_post(world, edge.target, normalize(post.heap.with_pure(stmt.cond.atom()), self.names))
            return [world]
        if isinstance(stmt, (Call, LoopCall)):
            return self.apply_callee_contracts(world, post, edge, roots)
        return [self.shared_learn(world, post, edge, atomic_contract(stmt, self.names), roots)]

    def add_post(self, world: World, loc: int, heap: SymbolicHeap) -> Optional[Post]:
        """Adds a post unless it is infeasible or already covered at `loc`."""
        if satisfiable(heap) == Verdict.UNSAT:
            self.diagnostics.append(f"world#{world.index}: infeasible path to {loc} dropped")
            return None
        for existing in world.at(loc):
            if entails(heap, existing.heap).proved:
                return None
        added = world.add_post(loc, heap)
        check = self.guardrails.check_posts_at_location(sum(1 for _ in world.at(loc)))
        if not check.passed:
            raise AnalysisFailure(FailureStage.WORLD_EXPLOSION, check.reason)
        return added

    # -- branching ----------------------------------------------------------

    def branch(self, world: World, post: Post, then_edge: Edge, else_edge: Edge,
               roots: Set[Var]) -> List[World]:
        cond = then_edge.stmt.cond
        if not self.learning:
            return [self.split_assume_as_assume(world, post, then_edge, else_edge)]
        kind, atom = classify_assume(world, post, cond, roots)
        logger.debug(f"world#{world.index} post#{post.id} loc={post.loc} "
                     f"stmt=assume({cond}) {kind.value} on {atom}")
        if kind == Classification.AS_ASSUME:
            return [self.split_assume_as_assume(world, post, then_edge, else_edge)]
        return self.split_assume_as_assert(world, post, atom, then_edge, else_edge)

    def split_assume_as_assume(self, world: World, post: Post, then_edge: Edge,
                               else_edge: Edge) -> World:
        """Both branches become new posts of the same world."""
        for edge in (then_edge, else_edge):
            heap = normalize(post.heap.with_pure(edge.stmt.cond.atom()), self.names)
            self.add_post(world, edge.target, heap)
        return world

    def split_assume_as_assert(self, world: World, post: Post, atom: PureAtom,
                               then_edge: Edge, else_edge: Edge) -> List[World]:
        """One world per branch, each with the (negated) condition in its
        precondition and all its posts."""
        result = []
        for guard, edge in ((atom, then_edge), (atom.negate(), else_edge)):
            split = world.copy(self._new_index()).strengthen(guard, self.names)
            if split is None:
                self.diagnostics.append(f"world#{world.index}: branch {edge.stmt} infeasible")
                continue
            current = next((p for p in split.posts if p.id == post.id), None)
            if current is not None:
                heap = normalize(current.heap.with_pure(edge.stmt.cond.atom()), self.names)
                self.add_post(split, edge.target, heap)
            result.append(split)
        return result

    # -- learning -----------------------------------------------------------

    def shared_learn(self, world: World, post: Post, edge: Edge, contract: Contract,
                     roots: Set[Var], solution: Optional[BiabSolution] = None) -> World:
        """Solves the contract's precondition against the post, adds the
        missing part to the world and the new current states to `edge.target`."""
        if solution is None:
            solution = solve(post.heap, contract.pre, self.names, roots)
        missing = solution.missing
        learned = bool(missing.pure or missing.spatial)
        logger.debug(f"world#{world.index} post#{post.id} loc={post.loc} "
                     f"stmt={edge.stmt} M={missing if learned else 'emp'}")
        if learned:
            if not self.learning:
                raise AnalysisFailure(FailureStage.VERIFICATION,
                                      f"{edge.stmt} needs {missing} in the invariant")
            if satisfiable(world.pre.star(missing)) != Verdict.SAT:
                raise AnalysisFailure(FailureStage.LEARNING,
                                      f"learning {missing} contradicts {world.pre}")
            world.share(missing, self.shared_learning)

        changed = set(written_vars(edge.stmt))
        for heap in apply_post(solution, contract, changed, self.names):
            self.add_post(world, edge.target, heap)
        return world

    def apply_callee_contracts(self, world: World, post: Post, edge: Edge,
                               roots: Set[Var]) -> List[World]:
        stmt = edge.stmt
        summary = self.callee(stmt.callee)
        if not summary.analyzed:
            raise AnalysisFailure(FailureStage.CALLEE, f"callee {stmt.callee} was not analyzed")

        applicable: List[Tuple[Contract, BiabSolution]] = []
        for contract in summary.call_contracts:
            renamed = instantiate_call(contract, stmt, return_var(stmt.callee), self.names)
            try:
                solution = solve(post.heap, renamed.pre, self.names, roots)
            except AnalysisFailure as failure:
                logger.debug(f"contract {contract} of {stmt.callee} does not apply: {failure}")
                continue
            missing = solution.missing
            if (missing.pure or missing.spatial) and \
                    satisfiable(world.pre.star(missing)) != Verdict.SAT:
                continue
            applicable.append((renamed, solution))

        if not applicable:
            raise AnalysisFailure(FailureStage.CALLEE, f"no contract of {stmt.callee} applies to {post.heap}")
        if len(applicable) == 1:
            contract, solution = applicable[0]
            return [self.shared_learn(world, post, edge, contract, roots, solution)]

        result = []
        for contract, solution in applicable:
            split = world.copy(self._new_index())
            current = next(p for p in split.posts if p.id == post.id)
            try:
                result.append(self.shared_learn(split, current, edge, contract, roots, solution))
            except AnalysisFailure as failure:
                self.diagnostics.append(f"world#{split.index}: {failure}")
                self.failures.append(failure)
        return result


class SequentialAnalyzer(WorldAnalyzer):
    """Plain biabduction over simple analysis states: every world carries a
    single path, so nothing learned on one path reaches another."""

    def __init__(self, summaries: Dict[str, FunctionSummary],
                 guardrails: Optional[GuardrailEngine] = None):
        super().__init__(summaries, guardrails)
        self.name = "SEQUENTIAL"

    def branch(self, world: World, post: Post, then_edge: Edge, else_edge: Edge,
               roots: Set[Var]) -> List[World]:
        kind, atom = classify_assume(world, post, then_edge.stmt.cond, roots)
        if kind == Classification.AS_ASSERT:
            return self.split_assume_as_assert(world, post, atom, then_edge, else_edge)
        result = []
        for edge in (then_edge, else_edge):
            state = World(world.pre, index=self._new_index())
            heap = normalize(post.heap.with_pure(edge.stmt.cond.atom()), self.names)
            if self.add_post(state, edge.target, heap) is not None:
                result.append(state)
        return result

    def summarize(self, function: Function, worlds: List[World]) -> FunctionSummary:
        contracts = []
        for world in worlds:
            for heap in world.exit_posts(function.cfg.exit):
                contracts.append(final_contract(world.pre, [heap], function))
        if not contracts:
            failure = self.failures[-1] if self.failures else AnalysisFailure(
                FailureStage.LEARNING, "no state reaches the exit")
            return FunctionSummary.failed(function.name, failure.stage, failure.message,
                                          self.diagnostics)
        return FunctionSummary(function.name, AnalysisStatus.ANALYZED, params=function.params,
                               contracts=contracts, call_contracts=contracts,
                               diagnostics=list(self.diagnostics))


def analyze_sequential(function: Function, summaries: Dict[str, FunctionSummary],
                       guardrails: Optional[GuardrailEngine] = None) -> FunctionSummary:
    return SequentialAnalyzer(summaries, guardrails).analyze(function)
