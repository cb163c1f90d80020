"""Flattened statements and per-function control flow graphs."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Set, Tuple, Union

from seplogic.formula import NEGATION, PureAtom
from seplogic.terms import BinOp, Const, Null, UnOp, Var, expr_vars, return_var


@dataclass(frozen=True)
class Nondet:
    def __str__(self) -> str:
        return "?"


NONDET = Nondet()

Operand = Union[Var, Const, Null]
RValue = Union[Operand, UnOp, BinOp, Nondet]


@dataclass(frozen=True)
class Cond:
    op: str
    left: Operand
    right: Operand

    def negate(self) -> "Cond":
        return Cond(NEGATION[self.op], self.left, self.right)

    def atom(self) -> PureAtom:
        return PureAtom.make(self.op, self.left, self.right)

    def vars(self) -> Set[Var]:
        return set(expr_vars(self.left)) | set(expr_vars(self.right))

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"


@dataclass(frozen=True)
class Assign:
    target: Var
    expr: RValue

    def __str__(self) -> str:
        return f"{self.target} = {self.expr}"


@dataclass(frozen=True)
class Load:
    target: Var
    source: Var
    field: str

    def __str__(self) -> str:
        return f"{self.target} = {self.source}->{self.field}"


@dataclass(frozen=True)
class Store:
    target: Var
    field: str
    value: Operand

    def __str__(self) -> str:
        return f"{self.target}->{self.field} = {self.value}"


@dataclass(frozen=True)
class Return:
    target: Var
    value: Operand

    def __str__(self) -> str:
        return f"return {self.value}"


@dataclass(frozen=True)
class Assume:
    cond: Cond

    def __str__(self) -> str:
        return f"assume({self.cond})"


@dataclass(frozen=True)
class Assert:
    cond: Cond

    def __str__(self) -> str:
        return f"assert({self.cond})"


@dataclass(frozen=True)
class Call:
    target: Var
    callee: str
    args: Tuple[Var, ...]

    def __str__(self) -> str:
        return f"{self.target} = {self.callee}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class LoopCall:
    """Runs an extracted loop function and rebinds `outputs` from its result."""
    callee: str
    args: Tuple[Var, ...]
    outputs: Tuple[Var, ...]

    def __str__(self) -> str:
        outs = ", ".join(map(str, self.outputs))
        return f"({outs}) = {self.callee}({', '.join(map(str, self.args))})"


Statement = Union[Assign, Load, Store, Return, Assume, Assert, Call, LoopCall]


def written_vars(stmt: Statement) -> Tuple[Var, ...]:
    if isinstance(stmt, (Assign, Load, Call, Return)):
        return (stmt.target,)
    if isinstance(stmt, LoopCall):
        return stmt.outputs
    return ()


def read_vars(stmt: Statement) -> List[Var]:
    if isinstance(stmt, Assign):
        return [] if isinstance(stmt.expr, Nondet) else list(expr_vars(stmt.expr))
    if isinstance(stmt, Load):
        return [stmt.source]
    if isinstance(stmt, Store):
        return [stmt.target] + list(expr_vars(stmt.value))
    if isinstance(stmt, Return):
        return list(expr_vars(stmt.value))
    if isinstance(stmt, (Assume, Assert)):
        return list(expr_vars(stmt.cond.left)) + list(expr_vars(stmt.cond.right))
    if isinstance(stmt, (Call, LoopCall)):
        return list(stmt.args)
    return []


@dataclass(frozen=True)
class Edge:
    source: int
    stmt: Statement
    target: int

    def __str__(self) -> str:
        return f"{self.source} -> {self.target}: {self.stmt}"


def changed_vars(items: Iterable[Union[Statement, Edge]]) -> Set[Var]:
    """Variables written by the statements (or edge labels) in `items`."""
    result: Set[Var] = set()
    for item in items:
        stmt = item.stmt if isinstance(item, Edge) else item
        result.update(written_vars(stmt))
    return result


@dataclass
class ControlFlowGraph:
    vertices: Set[int] = field(default_factory=set)
    edges: List[Edge] = field(default_factory=list)
    entry: int = 0
    exit: int = 0

    def successors(self, loc: int) -> List[Edge]:
        return [e for e in self.edges if e.source == loc]

    def predecessors(self, loc: int) -> List[Edge]:
        return [e for e in self.edges if e.target == loc]

    def back_edges(self) -> List[Edge]:
        """Edges closing a cycle in a depth-first walk from the entry."""
        colour: Dict[int, int] = {}
        found: List[Edge] = []

        def visit(loc: int):
            colour[loc] = 1
            for edge in self.successors(loc):
                state = colour.get(edge.target, 0)
                if state == 1:
                    found.append(edge)
                elif state == 0:
                    visit(edge.target)
            colour[loc] = 2

        visit(self.entry)
        return found

    def is_acyclic(self) -> bool:
        return not self.back_edges()

    def branching_ok(self) -> bool:
        """At most two successors; two only as complementary assumes."""
        for loc in self.vertices:
            out = self.successors(loc)
            if len(out) > 2:
                return False
            if len(out) == 2:
                first, second = out[0].stmt, out[1].stmt
                if not (isinstance(first, Assume) and isinstance(second, Assume)):
                    return False
                if first.cond.negate() != second.cond and second.cond.negate() != first.cond:
                    return False
        return True

    def statements(self) -> Iterator[Statement]:
        for edge in self.edges:
            yield edge.stmt

    def canonical(self) -> Tuple[Tuple[int, str, int], ...]:
        """Edges relabelled by breadth-first discovery order; equal for
        isomorphic graphs."""
        order: Dict[int, int] = {self.entry: 0}
        queue = deque([self.entry])
        while queue:
            loc = queue.popleft()
            for edge in sorted(self.successors(loc), key=lambda e: str(e.stmt)):
                if edge.target not in order:
                    order[edge.target] = len(order)
                    queue.append(edge.target)
        return tuple(sorted(
            (order.get(e.source, -1), str(e.stmt), order.get(e.target, -1)) for e in self.edges
        ))

    def render(self) -> str:
        lines = [f"entry {self.entry} exit {self.exit}"]
        lines += [str(e) for e in sorted(self.edges, key=lambda e: (e.source, e.target, str(e.stmt)))]
        return "\n".join(lines)


@dataclass
class Function:
    name: str
    params: Tuple[Var, ...]
    cfg: ControlFlowGraph
    outputs: Tuple[Var, ...] = ()
    is_loop: bool = False
    loop_conditions: Tuple[Cond, ...] = ()

    def program_vars(self) -> Tuple[Var, ...]:
        """Parameters first, then every other variable in order of appearance;
        the return variable is not included."""
        seen: Dict[Var, None] = dict.fromkeys(self.params)
        for edge in sorted(self.cfg.edges, key=lambda e: (e.source, e.target)):
            for var in list(written_vars(edge.stmt)) + read_vars(edge.stmt):
                seen.setdefault(var, None)
        seen.pop(self.result, None)
        return tuple(seen)

    @property
    def result(self) -> Var:
        return return_var(self.name)


@dataclass
class Program:
    functions: Dict[str, Function] = field(default_factory=dict)
    call_order: List[str] = field(default_factory=list)

    def function(self, name: str) -> Optional[Function]:
        return self.functions.get(name)

    def callees(self, name: str) -> List[str]:
        result = []
        for stmt in self.functions[name].cfg.statements():
            if isinstance(stmt, (Call, LoopCall)) and stmt.callee not in result:
                result.append(stmt.callee)
        return result
