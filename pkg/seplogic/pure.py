"""Decision procedure for the pure fragment.

Union-find over terms with congruence and constant folding. Unsat is reported
only with a certificate; Sat only with a witness assignment that also admits a
heap for the spatial atoms; everything else is Unknown.
"""
from __future__ import annotations

import itertools
from enum import Enum
from typing import Callable, Dict, Hashable, Iterable, List, Optional, Sequence, Set, Tuple

from .formula import PureAtom, SymbolicHeap, neq
from .terms import (
    BinOp,
    Const,
    Expr,
    NULL,
    Null,
    UnOp,
    Var,
    apply_binary,
    apply_unary,
    evaluate,
    expr_vars,
)


class Verdict(str, Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


WITNESS_BASE = 1000
SMALL_VALUES = (0, 1, 2, 3)
SEARCH_LIMIT = 2048


def _canon(expr: Expr) -> Expr:
    if isinstance(expr, Null):
        return Const(0)
    if isinstance(expr, UnOp):
        return UnOp(expr.op, _canon(expr.arg))
    if isinstance(expr, BinOp):
        return BinOp(expr.op, _canon(expr.left), _canon(expr.right))
    return expr


def _children(expr: Expr) -> Tuple[Expr, ...]:
    if isinstance(expr, UnOp):
        return (expr.arg,)
    if isinstance(expr, BinOp):
        return (expr.left, expr.right)
    return ()


class PureSolver:
    """Saturates a set of pure atoms and answers queries about them."""

    def __init__(self, atoms: Iterable[PureAtom]):
        self.atoms: List[PureAtom] = [
            PureAtom(a.op, _canon(a.left), _canon(a.right)) for a in atoms
        ]
        self.parent: Dict[Expr, Expr] = {}
        self.constant: Dict[Expr, int] = {}
        self.compounds: List[Expr] = []
        self.conflict: Optional[str] = None

        for atom in self.atoms:
            self._add(atom.left)
            self._add(atom.right)
        for atom in self.atoms:
            if atom.op == "=":
                self._union(atom.left, atom.right)
        self._close()
        if self.conflict is None:
            self._check_relations()

    # -- union-find ---------------------------------------------------------

    def _add(self, term: Expr):
        if term in self.parent:
            return
        self.parent[term] = term
        if isinstance(term, Const):
            self.constant[term] = term.value
        for child in _children(term):
            self._add(child)
        if _children(term):
            self.compounds.append(term)

    def find(self, term: Expr) -> Expr:
        term = _canon(term)
        if term not in self.parent:
            self._add(term)
            self._close()
        root = term
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[term] != root:
            self.parent[term], term = root, self.parent[term]
        return root

    def _union(self, left: Expr, right: Expr) -> bool:
        a, b = self.find(left), self.find(right)
        if a == b:
            return False
        ca, cb = self.constant.get(a), self.constant.get(b)
        if ca is not None and cb is not None and ca != cb:
            self.conflict = f"{ca} = {cb}"
        self.parent[b] = a
        if ca is None and cb is not None:
            self.constant[a] = cb
        return True

    def _close(self):
        changed = True
        while changed:
            changed = False
            signatures: Dict[Hashable, Expr] = {}
            for term in list(self.compounds):
                args = tuple(self.find(c) for c in _children(term))
                values = [self.constant.get(a) for a in args]
                if all(v is not None for v in values):
                    if isinstance(term, UnOp):
                        folded = apply_unary(term.op, values[0])
                    else:
                        folded = apply_binary(term.op, values[0], values[1])
                    const = Const(folded)
                    if const not in self.parent:
                        self.parent[const] = const
                        self.constant[const] = folded
                    changed |= self._union(const, term)
                key = (type(term).__name__, term.op, args)
                if key in signatures:
                    changed |= self._union(signatures[key], term)
                else:
                    signatures[key] = term

    def members(self, term: Expr) -> List[Var]:
        """The variables known equal to `term`."""
        root = self.find(term)
        return sorted(t for t in list(self.parent)
                      if isinstance(t, Var) and self.find(t) == root)

    def value_of(self, term: Expr) -> Optional[int]:
        return self.constant.get(self.find(term))

    def same(self, left: Expr, right: Expr) -> bool:
        if self.find(left) == self.find(right):
            return True
        a, b = self.value_of(left), self.value_of(right)
        return a is not None and a == b

    # -- relations ----------------------------------------------------------

    def _check_relations(self):
        order: Dict[Tuple[Expr, Expr], str] = {}

        def relate(a: Expr, b: Expr, op: str):
            if order.get((a, b)) != "<":
                order[(a, b)] = op

        for atom in self.atoms:
            left, right = self.find(atom.left), self.find(atom.right)
            lv, rv = self.constant.get(left), self.constant.get(right)
            if atom.op == "!=":
                if left == right or (lv is not None and lv == rv):
                    self.conflict = f"{atom.left} != {atom.right} on equal terms"
                    return
            elif atom.op in ("<", "<="):
                if atom.op == "<" and left == right:
                    self.conflict = f"{atom.left} < {atom.right} on equal terms"
                    return
                if lv is not None and rv is not None:
                    if (atom.op == "<" and not lv < rv) or (atom.op == "<=" and not lv <= rv):
                        self.conflict = f"{lv} {atom.op} {rv} is false"
                        return
                relate(left, right, atom.op)

        constants = sorted({r for r in self.constant if self.find(r) == r},
                           key=lambda r: self.constant[r])
        for a, b in zip(constants, constants[1:]):
            relate(a, b, "<")

        nodes = sorted({n for pair in order for n in pair}, key=str)
        for k in nodes:
            for i in nodes:
                if (i, k) not in order:
                    continue
                for j in nodes:
                    if (k, j) not in order:
                        continue
                    strict = "<" in (order[(i, k)], order[(k, j)])
                    relate(i, j, "<" if strict else "<=")
        for n in nodes:
            if order.get((n, n)) == "<":
                self.conflict = f"cyclic strict ordering through {n}"
                return

    @property
    def unsat(self) -> bool:
        return self.conflict is not None

    def proves(self, goal: PureAtom) -> bool:
        """True when the atoms entail `goal` (by refutation of its negation)."""
        if self.unsat:
            return True
        if goal.op == "=" and self.same(goal.left, goal.right):
            return True
        if goal.op == "!=":
            a, b = self.value_of(goal.left), self.value_of(goal.right)
            if a is not None and b is not None:
                return a != b
        return PureSolver(self.atoms + [goal.negate()]).unsat

    # -- witnesses ----------------------------------------------------------

    def witness(self, accept: Callable[[Dict[Var, int]], bool] = None) -> Optional[Dict[Var, int]]:
        """A variable assignment satisfying every atom, or None if none was found."""
        if self.unsat:
            return None
        variables = sorted({v for t in self.parent for v in expr_vars(t)})
        roots: List[Expr] = []
        for var in variables:
            root = self.find(var)
            if root not in roots and root not in self.constant:
                roots.append(root)
        # classes holding a compound term get their value by evaluating it
        defined = {self.find(t) for t in self.compounds}
        free = [r for r in roots if r not in defined]
        spread = [WITNESS_BASE + 16 * i for i in range(len(roots))]

        def attempt(choices: Sequence[int]) -> Optional[Dict[Var, int]]:
            values: Dict[Expr, int] = dict(zip(free, choices))
            pending = [r for r in roots if r not in values]
            fallback = iter(spread[len(free):])
            while pending:
                progress = True
                while progress:
                    progress = False
                    for term in self.compounds:
                        root = self.find(term)
                        if root not in pending:
                            continue
                        value = evaluate(term, self._env(variables, values))
                        if value is not None:
                            values[root] = value
                            pending.remove(root)
                            progress = True
                if pending:
                    # cyclic definitions: guess one class and evaluate the rest
                    values[pending.pop(0)] = next(fallback)
            env = self._env(variables, values)
            if all(_holds(atom, env) for atom in self.atoms):
                if accept is None or accept(env):
                    return env
            return None

        found = attempt(spread[:len(free)])
        if found is not None:
            return found
        pool = list(SMALL_VALUES) + spread
        for choices in itertools.islice(itertools.product(pool, repeat=len(free)), SEARCH_LIMIT):
            found = attempt(choices)
            if found is not None:
                return found
        return None

    def _env(self, variables: List[Var], values: Dict[Expr, int]) -> Dict[Var, int]:
        env = {}
        for var in variables:
            root = self.find(var)
            if root in self.constant:
                env[var] = self.constant[root]
            elif root in values:
                env[var] = values[root]
        return env


def _holds(atom: PureAtom, env: Dict[Var, int]) -> bool:
    left, right = evaluate(atom.left, env), evaluate(atom.right, env)
    if left is None or right is None:
        return False
    return {
        "=": left == right,
        "!=": left != right,
        "<": left < right,
        "<=": left <= right,
        ">": left > right,
        ">=": left >= right,
    }[atom.op]


def pure_sat(atoms: Iterable[PureAtom]) -> Verdict:
    solver = PureSolver(atoms)
    if solver.unsat:
        return Verdict.UNSAT
    return Verdict.SAT if solver.witness() is not None else Verdict.UNKNOWN


def heap_facts(heap: SymbolicHeap) -> List[PureAtom]:
    """Pure consequences of the spatial part: allocated sources are non-NULL
    and pairwise distinct per field."""
    facts: List[PureAtom] = []
    cells = list(heap.points_to())
    for cell in cells:
        facts.append(neq(cell.source, NULL))
    for first, second in itertools.combinations(cells, 2):
        if first.field == second.field:
            facts.append(neq(first.source, second.source))
    return facts


def solver_for(heap: SymbolicHeap) -> PureSolver:
    return PureSolver(list(heap.pure) + heap_facts(heap))


def _spatially_consistent(heap: SymbolicHeap, env: Dict[Var, int]) -> bool:
    """Whether a heap for `heap.spatial` exists under the stack `env`.

    Non-empty segments are built from one block copy with fresh inner cells,
    so only the head cells can clash with the rest.
    """
    from .blocks import block_registry

    owned: Set[Tuple[int, str]] = set()

    def claim(location: Optional[int], fields: Iterable[str]) -> bool:
        if location is None or location == 0:
            return False
        for f in fields:
            if (location, f) in owned:
                return False
            owned.add((location, f))
        return True

    for cell in heap.points_to():
        if not claim(evaluate(cell.source, env), [cell.field]):
            return False
    for seg in heap.segments():
        head, tail = evaluate(seg.head, env), evaluate(seg.tail, env)
        if head is None or tail is None:
            return False
        if head == tail:
            continue
        if not claim(head, block_registry.get(seg.block).head_fields()):
            return False
    return True


def satisfiable(heap: SymbolicHeap) -> Verdict:
    solver = solver_for(heap)
    if solver.unsat:
        return Verdict.UNSAT
    if not heap.spatial:
        return Verdict.SAT if solver.witness() is not None else Verdict.UNKNOWN

    def accept(env: Dict[Var, int]) -> bool:
        return _spatially_consistent(heap, env)

    # every variable of the spatial part needs a value in the witness
    base = list(heap.pure) + heap_facts(heap) + [PureAtom("=", v, v) for v in sorted(heap.vars())]
    if PureSolver(base).witness(accept) is not None:
        return Verdict.SAT
    # retry with every segment that may be empty taken empty
    empties = [PureAtom("=", s.head, s.tail) for s in heap.segments()
               if not solver.proves(neq(s.head, s.tail))]
    if empties and PureSolver(base + empties).witness(accept) is not None:
        return Verdict.SAT
    return Verdict.UNKNOWN


def proves(heap: SymbolicHeap, goal: PureAtom) -> bool:
    return solver_for(heap).proves(goal)


def incompatible(first: SymbolicHeap, second: SymbolicHeap) -> bool:
    """Whether the pure parts of two formulas cannot hold together."""
    return pure_sat(list(first.pure) + list(second.pure)) == Verdict.UNSAT
