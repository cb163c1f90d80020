"""Contracts of atomic statements and instantiation of callee contracts."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from core.models import ContractKind
from frontend.statements import (
    Assert,
    Assign,
    Assume,
    Call,
    Load,
    LoopCall,
    Nondet,
    Return,
    Statement,
    Store,
)
from seplogic.formula import EMP, PointsTo, PureAtom, SymbolicHeap, eq
from seplogic.terms import (
    BinOp,
    Expr,
    FreshNames,
    UnOp,
    Var,
    anchor_of,
    expr_var_set,
    substitute_expr,
)


@dataclass(frozen=True)
class Contract:
    """A precondition with one or more alternative postconditions."""
    pre: SymbolicHeap
    posts: Tuple[SymbolicHeap, ...]
    kind: ContractKind = ContractKind.ATOMIC
    params: Tuple[Var, ...] = ()

    @property
    def post(self) -> SymbolicHeap:
        return self.posts[0]

    def __str__(self) -> str:
        posts = " \\/ ".join(f"({p})" for p in self.posts)
        return f"{{{self.pre}}} {{{posts}}}"


@dataclass
class _Reads:
    """Binds each read program variable to a fresh logical value."""
    names: FreshNames
    mapping: Dict[Var, Var] = field(default_factory=dict)

    def value(self, expr: Expr) -> Expr:
        for var in sorted(expr_var_set(expr)):
            if var not in self.mapping:
                self.mapping[var] = self.names.fresh()
        return substitute_expr(expr, self.mapping)

    def bindings(self, skip: Tuple[Var, ...] = ()) -> List[PureAtom]:
        return [eq(var, value) for var, value in self.mapping.items() if var not in skip]


def atomic_contract(stmt: Statement, names: FreshNames) -> Contract:
    """The contract of an atomic statement with fresh logical variables."""
    reads = _Reads(names)

    if isinstance(stmt, Assign):
        if isinstance(stmt.expr, Nondet):
            return Contract(EMP, (SymbolicHeap.of([eq(stmt.target, names.fresh())]),))
        if isinstance(stmt.expr, (UnOp, BinOp)) or expr_var_set(stmt.expr):
            value = reads.value(stmt.expr)
            pre = SymbolicHeap.of(reads.bindings())
            post = SymbolicHeap.of(reads.bindings(skip=(stmt.target,)) + [eq(stmt.target, value)])
            return Contract(pre, (post,))
        return Contract(EMP, (SymbolicHeap.of([eq(stmt.target, stmt.expr)]),))

    if isinstance(stmt, Load):
        source = reads.value(stmt.source)
        content = names.fresh()
        cell = PointsTo(source, stmt.field, content)
        pre = SymbolicHeap.of(reads.bindings(), [cell])
        post = SymbolicHeap.of(reads.bindings(skip=(stmt.target,)) + [eq(stmt.target, content)],
                               [cell])
        return Contract(pre, (post,))

    if isinstance(stmt, Store):
        target = reads.value(stmt.target)
        value = reads.value(stmt.value)
        old = names.fresh()
        pre = SymbolicHeap.of(reads.bindings(), [PointsTo(target, stmt.field, old)])
        post = SymbolicHeap.of(reads.bindings(), [PointsTo(target, stmt.field, value)])
        return Contract(pre, (post,))

    if isinstance(stmt, Return):
        value = reads.value(stmt.value)
        pre = SymbolicHeap.of(reads.bindings())
        post = SymbolicHeap.of(reads.bindings() + [eq(stmt.target, value)])
        return Contract(pre, (post,))

    if isinstance(stmt, (Assume, Assert)):
        condition = PureAtom.make(stmt.cond.op, reads.value(stmt.cond.left),
                                  reads.value(stmt.cond.right))
        post = SymbolicHeap.of(reads.bindings() + [condition])
        pre = post if isinstance(stmt, Assert) else SymbolicHeap.of(reads.bindings())
        return Contract(pre, (post,))

    raise TypeError(f"no atomic contract for {stmt}")


def instantiate_call(contract: Contract, stmt: Statement, result: Var,
                     names: FreshNames) -> Contract:
    """Renames a callee contract into the caller's frame.

    Callee anchors become fresh logicals bound to the argument variables; the
    callee's result variable is renamed to the call target. For loop calls
    the output variables share their names with the caller's.
    """
    args = stmt.args
    targets = (stmt.target,) if isinstance(stmt, Call) else tuple(stmt.outputs)
    logicals = contract.pre.logical_vars() | frozenset(
        v for p in contract.posts for v in p.logical_vars())
    mapping: Dict[Var, Expr] = {v: names.fresh() for v in sorted(logicals)}
    actuals: Dict[Var, Var] = {}
    for param, arg in zip(contract.params, args):
        anchor = anchor_of(param)
        if anchor not in mapping:
            mapping[anchor] = names.fresh()
        actuals.setdefault(arg, mapping[anchor])

    arg_bindings = [eq(arg, mapping[anchor_of(param)])
                    for param, arg in zip(contract.params, args)]
    pre = contract.pre.substitute(mapping).with_pure(*arg_bindings)
    kept = [eq(arg, value) for arg, value in actuals.items() if arg not in targets]

    posts = []
    for post in contract.posts:
        renamed = post.substitute(mapping)
        if isinstance(stmt, Call):
            renamed = renamed.substitute({result: stmt.target})
        posts.append(SymbolicHeap.of(
            [a for a in renamed.pure if all(not v.is_program or v in targets for v in a.vars())]
            + kept,
            renamed.spatial,
        ))
    return Contract(pre, tuple(posts), ContractKind.FUNCTION)


def is_call(stmt: Statement) -> bool:
    return isinstance(stmt, (Call, LoopCall))
