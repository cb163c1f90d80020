"""Lowering of surface programs to flattened control flow graphs.

Every `if` becomes a vertex with two complementary assume edges and every
`while` is extracted into its own loop function whose entry is the loop
header. Compound expressions are broken up into `$tN` temporaries.
"""
from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Set, Tuple

from loguru import logger

from core.errors import LoweringError
from seplogic.terms import NULL, BinOp, Const, UnOp, Var, program_var, return_var
from .source import (
    FunctionDecl,
    SAssert,
    SAssign,
    SAssume,
    SBinary,
    SCall,
    SCond,
    SExpr,
    SExprStmt,
    SField,
    SIf,
    SInt,
    SNondet,
    SNull,
    SourceProgram,
    SReturn,
    SStmt,
    SUnary,
    SVar,
    SWhile,
)
from .statements import (
    NONDET,
    Assert,
    Assign,
    Assume,
    Call,
    Cond,
    ControlFlowGraph,
    Edge,
    Function,
    Load,
    LoopCall,
    Operand,
    Program,
    Return,
    Statement,
    Store,
)


class _Temps:
    """`$t0, $t1, ...`, shared by a function and the loops extracted from it."""

    def __init__(self):
        self.counter = 0

    def fresh(self) -> Var:
        var = program_var(f"$t{self.counter}")
        self.counter += 1
        return var


def _source_vars(stmts: Sequence[SStmt], conds: Sequence[SCond] = ()) -> Tuple[List[str], Set[str]]:
    """Variable names referenced (in first-occurrence order) and assigned."""
    referenced: Dict[str, None] = {}
    written: Set[str] = set()

    def expr(e: Optional[SExpr]):
        if isinstance(e, SVar):
            referenced.setdefault(e.name, None)
        elif isinstance(e, SUnary):
            expr(e.arg)
        elif isinstance(e, SBinary):
            expr(e.left)
            expr(e.right)
        elif isinstance(e, SField):
            expr(e.base)
        elif isinstance(e, SCall):
            for arg in e.args:
                expr(arg)

    def cond(c: SCond):
        if not c.nondet:
            expr(c.left)
            expr(c.right)

    def stmt(s: SStmt):
        if isinstance(s, SAssign):
            expr(s.target)
            expr(s.expr)
            if isinstance(s.target, SVar):
                written.add(s.target.name)
        elif isinstance(s, SExprStmt):
            expr(s.call)
        elif isinstance(s, SIf):
            cond(s.cond)
            for inner in s.then + s.orelse:
                stmt(inner)
        elif isinstance(s, SWhile):
            for c in s.conds:
                cond(c)
            for inner in s.body:
                stmt(inner)
        elif isinstance(s, SReturn):
            expr(s.expr)
        elif isinstance(s, (SAssert, SAssume)):
            cond(s.cond)

    for c in conds:
        cond(c)
    for s in stmts:
        stmt(s)
    return list(referenced), written


class _FunctionBuilder:
    """Builds one CFG with a dangling-edge frontier: statements are emitted as
    edges whose target is fixed when the next statement needs a source."""

    def __init__(self, lowering: "_Lowering", name: str, temps: _Temps, in_loop: bool):
        self.lowering = lowering
        self.name = name
        self.temps = temps
        self.in_loop = in_loop
        self.next_id = 1
        self.edges: List[Edge] = []
        self.open: Optional[int] = 0
        self.pending: List[Tuple[int, Statement]] = []
        self.returns: List[Tuple[int, Statement]] = []
        self.loop_count = 0

    def _new(self) -> int:
        loc = self.next_id
        self.next_id += 1
        return loc

    def _connect(self, dangling: List[Tuple[int, Statement]], target: int):
        for source, stmt in dangling:
            self.edges.append(Edge(source, stmt, target))

    def _here(self) -> Optional[int]:
        if self.pending:
            loc = self._new()
            self._connect(self.pending, loc)
            self.pending = []
            self.open = loc
        return self.open

    def emit(self, stmt: Statement):
        loc = self._here()
        if loc is None:
            return  # unreachable code after a return
        self.pending = [(loc, stmt)]
        self.open = None

    # -- expressions --------------------------------------------------------

    def operand(self, expr: SExpr) -> Operand:
        if isinstance(expr, SVar):
            return program_var(expr.name)
        if isinstance(expr, SInt):
            return Const(expr.value)
        if isinstance(expr, SNull):
            return NULL
        temp = self.temps.fresh()
        self.assign(temp, expr)
        return temp

    def variable(self, expr: SExpr) -> Var:
        if isinstance(expr, SVar):
            return program_var(expr.name)
        temp = self.temps.fresh()
        self.assign(temp, expr)
        return temp

    def assign(self, target: Var, expr: SExpr):
        if isinstance(expr, SField):
            self.emit(Load(target, self.variable(expr.base), expr.field))
        elif isinstance(expr, SCall):
            self.emit(Call(target, expr.callee, self.call_args(expr)))
        elif isinstance(expr, SNondet):
            self.emit(Assign(target, NONDET))
        elif isinstance(expr, SUnary):
            self.emit(Assign(target, UnOp(expr.op, self.operand(expr.arg))))
        elif isinstance(expr, SBinary):
            left = self.operand(expr.left)
            right = self.operand(expr.right)
            self.emit(Assign(target, BinOp(expr.op, left, right)))
        else:
            self.emit(Assign(target, self.operand(expr)))

    def call_args(self, call: SCall) -> Tuple[Var, ...]:
        self.lowering.check_call(call)
        return tuple(self.variable(arg) for arg in call.args)

    def condition(self, cond: SCond) -> Cond:
        if cond.nondet:
            temp = self.temps.fresh()
            self.emit(Assign(temp, NONDET))
            return Cond("!=", temp, Const(0))
        left = self.operand(cond.left)
        right = self.operand(cond.right)
        return Cond(cond.op, left, right)

    # -- statements ---------------------------------------------------------

    def block(self, stmts: Sequence[SStmt]):
        for stmt in stmts:
            self.statement(stmt)

    def statement(self, stmt: SStmt):
        if isinstance(stmt, SAssign):
            if isinstance(stmt.target, SVar):
                self.assign(program_var(stmt.target.name), stmt.expr)
            else:
                base = self.variable(stmt.target.base)
                value = self.operand(stmt.expr)
                self.emit(Store(base, stmt.target.field, value))
        elif isinstance(stmt, SExprStmt):
            self.emit(Call(self.temps.fresh(), stmt.call.callee, self.call_args(stmt.call)))
        elif isinstance(stmt, SReturn):
            if self.in_loop:
                raise LoweringError(f"line {stmt.line}: return inside a loop in {self.name}")
            value = Const(0) if stmt.expr is None else self.operand(stmt.expr)
            loc = self._here()
            if loc is not None:
                self.returns.append((loc, Return(return_var(self.name), value)))
            self.open = None
            self.pending = []
        elif isinstance(stmt, SAssert):
            self.emit(Assert(self.condition(stmt.cond)))
        elif isinstance(stmt, SAssume):
            self.emit(Assume(self.condition(stmt.cond)))
        elif isinstance(stmt, SIf):
            self.branch(stmt)
        elif isinstance(stmt, SWhile):
            name = f"{self.name}$loop{self.loop_count}"
            self.loop_count += 1
            loop = self.lowering.lower_loop(name, stmt, self.temps)
            self.emit(LoopCall(name, loop.params, loop.outputs))
        else:
            raise LoweringError(f"unsupported statement {stmt!r}")

    def branch(self, stmt: SIf):
        cond = self.condition(stmt.cond)
        at = self._here()
        if at is None:
            return
        self.pending, self.open = [(at, Assume(cond))], None
        self.block(stmt.then)
        then_pending = self.pending
        self.pending, self.open = [(at, Assume(cond.negate()))], None
        self.block(stmt.orelse)
        self.pending = then_pending + self.pending

    # -- finishing ----------------------------------------------------------

    def finish(self) -> ControlFlowGraph:
        if not self.pending and not self.returns and self.open is not None:
            exit_loc = self.open
        else:
            exit_loc = self._new()
            self._connect(self.pending + self.returns, exit_loc)
        vertices = {0, exit_loc} | {e.source for e in self.edges} | {e.target for e in self.edges}
        return ControlFlowGraph(vertices=vertices, edges=list(self.edges), entry=0, exit=exit_loc)

    def finish_loop(self, leaving: List[Tuple[int, Statement]]) -> ControlFlowGraph:
        self._connect(self.pending, 0)
        exit_loc = self._new()
        self._connect(leaving, exit_loc)
        vertices = {0, exit_loc} | {e.source for e in self.edges} | {e.target for e in self.edges}
        return ControlFlowGraph(vertices=vertices, edges=list(self.edges), entry=0, exit=exit_loc)


def _loop_operand(cond: SCond, function: str) -> Tuple[Operand, Operand]:
    if cond.nondet:
        raise LoweringError(f"nondeterministic loop condition in {function}")
    result = []
    for side in (cond.left, cond.right):
        if isinstance(side, SVar):
            result.append(program_var(side.name))
        elif isinstance(side, SInt):
            result.append(Const(side.value))
        elif isinstance(side, SNull):
            result.append(NULL)
        else:
            raise LoweringError(
                f"loop condition in {function} must compare variables, integers or NULL"
            )
    return result[0], result[1]


class _Lowering:
    def __init__(self, source: SourceProgram):
        self.source = source
        self.functions: Dict[str, Function] = {}

    def check_call(self, call: SCall):
        callee = self.source.function(call.callee)
        if callee is None:
            raise LoweringError(f"call to unknown function {call.callee}")
        if len(callee.params) != len(call.args):
            raise LoweringError(
                f"{call.callee} expects {len(callee.params)} arguments, got {len(call.args)}"
            )

    def lower_function(self, decl: FunctionDecl):
        builder = _FunctionBuilder(self, decl.name, _Temps(), in_loop=False)
        builder.block(decl.body)
        cfg = builder.finish()
        params = tuple(program_var(p) for p in decl.params)
        self.functions[decl.name] = Function(
            decl.name, params, cfg, outputs=(return_var(decl.name),)
        )

    def lower_loop(self, name: str, loop: SWhile, temps: _Temps) -> Function:
        referenced, written = _source_vars(loop.body, loop.conds)
        params = tuple(program_var(v) for v in referenced)
        outputs = tuple(program_var(v) for v in referenced if v in written)

        builder = _FunctionBuilder(self, name, temps, in_loop=True)
        conds = []
        leaving: List[Tuple[int, Statement]] = []
        for sc in loop.conds:
            cond = Cond(sc.op, *_loop_operand(sc, name))
            conds.append(cond)
            at = builder._here()
            leaving.append((at, Assume(cond.negate())))
            builder.pending, builder.open = [(at, Assume(cond))], None
        builder.block(loop.body)
        cfg = builder.finish_loop(leaving)
        function = Function(name, params, cfg, outputs=outputs, is_loop=True,
                            loop_conditions=tuple(conds))
        self.functions[name] = function
        return function

    def call_order(self) -> List[str]:
        order: List[str] = []
        state: Dict[str, int] = {}

        def visit(name: str, path: List[str]):
            if state.get(name) == 2:
                return
            if state.get(name) == 1:
                cycle = " -> ".join(path[path.index(name):] + [name])
                raise LoweringError(f"recursion is not supported: {cycle}")
            state[name] = 1
            for stmt in self.functions[name].cfg.statements():
                if isinstance(stmt, (Call, LoopCall)):
                    visit(stmt.callee, path + [name])
            state[name] = 2
            order.append(name)

        for decl in self.source.functions:
            visit(decl.name, [])
        return order


def lower(source: SourceProgram) -> Program:
    """Builds the flattened, loop-extracted program; raises LoweringError for
    recursion, unknown callees, returns inside loops or unsupported loop
    conditions."""
    lowering = _Lowering(source)
    for decl in source.functions:
        lowering.lower_function(decl)
    program = Program(functions=lowering.functions, call_order=lowering.call_order())
    logger.debug(f"lowered {len(program.functions)} functions, order {program.call_order}")
    return program
