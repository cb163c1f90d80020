from core.models import ContractKind
from biabduction.contracts import Contract, atomic_contract, instantiate_call
from frontend.statements import Assign, Assume, Call, Cond, Load, Nondet, Return, Store
from seplogic.formula import EMP, PointsTo, SymbolicHeap, eq
from seplogic.terms import NULL, Var, anchor_of, program_var, return_var

x, y, r = program_var("x"), program_var("y"), program_var("r")
l1, l2, l3 = Var("l1"), Var("l2"), Var("l3")


def test_load_contract(names):
    contract = atomic_contract(Load(x, y, "next"), names)
    assert contract.pre == SymbolicHeap.of([eq(y, l1)], [PointsTo(l1, "next", l2)])
    assert contract.post == SymbolicHeap.of([eq(y, l1), eq(x, l2)], [PointsTo(l1, "next", l2)])
    assert contract.kind == ContractKind.ATOMIC


def test_self_load_forgets_old_binding(names):
    contract = atomic_contract(Load(x, x, "next"), names)
    assert eq(x, l1) in contract.pre.pure
    assert contract.post.pure == {eq(x, l2)}


def test_store_contract(names):
    contract = atomic_contract(Store(x, "data", y), names)
    assert contract.pre == SymbolicHeap.of([eq(x, l1), eq(y, l2)], [PointsTo(l1, "data", l3)])
    assert contract.post == SymbolicHeap.of([eq(x, l1), eq(y, l2)], [PointsTo(l1, "data", l2)])


def test_assignments(names):
    assert atomic_contract(Assign(x, NULL), names) == Contract(EMP, (SymbolicHeap.of([eq(x, NULL)]),))
    nondet = atomic_contract(Assign(x, Nondet()), names)
    assert nondet.pre == EMP and nondet.post.pure == {eq(x, l1)}
    copy = atomic_contract(Assign(x, y), names)
    assert copy.post.pure == {eq(y, l2), eq(x, l2)}


def test_assume_constrains_only_the_post(names):
    contract = atomic_contract(Assume(Cond("!=", x, NULL)), names)
    assert contract.pre.pure == {eq(x, l1)}
    assert len(contract.post.pure) == 2


def test_return_binds_result(names):
    result = return_var("f")
    contract = atomic_contract(Return(result, x), names)
    assert eq(result, l1) in contract.post.pure


def test_instantiate_call_renames_into_caller(names):
    param = program_var("p")
    result = return_var("get")
    callee = Contract(
        SymbolicHeap.of((), [PointsTo(anchor_of(param), "data", Var("l1"))]),
        (SymbolicHeap.of([eq(result, Var("l1"))], [PointsTo(anchor_of(param), "data", Var("l1"))]),),
        ContractKind.FUNCTION,
        (param,),
    )
    call = Call(r, "get", (x,))
    caller = instantiate_call(callee, call, result, names)
    assert caller.kind == ContractKind.FUNCTION
    assert not any(v.is_anchor for v in caller.pre.vars())
    assert x in caller.pre.vars()
    post = caller.post
    assert r in post.vars() and result not in post.vars()
    (cell,) = post.spatial
    assert eq(r, cell.value) in post.pure
