from seplogic.formula import EMP, PointsTo, SymbolicHeap, eq, list_seg, neq
from seplogic.semantics import ERR, Configuration, enumerate_models, holds, models
from seplogic.terms import NULL, Const, Var, program_var

a, b = Var("a"), Var("b")
X = Var("X")


def test_points_to_is_precise():
    conf = Configuration.make({a: 101}, {(101, "next"): 0})
    assert models(conf, SymbolicHeap.of((), [PointsTo(a, "next", NULL)]))
    assert models(conf, SymbolicHeap.of((), [list_seg(a, NULL)]))
    assert not models(conf, EMP)
    assert not models(conf, SymbolicHeap.of((), [PointsTo(a, "data", NULL)]))


def test_logical_vars_missing_from_stack_are_existential():
    conf = Configuration.make({a: 101}, {(101, "next"): 102, (102, "next"): 0})
    heap = SymbolicHeap.of([neq(b, NULL)], [PointsTo(a, "next", b), PointsTo(b, "next", NULL)])
    assert models(conf, heap)


def test_program_vars_must_be_on_the_stack():
    x = program_var("x")
    conf = Configuration.make({}, {})
    assert not models(conf, SymbolicHeap.of([eq(x, NULL)], ()))
    assert models(Configuration.make({x: 0}, {}), SymbolicHeap.of([eq(x, NULL)], ()))


def test_err_models_nothing():
    assert not models(ERR, EMP)
    assert str(ERR) == "err"


def test_holds_is_partial():
    assert holds(eq(a, Const(1)), {a: 1}) is True
    assert holds(neq(a, NULL), {a: 0}) is False
    assert holds(eq(a, b), {a: 1}) is None


def test_list_segment_models_by_length():
    found = enumerate_models(SymbolicHeap.of((), [list_seg(X, NULL)]), max_cells=2)
    assert sorted(len(m.h) for m in found) == [0, 1, 2]
    assert all(set(m.s) == {X} for m in found)
    assert all(models(m, SymbolicHeap.of((), [list_seg(X, NULL)])) for m in found)


def test_enumeration_respects_fixed_values_and_limit():
    heap = SymbolicHeap.of((), [PointsTo(X, "data", a)])
    fixed = enumerate_models(heap, max_cells=1, fixed={a: 2})
    assert fixed and all(m.s[a] == 2 for m in fixed)
    assert len(enumerate_models(heap, max_cells=1, limit=2)) == 2


def test_unsatisfiable_heap_has_no_models():
    heap = SymbolicHeap.of((), [PointsTo(X, "next", NULL), PointsTo(X, "next", a)])
    assert enumerate_models(heap, max_cells=3) == []
