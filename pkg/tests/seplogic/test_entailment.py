from hypothesis import given, settings
from hypothesis import strategies as st

from seplogic.entailment import distinct, entails, entails_with_frame
from seplogic.formula import PointsTo, SymbolicHeap, eq, list_seg, neq
from seplogic.pure import Verdict, incompatible, proves, satisfiable
from seplogic.semantics import enumerate_models, models
from seplogic.terms import NULL, BinOp, Var
from tests.strategies import heaps, weakenings

a, b, c, d = Var("a"), Var("b"), Var("c"), Var("d")


def heap(*spatial, pure=()):
    return SymbolicHeap.of(pure, spatial)


def test_null_terminated_chain_entails_segment():
    chain = heap(PointsTo(a, "next", b), PointsTo(b, "next", NULL))
    assert entails(chain, heap(list_seg(a, NULL))).proved


def test_open_chain_does_not_entail_segment():
    # c may be a, closing a cycle
    chain = heap(PointsTo(a, "next", b), PointsTo(b, "next", c))
    assert not entails(chain, heap(list_seg(a, c))).proved


def test_segments_compose_towards_null():
    two = heap(list_seg(a, b), list_seg(b, NULL))
    assert entails(two, heap(list_seg(a, NULL))).proved


def test_allocation_implies_non_null():
    cell = heap(PointsTo(a, "next", b))
    assert entails(cell, heap(PointsTo(a, "next", b), pure=[neq(a, NULL)])).proved
    assert not entails(cell, heap(PointsTo(a, "next", b), pure=[neq(b, NULL)])).proved


def test_right_only_logicals_are_existential():
    cell = heap(PointsTo(a, "next", b))
    assert entails(cell, heap(PointsTo(a, "next", d))).proved


def test_leftover_heap_blocks_plain_entailment():
    two = heap(PointsTo(a, "next", b), PointsTo(c, "data", d))
    assert not entails(two, heap(PointsTo(a, "next", b))).proved
    framed = entails_with_frame(two, heap(PointsTo(a, "next", b)))
    assert framed.proved
    assert framed.frame.spatial == (PointsTo(c, "data", d),)


def test_unsatisfiable_left_entails_anything():
    clash = heap(PointsTo(a, "next", b), PointsTo(a, "next", c))
    assert entails(clash, heap(list_seg(d, NULL))).proved


def test_distinct_from_separation():
    two = heap(PointsTo(a, "next", NULL), PointsTo(b, "next", NULL))
    assert distinct(two, a, b)
    assert not distinct(heap(PointsTo(a, "data", NULL), PointsTo(b, "next", NULL)), a, b)


def test_pure_reasoning():
    assert satisfiable(heap(PointsTo(a, "next", b), PointsTo(a, "next", c))) == Verdict.UNSAT
    assert satisfiable(heap(list_seg(a, NULL), pure=[neq(a, NULL)])) == Verdict.SAT
    assert proves(heap(PointsTo(a, "next", b)), neq(a, NULL))
    assert incompatible(heap(pure=[eq(a, NULL)]), heap(pure=[neq(a, NULL)]))
    assert not incompatible(heap(pure=[eq(a, NULL)]), heap(pure=[eq(b, NULL)]))


def test_arithmetic_definitions_are_evaluated():
    e, f, g = Var("e"), Var("f"), Var("g")
    product, total = BinOp("*", b, c), BinOp("+", a, d)
    state = heap(PointsTo(f, "next", g), PointsTo(e, "data", b),
                 pure=[eq(product, d), eq(total, e), neq(e, NULL)])
    assert satisfiable(state) == Verdict.SAT
    assert satisfiable(heap(pure=[eq(product, d), eq(d, Var("h")), neq(Var("h"), product)])) \
        == Verdict.UNSAT


@st.composite
def entailment_pairs(draw):
    phi = draw(heaps())
    psi = draw(st.one_of(heaps(), weakenings(phi)))
    return phi, psi


@settings(max_examples=500)
@given(entailment_pairs())
def test_proved_entailments_hold_on_bounded_models(pair):
    phi, psi = pair
    if not entails(phi, psi).proved:
        return
    for model in enumerate_models(phi, max_cells=3, limit=60):
        assert models(model, psi), f"{model} satisfies {phi} but not {psi}"
