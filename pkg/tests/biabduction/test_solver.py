import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biabduction.contracts import atomic_contract
from biabduction.learning import learn
from biabduction.solver import BiabSolution, solve
from core.errors import AnalysisFailure
from core.models import FailureStage
from frontend.statements import Load, Store
from seplogic.formula import PointsTo, SymbolicHeap, eq, list_seg, neq
from seplogic.semantics import enumerate_models, models
from seplogic.terms import NULL, FreshNames, Var, anchor_of, program_var
from tests.strategies import LOGICALS, PROGRAM_VARS, atomic_statements, heaps

x, y, z = program_var("x"), program_var("y"), program_var("z")
X, Y, Z = anchor_of(x), anchor_of(y), anchor_of(z)

INITIAL = SymbolicHeap.of([eq(x, X), eq(y, Y), eq(z, Z)])


def test_missing_cell_is_learned(names):
    demand = atomic_contract(Load(y, x, "data"), names).pre
    solution = solve(INITIAL, demand, names)
    (cell,) = solution.missing.spatial
    assert cell.source == X and cell.field == "data"
    assert not solution.missing.pure
    assert solution.frame.spatial == ()
    assert solution.certify(INITIAL, demand)


def test_present_cell_needs_nothing(names):
    state = INITIAL.with_spatial(PointsTo(X, "data", Var("v")))
    demand = atomic_contract(Load(y, x, "data"), names).pre
    solution = solve(state, demand, names)
    assert not solution.missing.pure and not solution.missing.spatial
    assert solution.instantiate(demand).spatial == (PointsTo(X, "data", Var("v")),)


def test_segment_is_unfolded_before_abduction(names):
    state = SymbolicHeap.of([eq(x, X), neq(X, NULL)], [list_seg(X, NULL)])
    demand = atomic_contract(Load(y, x, "next"), names).pre
    solution = solve(state, demand, names)
    assert not solution.missing.spatial
    assert any(seg.head != X for seg in solution.frame.segments())


def test_value_mismatch_becomes_pure_antiframe(names):
    b, c = Var("b"), Var("c")
    state = SymbolicHeap.of([eq(x, X), neq(c, NULL)], [PointsTo(X, "next", b)])
    demand = SymbolicHeap.of([eq(x, X)], [PointsTo(X, "next", c)])
    solution = solve(state, demand, names)
    assert not solution.missing.spatial
    assert eq(b, c) in solution.missing.pure


def test_contradictory_state_fails(names):
    state = SymbolicHeap.of([eq(x, X), eq(X, NULL), neq(X, NULL)])
    demand = atomic_contract(Load(y, x, "next"), names).pre
    with pytest.raises(AnalysisFailure) as caught:
        solve(state, demand, names)
    assert caught.value.stage == FailureStage.LEARNING


def test_unreachable_missing_part_is_rejected(names):
    state = SymbolicHeap.of([eq(x, Var("l9"))])
    demand = atomic_contract(Load(y, x, "next"), names).pre
    with pytest.raises(AnalysisFailure):
        solve(state, demand, names, roots=[X])


def test_uncertified_solution_is_refused(names, monkeypatch):
    demand = atomic_contract(Load(y, x, "data"), names).pre
    monkeypatch.setattr(BiabSolution, "certify", lambda self, state, wanted: False)
    with pytest.raises(AnalysisFailure) as caught:
        solve(INITIAL, demand, names)
    assert caught.value.stage == FailureStage.LEARNING
    assert "certify" in str(caught.value)


def test_learn_extends_pre_and_steps_current(names):
    contract = atomic_contract(Store(x, "data", y), names)
    learned = learn(INITIAL, INITIAL, contract, set(), names)
    assert len(learned.pre.spatial) == 1
    (post,) = learned.posts
    (cell,) = post.spatial
    assert cell.field == "data"


# -- properties ----------------------------------------------------------------


@st.composite
def bound_states(draw):
    """x, y, z bound to a, b, c over a random heap on a, b, c."""
    body = draw(heaps())
    bindings = [eq(v, l) for v, l in zip(PROGRAM_VARS, LOGICALS)]
    return body.with_pure(*bindings)


@settings(max_examples=500)
@given(bound_states(), atomic_statements())
def test_solution_satisfies_the_demand_on_bounded_models(state, stmt):
    names = FreshNames("d")
    demand = atomic_contract(stmt, names).pre
    try:
        solution = solve(state, demand, names)
    except AnalysisFailure:
        return
    assert not solution.missing.program_vars()
    right = solution.instantiate(demand).star(solution.frame.spatial_only())
    for model in enumerate_models(state.star(solution.missing), max_cells=3, limit=60):
        assert models(model, right), f"{model} fails {right}"
