import itertools

import pytest

from core.models import AnalysisStatus, FailureStage
from engine.program import analyze_program
from engine.world import initial_world
from engine.worlds import Classification, WorldAnalyzer, analyze_sequential, classify_assume
from frontend.statements import Cond
from seplogic.entailment import entails
from seplogic.formula import PointsTo, SymbolicHeap, eq, neq
from seplogic.pure import incompatible, proves
from seplogic.terms import NULL, Var, anchor_of, program_var, return_var

x, y, z = program_var("x"), program_var("y"), program_var("z")
X, Y, Z = anchor_of(x), anchor_of(y), anchor_of(z)
a, b, c = Var("a"), Var("b"), Var("c")


def equivalent(first: SymbolicHeap, second: SymbolicHeap) -> bool:
    return entails(first, second).proved and entails(second, first).proved


def bound_sources(post: SymbolicHeap, result):
    """Sources of the cells whose content the result is bound to."""
    return {cell.source for cell in post.points_to() if eq(result, cell.value) in post.pure}


def test_nested_contracts(load_program):
    summary = analyze_program(load_program("nested"))["nested"]
    assert summary.status == AnalysisStatus.ANALYZED
    assert len(summary.contracts) == 2

    (null_case,) = [k for k in summary.contracts if proves(k.pre, eq(Y, NULL))]
    (other,) = [k for k in summary.contracts if proves(k.pre, neq(Y, NULL))]
    assert equivalent(null_case.pre, SymbolicHeap.of(
        [eq(Y, NULL)], [PointsTo(X, "data", a), PointsTo(Z, "data", c)]))
    assert equivalent(other.pre, SymbolicHeap.of(
        [neq(Y, NULL)], [PointsTo(X, "data", a), PointsTo(Y, "data", b)]))

    result = return_var("nested")
    assert len(null_case.posts) == 2 and len(other.posts) == 2
    assert [bound_sources(p, result) for p in null_case.posts] in ([{X}, {Z}], [{Z}, {X}])
    assert [bound_sources(p, result) for p in other.posts] in ([{X}, {Y}], [{Y}, {X}])
    for contract in summary.contracts:
        for post in contract.posts:
            assert len(post.spatial) == 2


def test_deterministic_condition_is_asserted(load_program):
    function = load_program("nested").functions["nested"]
    world = initial_world(function.program_vars(), function.cfg.entry)
    (post,) = world.posts
    kind, atom = classify_assume(world, post, Cond("!=", y, NULL), {X, Y, Z})
    assert kind == Classification.AS_ASSERT
    assert atom == neq(Y, NULL)


def test_nondeterministic_condition_is_assumed(load_program):
    function = load_program("two_branches").functions["two_branches"]
    world = initial_world(function.program_vars(), function.cfg.entry)
    mode = program_var("mode")
    (post,) = world.posts
    # after `mode = ?` the variable is bound to a fresh value
    post.heap = SymbolicHeap.of([eq(mode, Var("l1"))])
    hd, last = anchor_of(program_var("hd")), anchor_of(program_var("last"))
    kind, atom = classify_assume(world, post, Cond("=", mode, NULL), {hd, last})
    assert kind == Classification.AS_ASSUME
    assert atom == eq(Var("l1"), NULL)


def test_shared_learning_covers_both_branches(load_program):
    summaries = analyze_program(load_program("two_branches"))
    summary = summaries["two_branches"]
    assert summary.analyzed
    (contract,) = summary.contracts
    hd, last = anchor_of(program_var("hd")), anchor_of(program_var("last"))
    assert {cell.source for cell in contract.pre.points_to()} == {hd, last}


def test_sequential_analysis_keeps_paths_apart(load_program):
    program = load_program("two_branches")
    summaries = analyze_program(program)
    summary = analyze_sequential(program.functions["two_branches"], summaries)
    assert summary.analyzed
    assert len(summary.contracts) == 2
    assert all(len(k.pre.spatial) == 1 for k in summary.contracts)


def test_sequential_and_worlds_agree_without_branches(load_program):
    program = load_program("two_branches")
    get = program.functions["get"]
    with_worlds = WorldAnalyzer({}).analyze(get)
    sequential = analyze_sequential(get, {})
    assert [str(k) for k in with_worlds.contracts] == [str(k) for k in sequential.contracts]


CORPUS_LOOP_FREE = ["nested", "two_branches", "three_branches", "motivation1"]


@pytest.mark.parametrize("name", CORPUS_LOOP_FREE)
def test_sibling_worlds_have_incompatible_preconditions(load_program, name):
    program = load_program(name)
    summaries = analyze_program(program)
    for fname in program.call_order:
        function = program.functions[fname]
        if function.is_loop:
            continue
        worlds = WorldAnalyzer(summaries).run(
            function, [initial_world(function.program_vars(), function.cfg.entry)])
        for first, second in itertools.combinations(worlds, 2):
            assert incompatible(first.pre, second.pre), \
                f"{fname}: {first.pre} and {second.pre} overlap"


def test_three_branches_splits_on_current(load_program):
    program = load_program("three_branches")
    summary = analyze_program(program)["three_branches"]
    assert summary.analyzed
    assert len(summary.contracts) == 2
    hd, current = anchor_of(program_var("hd")), anchor_of(program_var("current"))
    assert incompatible(summary.contracts[0].pre, summary.contracts[1].pre)
    assert any(proves(k.pre, eq(hd, current)) for k in summary.contracts)


def test_user_choice_learns_every_allocation(load_program):
    program = load_program("motivation1")
    summary = analyze_program(program)["user_choice"]
    assert summary.analyzed
    hd, last, current, out = (anchor_of(program_var(n)) for n in ("hd", "last", "current", "out"))
    (distinct,) = [k for k in summary.contracts if proves(k.pre, neq(current, hd))]
    assert {cell.source for cell in distinct.pre.points_to()} == {hd, current, last, out}


def test_contradictory_world_is_dropped(load_program):
    program = load_program("""
    int guarded(struct node *x) {
      int v = 0;
      if (x == NULL) {
        v = x->data;
      }
      return v;
    }
    """)
    summary = analyze_program(program)["guarded"]
    assert summary.analyzed
    (contract,) = summary.contracts
    assert proves(contract.pre, neq(anchor_of(x), NULL))
    assert any("world#" in d for d in summary.diagnostics)


def test_failed_callee_fails_caller(load_program):
    program = load_program("""
    int bad(struct node *x) {
      x = NULL;
      int v = x->data;
      return v;
    }

    int caller(struct node *p) {
      int r = bad(p);
      return r;
    }
    """)
    summaries = analyze_program(program)
    assert summaries["bad"].failure_stage == FailureStage.LEARNING
    assert summaries["caller"].failure_stage == FailureStage.CALLEE
    assert summaries["caller"].status == AnalysisStatus.FAILED


@pytest.mark.parametrize("name", ["three_branches", "motivation1"])
def test_reported_contracts_carry_no_constant_facts(load_program, name):
    for summary in analyze_program(load_program(name)).values():
        for contract in summary.contracts:
            for heap in (contract.pre, *contract.posts):
                assert all(atom.ground_truth() is None for atom in heap.pure), str(heap)
