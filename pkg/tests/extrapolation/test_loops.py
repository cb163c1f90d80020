import pytest

from core.models import AnalysisStatus, ContractKind, FailureStage
from core.errors import AnalysisFailure
from engine.program import analyze_program
from extrapolation.exit_condition import exit_condition
from extrapolation.loop import analyze_loop
from extrapolation.partition import build_transf_map, partition
from frontend.statements import Cond
from interpreter.oracle import check_preservation
from seplogic.blocks import block_registry
from seplogic.entailment import entails
from seplogic.formula import EMP, PointsTo, SymbolicHeap, eq, list_seg, neq
from seplogic.pure import proves
from seplogic.terms import NULL, Var, VarKind, anchor_of, program_var

i, n = program_var("i"), program_var("n")
I, N = anchor_of(i), anchor_of(n)
l1, l2 = Var("l1"), Var("l2")


def equivalent(first, second):
    return entails(first, second).proved and entails(second, first).proved


def test_exit_condition_of_a_list_walk(load_program):
    loop = load_program("inner_loop").functions["inner_loop$loop0"]
    header = exit_condition(loop)
    assert header.conjuncts == [(i, NULL)]
    assert header.anchored_guards() == [neq(I, NULL)]
    assert header.guards() == [neq(i, NULL)]


def test_exit_condition_with_two_conjuncts(load_program):
    loop = load_program("zip").functions["zip$loop0"]
    header = exit_condition(loop)
    assert header.exit_map == {program_var("a"): NULL, program_var("b"): NULL}


def test_exit_against_a_changing_variable_is_rejected(load_program):
    loop = load_program("""
    void chase(struct node *p, struct node *q) {
      while (p != q) {
        p = p->next;
        q = q->next;
      }
    }
    """).functions["chase$loop0"]
    with pytest.raises(AnalysisFailure) as caught:
        exit_condition(loop)
    assert caught.value.stage == FailureStage.EXIT_FORM


def test_partition_splits_changed_and_unchanged():
    pre = SymbolicHeap.of([neq(I, NULL)], [PointsTo(I, "next", l1), PointsTo(N, "data", l2)])
    curr = SymbolicHeap.of([eq(i, l1), eq(n, N)],
                           [PointsTo(I, "next", l1), PointsTo(N, "data", l2)])
    part = partition(pre, curr, [i, n])
    assert part.changed == (i,)
    assert part.unchanged == (n,)
    assert part.const_part.spatial == (PointsTo(N, "data", l2),)
    assert part.transf_curr.spatial == (PointsTo(I, "next", l1),)
    assert build_transf_map(curr, part) == {i: l1}


def test_transf_map_needs_a_binding():
    curr = SymbolicHeap.of((), [PointsTo(I, "next", l1)])
    part = partition(EMP, curr, [i])
    with pytest.raises(AnalysisFailure) as caught:
        build_transf_map(curr, part)
    assert caught.value.stage == FailureStage.TRANSF_MAP


def test_list_walk_is_extrapolated(load_program):
    summaries = analyze_program(load_program("inner_loop"))
    loop = summaries["inner_loop$loop0"]
    assert loop.status == AnalysisStatus.ANALYZED
    assert loop.iterations == 2
    assert len(loop.contracts) == 2
    assert all(k.kind == ContractKind.LOOP_SUMMARY for k in loop.contracts)
    assert loop.certificates and all(c.proved for c in loop.certificates)

    entered, untouched = loop.contracts
    assert equivalent(entered.pre, SymbolicHeap.of([neq(I, NULL)], [list_seg(I, NULL)]))
    assert proves(untouched.pre, eq(I, NULL))
    assert untouched.pre.spatial == ()
    assert summaries["inner_loop"].analyzed


def test_skipping_verification_saves_an_iteration(load_program):
    loop = load_program("inner_loop").functions["inner_loop$loop0"]
    summary = analyze_loop(loop, {}, skip_verification=True)
    assert summary.analyzed
    assert summary.iterations == 1


def test_rewiring_loop_fails_at_spatial_change(load_program):
    summaries = analyze_program(load_program("zip"))
    assert summaries["zip$loop0"].failure_stage == FailureStage.SPATIAL_CHANGE
    assert summaries["zip"].failure_stage == FailureStage.CALLEE


@pytest.mark.parametrize("name", ["even_length", "weighted_sum", "motivation2", "nested_loops",
                                  "inner_loop"])
def test_corpus_loops_are_analyzed(load_program, name):
    summaries = analyze_program(load_program(name))
    for summary in summaries.values():
        assert summary.analyzed, f"{summary.function}: {summary.diagnostics}"


def test_even_length_steps_two_cells(load_program):
    loop = analyze_program(load_program("even_length"))["even_length$loop0"]
    entered = loop.contracts[0]
    # one copy of the block is two `next` cells
    assert any(seg.block != 0 for seg in entered.pre.segments())


def test_one_pass_preserves_a_list_walk(load_program):
    program = load_program("inner_loop")
    loop = program.functions["inner_loop$loop0"]
    a, b, c = Var("a"), Var("b"), Var("c")
    state = SymbolicHeap.of([eq(i, a)], [list_seg(a, NULL)])
    target = SymbolicHeap.of([eq(i, b)], [list_seg(c, b), list_seg(b, NULL)])
    report = check_preservation(state, target, [Cond("!=", i, NULL)], loop, program,
                                samples=50, max_cells=3)
    assert report.samples > 0
    assert report.violations == []

    dropped = SymbolicHeap.of([eq(i, b)], [list_seg(b, NULL)])
    report = check_preservation(state, dropped, [Cond("!=", i, NULL)], loop, program,
                                samples=50, max_cells=3)
    assert {v.kind for v in report.violations} == {"post"}


def test_loop_contracts_settle_equalities_of_existentials(load_program):
    summaries = analyze_program(load_program("nested_loops"))
    for contract in summaries["nested_loops$loop0"].contracts:
        for atom in contract.pre.pure:
            if atom.op != "=":
                continue
            settled = [side for side in (atom.left, atom.right)
                       if isinstance(side, Var) and side.kind == VarKind.LOGICAL]
            assert not settled, str(contract.pre)


def test_weighted_sum_contracts(load_program):
    summaries = analyze_program(load_program("weighted_sum"))
    o, total = program_var("o"), program_var("sum")
    O, TOTAL = anchor_of(o), anchor_of(total)

    inner = summaries["weighted_sum$loop0$loop0"]
    assert inner.analyzed
    entered = inner.contracts[0]
    assert proves(entered.pre, neq(I, NULL))
    assert any(seg.head == I and seg.tail == NULL for seg in entered.pre.segments())
    assert any(cell.source == O and cell.field == "weight" for cell in entered.pre.points_to())
    for post in entered.posts:
        assert proves(post, eq(i, NULL))
        assert not proves(post, eq(total, TOTAL))
        assert any(cell.field == "weight" for cell in post.points_to())

    outer = summaries["weighted_sum$loop0"]
    assert outer.analyzed
    nested = [seg for seg in outer.contracts[0].pre.segments()
              if seg.head == O and seg.tail == NULL]
    assert nested and block_registry.get(nested[0].block).depth == 2

    wrapper = summaries["weighted_sum"]
    assert wrapper.analyzed
    for contract in wrapper.contracts:
        assert any(seg.head == O and seg.tail == NULL for seg in contract.pre.segments())


def test_unrelated_counter_fails_verification(load_program):
    summaries = analyze_program(load_program("bounded_walk"))
    assert summaries["bounded_walk$loop0"].failure_stage == FailureStage.VERIFICATION
    assert summaries["bounded_walk"].failure_stage == FailureStage.CALLEE

    loop = load_program("bounded_walk").functions["bounded_walk$loop0"]
    assert analyze_loop(loop, {}, skip_verification=True).analyzed
