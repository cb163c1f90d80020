from hypothesis import given, settings
from hypothesis import strategies as st

from biabduction.contracts import atomic_contract
from frontend.statements import Assert, Assign, Assume, Cond, Load, Nondet, Store
from interpreter.execution import Interpreter, nondet_pool
from seplogic.semantics import ERR, Configuration, enumerate_models, models
from seplogic.terms import NULL, Const, FreshNames, program_var
from tests.strategies import atomic_statements, heaps

x, y, i = program_var("x"), program_var("y"), program_var("i")


def chain(length: int):
    """A stack `i` pointing at a NULL-terminated list of `length` cells."""
    cells = {(101 + k, "next"): (102 + k if k + 1 < length else 0) for k in range(length)}
    return Configuration.make({i: 101 if length else 0}, cells)


def test_load_from_missing_cell_is_an_error():
    conf = Configuration.make({x: 101, y: 0}, {})
    outcome = Interpreter().exec_stmt(conf, Load(y, x, "next"))
    assert outcome.has_error


def test_store_and_load():
    conf = Configuration.make({x: 101, y: 7}, {(101, "data"): 0})
    interpreter = Interpreter()
    stored = interpreter.exec_trace(conf, [Store(x, "data", y), Load(y, x, "data")])
    (final,) = stored.finals()
    assert final.h == {(101, "data"): 7}
    assert final.s[y] == 7


def test_assume_filters_and_assert_fails():
    conf = Configuration.make({x: 0}, {})
    interpreter = Interpreter()
    assert len(interpreter.exec_stmt(conf, Assume(Cond("!=", x, NULL)))) == 0
    assert interpreter.exec_stmt(conf, Assume(Cond("=", x, NULL))).finals() == [conf]
    assert interpreter.exec_stmt(conf, Assert(Cond("!=", x, NULL))).has_error


def test_nondet_assignment_branches_over_the_pool():
    conf = Configuration.make({x: 101}, {(101, "next"): 0})
    outcome = Interpreter().exec_stmt(conf, Assign(y, Nondet()))
    assert sorted(c.s[y] for c in outcome.finals()) == sorted(nondet_pool(conf))
    assert 102 in nondet_pool(conf)


def test_error_absorbs():
    assert Interpreter().exec_trace(ERR, [Assign(x, Const(1))]).has_error


def test_list_walk_reaches_the_end(load_program):
    program = load_program("inner_loop")
    loop = program.functions["inner_loop$loop0"]
    outcome = Interpreter(program).run_function(chain(2), loop)
    assert not outcome.bound_hit
    (final,) = outcome.finals()
    assert final.s[i] == 0
    assert final.h == chain(2).h


def test_long_list_hits_the_loop_bound(load_program):
    program = load_program("inner_loop")
    loop = program.functions["inner_loop$loop0"]
    outcome = Interpreter(program, loop_bound=8).run_function(chain(9), loop)
    assert outcome.bound_hit
    assert outcome.finals() == []


def test_calls_copy_loop_outputs_back(load_program):
    program = load_program("inner_loop")
    caller = program.functions["inner_loop"]
    outcome = Interpreter(program).run_function(chain(3), caller)
    (final,) = outcome.finals()
    assert final.s[i] == 0


def test_odd_list_fails_two_steps_at_a_time(load_program):
    program = load_program("even_length")
    function = program.functions["even_length"]
    start = Configuration.make({x: 101}, {(101, "next"): 0})
    assert Interpreter(program).run_function(start, function).has_error


@settings(max_examples=500)
@given(atomic_statements(), heaps(max_pure=1, max_spatial=2))
def test_atomic_contracts_compose_with_any_frame(stmt, frame):
    """Executing a statement from a model of `pre * frame` ends in a model
    of `post * frame`."""
    contract = atomic_contract(stmt, FreshNames("k"))
    interpreter = Interpreter()
    for model in enumerate_models(contract.pre.star(frame), max_cells=3, limit=40):
        outcome = interpreter.exec_stmt(model, stmt)
        assert not outcome.has_error, f"{stmt} fails from {model}"
        for final in outcome.finals():
            assert models(final, contract.post.star(frame)), f"{stmt}: {model} ~> {final}"


@settings(max_examples=500)
@given(atomic_statements(), st.integers(min_value=104, max_value=108),
       st.sampled_from(["next", "data"]), st.integers(min_value=0, max_value=3))
def test_disjoint_cells_are_untouched(stmt, loc, field, value):
    conf = Configuration.make({x: 101, y: 102, program_var("z"): 103},
                              {(101, "next"): 102, (102, "next"): 0, (103, "data"): 1})
    extra = Configuration.make(conf.s, {**conf.h, (loc, field): value})
    interpreter = Interpreter()
    small, large = interpreter.exec_stmt(conf, stmt), interpreter.exec_stmt(extra, stmt)
    if small.has_error:
        return
    assert not large.has_error
    grown = {Configuration.make(c.s, {**c.h, (loc, field): value}) for c in small.finals()}
    assert grown == set(large.finals())
