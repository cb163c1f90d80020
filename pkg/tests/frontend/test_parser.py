import pytest

from core.errors import SourceError
from frontend.lower import lower
from frontend.parser import parse
from frontend.source import (
    SAssign, SBinary, SField, SIf, SNondet, SReturn, SVar, SWhile, render_cond, render_source,
)


def test_parse_function_signature():
    program = parse("int f(struct node *x, int n) { return n; }")
    assert [f.name for f in program.functions] == ["f"]
    assert program.functions[0].params == ["x", "n"]
    assert isinstance(program.functions[0].body[0], SReturn)


def test_field_access_and_arithmetic():
    program = parse("int f(struct o *o, struct i *i) { int s = 0; s = s + o->weight * i->elem; return s; }")
    stmt = program.functions[0].body[1]
    assert isinstance(stmt, SAssign)
    assert stmt.target == SVar("s")
    assert isinstance(stmt.expr, SBinary) and stmt.expr.op == "+"
    product = stmt.expr.right
    assert product.op == "*"
    assert product.left == SField(SVar("o"), "weight")


def test_nondeterministic_if_and_else_if():
    program = parse("""
        int f(int x) {
          int r = 0;
          if (?) { r = 1; } else if (x == 2) { r = 2; } else { r = 3; }
          return r;
        }
    """)
    branch = program.functions[0].body[1]
    assert isinstance(branch, SIf)
    assert branch.cond.nondet
    assert isinstance(branch.orelse[0], SIf)
    assert branch.orelse[0].cond.op == "="


def test_while_with_conjunction():
    program = parse("void f(struct node *a, struct node *b) { while (a != NULL && b != NULL) { a = a->next; } }")
    loop = program.functions[0].body[0]
    assert isinstance(loop, SWhile)
    assert [c.op for c in loop.conds] == ["!=", "!="]


def test_nondet_assignment():
    program = parse("int f() { int m = ?; return m; }")
    assert isinstance(program.functions[0].body[0].expr, SNondet)


def test_syntax_error_has_position():
    with pytest.raises(SourceError) as info:
        parse("int f(int x) {\n  x = ;\n}")
    assert info.value.line == 2


def test_duplicate_function_rejected():
    with pytest.raises(SourceError, match="duplicate"):
        parse("void f() { } void f() { }")


@pytest.mark.parametrize("name", [
    "nested", "two_branches", "three_branches", "nested_loops", "nested_lists1",
    "nested_lists2", "even_length", "motivation1", "motivation2", "weighted_sum",
    "inner_loop", "zip",
])
def test_render_then_parse_gives_isomorphic_cfgs(corpus_dir, name):
    source = parse((corpus_dir / f"{name}.tl").read_text(encoding="utf-8"))
    again = parse(render_source(source))
    first, second = lower(source), lower(again)
    assert first.call_order == second.call_order
    for fname in first.call_order:
        assert first.functions[fname].cfg.canonical() == second.functions[fname].cfg.canonical()


def test_equality_renders_in_surface_syntax():
    program = parse("int f(int mode) { if (mode == 0) { return 1; } while (mode != 1 && mode == 2) { mode = 1; } return 0; }")
    branch, loop = program.functions[0].body[0], program.functions[0].body[1]
    assert render_cond(branch.cond) == "mode == 0"
    assert [render_cond(c) for c in loop.conds] == ["mode != 1", "mode == 2"]
