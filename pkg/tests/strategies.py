"""hypothesis strategies for small symbolic heaps, statements and frames."""
from hypothesis import strategies as st

from frontend.statements import Assign, Load, Store
from seplogic.formula import PointsTo, SymbolicHeap, eq, list_seg, neq
from seplogic.terms import NULL, Const, Var, program_var

LOGICALS = [Var("a"), Var("b"), Var("c")]
FIELDS = ["next", "data"]

logicals = st.sampled_from(LOGICALS)
values = st.sampled_from(LOGICALS + [NULL])


@st.composite
def pure_atoms(draw):
    left, right = draw(values), draw(values)
    return draw(st.sampled_from([eq, neq]))(left, right)


@st.composite
def cells(draw):
    return PointsTo(draw(logicals), draw(st.sampled_from(FIELDS)), draw(values))


@st.composite
def segments(draw):
    return list_seg(draw(logicals), draw(values))


spatial_atoms = st.one_of(cells(), cells(), segments())


@st.composite
def heaps(draw, max_pure: int = 2, max_spatial: int = 3):
    pure = draw(st.lists(pure_atoms(), max_size=max_pure))
    spatial = draw(st.lists(spatial_atoms, max_size=max_spatial))
    return SymbolicHeap.of(pure, spatial)


@st.composite
def chains(draw):
    """NULL- or variable-terminated chains of `next` cells, possibly with
    extra `data` cells; good material for folding."""
    length = draw(st.integers(min_value=1, max_value=3))
    nodes = LOGICALS[:length]
    end = draw(st.sampled_from([NULL] + LOGICALS[length:]))
    spatial = [PointsTo(n, "next", m) for n, m in zip(nodes, nodes[1:] + [end])]
    if draw(st.booleans()):
        spatial.append(PointsTo(nodes[0], "data", Const(draw(st.integers(0, 2)))))
    return SymbolicHeap.of((), spatial)


@st.composite
def weakenings(draw, heap: SymbolicHeap):
    """`heap` with some pure atoms dropped and maybe a `next` cell widened to a segment."""
    pure = [a for a in sorted(heap.pure, key=str) if draw(st.booleans())]
    spatial = list(heap.spatial)
    nexts = [a for a in spatial if isinstance(a, PointsTo) and a.field == "next"]
    if nexts and draw(st.booleans()):
        cell = draw(st.sampled_from(nexts))
        spatial[spatial.index(cell)] = list_seg(cell.source, cell.value)
    return SymbolicHeap.of(pure, spatial)


X, Y, Z = program_var("x"), program_var("y"), program_var("z")
PROGRAM_VARS = [X, Y, Z]


@st.composite
def atomic_statements(draw):
    """Loads, stores and assignments over x, y, z; no nondeterminism."""
    kind = draw(st.sampled_from(["assign", "load", "store"]))
    target = draw(st.sampled_from(PROGRAM_VARS))
    other = draw(st.sampled_from(PROGRAM_VARS))
    field = draw(st.sampled_from(FIELDS))
    if kind == "assign":
        expr = draw(st.sampled_from([other, NULL, Const(1)]))
        return Assign(target, expr)
    if kind == "load":
        return Load(target, other, field)
    return Store(target, field, draw(st.sampled_from([other, NULL, Const(2)])))
