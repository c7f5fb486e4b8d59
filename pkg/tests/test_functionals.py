import pytest
from sympy import QQ

from wfseq import ratlin
from wfseq.errors import DimensionMismatch
from wfseq.fespace import SpaceSpec, build_space
from wfseq.functionals import (
    MACRO_EDGES,
    Functional,
    RowCollector,
    edge_derivative_moment_rows,
    edge_moment_rows,
    edge_vector_moment_rows,
    face_moment_rows,
    image_space,
    jump_moment_rows,
    mean_free,
    mean_rows,
    vertex_derivative_rows,
    vertex_rows,
    volume_moment_rows,
)
from wfseq.pwpoly import Layout, evaluate, field_from_expressions, random_polynomial
from wfseq.splitgeom import FrameSet, point


def _value(rows, f):
    return ratlin.entries(ratlin.normal(rows * f.coefficients))


def test_macro_edges():
    assert len(MACRO_EDGES) == 6
    assert MACRO_EDGES[0] == (0, 1)


def test_vertex_rows_evaluate_at_vertices(wf):
    f = field_from_expressions(Layout(wf, 2), "x*y + 2*z + 1")
    for v in range(4):
        cell = wf.cells_containing((v,))[0]
        assert _value(vertex_rows(f.layout, v), f) == [evaluate(f, wf.points[v], cell)]


def test_vertex_rows_of_a_vector_field(wf):
    f = field_from_expressions(Layout(wf, 1, 3), ["x", "y + 1", "3"])
    directions = [point(1, 0, 0), point(1, 1, 0)]
    # at vertex 1 = (1, 0, 0) the field is (1, 1, 3)
    assert _value(vertex_rows(f.layout, 1, directions), f) == [1, 2]


def test_vertex_derivatives(wf):
    f = field_from_expressions(Layout(wf, 2), "x*y + z")
    directions = [point(1, 0, 0), point(0, 1, 0), point(0, 0, 1)]
    assert _value(vertex_derivative_rows(f.layout, 1, directions), f) == [0, 1, 1]


def test_edge_moment_of_a_constant(wf):
    f = field_from_expressions(Layout(wf, 2), "1")
    assert _value(edge_moment_rows(f.layout, (0, 1), 0), f) == [1]
    assert edge_moment_rows(f.layout, (0, 1), -1).shape == (0, f.layout.size)


def test_edge_moment_weights(wf):
    # x on the edge from (0,0,0) to (1,0,0) against the two linear Bernstein weights
    f = field_from_expressions(Layout(wf, 1), "x")
    assert _value(edge_moment_rows(f.layout, (0, 1), 1), f) == [QQ(1, 6), QQ(1, 3)]


def test_edge_vector_and_derivative_moments(wf):
    f = field_from_expressions(Layout(wf, 1, 3), ["1", "2", "0"])
    rows = edge_vector_moment_rows(f.layout, (0, 1), 0, [point(1, 0, 0), point(0, 1, 0)])
    assert _value(rows, f) == [1, 2]
    g = field_from_expressions(Layout(wf, 2), "y*y + 3*y")
    rows = edge_derivative_moment_rows(g.layout, (0, 1), 0, [point(0, 1, 0)])
    assert _value(rows, g) == [3]


def test_face_moments_see_only_the_face(wf):
    frames = FrameSet(wf)
    test = build_space(SpaceSpec("ctV2", 0), frames.face_ct(3))
    layout = Layout(wf, 1)
    rows = face_moment_rows(layout, frames, 3, "value", test)
    assert rows.shape == (3, layout.size)
    # face 3 is z = 0
    assert _value(rows, field_from_expressions(layout, "z")) == [0, 0, 0]
    assert any(_value(rows, field_from_expressions(layout, "1")))


def test_face_moments_need_the_face_split(wf, ct):
    frames = FrameSet(wf)
    test = build_space(SpaceSpec("ctV2", 0), ct)
    with pytest.raises(DimensionMismatch, match="does not live on the split"):
        face_moment_rows(Layout(wf, 1), frames, 0, "value", test)


def test_polynomials_have_no_jump_moments(wf, rng):
    frames = FrameSet(wf)
    f = random_polynomial(Layout(wf, 3), wf.macro_vertices, rng)
    for face in range(4):
        for k in range(3):
            assert ratlin.is_zero(jump_moment_rows(f.layout, frames, face, k, 2) * f.coefficients)


def test_volume_moments_and_mean(wf):
    f = field_from_expressions(Layout(wf, 1), "1")
    assert _value(mean_rows(f.layout), f) == [QQ(1, 6)]
    v3 = build_space(SpaceSpec("V3", 1), wf)
    assert volume_moment_rows(f.layout, v3).shape == (v3.dim, f.layout.size)
    assert volume_moment_rows(f.layout, build_space(SpaceSpec("S0", 3, "zero"), wf)).shape[0] == 0


def test_functional_call(wf):
    f = field_from_expressions(Layout(wf, 1), "x + 5")
    functional = Functional(vertex_rows(f.layout, 0), "vertex-value", (0,), 0)
    assert functional(f) == 5


def test_row_collector(wf):
    layout = Layout(wf, 1)
    rows = RowCollector(layout.size)
    rows.add("vertex", (0,), vertex_rows(layout, 0))
    rows.add("nothing", (1,), ratlin.zeros(0, layout.size))
    assert rows.matrix().shape == (1, layout.size)
    assert rows.tags == [("vertex", (0,), 0)]
    with pytest.raises(DimensionMismatch, match="expected"):
        rows.add("bad", (0,), ratlin.zeros(1, 3))


def test_empty_collector(wf):
    assert RowCollector(5).matrix().shape == (0, 5)


def test_image_space_and_mean_free(wf):
    assert image_space("grad", SpaceSpec("S0", 2), wf).dim == 9
    assert mean_free(build_space(SpaceSpec("V3", 0), wf)).dim == 11
