import dataclasses

import pytest
from sympy import QQ

from wfseq.errors import DegenerateSimplex, NotACTInternalEdge, PointNotInterior
from wfseq.globalfe import reference_twotet
from wfseq.splitgeom import (
    FrameSet,
    Simplex,
    TetComplex,
    barycenter,
    build_clough_tocher,
    build_worsey_farin,
    cross,
    ct_edge_frame,
    dot,
    edge_frame,
    incident_planes,
    point,
    reference_split,
    scale,
    singular_edges,
    sub,
    subsimplices,
    to_document,
)


def test_reference_split_shape(wf):
    assert len(wf.points) == 9
    assert len(wf.cells) == 12
    assert sum(wf.measures) == QQ(1, 6)
    assert all(v > 0 for v in wf.measures)


def test_split_counts(wf):
    assert len(subsimplices(wf, 0)) == 9
    assert len(subsimplices(wf, 0, "interior")) == 1
    assert len(subsimplices(wf, 2, "boundary")) == 12
    assert len(subsimplices(wf, 1, "on_macro_face", face=0)) == 6


def test_unknown_subsimplex_filter(wf):
    with pytest.raises(ValueError, match="Unknown filter"):
        subsimplices(wf, 1, "sideways")


def test_degenerate_macro_tetrahedron():
    with pytest.raises(DegenerateSimplex, match="zero volume"):
        build_worsey_farin([point(0, 0, 0), point(1, 0, 0), point(0, 1, 0), point(1, 1, 0)])


def test_interior_point_outside():
    vertices = [point(0, 0, 0), point(1, 0, 0), point(0, 1, 0), point(0, 0, 1)]
    with pytest.raises(PointNotInterior):
        build_worsey_farin(vertices, z=point(1, 1, 1))


def test_face_point_on_face_boundary():
    ys = [point(0, 0, 0), point(1, 0, 0), point(0, 1, 0)]
    with pytest.raises(PointNotInterior):
        build_clough_tocher(ys, point(QQ(1, 2), 0, 0))


def test_outward_normals_point_away_from_z(wf):
    for i in range(4):
        base = wf.points[wf.face_vertex_ids(i)[0]]
        assert dot(wf.outward_normal(i), sub(wf.interior_point, base)) < 0


def test_face_splits_follow_outward_normals(wf):
    for i, ct in enumerate(wf.face_cts):
        assert dot(ct.normal, wf.outward_normal(i)) > 0
        assert sum(ct.measures) == 1


def test_jump_order_s_points_away_from_q1(ct):
    for k in range(3):
        q1, q2 = ct.jump_order(k)
        s = cross(ct.normal, sub(ct.ys[k], ct.m))
        # q2 sits on the side s points to
        other = next(j for j in range(3) if j not in (k, q2))
        assert dot(sub(ct.ys[other], ct.m), s) > 0
        assert {q1, q2} == set(ct.triangles_at(k))


def test_ct_edge_frame_is_orthogonal(wf):
    frame = ct_edge_frame(wf, 0, 1)
    assert dot(frame.t, frame.s_vec) == 0
    assert dot(frame.t, frame.r_vec) == 0
    assert dot(frame.n_F, frame.s_vec) == 0


def test_locate_ct_edge(wf):
    assert wf.locate_ct_edge(wf.ct_edge_ids(2, 1)) == (2, 1)
    with pytest.raises(NotACTInternalEdge):
        wf.locate_ct_edge((0, 1))


def test_hat_function_pieces(wf):
    for i in range(4):
        assert wf.hat_value(i, wf.interior_point) == 1
        base = wf.points[wf.face_vertex_ids(i)[0]]
        assert wf.hat_value(i, base) == 0


def test_edges_of_a_single_split_are_not_singular(wf):
    # z to a face split point: three interior faces in three planes
    assert len(incident_planes(wf, (4, 8))) == 3
    assert wf.singular_edges == ()


def test_alternate_frames_rescale_the_same_directions(wf):
    standard = FrameSet(wf)
    alternate = FrameSet(wf, alternate=True)
    for i in range(4):
        assert alternate.normal(i) == scale(2, standard.normal(i))
    t = standard.ct_edge(0, 0).t
    assert alternate.ct_edge(0, 0).t == scale(3, t)


def test_shared_face_frames_fix_the_normal(wf):
    n = point(0, 0, 5)
    frames = FrameSet.for_shared_face(wf, 3, n)
    assert frames.normal(3) == n
    assert frames.anchor((0, 1)) == 3


def test_barycenter():
    assert barycenter([point(0, 0, 0), point(3, 0, 0), point(0, 3, 0)]) == point(1, 1, 0)


def test_to_document_writes_exact_strings(wf):
    document = to_document(wf)
    assert document["points"][8] == ["1/4", "1/4", "1/4"]
    assert len(document["cells"]) == 12


def test_edge_frame_by_ids(wf):
    ids = wf.ct_edge_ids(1, 2)
    assert edge_frame(wf, ids) == ct_edge_frame(wf, 1, 2)
    with pytest.raises(NotACTInternalEdge):
        edge_frame(wf, (0, 8))


def test_singular_edges_of_a_shared_face():
    assert singular_edges(reference_split()) == ()
    assert len(singular_edges(reference_twotet())) == 3


def test_alfeld_cells_group_the_split(wf):
    assert len(wf.alfeld_cells) == 4
    assert all(8 in cell.vertex_ids for cell in wf.alfeld_cells)
    for cell in range(12):
        i = wf.alfeld_index(cell)
        assert set(wf.cells[cell]) <= set(wf.alfeld_cells[i].vertex_ids) | {4 + i}


def test_face_split_edges(ct):
    assert ct.internal_edges == [(0, 3), (1, 3), (2, 3)]
    assert len(ct.boundary_edges) == 3


def test_orientation_lives_in_the_vertex_order():
    points = [point(0, 0, 0), point(1, 0, 0), point(0, 1, 0), point(0, 0, 1)]
    mesh = TetComplex(points, [(0, 1, 3, 2)])
    assert mesh.cells == ((0, 1, 2, 3),)
    assert mesh.measures == (QQ(1, 6),)
    assert [f.name for f in dataclasses.fields(Simplex)] == ["dim", "vertex_ids"]
