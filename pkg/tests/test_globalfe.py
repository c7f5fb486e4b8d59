import pytest
from sympy import QQ

from wfseq import ratlin
from wfseq.dofproj import standard_frames
from wfseq.errors import InvalidSpec, NotSingularEdge, SegmentMissesFace, UnsupportedDegree
from wfseq.fespace import SpaceSpec, build_space, random_member
from wfseq.globalfe import (
    FACE,
    GLOBAL_FAMILIES,
    GlobalField,
    GlobalSpaceSpec,
    apply_operator,
    build_twotet,
    check_appendix_identity,
    check_extension_property,
    check_global_conformity,
    check_global_sequence,
    check_theta_properties,
    extend_across,
    glue_by_traces,
    identity_sides,
    reference_twotet,
    theta,
)
from wfseq.pwpoly import Layout, zero_field
from wfseq.splitgeom import dot, point, sub

from .assertions import assert_all_results, assert_covers_internal_edges, assert_passed


@pytest.fixture
def gc():
    return reference_twotet()


def test_halves_share_one_face_split(gc):
    assert gc.first.face_cts[FACE] is gc.second.face_cts[FACE]
    assert gc.split_point == point(1, 1, 0)
    assert len(gc.singular_edges) == 3


def test_shared_normal_points_out_of_the_first_half(gc):
    base = gc.first.points[gc.first.face_vertex_ids(FACE)[0]]
    assert dot(gc.normal, sub(gc.first.interior_point, base)) < 0
    assert gc.frames[1].normal(FACE) == gc.normal


def test_interior_points_on_one_side():
    shared = [point(0, 0, 0), point(1, 0, 0), point(0, 1, 0)]
    with pytest.raises(SegmentMissesFace, match="same side"):
        build_twotet(shared, point(0, 0, 1), point(0, 0, 2))


def test_segment_crossing_outside_the_face():
    shared = [point(0, 0, 0), point(1, 0, 0), point(0, 1, 0)]
    with pytest.raises(SegmentMissesFace, match="outside the face"):
        build_twotet(
            shared,
            point(0, 0, 1),
            point(0, 0, -1),
            z1=point(QQ(1, 8), QQ(1, 8), QQ(1, 8)),
            z2=point(-1, -1, -1),
        )


def test_theta_needs_a_singular_edge(gc):
    zero = GlobalField(*(zero_field(Layout(half, 0)) for half in gc.halves))
    with pytest.raises(NotSingularEdge):
        theta(gc, 5, zero)
    with pytest.raises(NotSingularEdge):
        theta(gc, (0, 1), zero)


def test_theta_of_a_continuous_field(gc, rng):
    l2 = glue_by_traces(gc, SpaceSpec("L2", 1))
    div = apply_operator("div", l2.random_member(rng))
    for k in range(3):
        assert theta(gc, k, div).is_zero()
        assert theta(gc, gc.singular_edges[k], div).is_zero()


def test_unknown_global_family():
    with pytest.raises(InvalidSpec, match="Unknown global family"):
        GlobalSpaceSpec("CalV2", 1)


def test_global_degrees_map_to_lemma_degrees():
    assert GlobalSpaceSpec("S0", 3).r == 3
    assert GlobalSpaceSpec("ScrV3", 0).r == 3
    assert GlobalSpaceSpec("L3", 1).r == 4
    assert GlobalSpaceSpec("ScrV2", 1).lemma == "V2"
    assert len(GLOBAL_FAMILIES) == 9


@pytest.mark.parametrize(
    "family,degree", [("S0", 3), ("L1", 2), ("V3", 0), ("ScrV3", 0)], ids=lambda v: str(v)
)
def test_global_conformity(gc, family, degree):
    report = check_global_conformity(family, degree, gc)
    assert_passed(report)
    assert report.dim > 0


def test_theta_properties(gc):
    report = check_theta_properties(2, samples=2, seed=1, gc=gc)
    assert_all_results(report)


def test_extension_stays_smooth(gc, rng):
    assert_passed(check_extension_property(3, samples=1, seed=1, gc=gc))
    f = random_member(build_space(SpaceSpec("S0", 3), gc.first), rng)
    extended = extend_across(gc, f)
    untouched = [c for c in range(12) if c not in {gc.second.cell_over(FACE, k) for k in range(3)}]
    assert not any(any(extended.block(c)) for c in untouched)


def test_global_sequence(gc):
    assert_all_results(check_global_sequence(3, samples=1, seed=2, gc=gc))


def test_normal_trace_identity():
    report = check_appendix_identity(2, samples=3, seed=5)
    assert_all_results(report)
    assert_covers_internal_edges(report, "identity on internal edge")
    assert report.results["fails without v x n_F = 0"]


def test_identity_sides_differ_for_an_unconstrained_field(wf, rng):
    frames = standard_frames(wf)
    v = random_member(build_space(SpaceSpec("L1", 2), wf), rng)
    sides = [identity_sides(wf, v, k, frames) for k in range(3)]
    assert any(not ratlin.equal(lhs, rhs) for lhs, rhs in sides)


def test_identity_needs_a_positive_degree():
    with pytest.raises(UnsupportedDegree, match="r >= 1"):
        check_appendix_identity(0, samples=1)


def test_theta_of_an_unglued_pair(gc, rng):
    spaces = [build_space(SpaceSpec("L2", 1), half) for half in gc.halves]
    div = apply_operator("div", GlobalField(*(random_member(s, rng) for s in spaces)))
    assert not all(theta(gc, k, div).is_zero() for k in range(3))
