import pytest

from wfseq.errors import DimensionMismatch, InvalidSpec, NoFormula
from wfseq.fespace import (
    SpaceSpec,
    build_space,
    formula_dimension,
    image,
    intersect,
    polynomial_space,
    random_member,
    reproduces_polynomials,
    same_span,
    subspace,
)
from wfseq.pwpoly import Layout, field_from_expressions, mean_row, operator

from .assertions import assert_in_space, assert_subspace


@pytest.mark.parametrize(
    "family,degree,bc,expected",
    [
        ("V0", 1, "none", 9),
        ("V3", 0, "none", 12),
        ("V3", 0, "zero", 11),
        ("S0", 3, "none", 28),
        ("L1", 2, "none", 105),
        ("V2", 1, "none", 90),
        ("S1", 2, "none", 42),
        ("L2", 1, "none", 27),
        ("CalV2", 1, "zero", 38),
        ("CalV3", 0, "none", 4),
        ("CalV3", 0, "zero", 3),
    ],
    ids=lambda v: str(v),
)
def test_split_tetrahedron_dimensions(wf, family, degree, bc, expected):
    assert build_space(SpaceSpec(family, degree, bc), wf).dim == expected


@pytest.mark.parametrize(
    "family,degree,bc,expected",
    [
        ("ctL0", 1, "none", 4),
        ("ctS0", 3, "none", 12),
        ("ctV2", 0, "none", 3),
        ("ctR0", 3, "none", 3),
        ("ctR1", 2, "none", 3),
    ],
    ids=lambda v: str(v),
)
def test_face_split_dimensions(ct, family, degree, bc, expected):
    assert build_space(SpaceSpec(family, degree, bc), ct).dim == expected


@pytest.mark.parametrize(
    "family,degree,bc",
    [("V1", 1, "none"), ("L0", 2, "zero"), ("S0", 3, "zero"), ("V2", 2, "zero")],
    ids=lambda v: str(v),
)
def test_dimensions_match_closed_forms(wf, family, degree, bc):
    spec = SpaceSpec(family, degree, bc)
    assert build_space(spec, wf).dim == formula_dimension(spec)


def test_negative_degree_gives_trivial_space(wf):
    assert build_space(SpaceSpec("L2", -1), wf).dim == 0


def test_unknown_family():
    with pytest.raises(InvalidSpec, match="Unknown space family"):
        SpaceSpec("W7", 1)


def test_unknown_boundary_condition():
    with pytest.raises(InvalidSpec, match="Unknown boundary condition"):
        SpaceSpec("S0", 1, "periodic")


def test_r_spaces_take_no_boundary_condition():
    with pytest.raises(InvalidSpec):
        SpaceSpec("ctR0", 3, "zero")


def test_formula_below_its_range():
    with pytest.raises(NoFormula):
        formula_dimension(SpaceSpec("V0", 0, "zero"))


def test_space_on_wrong_mesh(ct):
    with pytest.raises(InvalidSpec):
        build_space(SpaceSpec("S0", 3), ct)


def test_label():
    assert SpaceSpec("L1", 2, "zero").label == "ring-L1_2"
    assert SpaceSpec("L1", 2).with_degree(3).label == "L1_3"


def test_smooth_spaces_nest(wf):
    s0 = build_space(SpaceSpec("S0", 3), wf)
    l0 = build_space(SpaceSpec("L0", 3), wf)
    assert_subspace(s0, l0)
    ring = build_space(SpaceSpec("S0", 3, "zero"), wf)
    assert_subspace(ring, s0)


def test_global_polynomials_are_members(wf):
    space = build_space(SpaceSpec("S0", 3), wf)
    assert_in_space(field_from_expressions(space.layout, "x*y*z - y*y + 1"), space)


@pytest.mark.parametrize("degree", [1, 2])
def test_low_degree_s0_is_polynomial(wf, degree):
    assert reproduces_polynomials(SpaceSpec("S0", degree), wf)


def test_s0_3_is_more_than_polynomials(wf):
    assert not reproduces_polynomials(SpaceSpec("S0", 3), wf)


def test_grad_maps_s0_into_l1(wf):
    s0 = build_space(SpaceSpec("S0", 3), wf)
    grad = operator("grad", s0.layout)
    l1 = build_space(SpaceSpec("L1", 2), wf)
    assert_subspace(image(grad.matrix, s0, grad.target), l1)


def test_intersect_and_subspace(wf):
    l2 = build_space(SpaceSpec("L2", 1), wf)
    ring_v2 = build_space(SpaceSpec("V2", 1, "zero"), wf)
    both = intersect(l2, ring_v2)
    assert_subspace(both, l2)
    assert_subspace(both, ring_v2)
    mean_free = subspace(build_space(SpaceSpec("V3", 0), wf), mean_row(Layout(wf, 0)))
    assert mean_free.dim == 11


def test_intersect_needs_one_layout(wf):
    with pytest.raises(DimensionMismatch):
        intersect(build_space(SpaceSpec("L2", 1), wf), build_space(SpaceSpec("L2", 2), wf))


def test_random_member_belongs(wf, rng):
    space = build_space(SpaceSpec("L1", 1, "zero"), wf)
    assert_in_space(random_member(space, rng), space)


def test_polynomial_space(wf):
    layout = Layout(wf, 2)
    assert polynomial_space(layout, wf.macro_vertices).dim == 10
    assert same_span(
        polynomial_space(layout, wf.macro_vertices), build_space(SpaceSpec("S0", 2), wf)
    )
