"""Two split tetrahedra sharing a face.

Both halves see the same Clough–Tocher split of the shared face F and use
the outward normal of the first half as n_F, so traces taken from either
side land on one layout and can be compared coefficientwise. Global spaces
are formed by equating the degrees of freedom carried by F.
"""

import functools
from dataclasses import dataclass

import numpy as np

from . import ratlin, settings
from .dofproj import LEMMAS, build_dofs, standard_frames
from .errors import (
    InvalidSpec,
    NotSingularEdge,
    PointNotInterior,
    SegmentMissesFace,
    UnsupportedDegree,
)
from .fespace import SpaceBasis, SpaceSpec, build_space, random_member, subspace
from .logger import log_call, logger
from .pwpoly import (
    Layout,
    PiecewiseField,
    apply,
    ct_jump_matrix,
    dot_with,
    extend_cell,
    face_patch,
    face_trace_matrix,
    field_from_blocks,
    operator,
    restriction_indices,
)
from .splitgeom import (
    FrameSet,
    add,
    barycenter,
    build_clough_tocher,
    build_worsey_farin,
    cross,
    dot,
    point,
    reference_split,
    scale,
    sub,
)


FACE = 0
IDENTITY_MIN_DEGREE = 1


@dataclass(frozen=True)
class GlobalComplex:
    first: object
    second: object
    normal: tuple
    frames: tuple

    @property
    def halves(self):
        return (self.first, self.second)

    @property
    def ct(self):
        return self.first.face_cts[FACE]

    @property
    def split_point(self):
        return self.ct.m

    @property
    def singular_edges(self):
        """The internal edges of the shared face split, as complex ids."""
        return tuple(self.first.ct_edge_ids(FACE, k) for k in range(3))

    def edge_frame(self, k):
        return self.frames[0].ct_edge(FACE, k)


@dataclass(frozen=True)
class GlobalField:
    """One piecewise polynomial per half."""

    first: PiecewiseField
    second: PiecewiseField

    @property
    def parts(self):
        return (self.first, self.second)


def build_twotet(shared, apex1, apex2, z1=None, z2=None):
    """Split two tetrahedra over a common face with one shared face split.

    The split point of the shared face is where the segment between the
    interior points crosses it.
    """
    shared = [tuple(ratlin.rat(x) for x in p) for p in shared]
    apex1 = tuple(ratlin.rat(x) for x in apex1)
    apex2 = tuple(ratlin.rat(x) for x in apex2)
    z1 = barycenter([apex1, *shared]) if z1 is None else tuple(ratlin.rat(x) for x in z1)
    z2 = barycenter([apex2, *shared]) if z2 is None else tuple(ratlin.rat(x) for x in z2)
    base = shared[0]
    n = cross(sub(shared[1], base), sub(shared[2], base))
    d1, d2 = dot(n, sub(z1, base)), dot(n, sub(z2, base))
    if d1 * d2 >= 0:
        msg = f"Interior points {z1} and {z2} lie on the same side of the shared face"
        raise SegmentMissesFace(msg)
    m = add(z1, scale(d1 / (d1 - d2), sub(z2, z1)))
    try:
        build_clough_tocher(shared, m)
    except PointNotInterior as e:
        msg = f"The segment between {z1} and {z2} crosses the face plane at {m}, outside the face"
        raise SegmentMissesFace(msg) from e
    first = build_worsey_farin([apex1, *shared], z1, [m, None, None, None])
    second = build_worsey_farin(
        [apex2, *shared], z2, [m, None, None, None], face_cts={FACE: first.face_cts[FACE]}
    )
    normal = first.outward_normal(FACE)
    frames = (
        FrameSet.for_shared_face(first, FACE, normal),
        FrameSet.for_shared_face(second, FACE, normal),
    )
    logger.debug("built two-tet complex", split_point=[str(x) for x in m])
    return GlobalComplex(first, second, normal, frames)


@functools.cache
def reference_twotet():
    """Mirror images over the face (0,0,0), (3,0,0), (0,3,0), apexes above its centroid."""
    return build_twotet(
        [point(0, 0, 0), point(3, 0, 0), point(0, 3, 0)], point(1, 1, 3), point(1, 1, -3)
    )


def _edge_index(gc, edge):
    if isinstance(edge, int):
        if edge in (0, 1, 2):
            return edge
    else:
        for k, ids in enumerate(gc.singular_edges):
            if set(ids) == set(edge):
                return k
    msg = f"{edge} is not an internal edge of the shared face split"
    raise NotSingularEdge(msg)


def _jump_rows(gc, side, layout, k):
    half = gc.halves[side]
    jump, target = ct_jump_matrix(layout, half, FACE, k, gc.frames[side])
    return jump, target


def theta(gc, edge, field):
    """The alternating sum of the four one-sided traces along a singular edge.

    Cells are taken in the order (T1 over Q1, T1 over Q2, T2 over Q2, T2 over
    Q1), so theta is the difference of the two one-sided jumps.
    """
    k = _edge_index(gc, edge)
    first, target = _jump_rows(gc, 0, field.first.layout, k)
    second, _ = _jump_rows(gc, 1, field.second.layout, k)
    values = first * field.first.coefficients - second * field.second.coefficients
    return PiecewiseField(target, ratlin.normal(values))


def map_field(field, fn):
    """Apply a per-half linear map given as fn(layout) -> (matrix, target)."""
    parts = []
    for part in field.parts:
        matrix, target = fn(part.layout)
        parts.append(apply(matrix, part, target))
    return GlobalField(*parts)


def apply_operator(op, field):
    def fn(layout):
        derivative = operator(op, layout)
        return derivative.matrix, derivative.target

    return map_field(field, fn)


def along(direction, field):
    return map_field(field, lambda layout: (dot_with(layout, direction), layout.with_arity(1)))


@dataclass(frozen=True)
class GluedSpace:
    label: str
    parts: tuple

    @property
    def dim(self):
        return self.parts[0].basis.shape[1]

    def member(self, coefficients):
        column = ratlin.column(coefficients)
        return GlobalField(
            *(PiecewiseField(p.layout, ratlin.normal(p.basis * column)) for p in self.parts)
        )

    def random_member(self, rng):
        return self.member(ratlin.random_integers(rng, self.dim))


def glue(label, spaces, rows):
    """Pairs (u1, u2) from the two spaces with rows[0]·u1 = rows[1]·u2."""
    first, second = spaces
    system = ratlin.hstack(
        ratlin.normal(rows[0] * first.basis), ratlin.normal(-(rows[1] * second.basis))
    )
    kernel = ratlin.nullspace(system)
    top = ratlin.rows(kernel, list(range(first.dim)))
    bottom = ratlin.rows(kernel, list(range(first.dim, first.dim + second.dim)))
    parts = (
        SpaceBasis(first.label, first.layout, ratlin.normal(first.basis * top)),
        SpaceBasis(second.label, second.layout, ratlin.normal(second.basis * bottom)),
    )
    logger.debug("glued", space=label, dim=kernel.shape[1])
    return GluedSpace(label, parts)


def glue_by_dofs(gc, lemma, r):
    """The global space induced by the lemma's DOFs carried by the shared face."""
    target = LEMMAS[lemma].target_spec(r)
    spaces, rows = [], []
    for half, frames in zip(gc.halves, gc.frames):
        spaces.append(build_space(target, half))
        dofs = build_dofs(lemma, r, half, frames)
        rows.append(dofs.carried_by(half.face_point_ids(FACE)))
    return glue(f"global {target.label}", spaces, rows)


def _trace_rows(gc, side, layout, kinds):
    patch = face_patch(gc.halves[side], FACE, gc.frames[side])
    blocks = [face_trace_matrix(layout, patch, kind, gc.normal)[0] for kind in kinds]
    return ratlin.vstack(*blocks, ncols=layout.size)


def _value_kinds(layout):
    return ("value",) if layout.arity == 1 else ("tangential_part", "normal_component")


def glue_by_traces(gc, spec):
    """Members of spec on both halves whose values agree on the shared face."""
    spaces = [build_space(spec, half) for half in gc.halves]
    rows = [_trace_rows(gc, i, s.layout, _value_kinds(s.layout)) for i, s in enumerate(spaces)]
    return glue(f"continuous {spec.label}", spaces, rows)


# A condition on a glued pair is a function (gc, side, layout) -> rows; it
# holds when rows(side 0)·u1 = rows(side 1)·u2 on the whole glued space.
def _continuity(pre_op=None, kinds=None):
    def rows(gc, side, layout):
        if pre_op is None:
            return _trace_rows(gc, side, layout, kinds or _value_kinds(layout))
        derivative = operator(pre_op, layout)
        inner = _trace_rows(gc, side, derivative.target, kinds or _value_kinds(derivative.target))
        return inner * derivative.matrix

    return rows


def _theta_free(pre_op=None, tangent=False):
    def rows(gc, side, layout):
        out = []
        for k in range(3):
            matrix, current = ratlin.identity(layout.size), layout
            if pre_op is not None:
                derivative = operator(pre_op, current)
                matrix, current = derivative.matrix, derivative.target
            if tangent:
                matrix = dot_with(current, gc.edge_frame(k).t) * matrix
                current = current.with_arity(1)
            jump, _ = _jump_rows(gc, side, current, k)
            out.append(jump * matrix)
        return ratlin.vstack(*out, ncols=layout.size)

    return rows


@dataclass(frozen=True)
class GlobalSpaceSpec:
    family: str
    degree: int

    def __post_init__(self):
        if self.family not in GLOBAL_FAMILIES:
            msg = f"Unknown global family {self.family!r}; expected one of {sorted(GLOBAL_FAMILIES)}"
            raise InvalidSpec(msg)

    @property
    def lemma(self):
        return GLOBAL_FAMILIES[self.family][0]

    @property
    def r(self):
        return self.degree + LEMMAS[self.lemma].offset


# family: (lemma, {condition name: condition})
GLOBAL_FAMILIES = {
    "S0": ("S0", {"value": _continuity(), "gradient": _continuity("grad")}),
    "S1": ("S1", {"value": _continuity(), "curl": _continuity("curl")}),
    "S2": ("S2", {"value": _continuity(), "div": _continuity("div")}),
    "L1": ("L1", {"value": _continuity()}),
    "L2": ("L2", {"value": _continuity()}),
    "L3": ("L3", {"value": _continuity()}),
    "ScrV2": (
        "V2",
        {"normal": _continuity(kinds=("normal_component",)), "theta": _theta_free(tangent=True)},
    ),
    "ScrV3": ("V3a", {"theta": _theta_free()}),
    "V3": ("V3", {}),
}


def _holds(gc, glued, condition):
    sides = [
        ratlin.normal(condition(gc, i, part.layout) * part.basis)
        for i, part in enumerate(glued.parts)
    ]
    return ratlin.equal(sides[0], sides[1])


@dataclass(frozen=True)
class ConformityReport:
    spec: GlobalSpaceSpec
    dim: int
    results: dict

    @property
    def passed(self):
        return all(self.results.values())


@log_call
def check_global_conformity(family, degree, gc=None):
    """Glue by shared-face DOFs and certify the smoothness of the global space."""
    gc = gc or reference_twotet()
    spec = GlobalSpaceSpec(family, degree)
    glued = glue_by_dofs(gc, spec.lemma, spec.r)
    _, conditions = GLOBAL_FAMILIES[family]
    results = {name: _holds(gc, glued, condition) for name, condition in conditions.items()}
    return ConformityReport(spec, glued.dim, results)


@dataclass(frozen=True)
class PropertyReport:
    name: str
    r: int
    samples: int
    results: dict

    @property
    def passed(self):
        return all(self.results.values())


def _theta_vanishes(gc, field):
    return all(theta(gc, k, field).is_zero() for k in range(3))


@log_call
def check_theta_properties(r, samples=30, seed=None, gc=None):
    """theta(curl w . t) and theta(div v) vanish on continuous global fields."""
    gc = gc or reference_twotet()
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    l1 = glue_by_traces(gc, SpaceSpec("L1", r))
    l2 = glue_by_traces(gc, SpaceSpec("L2", r))
    curl_ok, div_ok = True, True
    for _ in range(samples):
        w = apply_operator("curl", l1.random_member(rng))
        curl_ok &= all(
            theta(gc, k, along(gc.edge_frame(k).t, w)).is_zero() for k in range(3)
        )
        div_ok &= _theta_vanishes(gc, apply_operator("div", l2.random_member(rng)))
    spaces = [build_space(SpaceSpec("L2", r), half) for half in gc.halves]
    loose = GlobalField(*(random_member(s, rng) for s in spaces))
    results = {
        "theta(curl w . t) = 0 on continuous L1": curl_ok,
        "theta(div v) = 0 on continuous L2": div_ok,
        "theta(div v) != 0 on an unglued pair": not _theta_vanishes(
            gc, apply_operator("div", loose)
        ),
    }
    return PropertyReport("theta", r, samples, results)


def _agree(layout, coefficients, cell_a, cell_b):
    """Whether the pieces on two cells agree on their common facet."""
    mesh = layout.mesh
    shared = tuple(v for v in mesh.cells[cell_a] if v in mesh.cells[cell_b])
    picks_a = restriction_indices(layout.degree, mesh.cells[cell_a], shared)
    picks_b = restriction_indices(layout.degree, mesh.cells[cell_b], shared)
    values = ratlin.entries(coefficients)
    for comp in range(layout.arity):
        start_a, start_b = layout.offset(cell_a, comp), layout.offset(cell_b, comp)
        if any(values[start_a + i] != values[start_b + j] for i, j in zip(picks_a, picks_b)):
            return False
    return True


def extend_across(gc, field):
    """Extend the pieces over the shared face from the first half into the
    cells of the second half over the same triangles; zero elsewhere."""
    second = gc.second
    layout = Layout(second, field.degree, field.arity)
    zero = [[0] * layout.nb for _ in range(layout.arity)]
    blocks = [zero] * layout.ncells
    for k in range(3):
        target = second.cell_over(FACE, k)
        blocks[target] = extend_cell(field, gc.first.cell_over(FACE, k), layout, target)
    return field_from_blocks(layout, blocks)


@log_call
def check_extension_property(r, samples=5, seed=None, gc=None):
    """Extensions of C1 fields across the shared face stay C1 inside K2."""
    gc = gc or reference_twotet()
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    space = build_space(SpaceSpec("S0", r), gc.first)
    cells = [gc.second.cell_over(FACE, k) for k in range(3)]
    pairs = [(a, b) for i, a in enumerate(cells) for b in cells[i + 1 :]]
    ok = True
    for _ in range(samples):
        q = extend_across(gc, random_member(space, rng))
        grad = operator("grad", q.layout)(q)
        for a, b in pairs:
            ok &= _agree(q.layout, q.coefficients, a, b)
            ok &= _agree(grad.layout, grad.coefficients, a, b)
    return PropertyReport("extension", r, samples, {"C1 inside K2": ok})


@log_call
def check_global_sequence(r, samples=5, seed=None, gc=None):
    """grad, curl and div of glued SLVV members land in the next global space
    and compose to zero."""
    gc = gc or reference_twotet()
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    s0 = glue_by_dofs(gc, "S0", r)
    l1 = glue_by_dofs(gc, "L1", r)
    continuity = _continuity()
    normal = _continuity(kinds=("normal_component",))
    results = {
        "grad S0 continuous": True,
        "curl grad = 0": True,
        "curl L1 normal-continuous": True,
        "theta(curl v . t) = 0": True,
        "div curl = 0": True,
    }
    for _ in range(samples):
        g = apply_operator("grad", s0.random_member(rng))
        results["grad S0 continuous"] &= _pair_agrees(gc, g, continuity)
        results["curl grad = 0"] &= all(p.is_zero() for p in apply_operator("curl", g).parts)
        w = apply_operator("curl", l1.random_member(rng))
        results["curl L1 normal-continuous"] &= _pair_agrees(gc, w, normal)
        results["theta(curl v . t) = 0"] &= all(
            theta(gc, k, along(gc.edge_frame(k).t, w)).is_zero() for k in range(3)
        )
        results["div curl = 0"] &= all(p.is_zero() for p in apply_operator("div", w).parts)
    return PropertyReport("global sequence", r, samples, results)


def _pair_agrees(gc, field, condition):
    values = [
        ratlin.normal(condition(gc, i, part.layout) * part.coefficients)
        for i, part in enumerate(field.parts)
    ]
    return ratlin.equal(values[0], values[1])


def identity_sides(c, v, k, frames, face=FACE):
    """(jump of curl v . t, jump of grad(v . n) . s / |n|^2) across internal edge k."""
    n = frames.normal(face)
    edge = frames.ct_edge(face, k)
    curl = operator("curl", v.layout)
    lhs_layout = curl.target.with_arity(1)
    jump, _ = ct_jump_matrix(lhs_layout, c, face, k, frames)
    lhs = jump * dot_with(curl.target, edge.t) * curl.matrix
    scalar = v.layout.with_arity(1)
    grad = operator("grad", scalar)
    rhs = jump * dot_with(grad.target, edge.s_vec) * grad.matrix * dot_with(v.layout, n)
    rhs = rhs.mul(ratlin.ONE / dot(n, n))
    return (
        ratlin.normal(lhs * v.coefficients),
        ratlin.normal(rhs * v.coefficients),
    )


@log_call
def check_appendix_identity(r, samples=25, seed=None, c=None, face=FACE):
    """For v with v x n_F = 0 on F, the curl jump equals the jump of the
    tangential derivative of v . n_F."""
    if r < IDENTITY_MIN_DEGREE:
        msg = f"The curl jump identity needs r >= {IDENTITY_MIN_DEGREE}, got {r}"
        raise UnsupportedDegree(msg)
    c = c or reference_split()
    frames = standard_frames(c)
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    space = build_space(SpaceSpec("L1", r), c)
    patch = face_patch(c, face, frames)
    tangential, _ = face_trace_matrix(space.layout, patch, "tangential_part", frames.normal(face))
    constrained = subspace(space, tangential)
    results = {f"identity on internal edge {k}": True for k in range(3)}
    for _ in range(samples):
        v = random_member(constrained, rng)
        for k in range(3):
            lhs, rhs = identity_sides(c, v, k, frames, face)
            results[f"identity on internal edge {k}"] &= ratlin.equal(lhs, rhs)
    witness = random_member(space, rng)
    results["fails without v x n_F = 0"] = any(
        not ratlin.equal(*identity_sides(c, witness, k, frames, face)) for k in range(3)
    )
    return PropertyReport("normal-trace identity", r, samples, results)
