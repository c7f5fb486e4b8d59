"""Degrees of freedom on a split tetrahedron and the projections they induce.

Each lemma names a target space and a list of functional classes. The
classes are assembled as exact rows acting on any piecewise polynomial
layout of sufficient degree, so the same rows both certify unisolvency on
the target space and define the projection of arbitrary inputs.
"""

import functools
import threading
from dataclasses import dataclass, field

import numpy as np

from . import ratlin, settings
from .errors import DimensionMismatch, InvalidSpec, UnsolvedSystem, UnsupportedDegree
from .fespace import SpaceSpec, build_space, contains, intersect, random_member, subspace
from .functionals import (
    MACRO_EDGES,
    MACRO_FACES,
    MACRO_VERTICES,
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
from .logger import log_call, logger
from .pwpoly import (
    Layout,
    PiecewiseField,
    apply,
    ct_jump_matrix,
    dot_with,
    elevation,
    face_patch,
    face_trace_matrix,
    field_from_expressions,
    jump_matrix,
    operator,
    random_polynomial,
)
from .splitgeom import FrameSet, reference_split


@dataclass(frozen=True)
class Lemma:
    family: str
    offset: int
    min_degree: int

    def target_spec(self, r):
        return SpaceSpec(self.family, r - self.offset)


LEMMAS = {
    "S0": Lemma("S0", 0, 3),
    "L1": Lemma("L1", 1, 3),
    "V2": Lemma("V2", 2, 3),
    "V3": Lemma("V3", 3, 3),
    "S1": Lemma("S1", 1, 3),
    "L2": Lemma("L2", 2, 3),
    "V3a": Lemma("V3", 3, 3),
    "S2": Lemma("S2", 2, 4),
    "L3": Lemma("L3", 3, 4),
}

# diagram: lemmas for the four slots
DIAGRAMS = {
    "SLVV": ("S0", "L1", "V2", "V3"),
    "SSLV": ("S0", "S1", "L2", "V3a"),
    "SSSL": ("S0", "S1", "S2", "L3"),
}


@functools.cache
def standard_frames(c):
    return FrameSet(c)


@functools.cache
def alternate_frames(c):
    return FrameSet(c, alternate=True)


def _lemma(name):
    if name not in LEMMAS:
        msg = f"Unknown DOF set {name!r}; expected one of {sorted(LEMMAS)}"
        raise InvalidSpec(msg)
    return LEMMAS[name]


def _face_space(frames, face, family, degree, bc="none"):
    return build_space(SpaceSpec(family, degree, bc), frames.face_ct(face))


def _face_image(frames, face, op, family, degree):
    return image_space(op, SpaceSpec(family, degree, "zero"), frames.face_ct(face))


def _ring(family, degree):
    return SpaceSpec(family, degree, "zero")


def _vertices(rows, tag, layout, frames, pre=None, vector=False):
    directions = frames.vertex_basis() if vector else None
    for v in MACRO_VERTICES:
        block = vertex_rows(layout, v, directions)
        rows.add(tag, (v,), block if pre is None else block * pre)


def _edges(rows, tag, layout, frames, k, pre=None, vector=False):
    for e in MACRO_EDGES:
        if vector:
            block = edge_vector_moment_rows(layout, e, k, frames.vertex_basis())
        else:
            block = edge_moment_rows(layout, e, k)
        rows.add(tag, e, block if pre is None else block * pre)


def _faces(rows, tag, layout, frames, kind, test, pre=None):
    c = frames.complex
    for f in MACRO_FACES:
        block = face_moment_rows(layout, frames, f, kind, test(f))
        rows.add(tag, c.face_point_ids(f), block if pre is None else block * pre)


def _ct_jumps(rows, tag, layout, frames, degrees, pre=None, through=None):
    """Jump moments across the internal edges of every face split.

    degrees = (weight degree on e_F, weight degree elsewhere); through names
    a tangent ("t") the vector layout is paired with first.
    """
    c = frames.complex
    on_ef, elsewhere = degrees
    for f in MACRO_FACES:
        ef = frames.face_ct(f).ef_index
        for k in range(3):
            m = on_ef if k == ef else elsewhere
            if through is not None:
                pairing = dot_with(layout, getattr(frames.ct_edge(f, k), through))
                scalar = layout.with_arity(1)
                block = jump_moment_rows(scalar, frames, f, k, m) * pairing
            else:
                block = jump_moment_rows(layout, frames, f, k, m)
            rows.add(tag, c.ct_edge_ids(f, k), block if pre is None else block * pre)


def _interior(rows, tag, layout, test, pre=None):
    block = volume_moment_rows(layout, test)
    rows.add(tag, ("T",), block if pre is None else block * pre)


def _dofs_S0(rows, src, frames, r):
    c = frames.complex
    grad = operator("grad", src)
    _vertices(rows, "S0/vertex-value", src, frames)
    for v in MACRO_VERTICES:
        rows.add("S0/vertex-gradient", (v,), vertex_derivative_rows(src, v, frames.vertex_basis()))
    _edges(rows, "S0/edge-value", src, frames, r - 4)
    for e in MACRO_EDGES:
        block = edge_derivative_moment_rows(src, e, r - 3, frames.edge_normals(e))
        rows.add("S0/edge-normal-derivative", e, block)
    _faces(rows, "S0/face-gradient", src, frames, "surface_grad",
           lambda f: _face_image(frames, f, "grad", "ctS0", r))
    _faces(rows, "S0/face-normal-derivative", src, frames, "normal_derivative",
           lambda f: _face_space(frames, f, "ctR0", r - 1))
    _interior(rows, "S0/interior-gradient", grad.target, image_space("grad", _ring("S0", r), c),
              grad.matrix)


def _dofs_L1(rows, src, frames, r):
    c = frames.complex
    curl = operator("curl", src)
    _vertices(rows, "L1/vertex-value", src, frames, vector=True)
    _edges(rows, "L1/edge-moment", src, frames, r - 3, vector=True)
    _ct_jumps(rows, "L1/ct-edge-curl-jump", curl.target, frames, (r - 2, r - 3), curl.matrix, "t")
    _faces(rows, "L1/face-normal", src, frames, "normal_component",
           lambda f: _face_space(frames, f, "ctR0", r - 1))
    _faces(rows, "L1/face-curl", src, frames, "surface_curl",
           lambda f: _face_space(frames, f, "ctV2", r - 2, "zero"))
    _faces(rows, "L1/face-tangential", src, frames, "tangential_part",
           lambda f: _face_image(frames, f, "grad", "ctS0", r))
    _interior(rows, "L1/interior-curl", curl.target, image_space("curl", _ring("L1", r - 1), c),
              curl.matrix)
    _interior(rows, "L1/interior-gradient", src, image_space("grad", _ring("S0", r), c))


def _dofs_V2(rows, src, frames, r):
    c = frames.complex
    div = operator("div", src)
    _ct_jumps(rows, "V2/ct-edge-jump", src, frames, (r - 2, r - 3), through="t")
    _faces(rows, "V2/face-normal", src, frames, "normal_component",
           lambda f: _face_space(frames, f, "ctV2", r - 2))
    _interior(rows, "V2/interior-divergence", div.target, build_space(_ring("V3", r - 3), c),
              div.matrix)
    _interior(rows, "V2/interior-curl", src, image_space("curl", _ring("L1", r - 1), c))


def _dofs_V3(rows, src, frames, r):
    c = frames.complex
    rows.add("V3/mean", ("T",), mean_rows(src))
    _interior(rows, "V3/interior", src, build_space(_ring("V3", r - 3), c))


def _dofs_S1(rows, src, frames, r):
    c = frames.complex
    curl = operator("curl", src)
    _vertices(rows, "S1/vertex-value", src, frames, vector=True)
    _vertices(rows, "S1/vertex-curl", curl.target, frames, curl.matrix, vector=True)
    _edges(rows, "S1/edge-moment", src, frames, r - 3, vector=True)
    _edges(rows, "S1/edge-curl-moment", curl.target, frames, r - 4, curl.matrix, vector=True)
    _faces(rows, "S1/face-curl", src, frames, "surface_curl",
           lambda f: mean_free(_face_space(frames, f, "ctL0", r - 3)))
    _faces(rows, "S1/face-normal", src, frames, "normal_component",
           lambda f: _face_space(frames, f, "ctR0", r - 1))
    _faces(rows, "S1/face-tangential", src, frames, "tangential_part",
           lambda f: _face_image(frames, f, "grad", "ctS0", r))
    _faces(rows, "S1/face-curl-tangential", curl.target, frames, "tangential_part",
           lambda f: _face_space(frames, f, "ctR1", r - 2), curl.matrix)
    _interior(rows, "S1/interior-curl", curl.target, image_space("curl", _ring("S1", r - 1), c),
              curl.matrix)
    _interior(rows, "S1/interior-gradient", src, image_space("grad", _ring("S0", r), c))


def _dofs_L2(rows, src, frames, r):
    c = frames.complex
    div = operator("div", src)
    _vertices(rows, "L2/vertex-value", src, frames, vector=True)
    _edges(rows, "L2/edge-moment", src, frames, r - 4, vector=True)
    _faces(rows, "L2/face-normal", src, frames, "normal_component",
           lambda f: _face_space(frames, f, "ctL0", r - 3))
    _ct_jumps(rows, "L2/ct-edge-div-jump", div.target, frames, (r - 4, r - 3), div.matrix)
    _faces(rows, "L2/face-tangential", src, frames, "tangential_part",
           lambda f: _face_space(frames, f, "ctR1", r - 2))
    _interior(rows, "L2/interior-divergence", div.target,
              image_space("div", _ring("L2", r - 2), c), div.matrix)
    _interior(rows, "L2/interior-curl", src, image_space("curl", _ring("S1", r - 1), c))


def _dofs_V3a(rows, src, frames, r):
    c = frames.complex
    _ct_jumps(rows, "V3a/ct-edge-jump", src, frames, (r - 4, r - 3))
    rows.add("V3a/mean", ("T",), mean_rows(src))
    _interior(rows, "V3a/interior", src, build_space(_ring("CalV3", r - 3), c))


def _dofs_S2(rows, src, frames, r):
    c = frames.complex
    div = operator("div", src)
    _vertices(rows, "S2/vertex-value", src, frames, vector=True)
    _vertices(rows, "S2/vertex-divergence", div.target, frames, div.matrix)
    _edges(rows, "S2/edge-moment", src, frames, r - 4, vector=True)
    _edges(rows, "S2/edge-divergence-moment", div.target, frames, r - 5, div.matrix)
    _faces(rows, "S2/face-normal", src, frames, "normal_component",
           lambda f: _face_space(frames, f, "ctL0", r - 3))
    _faces(rows, "S2/face-tangential", src, frames, "tangential_part",
           lambda f: _face_space(frames, f, "ctR1", r - 2))
    _faces(rows, "S2/face-divergence", div.target, frames, "value",
           lambda f: _face_space(frames, f, "ctL2", r - 4), div.matrix)
    _interior(rows, "S2/interior-divergence", div.target, build_space(_ring("L3", r - 3), c),
              div.matrix)
    _interior(rows, "S2/interior-curl", src, image_space("curl", _ring("S1", r - 1), c))


def _dofs_L3(rows, src, frames, r):
    c = frames.complex
    _vertices(rows, "L3/vertex-value", src, frames)
    _edges(rows, "L3/edge-moment", src, frames, r - 5)
    _faces(rows, "L3/face-value", src, frames, "value",
           lambda f: _face_space(frames, f, "ctL2", r - 4))
    rows.add("L3/mean", ("T",), mean_rows(src))
    _interior(rows, "L3/interior", src, build_space(_ring("L3", r - 3), c))


_BUILDERS = {
    "S0": _dofs_S0,
    "L1": _dofs_L1,
    "V2": _dofs_V2,
    "V3": _dofs_V3,
    "S1": _dofs_S1,
    "L2": _dofs_L2,
    "V3a": _dofs_V3a,
    "S2": _dofs_S2,
    "L3": _dofs_L3,
}


@dataclass(frozen=True)
class FunctionalSet:
    """The degrees of freedom of one lemma, acting on fields of ``layout``."""

    lemma: str
    r: int
    target: SpaceSpec
    layout: Layout
    matrix: ratlin.RatMatrix
    tags: tuple

    @property
    def count(self):
        return self.matrix.shape[0]

    @property
    def functionals(self):
        return [
            Functional(ratlin.rows(self.matrix, [i]), dof_class, carrier, weight)
            for i, (dof_class, carrier, weight) in enumerate(self.tags)
        ]

    def counts(self):
        out = {}
        for dof_class, _, _ in self.tags:
            out[dof_class] = out.get(dof_class, 0) + 1
        return out

    def carried_by(self, point_ids):
        """Rows whose carrier lies in the closure of the given sub-simplex."""
        allowed = set(point_ids)
        picked = [i for i, (_, carrier, _) in enumerate(self.tags) if set(carrier) <= allowed]
        return ratlin.rows(self.matrix, picked)

    def evaluate(self, source):
        if source.layout != self.layout:
            msg = f"DOFs of {self.lemma} act on {self.layout}, got {source.layout}"
            raise DimensionMismatch(msg)
        return ratlin.entries(ratlin.normal(self.matrix * source.coefficients))


def build_dofs(lemma, r, c=None, frames=None, degree=None):
    """All functionals of the lemma at degree r, on fields of the given degree.

    The input degree defaults to the target space's degree.
    """
    info = _lemma(lemma)
    if r < info.min_degree:
        msg = f"The {lemma} degrees of freedom are certified for r >= {info.min_degree}, got {r}"
        raise UnsupportedDegree(msg)
    c = c or reference_split()
    frames = frames or standard_frames(c)
    target = info.target_spec(r)
    degree = target.degree if degree is None else degree
    if degree < target.degree:
        msg = f"{lemma} needs input degree at least {target.degree}, got {degree}"
        raise UnsupportedDegree(msg)
    src = Layout(c, degree, target.arity)
    rows = RowCollector(src.size)
    _BUILDERS[lemma](rows, src, frames, r)
    dofs = FunctionalSet(lemma, r, target, src, rows.matrix(), tuple(rows.tags))
    logger.debug("built dofs", lemma=lemma, r=r, degree=degree, count=dofs.count)
    return dofs


@dataclass(frozen=True)
class UnisolvencyReport:
    lemma: str
    r: int
    count: int
    dim: int
    rank: int
    counts: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.count == self.dim == self.rank


@log_call
def check_unisolvency(lemma, r, c=None, frames=None):
    """Square and exactly invertible DOF-by-basis matrix on the target space."""
    c = c or reference_split()
    dofs = build_dofs(lemma, r, c, frames)
    space = build_space(dofs.target, c)
    pairing = ratlin.normal(dofs.matrix * space.basis)
    rank = ratlin.rank_or_zero(pairing)
    return UnisolvencyReport(lemma, r, dofs.count, space.dim, rank, dofs.counts())


@dataclass(frozen=True)
class ProjectionOperator:
    """Maps input coefficients of ``source`` to coefficients of the target space."""

    lemma: str
    r: int
    source: Layout
    target: Layout
    matrix: ratlin.RatMatrix

    def __call__(self, source):
        return apply(self.matrix, source, self.target)


_projection_cache = {}
_projection_lock = threading.Lock()


def projection(lemma, r, degree=None, c=None, frames=None):
    """The projection onto the lemma's target space, cached per frame set."""
    c = c or reference_split()
    frames = frames or standard_frames(c)
    target = _lemma(lemma).target_spec(r)
    degree = target.degree if degree is None else degree
    key = (lemma, r, degree, frames)
    with _projection_lock:
        if key in _projection_cache:
            return _projection_cache[key]
    dofs = build_dofs(lemma, r, c, frames, degree)
    space = build_space(target, c)
    lift = ratlin.normal(elevation(space.layout, degree) * space.basis)
    pairing = ratlin.normal(dofs.matrix * lift)
    if pairing.shape[0] != pairing.shape[1] or ratlin.rank_or_zero(pairing) != space.dim:
        msg = f"{lemma} DOFs are not unisolvent on {space.label}: pairing {pairing.shape}"
        raise UnsolvedSystem(msg)
    solved = ratlin.solve_columns(pairing, dofs.matrix)
    operator_ = ProjectionOperator(
        lemma, r, dofs.layout, space.layout, ratlin.normal(space.basis * solved)
    )
    logger.debug("factorized dofs", lemma=lemma, r=r, degree=degree, shape=pairing.shape)
    with _projection_lock:
        _projection_cache.setdefault(key, operator_)
    return operator_


def project(lemma, r, source, frames=None):
    """The member of the target space sharing every DOF value with source."""
    return projection(lemma, r, source.degree, source.mesh, frames)(source)


def project_by_solve(lemma, r, source, frames=None):
    """Projection through a fresh solve of the DOF system, no cached factor."""
    c = source.mesh
    dofs = build_dofs(lemma, r, c, frames, source.degree)
    space = build_space(dofs.target, c)
    lift = ratlin.normal(elevation(space.layout, source.degree) * space.basis)
    pairing = ratlin.normal(dofs.matrix * lift)
    values = ratlin.normal(dofs.matrix * source.coefficients)
    coefficients = ratlin.solve(pairing, values)
    return PiecewiseField(space.layout, ratlin.normal(space.basis * coefficients))


def cross_check_projection(lemma, r, exprs, degree, c=None):
    """Whether the cached projection and a fresh solve agree on a polynomial
    given in x, y, z."""
    c = c or reference_split()
    arity = _lemma(lemma).target_spec(r).arity
    source = field_from_expressions(Layout(c, degree, arity), exprs)
    return project(lemma, r, source) == project_by_solve(lemma, r, source)


@dataclass(frozen=True)
class CommuteReport:
    diagram: str
    r: int
    samples: int
    # identity name: one flag per sampled input
    residuals: dict

    @property
    def passed(self):
        return all(all(flags) for flags in self.residuals.values())


_IDENTITIES = (("grad", 0), ("curl", 1), ("div", 2))


@log_call
def check_commute(diagram, r, samples=5, seed=None, c=None):
    """d Π f = Π d f on random global polynomials of degree r and r + 1."""
    c = c or reference_split()
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    lemmas = DIAGRAMS[diagram]
    residuals = {}
    for op, slot in _IDENTITIES:
        before, after = lemmas[slot], lemmas[slot + 1]
        arity = _lemma(before).target_spec(r).arity
        flags = []
        for degree in (r, r + 1):
            for _ in range(samples):
                f = random_polynomial(Layout(c, degree, arity), c.macro_vertices, rng)
                projected = project(before, r, f)
                lhs = operator(op, projected.layout)(projected)
                rhs = project(after, r, operator(op, f.layout)(f))
                flags.append(lhs == rhs)
        residuals[f"{op} {before} -> {after}"] = tuple(flags)
    return CommuteReport(diagram, r, samples, residuals)


@dataclass(frozen=True)
class FrameReport:
    lemma: str
    r: int
    degree: int
    equal: bool

    @property
    def passed(self):
        return self.equal


@log_call
def check_frame_invariance(lemma, r, degree=None, c=None):
    """Projections built from the standard and alternate frames coincide."""
    c = c or reference_split()
    degree = _lemma(lemma).target_spec(r).degree if degree is None else degree
    standard = projection(lemma, r, degree, c, standard_frames(c))
    alternate = projection(lemma, r, degree, c, alternate_frames(c))
    return FrameReport(lemma, r, degree, ratlin.equal(standard.matrix, alternate.matrix))


@dataclass(frozen=True)
class JumpLemmaReport:
    r: int
    samples: int
    results: dict

    @property
    def passed(self):
        return all(self.results.values())


def _jump_rows(layout, frames, face, degrees, through=None):
    rows = RowCollector(layout.size)
    c = frames.complex
    ef = frames.face_ct(face).ef_index
    for k in range(3):
        m = degrees[0] if k == ef else degrees[1]
        if through is None:
            block = jump_moment_rows(layout, frames, face, k, m)
        else:
            pairing = dot_with(layout, getattr(frames.ct_edge(face, k), through))
            block = jump_moment_rows(layout.with_arity(1), frames, face, k, m) * pairing
        rows.add("jump", c.ct_edge_ids(face, k), block)
    return rows.matrix()


def continuous_across(p, frames, face, k):
    """Whether a scalar field has no jump across internal edge k of the face split."""
    jump, _ = ct_jump_matrix(p.layout, frames.complex, face, k, frames)
    return ratlin.is_zero(jump * p.coefficients)


def _discontinuity_witness(space, frames, face, r):
    """A member with one nonzero e_F moment whose face trace jumps across e_F."""
    c = frames.complex
    ct = frames.face_ct(face)
    ef = ct.ef_index
    moments = jump_moment_rows(space.layout, frames, face, ef, r - 1)
    jump, _ = ct_jump_matrix(space.layout, c, face, ef, frames)
    for j in range(space.dim):
        column = ratlin.columns(space.basis, [j])
        if not ratlin.is_zero(moments * column):
            return not ratlin.is_zero(jump * column)
    return False


def _tangential_continuity(space, frames, face, rng, samples):
    """Members of a ring space whose g . s does not jump across the face split."""
    c = frames.complex
    for _ in range(samples):
        g = random_member(space, rng)
        for k in range(3):
            pairing = dot_with(g.layout, frames.ct_edge(face, k).s_vec)
            jump, _ = ct_jump_matrix(g.layout.with_arity(1), c, face, k, frames)
            if not ratlin.is_zero(jump * pairing * g.coefficients):
                return False
    return True


def _surface_div_continuity(space, frames, face, rng, samples):
    patch = face_patch(frames.complex, face, frames)
    trace, middle = face_trace_matrix(space.layout, patch, "surface_div", frames.normal(face))
    for _ in range(samples):
        g = random_member(space, rng)
        values = ratlin.normal(trace * g.coefficients)
        for k in range(3):
            q1, q2 = patch.ct.triangles_at(k)
            jump, _ = jump_matrix(middle, k, q1, q2)
            if not ratlin.is_zero(jump * values):
                return False
    return True


@log_call
def check_jump_lemmas(r, samples=25, seed=None, c=None, face=0):
    """Continuity conclusions drawn from vanishing jump moments, checked on
    random members satisfying the moment hypotheses."""
    c = c or reference_split()
    frames = standard_frames(c)
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    results = {}

    scalars = build_space(SpaceSpec("V3", r), c)
    hypothesis = _jump_rows(scalars.layout, frames, face, (r - 1, r))
    moments_vanish = subspace(scalars, hypothesis)
    members = [random_member(moments_vanish, rng) for _ in range(samples)]
    for k in range(3):
        results[f"face trace continuous across internal edge {k}"] = all(
            continuous_across(p, frames, face, k) for p in members
        )
    ef = frames.face_ct(face).ef_index
    partial = RowCollector(scalars.layout.size)
    for k in range(3):
        if k != ef:
            partial.add("jump", (k,), jump_moment_rows(scalars.layout, frames, face, k, r))
    results["e_F moment witness jumps"] = _discontinuity_witness(
        subspace(scalars, partial.matrix()), frames, face, r
    )

    ring_v2 = build_space(SpaceSpec("V2", r, "zero"), c)
    rows = [_jump_rows(ring_v2.layout, frames, f, (r, r - 1), "t") for f in MACRO_FACES]
    constrained = subspace(ring_v2, ratlin.vstack(*rows, ncols=ring_v2.layout.size))
    results["tangential jump moments give ring-CalV2"] = contains(
        build_space(SpaceSpec("CalV2", r, "zero"), c), constrained
    )

    results["ring-V2 has continuous g.s on faces"] = all(
        _tangential_continuity(ring_v2, frames, f, rng, samples) for f in MACRO_FACES
    )

    both = intersect(build_space(SpaceSpec("L2", r), c), ring_v2)
    div = operator("div", both.layout)
    div_jumps = ratlin.vstack(
        *(ct_jump_matrix(div.target, c, face, k, frames)[0] * div.matrix for k in range(3)),
        ncols=both.layout.size,
    )
    results["continuous div gives continuous surface div"] = _surface_div_continuity(
        subspace(both, div_jumps), frames, face, rng, samples
    )
    return JumpLemmaReport(r, samples, results)
