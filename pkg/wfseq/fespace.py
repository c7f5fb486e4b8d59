"""Finite element spaces on split complexes, materialised as exact bases.

A space is the kernel of an exact constraint system on the piecewise
polynomial coefficient vectors of a ``Layout``. Lagrange-type spaces are
built directly from shared Bernstein domain points; the other families add
continuity rows across facets (value, tangential or normal), trace rows on
the boundary, derivative conditions and mean-zero rows.
"""

import functools
from dataclasses import dataclass

from . import bernstein, ratlin
from .errors import DimensionMismatch, InvalidSpec, NoFormula
from .logger import logger
from .pwpoly import (
    Layout,
    PiecewiseField,
    blossom_field,
    face_patch,
    face_trace_matrix,
    jump_matrix,
    mean_row,
    operator,
    restriction_indices,
)
from .splitgeom import FaceCT, SplitComplex, cross, dot, sub


# family: (dimension of the mesh, number of components)
FAMILIES = {
    "V0": (3, 1),
    "V1": (3, 3),
    "V2": (3, 3),
    "V3": (3, 1),
    "L0": (3, 1),
    "L1": (3, 3),
    "L2": (3, 3),
    "L3": (3, 1),
    "S0": (3, 1),
    "S1": (3, 3),
    "S2": (3, 3),
    "S3": (3, 1),
    "CalV2": (3, 3),
    "CalV3": (3, 1),
    "ctL0": (2, 1),
    "ctVdiv1": (2, 2),
    "ctVcurl1": (2, 2),
    "ctV2": (2, 1),
    "ctL1": (2, 2),
    "ctL2": (2, 1),
    "ctS0": (2, 1),
    "ctSdiv1": (2, 2),
    "ctScurl1": (2, 2),
    "ctS2": (2, 1),
    "ctR0": (2, 1),
    "ctR1": (2, 2),
}

BCS = ("none", "zero")


@dataclass(frozen=True)
class SpaceSpec:
    family: str
    degree: int
    bc: str = "none"

    def __post_init__(self):
        if self.family not in FAMILIES:
            msg = f"Unknown space family {self.family!r}"
            raise InvalidSpec(msg)
        if self.bc not in BCS:
            msg = f"Unknown boundary condition {self.bc!r}; expected one of {BCS}"
            raise InvalidSpec(msg)
        if self.family in ("ctR0", "ctR1") and self.bc != "none":
            msg = f"{self.family} already vanishes on the boundary; use bc 'none'"
            raise InvalidSpec(msg)

    @property
    def ring(self):
        return self.bc == "zero"

    @property
    def dim(self):
        return FAMILIES[self.family][0]

    @property
    def arity(self):
        return FAMILIES[self.family][1]

    @property
    def label(self):
        prefix = "ring-" if self.ring else ""
        return f"{prefix}{self.family}_{self.degree}"

    def with_degree(self, degree):
        return SpaceSpec(self.family, degree, self.bc)


@dataclass(frozen=True)
class SpaceBasis:
    """Columns of ``basis`` are coefficient vectors of the basis fields."""

    label: str
    layout: Layout
    basis: ratlin.RatMatrix
    spec: SpaceSpec | None = None

    @property
    def dim(self):
        return self.basis.shape[1]

    def field(self, j):
        return PiecewiseField(self.layout, ratlin.columns(self.basis, [j]))

    def combination(self, coefficients):
        coefficients = ratlin.column(coefficients)
        return PiecewiseField(self.layout, ratlin.normal(self.basis * coefficients))


def domain_point_keys(layout):
    """One key per (cell, Bernstein index): the domain point as (id, multiplicity) pairs."""
    mesh = layout.mesh
    alphas = bernstein.multi_indices(layout.degree, mesh.nvars)
    return [
        tuple(sorted((v, a) for v, a in zip(cell, alpha) if a))
        for cell in mesh.cells
        for alpha in alphas
    ]


def _boundary_key(mesh, key):
    return mesh.on_boundary(tuple(v for v, _ in key))


def lagrange_embedding(layout, zero_boundary=False):
    """Columns: one continuous field per shared domain point and component."""
    mesh, nb, arity = layout.mesh, layout.nb, layout.arity
    keys = domain_point_keys(layout)
    columns = {}
    for key in keys:
        if key in columns or (zero_boundary and _boundary_key(mesh, key)):
            continue
        columns[key] = len(columns)
    dod = {}
    for idx, key in enumerate(keys):
        col = columns.get(key)
        if col is None:
            continue
        cell, i = divmod(idx, nb)
        for a in range(arity):
            dod[layout.offset(cell, a) + i] = {col * arity + a: 1}
    return ratlin.sparse(dod, (layout.size, len(columns) * arity))


def lagrange_rows(layout, zero_boundary=False):
    """Rows whose kernel is the continuous (or boundary-vanishing) fields."""
    mesh, nb = layout.mesh, layout.nb
    first = {}
    dod, n = {}, 0
    for idx, key in enumerate(domain_point_keys(layout)):
        cell, i = divmod(idx, nb)
        vanish = zero_boundary and _boundary_key(mesh, key)
        for a in range(layout.arity):
            position = layout.offset(cell, a) + i
            if vanish:
                dod[n] = {position: 1}
                n += 1
                continue
            anchor = first.setdefault((key, a), position)
            if anchor != position:
                dod[n] = {position: 1, anchor: -1}
                n += 1
    return ratlin.sparse(dod, (n, layout.size))


def _facet_directions(layout, facet, kind):
    mesh = layout.mesh
    basis = mesh.vector_basis()
    if kind == "value":
        return [[1 if a == b else 0 for a in range(layout.arity)] for b in range(layout.arity)]
    pts = [mesh.points[v] for v in facet]
    tangents = [sub(p, pts[0]) for p in pts[1:]]
    if kind == "tangential":
        directions = tangents
    elif mesh.dim == 3:
        directions = [cross(*tangents)]
    else:
        directions = [cross(tangents[0], mesh.normal)]
    return [[dot(basis[a], w) for a in range(layout.arity)] for w in directions]


def facet_rows(layout, kind, *, interior=True, boundary=False):
    """Continuity (interior) or vanishing (boundary) of facet traces.

    kind is "value", "tangential" or "normal"; the trace of a vector field
    is paired with the facet's tangents or its normal.
    """
    mesh = layout.mesh
    pairs = []
    if interior:
        pairs.extend(mesh.interior_facets)
    if boundary:
        pairs.extend((f, (c,)) for f, c in mesh.boundary_facets)
    count = bernstein.count(layout.degree, mesh.dim)
    dod, n = {}, 0
    for facet, cells in pairs:
        picks = [restriction_indices(layout.degree, mesh.cells[c], facet) for c in cells]
        for w in _facet_directions(layout, facet, kind):
            for i in range(count):
                row = {}
                for sign, c, pk in zip((1, -1), cells, picks):
                    for a, factor in enumerate(w):
                        if factor:
                            j = layout.offset(c, a) + pk[i]
                            row[j] = row.get(j, 0) + sign * factor
                dod[n] = row
                n += 1
    return ratlin.sparse(dod, (n, layout.size))


def face_jump_rows(layout, kind):
    """Jumps of a face trace across the internal edges of every face split."""
    c = layout.mesh
    blocks = []
    for face in range(4):
        patch = face_patch(c, face)
        trace, middle = face_trace_matrix(layout, patch, kind)
        for k in range(3):
            q1, q2 = patch.ct.triangles_at(k)
            jump, _ = jump_matrix(middle, k, q1, q2)
            blocks.append(jump * trace)
    return ratlin.vstack(*blocks, ncols=layout.size)


def _kernel(layout, *constraints):
    rows = [m for m in constraints if m.shape[0]]
    if layout.size == 0:
        return ratlin.zeros(0, 0)
    if not rows:
        return ratlin.identity(layout.size)
    return ratlin.nullspace(ratlin.vstack(*rows, ncols=layout.size))


def _restrict(embedding, *constraints):
    """embedding · kernel(constraints · embedding)."""
    rows = [m for m in constraints if m.shape[0]]
    if embedding.shape[1] == 0 or not rows:
        return embedding
    reduced = ratlin.normal(ratlin.vstack(*rows, ncols=embedding.shape[0]) * embedding)
    return ratlin.normal(embedding * ratlin.nullspace(reduced))


def _mean_rows(layout, ring):
    if not ring or layout.degree < 0:
        return ratlin.zeros(0, layout.size)
    return mean_row(layout)


def _lagrange_target_rows(layout, ring, mean):
    return ratlin.vstack(
        lagrange_rows(layout, ring), _mean_rows(layout, ring and mean), ncols=layout.size
    )


# (source ring embedding, derivative, target ring, target mean-zero when ring)
_SMOOTH = {
    "S0": ("grad", False),
    "S1": ("curl", False),
    "S2": ("div", True),
    "ctS0": ("grad", False),
    "ctSdiv1": ("div", True),
    "ctScurl1": ("curl", True),
}


def _smooth(layout, op, source_ring, target_ring, target_mean):
    embedding = lagrange_embedding(layout, source_ring)
    derivative = operator(op, layout)
    rows = _lagrange_target_rows(derivative.target, target_ring, target_mean)
    return _restrict(embedding, ratlin.normal(rows * derivative.matrix))


def _check_mesh(spec, mesh):
    if spec.dim != mesh.dim:
        msg = f"{spec.family} lives on {spec.dim}D meshes, got a {mesh.dim}D mesh"
        raise InvalidSpec(msg)
    if spec.family.startswith("CalV") and not isinstance(mesh, SplitComplex):
        msg = f"{spec.family} needs a Worsey–Farin split"
        raise InvalidSpec(msg)
    if spec.dim == 2 and not isinstance(mesh, FaceCT):
        msg = f"{spec.family} needs a Clough–Tocher face split"
        raise InvalidSpec(msg)


def _basis(spec, layout):
    family, ring = spec.family, spec.ring
    if family in ("L0", "V0", "L1", "L2", "ctL0", "ctL1"):
        return lagrange_embedding(layout, ring)
    if family in ("L3", "S3", "ctL2", "ctS2"):
        return _restrict(lagrange_embedding(layout, ring), _mean_rows(layout, ring))
    if family in _SMOOTH:
        op, mean = _SMOOTH[family]
        return _smooth(layout, op, ring, ring, mean)
    if family == "ctR0":
        return _smooth(layout, "grad", True, False, False)
    if family == "ctR1":
        return _smooth(layout, "div", True, False, False)
    if family in ("V1", "ctVcurl1"):
        return _kernel(
            layout, facet_rows(layout, "tangential", boundary=ring)
        )
    if family in ("V2", "ctVdiv1"):
        return _kernel(layout, facet_rows(layout, "normal", boundary=ring))
    if family in ("V3", "ctV2"):
        return _kernel(layout, _mean_rows(layout, ring))
    if family == "CalV2":
        return _kernel(
            layout,
            facet_rows(layout, "normal", boundary=ring),
            face_jump_rows(layout, "tangential_part"),
        )
    if family == "CalV3":
        return _kernel(layout, face_jump_rows(layout, "value"), _mean_rows(layout, ring))
    msg = f"No construction for {family}"
    raise InvalidSpec(msg)


@functools.cache
def build_space(spec, mesh):
    """The space named by spec on the mesh, as an exact column basis.

    Negative degrees give the trivial space.
    """
    _check_mesh(spec, mesh)
    layout = Layout(mesh, spec.degree, spec.arity)
    if layout.size == 0:
        basis = ratlin.zeros(0, 0)
    else:
        basis = _basis(spec, layout)
    logger.debug("built space", space=spec.label, dim=basis.shape[1], ambient=layout.size)
    return SpaceBasis(spec.label, layout, basis, spec)


def _pos(x):
    return max(x, 0)


# (family, bc): (smallest degree the closed form is valid for, formula)
FORMULAS = {
    ("V0", "none"): (0, lambda r: (2 * r + 1) * (r * r + r + 1)),
    ("V0", "zero"): (1, lambda r: (2 * r - 1) * (r * r - r + 1)),
    ("V1", "none"): (0, lambda r: 2 * (r + 1) * (3 * r * r + 6 * r + 4)),
    ("V1", "zero"): (1, lambda r: 2 * (r + 1) * (3 * r * r + 1)),
    ("V2", "none"): (0, lambda r: 3 * (r + 1) * (r + 2) * (2 * r + 3)),
    ("V2", "zero"): (1, lambda r: 3 * (r + 1) * (r + 2) * (2 * r + 1)),
    ("V3", "none"): (0, lambda r: 2 * (r + 1) * (r + 2) * (r + 3)),
    ("V3", "zero"): (0, lambda r: 2 * r**3 + 12 * r * r + 22 * r + 11),
    ("L0", "none"): (0, lambda r: (2 * r + 1) * (r * r + r + 1)),
    ("L0", "zero"): (1, lambda r: (2 * r - 1) * (r * r - r + 1)),
    ("L1", "none"): (0, lambda r: 3 * (2 * r + 1) * (r * r + r + 1)),
    ("L1", "zero"): (1, lambda r: 3 * (2 * r - 1) * (r * r - r + 1)),
    ("L2", "none"): (0, lambda r: 3 * (2 * r + 1) * (r * r + r + 1)),
    ("L2", "zero"): (1, lambda r: 3 * (2 * r - 1) * (r * r - r + 1)),
    ("L3", "none"): (0, lambda r: (2 * r + 1) * (r * r + r + 1)),
    ("L3", "zero"): (1, lambda r: (r - 1) * (2 * r * r - r + 2)),
    ("CalV2", "zero"): (1, lambda r: 6 * r**3 + 21 * r * r + 9 * r + 2),
    ("CalV3", "none"): (0, lambda r: 2 * (r**3 + 6 * r * r + 5 * r + 2)),
    ("CalV3", "zero"): (0, lambda r: 2 * r**3 + 12 * r * r + 10 * r + 3),
    ("S0", "none"): (1, lambda r: 2 * r**3 - 6 * r * r + 10 * r - 2),
    ("S1", "none"): (1, lambda r: 3 * r * (2 * r * r - 3 * r + 5)),
    ("S2", "none"): (1, lambda r: 6 * r**3 + 8 * r + 2),
    ("S3", "none"): (1, lambda r: (2 * r + 1) * (r * r + r + 1)),
    ("S0", "zero"): (1, lambda r: _pos(2 * (r - 2) * (r - 3) * (r - 4))),
    ("S1", "zero"): (1, lambda r: _pos(3 * (2 * r - 3) * (r - 2) * (r - 3))),
    ("S2", "zero"): (1, lambda r: _pos(2 * (r - 2) * (3 * r * r - 6 * r + 4))),
    ("S3", "zero"): (1, lambda r: (r - 1) * (2 * r * r - r + 2)),
    ("ctL0", "none"): (1, lambda r: (3 * r * r + 3 * r + 2) // 2),
    ("ctL0", "zero"): (1, lambda r: (3 * r * r - 3 * r + 2) // 2),
    ("ctVdiv1", "none"): (1, lambda r: 3 * (r + 1) ** 2),
    ("ctVdiv1", "zero"): (1, lambda r: 3 * r * (r + 1)),
    ("ctVcurl1", "none"): (1, lambda r: 3 * (r + 1) ** 2),
    ("ctVcurl1", "zero"): (1, lambda r: 3 * r * (r + 1)),
    ("ctV2", "none"): (1, lambda r: 3 * (r + 1) * (r + 2) // 2),
    ("ctV2", "zero"): (1, lambda r: 3 * (r + 1) * (r + 2) // 2 - 1),
    ("ctL1", "none"): (1, lambda r: 3 * r * r + 3 * r + 2),
    ("ctL1", "zero"): (1, lambda r: 3 * r * r - 3 * r + 2),
    ("ctL2", "none"): (1, lambda r: (3 * r * r + 3 * r + 2) // 2),
    ("ctL2", "zero"): (1, lambda r: 3 * r * (r - 1) // 2),
    ("ctS0", "none"): (1, lambda r: 3 * (r * r - r + 2) // 2),
    ("ctS0", "zero"): (2, lambda r: 3 * (r * r - 5 * r + 6) // 2),
    ("ctSdiv1", "none"): (1, lambda r: 3 * r * r + 3),
    ("ctSdiv1", "zero"): (1, lambda r: 3 * r * r - 9 * r + 6),
    ("ctScurl1", "none"): (1, lambda r: 3 * r * r + 3),
    ("ctScurl1", "zero"): (1, lambda r: 3 * r * r - 9 * r + 6),
    ("ctS2", "none"): (1, lambda r: (3 * r * r + 3 * r + 2) // 2),
    ("ctS2", "zero"): (1, lambda r: 3 * r * (r - 1) // 2),
    ("ctR0", "none"): (1, lambda r: 3 * (r - 1) * (r - 2) // 2),
    ("ctR1", "none"): (1, lambda r: 3 * (r - 1) ** 2),
}

# Families grouped the way the dimension tables present them
TABLE_FAMILIES = {
    "vl": [
        SpaceSpec(f, 0, bc)
        for f in ("V0", "V1", "V2", "V3", "L0", "L1", "L2", "L3")
        for bc in BCS
    ],
    "ct": [
        SpaceSpec(f, 0, bc)
        for f in (
            "ctL0",
            "ctVdiv1",
            "ctVcurl1",
            "ctV2",
            "ctL1",
            "ctL2",
            "ctS0",
            "ctSdiv1",
            "ctScurl1",
            "ctS2",
        )
        for bc in BCS
    ]
    + [SpaceSpec("ctR0", 0), SpaceSpec("ctR1", 0)],
    "smooth": [
        SpaceSpec("CalV2", 0, "zero"),
        SpaceSpec("CalV3", 0, "zero"),
        SpaceSpec("CalV3", 0),
    ]
    + [SpaceSpec(f, 0, bc) for f in ("S0", "S1", "S2", "S3") for bc in BCS],
}


def formula_dimension(spec):
    """The closed-form dimension of spec, where one is known and valid."""
    key = (spec.family, spec.bc)
    if key not in FORMULAS:
        msg = f"No dimension formula for {spec.label}"
        raise NoFormula(msg)
    min_degree, formula = FORMULAS[key]
    if spec.degree < min_degree:
        msg = f"The formula for {spec.label} needs degree at least {min_degree}"
        raise NoFormula(msg)
    return formula(spec.degree)


def membership(field, space):
    """Whether field lies in the span of the space's basis."""
    if field.layout != space.layout:
        msg = f"Field on {field.layout} cannot belong to {space.label} on {space.layout}"
        raise DimensionMismatch(msg)
    return ratlin.in_column_span(space.basis, field.coefficients)


def contains(outer, inner):
    """Whether every basis field of inner lies in outer."""
    if outer.layout != inner.layout:
        msg = f"{inner.label} and {outer.label} live on different layouts"
        raise DimensionMismatch(msg)
    return ratlin.in_column_span(outer.basis, inner.basis)


def same_span(a, b):
    return a.dim == b.dim and contains(a, b)


def intersect(a, b):
    """Span intersection of two spaces on one layout."""
    if a.layout != b.layout:
        msg = f"{a.label} and {b.label} live on different layouts"
        raise DimensionMismatch(msg)
    label = f"{a.label} ∩ {b.label}"
    if a.dim == 0 or b.dim == 0:
        return SpaceBasis(label, a.layout, ratlin.zeros(a.layout.size, 0))
    kernel = ratlin.nullspace(ratlin.hstack(a.basis, -b.basis))
    top = ratlin.rows(kernel, list(range(a.dim)))
    return SpaceBasis(label, a.layout, ratlin.column_basis(ratlin.normal(a.basis * top)))


def image(op_matrix, space, target, label=None):
    """A basis of op(space), where op maps space.layout to target."""
    label = label or f"image({space.label})"
    if space.dim == 0:
        return SpaceBasis(label, target, ratlin.zeros(target.size, 0))
    return SpaceBasis(label, target, ratlin.column_basis(ratlin.normal(op_matrix * space.basis)))


def subspace(space, rows, label=None):
    """Members of space annihilated by the given rows."""
    label = label or f"{space.label}|constrained"
    if space.dim == 0 or rows.shape[0] == 0:
        return SpaceBasis(label, space.layout, space.basis, space.spec)
    kernel = ratlin.nullspace(ratlin.normal(rows * space.basis))
    return SpaceBasis(label, space.layout, ratlin.normal(space.basis * kernel))


def random_member(space, rng):
    """A random combination of the basis with small integer weights."""
    return space.combination(ratlin.random_integers(rng, space.dim))


def polynomial_space(layout, macro_points, label=None):
    """Global polynomials of the layout's degree on the mesh, via blossoming."""
    n = layout.degree
    count = bernstein.count(n, 4)
    columns = []
    for j in range(count):
        unit = [1 if i == j else 0 for i in range(count)]
        for a in range(layout.arity):
            coeffs = [unit if b == a else [0] * count for b in range(layout.arity)]
            columns.append(blossom_field(layout, macro_points, coeffs).coefficients)
    basis = ratlin.hstack(*columns) if columns else ratlin.zeros(layout.size, 0)
    return SpaceBasis(label or f"P_{n}", layout, basis)


def reproduces_polynomials(spec, c):
    """Whether the space equals the global polynomials of its degree."""
    space = build_space(spec, c)
    return same_span(space, polynomial_space(space.layout, c.macro_vertices))
