"""Piecewise polynomial fields in per-cell Bernstein form.

A ``Layout`` fixes the mesh, the degree and the number of components of a
field; its coefficient vector is cell-major, then component, then Bernstein
index. Vector components refer to ``mesh.vector_basis()``: Cartesian axes on
tetrahedral complexes and the (tau, upsilon) pair on a Clough–Tocher face
split.

Every linear operation (derivatives, traces, jumps, integrals against test
functions) is an exact sparse matrix acting on coefficient vectors.
"""

import functools
import threading
from collections import defaultdict
from dataclasses import dataclass

import sympy
from sympy import QQ

from . import bernstein, ratlin
from .errors import DegreeTooLow, DimensionMismatch, IncompatibleKind, PointOutsideCell
from .logger import logger
from .splitgeom import Segment, TetComplex, dot, point


X, Y, Z = sympy.symbols("x y z")


@dataclass(frozen=True)
class Layout:
    mesh: object
    degree: int
    arity: int = 1

    @property
    def nb(self):
        return bernstein.count(self.degree, self.mesh.nvars)

    @property
    def ncells(self):
        return len(self.mesh.cells)

    @property
    def size(self):
        return self.ncells * self.arity * self.nb

    def offset(self, cell, comp=0):
        return (cell * self.arity + comp) * self.nb

    def with_degree(self, degree):
        return Layout(self.mesh, degree, self.arity)

    def with_arity(self, arity):
        return Layout(self.mesh, self.degree, arity)


@dataclass(frozen=True)
class PiecewiseField:
    layout: Layout
    coefficients: ratlin.RatMatrix

    def __post_init__(self):
        if self.coefficients.shape != (self.layout.size, 1):
            msg = (
                f"Coefficient shape {self.coefficients.shape} does not match "
                f"layout size {self.layout.size}"
            )
            raise DimensionMismatch(msg)

    @property
    def mesh(self):
        return self.layout.mesh

    @property
    def degree(self):
        return self.layout.degree

    @property
    def arity(self):
        return self.layout.arity

    def values(self):
        return ratlin.entries(self.coefficients)

    def block(self, cell, comp=0):
        start = self.layout.offset(cell, comp)
        return self.values()[start : start + self.layout.nb]

    def is_zero(self):
        return ratlin.is_zero(self.coefficients)

    def _check_compatible(self, other):
        if self.layout != other.layout:
            msg = f"Fields live on different layouts: {self.layout} and {other.layout}"
            raise DimensionMismatch(msg)

    def __add__(self, other):
        self._check_compatible(other)
        return PiecewiseField(self.layout, self.coefficients + other.coefficients)

    def __sub__(self, other):
        self._check_compatible(other)
        return PiecewiseField(self.layout, self.coefficients - other.coefficients)

    def scaled(self, c):
        return PiecewiseField(self.layout, self.coefficients.mul(ratlin.rat(c)))

    def __eq__(self, other):
        return (
            isinstance(other, PiecewiseField)
            and self.layout == other.layout
            and ratlin.equal(self.coefficients, other.coefficients)
        )

    __hash__ = None


def zero_field(layout):
    return PiecewiseField(layout, ratlin.zeros(layout.size, 1))


def apply(matrix, field, target):
    """The field obtained by applying an operator matrix with target layout."""
    if matrix.shape != (target.size, field.layout.size):
        msg = f"Operator of shape {matrix.shape} cannot map {field.layout} to {target}"
        raise DimensionMismatch(msg)
    return PiecewiseField(target, ratlin.normal(matrix * field.coefficients))


@dataclass(frozen=True)
class DiffOpMatrix:
    op: str
    degree: int
    source: Layout
    target: Layout
    matrix: ratlin.RatMatrix

    def __call__(self, field):
        return apply(self.matrix, field, self.target)


def linear_map(source, target, terms):
    """Assemble a cellwise operator from (target_comp, source_comp, w, factor).

    w is None for a same-degree component map, otherwise a direction vector
    for a derivative (degree drops by one).
    """
    mesh = source.mesh
    nvars = mesh.nvars
    identity = {i: {i: 1} for i in range(source.nb)}
    dod = defaultdict(dict)
    for cell in range(source.ncells):
        for tcomp, scomp, w, factor in terms:
            if not factor:
                continue
            if w is None:
                block = identity
            else:
                direction = mesh.barycentric_direction(cell, w)
                block = bernstein.derivative_entries(source.degree, nvars, direction)
            ro, co = target.offset(cell, tcomp), source.offset(cell, scomp)
            for i, row in block.items():
                out = dod[ro + i]
                for j, v in row.items():
                    out[co + j] = out.get(co + j, 0) + factor * v
    return ratlin.sparse(dod, (target.size, source.size))


def _axes():
    return [point(1, 0, 0), point(0, 1, 0), point(0, 0, 1)]


def _terms_3d(op):
    e = _axes()
    if op == "grad":
        return 1, 3, [(c, 0, e[c], 1) for c in range(3)]
    if op == "curl":
        return 3, 3, [
            (0, 2, e[1], 1),
            (0, 1, e[2], -1),
            (1, 0, e[2], 1),
            (1, 2, e[0], -1),
            (2, 1, e[0], 1),
            (2, 0, e[1], -1),
        ]
    if op == "div":
        return 3, 1, [(0, c, e[c], 1) for c in range(3)]
    return None


def _terms_2d(op, ct):
    tau, ups = ct.tau, ct.upsilon
    g, gi = ct.gram, ct.gram_inverse
    if op == "grad":
        return 1, 2, [(a, 0, w, gi[a][b]) for a in range(2) for b, w in enumerate((tau, ups))]
    if op == "curl":
        # D_tau(v . upsilon) - D_upsilon(v . tau); equals (curl psi) . normal
        return 2, 1, [
            (0, 0, tau, g[1][0]),
            (0, 1, tau, g[1][1]),
            (0, 0, ups, -g[0][0]),
            (0, 1, ups, -g[0][1]),
        ]
    if op == "rot":
        # grad u x normal
        return 1, 2, [(0, 0, ups, 1), (1, 0, tau, -1)]
    if op == "div":
        return 2, 1, [(0, 0, tau, 1), (0, 1, ups, 1)]
    return None


def operator_arities(op, mesh):
    found = _terms_3d(op) if mesh.dim == 3 else _terms_2d(op, mesh)
    if found is None:
        msg = f"No operator {op!r} on a {mesh.dim}-dimensional mesh"
        raise IncompatibleKind(msg)
    return found[:2]


_operator_cache = {}
_operator_lock = threading.Lock()


def operator(op, source):
    """The matrix of grad/curl/div (and rot on face splits) acting on source.

    Cached per (op, layout); the cache is shared between threads.
    """
    key = (op, source)
    with _operator_lock:
        if key in _operator_cache:
            return _operator_cache[key]
    mesh = source.mesh
    found = _terms_3d(op) if mesh.dim == 3 else _terms_2d(op, mesh)
    if found is None:
        msg = f"No operator {op!r} on a {mesh.dim}-dimensional mesh"
        raise IncompatibleKind(msg)
    src_arity, dst_arity, terms = found
    if source.arity != src_arity:
        msg = f"{op} acts on {src_arity}-component fields, got {source.arity}"
        raise IncompatibleKind(msg)
    target = Layout(mesh, source.degree - 1, dst_arity)
    result = DiffOpMatrix(op, source.degree, source, target, linear_map(source, target, terms))
    logger.debug("assembled operator", op=op, degree=source.degree, shape=result.matrix.shape)
    with _operator_lock:
        _operator_cache.setdefault(key, result)
    return result


def diff_matrix(op, r, complex_):
    """grad, curl or div on degree-r fields of a tetrahedral complex."""
    if r < 1:
        msg = f"{op} needs degree at least 1, got {r}"
        raise DegreeTooLow(msg)
    src_arity, _ = operator_arities(op, complex_)
    return operator(op, Layout(complex_, r, src_arity))


def directional(source, w):
    """Componentwise derivative along the direction w."""
    target = source.with_degree(source.degree - 1)
    terms = [(a, a, w, 1) for a in range(source.arity)]
    return linear_map(source, target, terms)


def dot_with(source, w):
    """v . w for a vector layout, as a scalar layout of the same degree."""
    target = source.with_arity(1)
    basis = source.mesh.vector_basis()
    terms = [(0, a, None, dot(basis[a], w)) for a in range(source.arity)]
    return linear_map(source, target, terms)


def elevation(source, degree):
    """Degree elevation of every block to the given degree."""
    if degree < source.degree:
        msg = f"Cannot elevate degree {source.degree} to {degree}"
        raise DegreeTooLow(msg)
    nvars = source.mesh.nvars
    out = ratlin.identity(source.size)
    for d in range(source.degree, degree):
        step_source = source.with_degree(d)
        step_target = source.with_degree(d + 1)
        entries = bernstein.elevation_entries(d, nvars)
        dod = {}
        for cell in range(source.ncells):
            for a in range(source.arity):
                ro, co = step_target.offset(cell, a), step_source.offset(cell, a)
                for i, row in entries.items():
                    dod[ro + i] = {co + j: v for j, v in row.items()}
        out = ratlin.sparse(dod, (step_target.size, step_source.size)) * out
    return ratlin.normal(out)


@functools.cache
def restriction_indices(degree, source_cell, target_ids):
    """Positions in a source-cell block of the coefficients of its restriction
    to the sub-simplex target_ids (given in the same point numbering)."""
    position = {v: i for i, v in enumerate(source_cell)}
    index = bernstein.index_map(degree, len(source_cell))
    out = []
    for beta in bernstein.multi_indices(degree, len(target_ids)):
        alpha = [0] * len(source_cell)
        for v, b in zip(target_ids, beta):
            alpha[position[v]] = b
        out.append(index[tuple(alpha)])
    return tuple(out)


def restriction(source, target, pieces, comp_terms):
    """Restrict source cells onto the cells of a lower-dimensional mesh.

    ``pieces`` lists (target_cell, source_cell, target_ids) with target_ids
    the target cell's vertices in the source numbering; ``comp_terms`` lists
    (target_comp, source_comp, factor).
    """
    dod = defaultdict(dict)
    for tcell, scell, ids in pieces:
        picks = restriction_indices(source.degree, source.mesh.cells[scell], tuple(ids))
        for tcomp, scomp, factor in comp_terms:
            if not factor:
                continue
            ro, co = target.offset(tcell, tcomp), source.offset(scell, scomp)
            for i, j in enumerate(picks):
                out = dod[ro + i]
                out[co + j] = out.get(co + j, 0) + factor
    return ratlin.sparse(dod, (target.size, source.size))


@dataclass(frozen=True)
class FacePatch:
    """A Clough–Tocher face split seen from one side of a tetrahedral complex.

    ``point_ids`` maps the split's local points 0..3 to complex ids and
    ``cells`` gives the complex cell over each triangle Q_k.
    """

    ct: object
    point_ids: tuple
    cells: tuple


def face_patch(c, face, frames=None):
    ct = frames.face_ct(face) if frames is not None else c.face_cts[face]
    return FacePatch(ct, c.face_point_ids(face), tuple(c.cell_over(face, k) for k in range(3)))


TRACE_KINDS = (
    "value",
    "tangential_part",
    "normal_component",
    "surface_grad",
    "surface_curl",
    "surface_div",
    "surface_rot",
    "jump",
    "normal_derivative",
)


def _face_pieces(patch):
    return [
        (k, patch.cells[k], tuple(patch.point_ids[v] for v in patch.ct.cells[k]))
        for k in range(3)
    ]


def face_trace_matrix(source, patch, kind, normal=None):
    """(matrix, target layout) of a trace of a 3D field onto a face split.

    Tangential parts are stored by their (tau, upsilon) components, i.e. the
    coefficients of n x (v x n) / |n|^2 in that basis.
    """
    ct = patch.ct
    normal = ct.normal if normal is None else normal
    pieces = _face_pieces(patch)
    if kind == "value":
        _require_arity(kind, source, 1)
        target = Layout(ct, source.degree, 1)
        return restriction(source, target, pieces, [(0, 0, 1)]), target
    if kind == "normal_component":
        _require_arity(kind, source, 3)
        target = Layout(ct, source.degree, 1)
        return restriction(source, target, pieces, [(0, c, normal[c]) for c in range(3)]), target
    if kind == "tangential_part":
        _require_arity(kind, source, 3)
        target = Layout(ct, source.degree, 2)
        gi = ct.gram_inverse
        terms = [
            (a, c, gi[a][0] * ct.tau[c] + gi[a][1] * ct.upsilon[c])
            for a in range(2)
            for c in range(3)
        ]
        return restriction(source, target, pieces, terms), target
    if kind in ("surface_grad", "surface_rot"):
        inner, middle = face_trace_matrix(source, patch, "value")
        op = operator("grad" if kind == "surface_grad" else "rot", middle)
        return op.matrix * inner, op.target
    if kind in ("surface_curl", "surface_div"):
        inner, middle = face_trace_matrix(source, patch, "tangential_part")
        op = operator("curl" if kind == "surface_curl" else "div", middle)
        return op.matrix * inner, op.target
    if kind == "normal_derivative":
        _require_arity(kind, source, 1)
        derivative = directional(source, normal)
        inner, target = face_trace_matrix(source.with_degree(source.degree - 1), patch, "value")
        return inner * derivative, target
    msg = f"Trace kind {kind!r} does not map onto a face"
    raise IncompatibleKind(msg)


def _require_arity(kind, layout, arity):
    if layout.arity != arity:
        msg = f"Trace kind {kind!r} needs {arity}-component fields, got {layout.arity}"
        raise IncompatibleKind(msg)


@functools.cache
def _segment(mesh, ids):
    a, b = ids
    return Segment(mesh.points[a], mesh.points[b], ids)


def segment(mesh, ids):
    """The oriented edge of a mesh between the given point ids, cached."""
    return _segment(mesh, tuple(ids))


def edge_restriction(source, ids, cell=None):
    """(matrix, target layout): restriction to the edge ids, read from cell."""
    if cell is None:
        cell = source.mesh.cells_containing(ids)[0]
    target = Layout(segment(source.mesh, ids), source.degree, source.arity)
    terms = [(a, a, 1) for a in range(source.arity)]
    return restriction(source, target, [(0, cell, tuple(ids))], terms), target


def jump_matrix(source, k, q1, q2):
    """(matrix, target layout): p|q1 - p|q2 along internal edge k of a face split."""
    ids = (3, k)
    plus, target = edge_restriction(source, ids, q1)
    minus, _ = edge_restriction(source, ids, q2)
    return plus - minus, target


def trace(field, target, kind, frames=None):
    """Restrict a field of a split complex to a face, edge or CT edge.

    target is ("face", i), ("edge", (a, b)) or ("ct_edge", (i, k)); a CT
    edge only supports kind "jump" of a scalar field, taken with the
    orientation of the frame set.
    """
    where, which = target
    layout = field.layout
    if kind not in TRACE_KINDS:
        msg = f"Unknown trace kind {kind!r}"
        raise IncompatibleKind(msg)
    if where == "face":
        matrix, out = face_trace_matrix(
            layout,
            face_patch(layout.mesh, which, frames),
            kind,
            frames.normal(which) if frames is not None else None,
        )
    elif where == "edge":
        if kind != "value":
            msg = f"Edges only support value traces, not {kind!r}"
            raise IncompatibleKind(msg)
        matrix, out = edge_restriction(layout, which)
    elif where == "ct_edge":
        if kind != "jump":
            msg = f"CT edges only support jumps, not {kind!r}"
            raise IncompatibleKind(msg)
        _require_arity(kind, layout, 1)
        face, k = which
        matrix, out = ct_jump_matrix(layout, layout.mesh, face, k, frames)
    else:
        msg = f"Unknown trace target {where!r}"
        raise IncompatibleKind(msg)
    return apply(matrix, field, out)


def ct_jump_matrix(source, c, face, k, frames=None):
    """Jump of a scalar 3D quantity across internal edge k of a face split."""
    if frames is not None:
        ef = frames.ct_edge(face, k)
        q1, q2 = ef.q1, ef.q2
    else:
        q1, q2 = c.face_cts[face].jump_order(k, c.outward_normal(face))
    inner, middle = face_trace_matrix(source, face_patch(c, face, frames), "value")
    jump, target = jump_matrix(middle, k, q1, q2)
    return jump * inner, target


def mass_matrix(test, trial, metric=None):
    """Integrals of test basis functions against trial basis functions.

    Rows follow the test layout and columns the trial layout; metric[a][b]
    pairs component a of the test with component b of the trial.
    """
    if test.mesh is not trial.mesh:
        msg = "Mass matrices need both layouts on one mesh"
        raise DimensionMismatch(msg)
    if metric is None:
        metric = [[1 if a == b else 0 for b in range(trial.arity)] for a in range(test.arity)]
    mesh = test.mesh
    entries = bernstein.mass_entries(test.degree, trial.degree, mesh.nvars)
    dod = defaultdict(dict)
    for cell in range(test.ncells):
        measure = mesh.measures[cell]
        for a in range(test.arity):
            for b in range(trial.arity):
                factor = measure * ratlin.rat(metric[a][b])
                if not factor:
                    continue
                ro, co = test.offset(cell, a), trial.offset(cell, b)
                for i, row in entries.items():
                    out = dod[ro + i]
                    for j, v in row.items():
                        out[co + j] = out.get(co + j, 0) + factor * v
    return ratlin.sparse(dod, (test.size, trial.size))


def mean_row(layout):
    """The row integrating a scalar field over its whole mesh."""
    weight = bernstein.integral_weight(layout.degree, layout.mesh.nvars)
    values = {}
    for cell in range(layout.ncells):
        start = layout.offset(cell)
        for i in range(layout.nb):
            values[start + i] = layout.mesh.measures[cell] * weight
    return ratlin.sparse({0: values}, (1, layout.size))


def integrate(field, weight=None, cells=None):
    """Exact integral of a scalar field, optionally times a scalar weight field."""
    _require_arity("value", field.layout, 1)
    layout = field.layout
    cells = range(layout.ncells) if cells is None else cells
    values = field.values()
    if weight is None:
        w = bernstein.integral_weight(layout.degree, layout.mesh.nvars)
        return sum(
            (
                layout.mesh.measures[c] * w * sum(field.block(c), QQ(0))
                for c in cells
            ),
            QQ(0),
        )
    entries = bernstein.mass_entries(weight.degree, layout.degree, layout.mesh.nvars)
    weights = weight.values()
    total = QQ(0)
    for c in cells:
        wo, fo = weight.layout.offset(c), layout.offset(c)
        cell_total = QQ(0)
        for i, row in entries.items():
            if weights[wo + i]:
                cell_total += weights[wo + i] * sum(
                    (v * values[fo + j] for j, v in row.items()), QQ(0)
                )
        total += layout.mesh.measures[c] * cell_total
    return total


def evaluate(field, p, cell):
    """Value of the field at p, which must lie in the closed cell."""
    mesh = field.mesh
    bary = mesh.barycentric_coordinates(cell, tuple(ratlin.rat(x) for x in p))
    if bary is None or any(b < 0 for b in bary):
        msg = f"Point {p} is outside cell {cell}"
        raise PointOutsideCell(msg)
    values = [
        bernstein.evaluate(field.block(cell, a), field.degree, mesh.nvars, bary)
        for a in range(field.arity)
    ]
    return values[0] if field.arity == 1 else tuple(values)


def field_from_blocks(layout, blocks):
    """blocks[cell][comp] is a list of Bernstein coefficients."""
    values = []
    for cell in range(layout.ncells):
        for a in range(layout.arity):
            values.extend(blocks[cell][a])
    return PiecewiseField(layout, ratlin.column(values))


def _to_sympy(q):
    q = ratlin.rat(q)
    return sympy.Rational(int(q.numerator), int(q.denominator))


def field_from_expressions(layout, exprs):
    """Per-cell Bernstein form of global polynomials in x, y, z.

    exprs has one expression per component; on 3D complexes the components
    are Cartesian.
    """
    if isinstance(exprs, str | sympy.Expr | int):
        exprs = [exprs]
    exprs = [sympy.sympify(e) for e in exprs]
    if len(exprs) != layout.arity:
        msg = f"Expected {layout.arity} expressions, got {len(exprs)}"
        raise DimensionMismatch(msg)
    mesh, n = layout.mesh, layout.degree
    lam = sympy.symbols(f"l0:{mesh.nvars}")
    total = sum(lam)
    polys = [sympy.Poly(e, X, Y, Z) for e in exprs]
    for p in polys:
        if p.total_degree() > n:
            msg = f"Polynomial of degree {p.total_degree()} does not fit degree {n}"
            raise DegreeTooLow(msg)
    blocks = []
    for cell in range(layout.ncells):
        pts = mesh.cell_points(cell)
        coords = [sum(lam[k] * _to_sympy(pts[k][c]) for k in range(mesh.nvars)) for c in range(3)]
        cell_blocks = []
        for p in polys:
            homogeneous = sympy.Integer(0)
            for monom, coeff in p.terms():
                term = coeff * total ** (n - sum(monom))
                for c, power in enumerate(monom):
                    term *= coords[c] ** power
                homogeneous += term
            expanded = sympy.Poly(sympy.expand(homogeneous), *lam).as_dict()
            cell_blocks.append(
                [
                    QQ.from_sympy(expanded.get(alpha, sympy.Integer(0)))
                    / bernstein.multinomial(alpha)
                    for alpha in bernstein.multi_indices(n, mesh.nvars)
                ]
            )
        blocks.append(cell_blocks)
    return field_from_blocks(layout, blocks)


def blossom_field(layout, macro_points, macro_coeffs):
    """Restrict polynomials given in Bernstein form on a macro simplex.

    macro_coeffs[comp] lists the coefficients on the simplex spanned by
    macro_points; cells outside it get the polynomial extension.
    """
    mesh, n = layout.mesh, layout.degree
    macro = TetComplex(macro_points, [(0, 1, 2, 3)])
    blocks = []
    for cell in range(layout.ncells):
        new_vertices = [macro.barycentric_coordinates(0, p) for p in mesh.cell_points(cell)]
        blocks.append(
            [bernstein.change_simplex(macro_coeffs[a], n, 4, new_vertices) for a in range(layout.arity)]
        )
    return field_from_blocks(layout, blocks)


def random_polynomial(layout, macro_points, rng):
    """A global polynomial with small random integer Bernstein coefficients."""
    count = bernstein.count(layout.degree, 4)
    coeffs = [ratlin.random_integers(rng, count) for _ in range(layout.arity)]
    return blossom_field(layout, macro_points, coeffs)


def extend_cell(field, source_cell, target_layout, target_cell):
    """Coefficients on target_cell of the polynomial of field on source_cell."""
    source_mesh = field.mesh
    nvars = source_mesh.nvars
    new_vertices = [
        source_mesh.barycentric_coordinates(source_cell, p)
        for p in target_layout.mesh.cell_points(target_cell)
    ]
    return [
        bernstein.change_simplex(field.block(source_cell, a), field.degree, nvars, new_vertices)
        for a in range(field.arity)
    ]


def hat_function(c):
    """mu: piecewise linear on the Alfeld split, 1 at z and 0 on the boundary."""
    layout = Layout(c, 1, 1)
    blocks = []
    for cell in c.cells:
        blocks.append([[QQ(1) if v == 8 else QQ(0) for v in cell]])
    return field_from_blocks(layout, blocks)
