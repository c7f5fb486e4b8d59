"""Linear functionals on piecewise polynomial fields, as exact row blocks.

Every builder takes the layout of the fields the functionals act on and
returns a matrix with one row per functional. Moments use Bernstein bases
of the weight spaces; face measures are normalised to |F| = 1 and edge
measures to the unit parameter interval.
"""

import itertools
from dataclasses import dataclass

from . import bernstein, ratlin
from .errors import DimensionMismatch
from .fespace import build_space, image, subspace
from .pwpoly import (
    Layout,
    ct_jump_matrix,
    directional,
    dot_with,
    edge_restriction,
    face_patch,
    face_trace_matrix,
    mass_matrix,
    mean_row,
    operator,
)
from .splitgeom import dot


MACRO_VERTICES = (0, 1, 2, 3)
MACRO_EDGES = tuple(itertools.combinations(MACRO_VERTICES, 2))
MACRO_FACES = (0, 1, 2, 3)


@dataclass(frozen=True)
class Functional:
    """One degree of freedom: evaluation on a field is row · coefficients."""

    row: ratlin.RatMatrix
    dof_class: str
    carrier: tuple
    weight_index: int

    def __call__(self, field):
        value = ratlin.normal(self.row * field.coefficients)
        return ratlin.entries(value)[0]


class RowCollector:
    """Stacks row blocks and remembers what each row is."""

    def __init__(self, ncols):
        self.ncols = ncols
        self.blocks = []
        self.tags = []

    def add(self, dof_class, carrier, block):
        if block.shape[1] != self.ncols:
            msg = f"{dof_class} rows have {block.shape[1]} columns, expected {self.ncols}"
            raise DimensionMismatch(msg)
        for i in range(block.shape[0]):
            self.tags.append((dof_class, tuple(carrier), i))
        if block.shape[0]:
            self.blocks.append(block)

    def matrix(self):
        if not self.blocks:
            return ratlin.zeros(0, self.ncols)
        return ratlin.vstack(*self.blocks, ncols=self.ncols)


def empty(layout):
    return ratlin.zeros(0, layout.size)


def vertex_rows(layout, vertex, directions=None):
    """Point values at a vertex; vector fields are paired with each direction."""
    mesh = layout.mesh
    cell = mesh.cells_containing((vertex,))[0]
    i = bernstein.vertex_index(layout.degree, mesh.nvars, mesh.cells[cell].index(vertex))
    if directions is None:
        return ratlin.sparse({0: {layout.offset(cell) + i: 1}}, (1, layout.size))
    basis = mesh.vector_basis()
    dod = {
        n: {layout.offset(cell, a) + i: dot(basis[a], d) for a in range(layout.arity)}
        for n, d in enumerate(directions)
    }
    return ratlin.sparse(dod, (len(directions), layout.size))


def vertex_derivative_rows(layout, vertex, directions):
    """Directional derivatives of a scalar field at a vertex."""
    blocks = [
        vertex_rows(layout.with_degree(layout.degree - 1), vertex) * directional(layout, d)
        for d in directions
    ]
    return ratlin.vstack(*blocks, ncols=layout.size)


def edge_moment_rows(layout, edge, k):
    """∫_e q κ ds for κ in the Bernstein basis of P_k(e), scalar q."""
    if k < 0 or layout.degree < 0:
        return empty(layout)
    restriction, on_edge = edge_restriction(layout, edge)
    weights = Layout(on_edge.mesh, k, 1)
    return ratlin.normal(mass_matrix(weights, on_edge) * restriction)


def edge_vector_moment_rows(layout, edge, k, directions):
    """∫_e v · κ ds for κ in [P_k(e)]^3, one block per direction."""
    if k < 0:
        return empty(layout)
    scalar = layout.with_arity(1)
    blocks = [edge_moment_rows(scalar, edge, k) * dot_with(layout, d) for d in directions]
    return ratlin.normal(ratlin.vstack(*blocks, ncols=layout.size))


def edge_derivative_moment_rows(layout, edge, k, directions):
    """∫_e (∂q/∂d) κ ds for each direction d and κ in P_k(e)."""
    if k < 0:
        return empty(layout)
    lowered = layout.with_degree(layout.degree - 1)
    blocks = [edge_moment_rows(lowered, edge, k) * directional(layout, d) for d in directions]
    return ratlin.normal(ratlin.vstack(*blocks, ncols=layout.size))


def face_moment_rows(layout, frames, face, kind, test):
    """∫_F trace · κ dA over the basis κ of a test space on the face split.

    Vector traces and tests are paired through the face's Gram matrix.
    """
    if test.dim == 0 or layout.degree < 0:
        return empty(layout)
    patch = face_patch(frames.complex, face, frames)
    trace, on_face = face_trace_matrix(layout, patch, kind, frames.normal(face))
    if test.layout.mesh is not on_face.mesh:
        msg = f"Test space {test.label} does not live on the split of face {face}"
        raise DimensionMismatch(msg)
    metric = patch.ct.gram if on_face.arity == 2 else None
    mass = mass_matrix(test.layout, on_face, metric)
    return ratlin.normal(test.basis.transpose() * mass * trace)


def jump_moment_rows(layout, frames, face, k, m):
    """∫_e ⟦q⟧ κ ds over internal edge k of a face split, κ in P_m(e)."""
    if m < 0 or layout.degree < 0:
        return empty(layout)
    jump, on_edge = ct_jump_matrix(layout, frames.complex, face, k, frames)
    weights = Layout(on_edge.mesh, m, 1)
    return ratlin.normal(mass_matrix(weights, on_edge) * jump)


def volume_moment_rows(layout, test):
    """∫_T f · κ dx over the basis κ of a test space on the same complex."""
    if test.dim == 0 or layout.degree < 0:
        return empty(layout)
    mass = mass_matrix(test.layout, layout)
    return ratlin.normal(test.basis.transpose() * mass)


def mean_rows(layout):
    return mean_row(layout)


def image_space(op, spec, mesh):
    """op applied to a whole space, e.g. grad of ring-S0 or curl of ring-L1."""
    space = build_space(spec, mesh)
    derivative = operator(op, space.layout)
    return image(derivative.matrix, space, derivative.target, f"{op} {space.label}")


def mean_free(space):
    """The mean-zero members of a scalar space."""
    if space.dim == 0:
        return space
    return subspace(space, mean_row(space.layout), f"{space.label} ∩ L2_0")

