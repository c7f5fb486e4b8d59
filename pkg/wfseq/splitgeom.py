"""Alfeld, Worsey–Farin and Clough–Tocher splits of a tetrahedron.

Points are tuples of three ``QQ`` coordinates. A ``SplitComplex`` numbers its
points as

    0..3   macro vertices x_0..x_3
    4..7   face split points m_i, m_i on the face opposite x_i
    8      interior split point z

and its twelve cells as ``3 * i + k``: the cone over triangle Q_k of the
Clough–Tocher split of face i with apex z. Cells 3i..3i+2 make up the Alfeld
cell K_i.
"""

import functools
import itertools
from dataclasses import dataclass

from sympy import QQ

from . import ratlin
from .errors import DegenerateSimplex, NotACTInternalEdge, PointNotInterior


def point(x, y, z):
    return (ratlin.rat(x), ratlin.rat(y), ratlin.rat(z))


def add(a, b):
    return tuple(p + q for p, q in zip(a, b))


def sub(a, b):
    return tuple(p - q for p, q in zip(a, b))


def scale(c, a):
    return tuple(c * p for p in a)


def dot(a, b):
    return sum((p * q for p, q in zip(a, b)), QQ(0))


def cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def combination(weights, points):
    out = (QQ(0), QQ(0), QQ(0))
    for w, p in zip(weights, points):
        out = add(out, scale(w, p))
    return out


def barycenter(points):
    return combination([QQ(1, len(points))] * len(points), points)


def det3(a, b, c):
    return dot(a, cross(b, c))


def signed_volume(p0, p1, p2, p3):
    return det3(sub(p1, p0), sub(p2, p0), sub(p3, p0)) / 6


def is_zero_vector(a):
    return not any(a)


def coplanar(p0, p1, p2, p3):
    return signed_volume(p0, p1, p2, p3) == 0


@dataclass(frozen=True)
class Simplex:
    dim: int
    vertex_ids: tuple

    def __post_init__(self):
        assert len(self.vertex_ids) == self.dim + 1
        assert len(set(self.vertex_ids)) == len(self.vertex_ids)


@dataclass(frozen=True)
class EdgeFrame:
    """Directions attached to an internal edge of a Clough–Tocher face split.

    ``q1``/``q2`` are the CT triangles in jump order: s_vec points away from
    q1, and the jump of p across the edge is p|q1 - p|q2.
    """

    face: int
    edge: int
    t: tuple
    s_vec: tuple
    r_vec: tuple
    n_F: tuple
    q1: int
    q2: int


class SimplicialMesh:
    """Points plus cells given as tuples of point ids.

    Subclasses fix ``dim``; the geometric helpers work for segments,
    triangles and tetrahedra sitting in three-space.
    """

    dim = None

    def __init__(self, points, cells):
        self.points = tuple(points)
        self.cells = tuple(tuple(c) for c in cells)

    @property
    def nvars(self):
        return self.dim + 1

    def cell_points(self, cell):
        return [self.points[v] for v in self.cells[cell]]

    @functools.cached_property
    def _pseudo_inverses(self):
        out = []
        for cell in range(len(self.cells)):
            pts = self.cell_points(cell)
            edges = [sub(p, pts[0]) for p in pts[1:]]
            gram = ratlin.matrix([[dot(a, b) for b in edges] for a in edges])
            gram_inv = ratlin.to_lists(ratlin.inverse(gram))
            out.append(
                [
                    tuple(
                        sum((gram_inv[i][j] * edges[j][c] for j in range(self.dim)), QQ(0))
                        for c in range(3)
                    )
                    for i in range(self.dim)
                ]
            )
        return out

    def _affine_coordinates(self, cell, w):
        rows = self._pseudo_inverses[cell]
        beta = [dot(r, w) for r in rows]
        pts = self.cell_points(cell)
        rebuilt = combination(beta, [sub(p, pts[0]) for p in pts[1:]])
        return beta, rebuilt == tuple(w)

    def barycentric_direction(self, cell, w):
        """Barycentric coordinates of the direction w in the given cell.

        w must be parallel to the cell; entries sum to zero.
        """
        beta, exact = self._affine_coordinates(cell, w)
        assert exact, f"direction {w} is not parallel to cell {cell}"
        return (-sum(beta, QQ(0)), *beta)

    def barycentric_coordinates(self, cell, p):
        """Barycentric coordinates of p, or None if p is off the cell's span."""
        origin = self.cell_points(cell)[0]
        beta, exact = self._affine_coordinates(cell, sub(p, origin))
        if not exact:
            return None
        return (1 - sum(beta, QQ(0)), *beta)

    def contains(self, cell, p):
        bary = self.barycentric_coordinates(cell, p)
        return bary is not None and all(b >= 0 for b in bary)

    def cells_containing(self, ids):
        ids = set(ids)
        return [c for c, verts in enumerate(self.cells) if ids <= set(verts)]

    @functools.cached_property
    def facets(self):
        """Every (dim-1)-simplex as a sorted id tuple, with its cells."""
        owners = {}
        for c, verts in enumerate(self.cells):
            for facet in itertools.combinations(sorted(verts), self.dim):
                owners.setdefault(facet, []).append(c)
        return {facet: tuple(cells) for facet, cells in sorted(owners.items())}

    @functools.cached_property
    def interior_facets(self):
        return [(f, cs) for f, cs in self.facets.items() if len(cs) == 2]

    @functools.cached_property
    def boundary_facets(self):
        return [(f, cs[0]) for f, cs in self.facets.items() if len(cs) == 1]

    def on_boundary(self, ids):
        """Whether the simplex spanned by ids lies in the boundary."""
        ids = set(ids)
        return any(ids <= set(f) for f, _ in self.boundary_facets)

    def vector_basis(self):
        """Directions that vector components of fields on this mesh refer to."""
        raise NotImplementedError


class Segment(SimplicialMesh):
    """A single oriented edge; its cell is (0, 1)."""

    dim = 1

    def __init__(self, start, end, vertex_ids=None):
        if start == end:
            msg = f"Segment endpoints coincide at {start}"
            raise DegenerateSimplex(msg)
        super().__init__([start, end], [(0, 1)])
        self.vertex_ids = tuple(vertex_ids) if vertex_ids else (0, 1)

    @property
    def measures(self):
        return (QQ(1),)

    def vector_basis(self):
        return [sub(self.points[1], self.points[0])]


class FaceCT(SimplicialMesh):
    """The Clough–Tocher split of a triangle [y_0, y_1, y_2] at m.

    Local point ids 0, 1, 2 are the y's and 3 is m. Triangle Q_k is cell k,
    (3, a, b) with a < b the two y's other than y_k. Internal edge k joins m
    to y_k. Vector fields on the split are stored by their components along
    (tau, upsilon); normal = tau x upsilon.
    """

    dim = 2

    def __init__(self, ys, m, vertex_ids=None, tangents=None):
        ys = tuple(ys)
        cells = [(3, *(j for j in range(3) if j != k)) for k in range(3)]
        super().__init__([*ys, m], cells)
        self.vertex_ids = tuple(vertex_ids) if vertex_ids else (0, 1, 2)
        if tangents is None:
            tangents = (sub(ys[1], ys[0]), sub(ys[2], ys[0]))
        self.tau, self.upsilon = tangents
        self.normal = cross(self.tau, self.upsilon)
        if is_zero_vector(self.normal):
            msg = f"Triangle {ys} is degenerate"
            raise DegenerateSimplex(msg)
        self.gram = (
            (dot(self.tau, self.tau), dot(self.tau, self.upsilon)),
            (dot(self.upsilon, self.tau), dot(self.upsilon, self.upsilon)),
        )
        det = self.gram[0][0] * self.gram[1][1] - self.gram[0][1] ** 2
        self.gram_inverse = (
            (self.gram[1][1] / det, -self.gram[0][1] / det),
            (-self.gram[1][0] / det, self.gram[0][0] / det),
        )

    @property
    def ys(self):
        return self.points[:3]

    @property
    def m(self):
        return self.points[3]

    @property
    def ef_index(self):
        """e_F: the internal edge through the y with the smallest id."""
        return min(range(3), key=lambda k: self.vertex_ids[k])

    @property
    def internal_edges(self):
        return [(k, 3) for k in range(3)]

    @property
    def boundary_edges(self):
        return [(0, 1), (0, 2), (1, 2)]

    @functools.cached_property
    def measures(self):
        """Areas as fractions of the area of the whole face."""
        ys = self.ys
        n = cross(sub(ys[1], ys[0]), sub(ys[2], ys[0]))
        whole = dot(n, n)
        out = []
        for cell in range(3):
            p = self.cell_points(cell)
            out.append(dot(cross(sub(p[1], p[0]), sub(p[2], p[0])), n) / whole)
        return tuple(abs(a) for a in out)

    def vector_basis(self):
        return [self.tau, self.upsilon]

    def triangles_at(self, k):
        """The two triangles sharing internal edge k."""
        return tuple(j for j in range(3) if j != k)

    def jump_order(self, k, normal=None):
        """(q1, q2) for internal edge k: s = normal x t points away from q1."""
        normal = self.normal if normal is None else normal
        t = sub(self.ys[k], self.m)
        s = cross(normal, t)
        a, b = self.triangles_at(k)
        # Q_a contains y_b and vice versa
        if dot(sub(self.ys[b], self.m), s) < 0:
            return a, b
        return b, a

    def rebased(self, tangents):
        return FaceCT(self.ys, self.m, self.vertex_ids, tangents)


def build_clough_tocher(face, m, vertex_ids=None, tangents=None):
    """Split the triangle ``face`` (three points) at m."""
    ct = FaceCT(face, m, vertex_ids, tangents)
    bary = _triangle_barycentric(face, m)
    if bary is None or any(b <= 0 for b in bary):
        msg = f"Split point {m} is not strictly inside the face {face}"
        raise PointNotInterior(msg)
    return ct


def _triangle_barycentric(ys, p):
    n = cross(sub(ys[1], ys[0]), sub(ys[2], ys[0]))
    if not coplanar(*ys, p):
        return None
    whole = dot(n, n)
    out = []
    for k in range(3):
        a, b = (ys[j] for j in range(3) if j != k)
        if k == 1:
            a, b = b, a
        out.append(dot(cross(sub(a, p), sub(b, p)), n) / whole)
    return tuple(out)


class TetComplex(SimplicialMesh):
    """A tetrahedral complex; cells are positively oriented."""

    dim = 3

    def __init__(self, points, cells):
        fixed = []
        for cell in cells:
            p = [points[v] for v in cell]
            volume = signed_volume(*p)
            if volume == 0:
                msg = f"Cell {cell} has zero volume"
                raise DegenerateSimplex(msg)
            if volume < 0:
                cell = (cell[0], cell[1], cell[3], cell[2])
            fixed.append(tuple(cell))
        super().__init__(points, fixed)

    @functools.cached_property
    def measures(self):
        return tuple(signed_volume(*self.cell_points(c)) for c in range(len(self.cells)))

    def vector_basis(self):
        return [point(1, 0, 0), point(0, 1, 0), point(0, 0, 1)]

    @functools.cached_property
    def _simplices(self):
        out = {}
        for s in range(4):
            found = set()
            for verts in self.cells:
                found.update(itertools.combinations(sorted(verts), s + 1))
            out[s] = sorted(found)
        return out

    def simplices(self, s):
        return self._simplices[s]

    @property
    def singular_edges(self):
        return ()


class SplitComplex(TetComplex):
    """The Worsey–Farin split of a macro tetrahedron."""

    def __init__(self, vertices, z, face_points, face_cts=None):
        self.macro_vertices = tuple(vertices)
        self.interior_point = z
        self.face_points = tuple(face_points)
        cells = []
        for i in range(4):
            for j in self.face_vertex_ids(i):
                rest = [v for v in self.face_vertex_ids(i) if v != j]
                cells.append((8, 4 + i, *rest))
        super().__init__([*vertices, *face_points, z], cells)
        face_cts = dict(face_cts or {})
        self.face_cts = tuple(
            face_cts.get(i) or self._face_ct(i) for i in range(4)
        )

    @staticmethod
    def face_vertex_ids(i):
        return tuple(v for v in range(4) if v != i)

    def _face_ct(self, i):
        ys = [self.points[v] for v in self.face_vertex_ids(i)]
        ct = FaceCT(ys, self.face_points[i], self.face_vertex_ids(i))
        if dot(ct.normal, self.outward_normal(i)) < 0:
            ct = ct.rebased((ct.upsilon, ct.tau))
        return ct

    def outward_normal(self, i):
        ys = [self.points[v] for v in self.face_vertex_ids(i)]
        n = cross(sub(ys[1], ys[0]), sub(ys[2], ys[0]))
        if dot(n, sub(self.points[i], ys[0])) > 0:
            n = scale(-1, n)
        return n

    def face_point_ids(self, i):
        """Complex ids of the FaceCT local points 0..3 of face i."""
        return (*self.face_vertex_ids(i), 4 + i)

    def cell_over(self, i, k):
        return 3 * i + k

    def alfeld_index(self, cell):
        return cell // 3

    @property
    def alfeld_cells(self):
        return tuple(
            Simplex(3, (8, *self.face_vertex_ids(i))) for i in range(4)
        )

    @functools.cached_property
    def hat_pieces(self):
        """(gradient, offset) of the affine piece of mu on each Alfeld cell."""
        out = []
        z = self.interior_point
        for i in range(4):
            n = self.outward_normal(i)
            base = self.points[self.face_vertex_ids(i)[0]]
            height = dot(n, sub(z, base))
            gradient = scale(1 / height, n)
            out.append((gradient, -dot(gradient, base)))
        return tuple(out)

    def hat_value(self, i, p):
        gradient, offset = self.hat_pieces[i]
        return dot(gradient, p) + offset

    def ct_edge_ids(self, i, k):
        """Complex ids (m, y_k) of internal edge k of face i."""
        return (4 + i, self.face_vertex_ids(i)[k])

    def locate_ct_edge(self, edge):
        """(face, k) for an internal CT edge given by complex ids."""
        ids = set(edge)
        for i in range(4):
            for k in range(3):
                if set(self.ct_edge_ids(i, k)) == ids:
                    return i, k
        msg = f"Edge {edge} is not internal to a face split"
        raise NotACTInternalEdge(msg)

    def macro_faces_containing(self, ids):
        return [i for i in range(4) if set(ids) <= set(self.face_point_ids(i))]


def build_worsey_farin(vertices, z=None, face_points=None, *, face_cts=None):
    """Split a macro tetrahedron; z and face points default to barycenters."""
    vertices = tuple(tuple(ratlin.rat(c) for c in v) for v in vertices)
    if signed_volume(*vertices) == 0:
        msg = f"Macro tetrahedron {vertices} has zero volume"
        raise DegenerateSimplex(msg)
    if z is None:
        z = barycenter(vertices)
    z = tuple(ratlin.rat(c) for c in z)
    single = TetComplex(vertices, [(0, 1, 2, 3)])
    bary = single.barycentric_coordinates(0, z)
    if any(b <= 0 for b in bary):
        msg = f"Interior point {z} is not strictly inside the macro tetrahedron"
        raise PointNotInterior(msg)
    if face_points is None:
        face_points = [None] * 4
    resolved = []
    for i in range(4):
        ys = [vertices[v] for v in SplitComplex.face_vertex_ids(i)]
        m = face_points[i]
        m = barycenter(ys) if m is None else tuple(ratlin.rat(c) for c in m)
        build_clough_tocher(ys, m)
        resolved.append(m)
    return SplitComplex(vertices, z, resolved, face_cts=face_cts)


@functools.cache
def reference_split():
    return build_worsey_farin(
        [point(0, 0, 0), point(1, 0, 0), point(0, 1, 0), point(0, 0, 1)]
    )


@functools.cache
def reference_face():
    """The unit right triangle split at its barycenter."""
    ys = [point(0, 0, 0), point(1, 0, 0), point(0, 1, 0)]
    return build_clough_tocher(ys, barycenter(ys))


def subsimplices(c, s, where="all", face=None):
    """s-simplices of the complex as ``Simplex`` values in a fixed order.

    ``where`` is one of "all", "interior", "boundary", "on_macro_face"; the
    last needs the macro face index.
    """
    if s == 3:
        found = [Simplex(3, cell) for cell in c.cells]
        ids = [cell for cell in c.cells]
    else:
        ids = c.simplices(s)
        found = [Simplex(s, v) for v in ids]
    if where == "all":
        return found
    if where == "interior":
        return [x for x, v in zip(found, ids) if not c.on_boundary(v)]
    if where == "boundary":
        return [x for x, v in zip(found, ids) if c.on_boundary(v)]
    if where == "on_macro_face":
        allowed = set(c.face_point_ids(face))
        return [x for x, v in zip(found, ids) if set(v) <= allowed]
    msg = f"Unknown filter {where!r}"
    raise ValueError(msg)


def edge_frame(c, edge, normal=None):
    """The frame of an internal CT edge given by its complex ids or a Simplex."""
    ids = edge.vertex_ids if isinstance(edge, Simplex) else tuple(edge)
    face, k = c.locate_ct_edge(ids)
    return ct_edge_frame(c, face, k, normal)


def ct_edge_frame(c, face, k, normal=None, stretch=1):
    ct = c.face_cts[face]
    n = c.outward_normal(face) if normal is None else normal
    m = ct.m
    t = scale(stretch, sub(ct.ys[k], m))
    s = cross(n, t)
    toward_z = sub(c.interior_point, m)
    r = sub(scale(dot(t, t), toward_z), scale(dot(toward_z, t), t))
    q1, q2 = ct.jump_order(k, n)
    return EdgeFrame(face, k, t, s, r, n, q1, q2)


def singular_edges(c):
    return tuple(c.singular_edges)


def incident_planes(c, edge):
    """Distinct planes spanned by the interior faces containing edge."""
    faces = [f for f, cs in c.interior_facets if set(edge) <= set(f)]
    planes = []
    for f in faces:
        pts = [c.points[v] for v in f]
        for plane in planes:
            if all(coplanar(*plane, p) for p in pts):
                break
        else:
            planes.append(pts)
    return planes


class FrameSet:
    """Every direction a degree of freedom refers to.

    The standard set uses outward face normals, edge tangents away from the
    face split points, and for a macro edge the pair (n_A, n_A x t) built
    from an anchor face A containing it. The alternate set replaces each of
    these by a different rational basis of the same subspace.
    """

    def __init__(self, c, *, alternate=False, normals=None, anchors=None):
        self.complex = c
        self.alternate = alternate
        self._normals = dict(normals or {})
        self._anchors = dict(anchors or {})
        self._face_cts = {}

    @classmethod
    def for_shared_face(cls, c, face, normal):
        """Frames agreeing with the other side of a face shared with a neighbour."""
        ids = c.face_vertex_ids(face)
        anchors = {e: face for e in itertools.combinations(ids, 2)}
        return cls(c, normals={face: normal}, anchors=anchors)

    def normal(self, face):
        n = self._normals.get(face) or self.complex.outward_normal(face)
        return scale(2, n) if self.alternate else n

    def face_ct(self, face):
        ct = self.complex.face_cts[face]
        if not self.alternate:
            return ct
        if face not in self._face_cts:
            self._face_cts[face] = ct.rebased(
                (add(ct.tau, ct.upsilon), sub(ct.upsilon, ct.tau))
            )
        return self._face_cts[face]

    def anchor(self, edge):
        if edge in self._anchors:
            return self._anchors[edge]
        return min(self.complex.macro_faces_containing(edge))

    def edge_tangent(self, edge):
        a, b = edge
        return sub(self.complex.points[b], self.complex.points[a])

    def edge_normals(self, edge):
        n = self.normal(self.anchor(edge))
        other = cross(n, self.edge_tangent(edge))
        if self.alternate:
            return add(n, other), sub(n, other)
        return n, other

    def ct_edge(self, face, k):
        stretch = 3 if self.alternate else 1
        return ct_edge_frame(self.complex, face, k, self.normal(face), stretch)

    def vertex_basis(self):
        if self.alternate:
            return [point(1, 1, 0), point(-1, 1, 0), point(0, 0, 2)]
        return [point(1, 0, 0), point(0, 1, 0), point(0, 0, 1)]


def to_document(c):
    """A JSON-ready description of the complex with exact coordinates."""

    def fmt(p):
        return [ratlin.format_rational(x) for x in p]

    return {
        "points": [fmt(p) for p in c.points],
        "cells": [list(cell) for cell in c.cells],
        "simplices": {
            str(s): [
                {"vertices": list(v), "boundary": c.on_boundary(v)}
                for v in c.simplices(s)
            ]
            for s in range(3)
        },
        "singular_edges": [list(e) for e in singular_edges(c)],
    }
