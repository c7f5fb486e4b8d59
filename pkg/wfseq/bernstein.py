"""Bernstein–Bézier kernels on a single simplex.

A polynomial of degree n on a simplex with d+1 vertices is stored as the list
of its Bernstein coefficients, ordered by ``multi_indices(n, d + 1)``. The
functions here know nothing about geometry: directions and points are given
in barycentric coordinates.
"""

import functools
import math

from sympy import QQ


@functools.cache
def multi_indices(degree, nvars):
    """All nvars-tuples of non-negative integers summing to degree.

    Ordered so that the first entry decreases slowest; the vertex indices
    (degree, 0, ..., 0), (0, degree, ..., 0), ... come in vertex order.
    """
    if degree < 0:
        return ()
    if nvars == 1:
        return ((degree,),)
    out = []
    for first in range(degree, -1, -1):
        for rest in multi_indices(degree - first, nvars - 1):
            out.append((first, *rest))
    return tuple(out)


@functools.cache
def index_map(degree, nvars):
    return {alpha: i for i, alpha in enumerate(multi_indices(degree, nvars))}


def count(degree, nvars):
    if degree < 0:
        return 0
    return math.comb(degree + nvars - 1, nvars - 1)


def multinomial(alpha):
    out = math.factorial(sum(alpha))
    for a in alpha:
        out //= math.factorial(a)
    return out


def vertex_index(degree, nvars, vertex):
    alpha = [0] * nvars
    alpha[vertex] = degree
    return index_map(degree, nvars)[tuple(alpha)]


@functools.cache
def shifts(degree, nvars):
    """For each gamma of degree-1 and each k, the index of gamma + e_k."""
    target = index_map(degree, nvars)
    out = []
    for gamma in multi_indices(degree - 1, nvars):
        row = []
        for k in range(nvars):
            raised = list(gamma)
            raised[k] += 1
            row.append(target[tuple(raised)])
        out.append(tuple(row))
    return tuple(out)


def derivative_entries(degree, nvars, direction):
    """{row: {col: value}} of the directional derivative along a barycentric
    direction (entries summing to zero), degree -> degree-1."""
    dod = {}
    for i, targets in enumerate(shifts(degree, nvars)):
        row = {}
        for k, j in enumerate(targets):
            if direction[k]:
                row[j] = row.get(j, 0) + degree * direction[k]
        if row:
            dod[i] = row
    return dod


@functools.cache
def elevation_entries(degree, nvars):
    """{row: {col: value}} of degree elevation degree -> degree+1."""
    source = index_map(degree, nvars)
    dod = {}
    for i, alpha in enumerate(multi_indices(degree + 1, nvars)):
        row = {}
        for k in range(nvars):
            if alpha[k]:
                lowered = list(alpha)
                lowered[k] -= 1
                row[source[tuple(lowered)]] = QQ(alpha[k], degree + 1)
        dod[i] = row
    return dod


@functools.cache
def mass_entries(m, n, nvars):
    """Integrals of B^m_alpha B^n_beta over a simplex of unit measure."""
    dim = nvars - 1
    scale = math.comb(m + n + dim, dim)
    dod = {}
    for i, alpha in enumerate(multi_indices(m, nvars)):
        ca = multinomial(alpha)
        row = {}
        for j, beta in enumerate(multi_indices(n, nvars)):
            gamma = tuple(a + b for a, b in zip(alpha, beta))
            row[j] = QQ(ca * multinomial(beta), multinomial(gamma) * scale)
        dod[i] = row
    return dod


def integral_weight(degree, nvars):
    """The integral of every B^degree_alpha over a simplex of unit measure."""
    return QQ(1, math.comb(degree + nvars - 1, nvars - 1))


def contract(coeffs, degree, nvars, u):
    """One de Casteljau step: degree -> degree-1, blossom argument u."""
    out = []
    for targets in shifts(degree, nvars):
        value = QQ(0)
        for k, j in enumerate(targets):
            if u[k]:
                value += u[k] * coeffs[j]
        out.append(value)
    return out


def evaluate(coeffs, degree, nvars, bary):
    """Value at a point with barycentric coordinates bary (de Casteljau)."""
    if degree < 0:
        return QQ(0)
    for m in range(degree, 0, -1):
        coeffs = contract(coeffs, m, nvars, bary)
    return coeffs[0]


def change_simplex(coeffs, degree, nvars, new_vertices):
    """Coefficients of the same polynomial on another simplex.

    ``new_vertices`` are the barycentric coordinates (with respect to the
    current simplex) of the vertices of the new one; the new simplex may
    have fewer vertices, which restricts to a sub-simplex or a face. Each new
    coefficient is a blossom value; shared argument prefixes are memoised.
    """
    new_nvars = len(new_vertices)
    states = {(0,) * new_nvars: list(coeffs)}

    def state(counts):
        if counts not in states:
            j = max(k for k, c in enumerate(counts) if c)
            parent = list(counts)
            parent[j] -= 1
            parent = tuple(parent)
            states[counts] = contract(
                state(parent), degree - sum(parent), nvars, new_vertices[j]
            )
        return states[counts]

    return [state(gamma)[0] for gamma in multi_indices(degree, new_nvars)]
