"""Exact rational linear algebra.

Everything is a ``sympy`` ``DomainMatrix`` over ``QQ`` in sparse format.
Elimination clears row denominators and runs the fraction-free reduced
echelon form over ``ZZ`` (``rref_den``), so intermediate entries stay
integers; pivots are chosen deterministically, first nonzero column first.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from sympy import QQ, ZZ
from sympy.polys.matrices import DomainMatrix

from .errors import DimensionMismatch, EmptyMatrix, NoSolution
from .logger import logger


RatMatrix = DomainMatrix
RationalScalar = QQ.dtype

ZERO = QQ(0)
ONE = QQ(1)


def rat(value, denominator=1):
    """Convert an int, Fraction, sympy number or QQ element to a QQ element."""
    if isinstance(value, Fraction):
        value = QQ(value.numerator, value.denominator)
    elif isinstance(value, int):
        value = QQ(value)
    elif not QQ.of_type(value):
        value = QQ.convert(value)
    if denominator != 1:
        value = value / rat(denominator)
    return value


def parse_rational(text):
    """Parse "3", "-2/7" or "0.125" exactly."""
    value = Fraction(str(text).strip())
    return QQ(value.numerator, value.denominator)


def format_rational(value):
    value = rat(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def normal(m):
    """m as a sparse matrix over QQ."""
    if m.domain != QQ:
        m = m.convert_to(QQ)
    return m.to_sparse()


def sparse(dod, shape):
    """Build a matrix from {row: {col: value}}; zero values are dropped."""
    clean = {}
    for i, row in dod.items():
        kept = {j: rat(v) for j, v in row.items() if v}
        if kept:
            clean[i] = kept
    return DomainMatrix.from_dod(clean, shape, QQ)


def matrix(rows):
    rows = [list(row) for row in rows]
    ncols = len(rows[0]) if rows else 0
    return sparse(
        {i: dict(enumerate(row)) for i, row in enumerate(rows)}, (len(rows), ncols)
    )


def column(values):
    values = list(values)
    return sparse({i: {0: v} for i, v in enumerate(values)}, (len(values), 1))


def row(values):
    values = list(values)
    return sparse({0: dict(enumerate(values))}, (1, len(values)))


def zeros(nrows, ncols):
    return DomainMatrix.zeros((nrows, ncols), QQ, fmt="sparse")


def identity(n):
    return DomainMatrix.eye(n, QQ).to_sparse()


def entries(col):
    """The values of an n×1 matrix as a list of QQ elements."""
    dod = col.to_dod()
    return [dod.get(i, {}).get(0, ZERO) for i in range(col.shape[0])]


def to_lists(m):
    dod = m.to_dod()
    nrows, ncols = m.shape
    return [[dod.get(i, {}).get(j, ZERO) for j in range(ncols)] for i in range(nrows)]


def hstack(*blocks):
    blocks = [normal(b) for b in blocks]
    nrows = blocks[0].shape[0]
    for b in blocks:
        if b.shape[0] != nrows:
            msg = f"Cannot hstack blocks with {b.shape[0]} and {nrows} rows"
            raise DimensionMismatch(msg)
    dod, offset = {}, 0
    for b in blocks:
        for i, r in b.to_dod().items():
            dod.setdefault(i, {}).update({offset + j: v for j, v in r.items()})
        offset += b.shape[1]
    return DomainMatrix.from_dod(dod, (nrows, offset), QQ)


def vstack(*blocks, ncols=None):
    blocks = [normal(b) for b in blocks]
    if ncols is None:
        ncols = blocks[0].shape[1]
    dod, offset = {}, 0
    for b in blocks:
        if b.shape[1] != ncols:
            msg = f"Cannot vstack blocks with {b.shape[1]} and {ncols} columns"
            raise DimensionMismatch(msg)
        for i, r in b.to_dod().items():
            dod[offset + i] = dict(r)
        offset += b.shape[0]
    return DomainMatrix.from_dod(dod, (offset, ncols), QQ)


def block_diag(*blocks):
    dod, roff, coff = {}, 0, 0
    for b in blocks:
        for i, r in normal(b).to_dod().items():
            dod[roff + i] = {coff + j: v for j, v in r.items()}
        roff += b.shape[0]
        coff += b.shape[1]
    return DomainMatrix.from_dod(dod, (roff, coff), QQ)


def columns(m, indices):
    """The sub-matrix made of the given columns, in the given order."""
    position = {j: k for k, j in enumerate(indices)}
    dod = {}
    for i, r in m.to_dod().items():
        kept = {position[j]: v for j, v in r.items() if j in position}
        if kept:
            dod[i] = kept
    return DomainMatrix.from_dod(dod, (m.shape[0], len(indices)), QQ)


def rows(m, indices):
    dod = m.to_dod()
    picked = {k: dict(dod[i]) for k, i in enumerate(indices) if i in dod}
    return DomainMatrix.from_dod(picked, (len(indices), m.shape[1]), QQ)


def is_zero(m):
    return not any(m.to_dod().values())


def equal(a, b):
    return a.shape == b.shape and normal(a).to_dod() == normal(b).to_dod()


@dataclass(frozen=True)
class EliminationResult:
    rank: int
    pivot_columns: tuple
    reduced: RatMatrix
    nullspace: RatMatrix


def _integer_rows(m):
    """Row-scale m to integer entries; the row space is unchanged."""
    dod = {i: r for i, r in normal(m).to_dod().items() if r}
    m = DomainMatrix.from_dod(dod, m.shape, QQ)
    _, numerators = m.clear_denoms_rowwise(convert=True)
    return numerators


def _check_nonempty(m):
    if m.shape[0] == 0 or m.shape[1] == 0:
        msg = f"Matrix of shape {m.shape} has no entries"
        raise EmptyMatrix(msg)


def eliminate(m):
    """Fraction-free reduced echelon form, rank, pivots and a kernel basis.

    The kernel basis comes back as the columns of ``nullspace``.
    """
    _check_nonempty(m)
    reduced, den, pivots = _integer_rows(m).rref_den()
    nullspace = reduced.nullspace_from_rref(pivots).convert_to(QQ).transpose()
    reduced = normal(reduced).mul(ONE / rat(int(den)))
    logger.debug("eliminated", shape=m.shape, rank=len(pivots))
    return EliminationResult(
        rank=len(pivots),
        pivot_columns=tuple(pivots),
        reduced=reduced,
        nullspace=nullspace.to_sparse(),
    )


def rank(m):
    _check_nonempty(m)
    if is_zero(m):
        return 0
    _, _, pivots = _integer_rows(m).rref_den()
    return len(pivots)


def rank_or_zero(m):
    """Rank that accepts matrices with a zero dimension."""
    if m.shape[0] == 0 or m.shape[1] == 0:
        return 0
    return rank(m)


def nullspace(m):
    """Columns spanning the kernel of m; accepts matrices without rows."""
    ncols = m.shape[1]
    if ncols == 0:
        return zeros(0, 0)
    if m.shape[0] == 0 or is_zero(m):
        return identity(ncols)
    return eliminate(m).nullspace


def _particular_solutions(m, rhs):
    nrows, ncols = m.shape
    if rhs.shape[0] != nrows:
        msg = f"Right-hand side has {rhs.shape[0]} rows, matrix has {nrows}"
        raise DimensionMismatch(msg)
    nrhs = rhs.shape[1]
    if nrows == 0:
        return zeros(ncols, nrhs)
    reduced, _, pivots = _integer_rows(hstack(m, rhs)).rref_den()
    if pivots and pivots[-1] >= ncols:
        msg = f"Right-hand side column {pivots[-1] - ncols} is not in the range"
        raise NoSolution(msg)
    dod = reduced.to_dod()
    solution = {}
    for i, j in enumerate(pivots):
        pivot = dod[i][j]
        for k in range(nrhs):
            value = dod[i].get(ncols + k)
            if value:
                solution.setdefault(j, {})[k] = QQ(int(value), int(pivot))
    return sparse(solution, (ncols, nrhs))


def solve(m, b):
    """A particular solution of m·x = b with free variables set to zero."""
    if b.shape[1] != 1:
        msg = f"Expected a column, got shape {b.shape}"
        raise DimensionMismatch(msg)
    return _particular_solutions(m, b)


def solve_columns(m, rhs):
    """Solve m·X = rhs for every column of rhs at once."""
    return _particular_solutions(m, rhs)


def inverse(m):
    n, ncols = m.shape
    if n != ncols:
        msg = f"Cannot invert a {n}×{ncols} matrix"
        raise DimensionMismatch(msg)
    return solve_columns(m, identity(n))


def in_column_span(basis, vectors):
    """Whether every column of vectors lies in the column span of basis."""
    if vectors.shape[1] == 0 or is_zero(vectors):
        return True
    if basis.shape[1] == 0:
        return False
    return rank(hstack(basis, vectors)) == rank(basis)


def column_basis(m):
    """Linearly independent columns of m spanning its column space."""
    if m.shape[1] == 0 or is_zero(m):
        return zeros(m.shape[0], 0)
    _, _, pivots = _integer_rows(m).rref_den()
    return columns(normal(m), list(pivots))


def to_float(m):
    """A float copy of m, only ever used by the timing mode."""
    out = np.zeros(m.shape, dtype=float)
    for i, r in m.to_dod().items():
        for j, v in r.items():
            out[i, j] = float(v)
    return out


def float_rank(m, tol):
    if m.shape[0] == 0 or m.shape[1] == 0:
        return 0
    return int(np.linalg.matrix_rank(to_float(m), tol=tol))


def random_integers(rng, count, low=-3, high=3):
    """count exact rationals drawn as small integers from a numpy Generator."""
    return [QQ(int(v)) for v in rng.integers(low, high, size=count, endpoint=True)]
