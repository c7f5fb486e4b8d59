import pytest
from sympy import QQ

from wfseq import bernstein


def test_multi_indices_put_vertices_first_in_order():
    assert bernstein.multi_indices(1, 3) == ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    assert bernstein.multi_indices(2, 2) == ((2, 0), (1, 1), (0, 2))
    assert bernstein.multi_indices(-1, 3) == ()


@pytest.mark.parametrize(
    "degree,nvars,expected",
    [(0, 4, 1), (2, 3, 6), (3, 4, 20), (-1, 4, 0)],
    ids=["constant", "quadratic-triangle", "cubic-tet", "negative"],
)
def test_count(degree, nvars, expected):
    assert bernstein.count(degree, nvars) == expected
    assert len(bernstein.multi_indices(degree, nvars)) == expected


def test_vertex_index():
    for v in range(4):
        alpha = bernstein.multi_indices(3, 4)[bernstein.vertex_index(3, 4, v)]
        assert alpha[v] == 3


def test_evaluate_reproduces_barycentric_coordinate():
    # lambda_1 in degree 2: coefficients are alpha_1 / 2
    coeffs = [QQ(alpha[1], 2) for alpha in bernstein.multi_indices(2, 3)]
    bary = (QQ(1, 5), QQ(3, 5), QQ(1, 5))
    assert bernstein.evaluate(coeffs, 2, 3, bary) == QQ(3, 5)


def test_derivative_of_linear_function():
    # d/d(lambda_1 - lambda_0) of lambda_1 is 1
    coeffs = [QQ(0), QQ(1), QQ(0)]
    dod = bernstein.derivative_entries(1, 3, (-1, 1, 0))
    value = sum(v * coeffs[j] for j, v in dod[0].items())
    assert value == 1


def test_elevation_preserves_values():
    coeffs = [QQ(1), QQ(-2), QQ(4)]
    dod = bernstein.elevation_entries(1, 3)
    elevated = [sum(v * coeffs[j] for j, v in dod[i].items()) for i in range(6)]
    bary = (QQ(1, 2), QQ(1, 3), QQ(1, 6))
    assert bernstein.evaluate(elevated, 2, 3, bary) == bernstein.evaluate(coeffs, 1, 3, bary)


def test_mass_rows_integrate_to_the_basis_weight():
    entries = bernstein.mass_entries(1, 2, 4)
    for row in entries.values():
        assert sum(row.values()) == bernstein.integral_weight(1, 4)


def test_change_simplex_to_the_same_simplex_is_identity():
    coeffs = [QQ(i) for i in range(10)]
    vertices = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]
    vertices = [tuple(QQ(x) for x in v) for v in vertices]
    assert bernstein.change_simplex(coeffs, 2, 4, vertices) == coeffs


def test_change_simplex_restricts_to_a_face():
    coeffs = [QQ(i) for i in range(10)]
    face = [(0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]
    face = [tuple(QQ(x) for x in v) for v in face]
    restricted = bernstein.change_simplex(coeffs, 2, 4, face)
    index = bernstein.index_map(2, 4)
    expected = [coeffs[index[(0, *gamma)]] for gamma in bernstein.multi_indices(2, 3)]
    assert restricted == expected
