"""Tests for qnilpotent.heisenberg."""
import numpy as np
import pytest

from qnilpotent.heisenberg import (X, Y, Z, HeisenbergPoint, LieVector,
                                   UpperUnitriangular, bch_defect, bracket,
                                   embed, embedding_defect, exp_map, from_point,
                                   group_commutator, group_law, log_map, multiply,
                                   polarized_law, to_point)
from qnilpotent.qalgebra import q_add


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def random_vector(rng, scale=10.0):
    return LieVector(*rng.uniform(-scale, scale, size=3).tolist())


class TestEmbed:
    def test_examples(self):
        assert embed(0) == UpperUnitriangular.identity()
        assert embed(2) == UpperUnitriangular(2, 2, 2)
        assert embed(-1) == UpperUnitriangular(-1, -1, -1)

    def test_rows(self):
        assert embed(1).rows() == [[1, 1, 1], [0, 1, 1], [0, 0, 1]]


class TestMultiply:
    def test_identity(self):
        assert multiply(embed(3.5), embed(0)) == embed(3.5)

    def test_embedded_product(self):
        prod = embed(1) @ embed(2)
        assert (prod.a12, prod.a13, prod.a23) == (3, 5, 3)
        assert multiply(embed(2), embed(1)) == prod

    def test_corner_is_tilde_addition(self, rng):
        for x, y in rng.uniform(-5, 5, size=(20, 2)):
            prod = multiply(embed(x), embed(y))
            assert prod.a13 == pytest.approx(q_add(x, y, 0), rel=1e-14, abs=1e-14)
            assert prod.a12 == prod.a23 == x + y

    def test_matches_dense_product(self, rng):
        a = UpperUnitriangular(*rng.normal(size=3).tolist())
        b = UpperUnitriangular(*rng.normal(size=3).tolist())
        np.testing.assert_allclose(multiply(a, b).as_matrix(), a.as_matrix() @ b.as_matrix(),
                                   rtol=1e-14, atol=1e-14)

    def test_generic_noncommutative(self):
        a, b = UpperUnitriangular(1, 0, 0), UpperUnitriangular(0, 0, 1)
        assert a @ b != b @ a

    def test_inverse(self, rng):
        a = UpperUnitriangular(*rng.normal(size=3).tolist())
        ident = a @ a.inverse()
        assert ident.a12 == 0 and ident.a23 == 0
        assert ident.a13 == pytest.approx(0, abs=1e-14)


class TestEmbeddingDefect:
    @pytest.mark.parametrize("x, y, expected", [(0, 7, 0), (1, 1, 1), (2, -3, 6)])
    def test_examples(self, x, y, expected):
        assert embedding_defect(x, y) == expected


class TestLieAlgebra:
    def test_brackets(self):
        assert bracket(X, Y) == Z
        assert bracket(X, Z) == LieVector(0, 0, 0)
        assert bracket(Y, Z) == LieVector(0, 0, 0)
        assert bracket(X.scale(2), Y.scale(3)) == Z.scale(6)

    def test_antisymmetric(self, rng):
        u, v = random_vector(rng), random_vector(rng)
        assert bracket(u, v).cz == -bracket(v, u).cz

    def test_matches_matrix_commutator(self, rng):
        u, v = random_vector(rng), random_vector(rng)
        mu, mv = u.as_matrix(), v.as_matrix()
        np.testing.assert_allclose(mu @ mv - mv @ mu, bracket(u, v).as_matrix(), atol=1e-12)

    def test_exp_log_examples(self):
        assert exp_map(LieVector(0, 0, 0)) == UpperUnitriangular.identity()
        assert log_map(embed(3.0)) == LieVector(3.0, 3.0, 3.0 - 4.5)
        assert exp_map(Z.scale(2.5)) == UpperUnitriangular(0, 2.5, 0)

    def test_log_inverts_exp(self, rng):
        for _ in range(100):
            u = random_vector(rng)
            back = log_map(exp_map(u))
            assert back.cx == u.cx and back.cy == u.cy
            assert back.cz == pytest.approx(u.cz, rel=1e-14, abs=1e-13)

    def test_bch_exact(self, rng):
        for _ in range(1000):
            u, v = random_vector(rng), random_vector(rng)
            assert bch_defect(u, v, relative=True) <= 1e-14

    def test_bch_relative_at_large_coefficients(self, rng):
        for _ in range(200):
            u, v = random_vector(rng, 1e7), random_vector(rng, 1e7)
            assert bch_defect(u, v, relative=True) <= 1e-14


class TestGroupLaw:
    def test_inverse(self):
        g = HeisenbergPoint(1.5, -2.0, 0.25)
        assert g * g.inverse() == HeisenbergPoint.origin()

    def test_bch_product(self):
        assert group_law(HeisenbergPoint(1, 0, 0), HeisenbergPoint(0, 1, 0)) == \
            HeisenbergPoint(1, 1, 0.5)

    def test_commutator_is_central(self):
        c = group_commutator(HeisenbergPoint(1, 0, 0), HeisenbergPoint(0, 1, 0))
        assert c == HeisenbergPoint(0, 0, 1)

    def test_agrees_with_matrix_product(self, rng):
        for _ in range(50):
            g = HeisenbergPoint(*rng.uniform(-3, 3, size=3).tolist())
            h = HeisenbergPoint(*rng.uniform(-3, 3, size=3).tolist())
            via_matrix = to_point(multiply(from_point(g), from_point(h)))
            direct = group_law(g, h)
            np.testing.assert_allclose(via_matrix.as_tuple(), direct.as_tuple(),
                                       rtol=1e-13, atol=1e-13)

    def test_associative(self, rng):
        g, h, k = (HeisenbergPoint(*rng.uniform(-3, 3, size=3).tolist()) for _ in range(3))
        np.testing.assert_allclose((g * h * k).as_tuple(), (g * (h * k)).as_tuple(),
                                   rtol=1e-13, atol=1e-13)

    def test_polarized_law_matches_matrices(self):
        g, h = (1, 2, 3), (4, 5, 6)
        a = UpperUnitriangular(g[0], g[2], g[1]) @ UpperUnitriangular(h[0], h[2], h[1])
        assert polarized_law(g, h) == (a.a12, a.a23, a.a13)
