"""Tests for qnilpotent.curvature."""
import math

import numpy as np
import pytest

from qnilpotent.curvature import (ModelMetric, curvature_of_q, curvature_table,
                                  gaussian_curvature_numeric, q_of_curvature,
                                  reflected_index, table_to_csv)
from qnilpotent.exceptions import DomainError


class TestCurvatureOfQ:
    def test_examples(self):
        assert curvature_of_q(1) == 0
        assert curvature_of_q(0) == pytest.approx(-math.log(2) ** 2, rel=1e-15)
        assert curvature_of_q(0) == pytest.approx(-0.480453, abs=1e-6)
        with pytest.raises(DomainError):
            curvature_of_q(2)

    def test_reflection_symmetry(self):
        for q in np.linspace(-5, 1.9, 30):
            q_prime = 2 - 1 / (2 - q)
            assert curvature_of_q(q) == pytest.approx(curvature_of_q(q_prime), rel=1e-14)

    def test_reflected_index(self):
        assert reflected_index(1) == 1
        assert reflected_index(0) == pytest.approx(1.5)
        for q in np.linspace(-5, 1.9, 30):
            partner = reflected_index(q)
            assert (2 - q) * (2 - partner) == pytest.approx(1.0, rel=1e-14)
            assert curvature_of_q(partner) == pytest.approx(curvature_of_q(q), rel=1e-14)
            assert reflected_index(partner) == pytest.approx(q, rel=1e-12, abs=1e-12)
        with pytest.raises(DomainError):
            reflected_index(2)

    def test_inverse_branches(self):
        for q in (-3.0, 0.0, 0.5, 1.5, 1.9):
            branches = q_of_curvature(curvature_of_q(q))
            assert min(abs(branches.above_one - q), abs(branches.below_one - q)) < 1e-12
            assert branches.below_one <= 1 <= branches.above_one

    def test_positive_curvature_rejected(self):
        with pytest.raises(DomainError):
            q_of_curvature(0.1)


class TestModelMetric:
    def test_validation(self):
        with pytest.raises(DomainError):
            ModelMetric(-1.0, 2.0)
        with pytest.raises(DomainError):
            ModelMetric(0.5, 0.0)

    def test_from_q(self):
        m = ModelMetric.from_q(1.5)
        assert m.a == pytest.approx(math.log(2))
        assert m.components(1.0, 0.0)[2] > 0


class TestNumericCurvature:
    def test_flat(self):
        m = ModelMetric.from_curvature(0.0)
        assert abs(gaussian_curvature_numeric(m, (0.3, -0.7))) <= 1e-10

    def test_unit_hyperbolic(self):
        m = ModelMetric.from_curvature(-1.0)
        assert gaussian_curvature_numeric(m, (0.2, 0.5), h=1e-3) == pytest.approx(-1, abs=1e-6)

    def test_from_q(self):
        m = ModelMetric.from_q(1.5)
        assert gaussian_curvature_numeric(m, (0.0, 0.0)) == pytest.approx(-0.480453, abs=1e-6)

    def test_location_independent(self):
        rng = np.random.default_rng(0)
        m = ModelMetric.from_curvature(-0.8)
        values = [gaussian_curvature_numeric(m, tuple(pt)) for pt in rng.uniform(-1, 1, (50, 2))]
        assert max(values) - min(values) < 1e-6

    def test_consistency_grid(self):
        rows = curvature_table(np.linspace(-5, 1.95, 40))
        for q, k, numeric in rows:
            assert numeric == pytest.approx(k, abs=1e-5)

    def test_bad_step(self):
        with pytest.raises(DomainError):
            gaussian_curvature_numeric(ModelMetric.from_curvature(-1.0), (0, 0), h=-1e-3)
        with pytest.raises(DomainError):
            gaussian_curvature_numeric(ModelMetric.from_curvature(-1.0), (0, 0), h=0)


def test_table_csv():
    text = table_to_csv(curvature_table([1.0]))
    assert text.splitlines()[0] == "q,k,k_numeric"
    assert text.splitlines()[1].startswith("1.0,")
