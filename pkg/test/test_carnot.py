"""Tests for qnilpotent.carnot."""
import math

import numpy as np
import pytest

from qnilpotent.carnot import (GROUPS, HOMOGENEOUS_DIMENSION, cc_distance,
                               cc_distance_many, dilate, dilation,
                               discrete_ball_sizes, get_group, growth_exponent,
                               koranyi_norm, koranyi_volume_exponent,
                               left_translation, metric_equivalence,
                               pansu_quotient, pansu_schedule, shear)
from qnilpotent.exceptions import DomainError, FitRejected, ResourceLimit
from qnilpotent.heisenberg import HeisenbergPoint, group_law

P = HeisenbergPoint
E = HeisenbergPoint.origin()


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def random_point(rng, scale=2.0):
    return P(*rng.uniform(-scale, scale, size=3).tolist())


class TestDilation:
    def test_examples(self):
        g = P(0.3, -1.2, 0.7)
        assert dilate(g, 1) == g
        assert dilate(P(1, 1, 1), 2) == P(2, 2, 4)

    def test_automorphism(self):
        lam = 1.7
        lhs = dilate(group_law(P(1, 0, 0), P(0, 1, 0)), lam)
        rhs = group_law(dilate(P(1, 0, 0), lam), dilate(P(0, 1, 0), lam))
        assert lhs.x == rhs.x and lhs.y == rhs.y
        assert lhs.z == pytest.approx(rhs.z, rel=1e-15)

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            dilate(P(1, 1, 1), 0)


class TestKoranyi:
    def test_examples(self):
        assert koranyi_norm(E) == 0
        assert koranyi_norm(P(1, 0, 0)) == 1
        assert koranyi_norm(P(0, 0, 1)) == pytest.approx(2, rel=1e-15)

    def test_homogeneous(self, rng):
        g = random_point(rng)
        assert koranyi_norm(dilate(g, 3.0)) == pytest.approx(3.0 * koranyi_norm(g), rel=1e-13)


class TestCCDistance:
    def test_horizontal_segment(self):
        assert cc_distance(E, P(-2.5, 0, 0)).length == pytest.approx(2.5, rel=1e-14)

    def test_vertical_point(self):
        res = cc_distance(E, P(0, 0, 1))
        assert res.length == pytest.approx(2 * math.sqrt(math.pi), rel=1e-10)
        end = res.samples[-1]
        assert abs(end.z - 1) < 1e-9

    def test_homogeneity(self, rng):
        g = random_point(rng)
        lam = 2.5
        d = cc_distance(E, g).length
        assert cc_distance(E, dilate(g, lam)).length == pytest.approx(lam * d, rel=1e-9)

    def test_geodesic_hits_endpoint(self, rng):
        g, h = random_point(rng), random_point(rng)
        res = cc_distance(g, h)
        assert res.samples[0].as_tuple() == pytest.approx(g.as_tuple(), abs=1e-12)
        assert res.samples[-1].as_tuple() == pytest.approx(h.as_tuple(), abs=1e-8)
        assert res.solver_residual <= 1e-8

    def test_symmetry_and_triangle(self, rng):
        tol = 1e-10
        for _ in range(20):
            a, b, c = (random_point(rng) for _ in range(3))
            ab = cc_distance(a, b, tol).length
            ba = cc_distance(b, a, tol).length
            assert ab == pytest.approx(ba, abs=1e-8)
            bc = cc_distance(b, c, tol).length
            ac = cc_distance(a, c, tol).length
            assert ac <= ab + bc + 1e-8

    def test_dominates_horizontal_projection(self, rng):
        for _ in range(20):
            g = random_point(rng)
            assert cc_distance(E, g).length >= math.hypot(g.x, g.y) - 1e-12

    def test_left_invariant(self, rng):
        g, h, k = (random_point(rng) for _ in range(3))
        d = cc_distance(g, h).length
        assert cc_distance(group_law(k, g), group_law(k, h)).length == pytest.approx(d, rel=1e-8)

    @pytest.mark.parametrize("r", [1e-4, 1e-6, 1e-8, 1e-10, 1e-12])
    def test_short_chord_under_unit_area(self, r):
        # the closing arc is a full circle missing a chord of length r
        res = cc_distance(E, P(r, 0, 1))
        assert res.length == pytest.approx(2 * math.sqrt(math.pi) - r, abs=1e-10)
        assert res.solver_residual <= 1e-10

    def test_chord_square_underflows(self):
        res = cc_distance(E, P(1e-170, 0, 1))
        assert res.length == pytest.approx(2 * math.sqrt(math.pi), rel=1e-12)

    def test_rejects_bad_budgets(self):
        with pytest.raises(DomainError):
            cc_distance(E, P(1, 0, 1), max_iter=0)
        with pytest.raises(DomainError):
            cc_distance(E, P(1, 0, 1), n_samples=1)

    def test_many_matches_serial(self, rng):
        pairs = [(random_point(rng), random_point(rng)) for _ in range(6)]
        serial = [r.length for r in cc_distance_many(pairs)]
        threaded = [r.length for r in cc_distance_many(pairs, n_jobs=2)]
        assert serial == threaded

    def test_rejects_bad_tol(self):
        with pytest.raises(DomainError):
            cc_distance(E, P(1, 0, 0), tol=0)


class TestMetricEquivalence:
    def test_ratio_spread(self, rng):
        points = [random_point(rng, 3.0) for _ in range(200)]
        c1, c2 = metric_equivalence(points)
        assert 0 < c1 <= c2
        assert c2 / c1 <= 2

    def test_needs_points(self):
        with pytest.raises(DomainError):
            metric_equivalence([E])


class TestVolume:
    def test_ball_volume_exponent(self):
        exponent, volumes = koranyi_volume_exponent([0.5, 0.7, 1.0, 1.4, 2.0], seed=0)
        assert exponent == pytest.approx(HOMOGENEOUS_DIMENSION, abs=0.1)
        assert volumes == sorted(volumes)


class TestBallSizes:
    def test_radius_zero(self):
        assert discrete_ball_sizes(0).sizes == [1]

    def test_small_radii(self):
        assert discrete_ball_sizes(2).sizes == [1, 5, 17]

    def test_z2_closed_form(self):
        sizes = discrete_ball_sizes(6, "z2").sizes
        assert sizes == [2 * r * r + 2 * r + 1 for r in range(7)]

    def test_free_group_closed_form(self):
        sizes = discrete_ball_sizes(5, "free2").sizes
        assert sizes == [2 * 3 ** r - 1 for r in range(6)]

    def test_thread_count_independent(self):
        serial = discrete_ball_sizes(9, n_jobs=1).sizes
        threaded = discrete_ball_sizes(9, n_jobs=3).sizes
        assert serial == threaded

    def test_budget(self):
        with pytest.raises(ResourceLimit):
            discrete_ball_sizes(10, element_budget=100)
        with pytest.raises(DomainError):
            discrete_ball_sizes(3, element_budget=0)
        with pytest.raises(DomainError):
            discrete_ball_sizes(3, n_jobs=0)

    def test_unknown_group(self):
        with pytest.raises(DomainError):
            get_group("sl2")
        assert set(GROUPS) == {"heisenberg", "z2", "free2"}

    def test_csv(self):
        report = discrete_ball_sizes(2)
        assert report.to_csv() == "radius,ball_size\n0,1\n1,5\n2,17\n"


class TestGrowthExponent:
    def test_z2(self):
        report = growth_exponent(discrete_ball_sizes(20, "z2"))
        assert report.fitted_exponent == pytest.approx(2.0, abs=0.1)
        assert report.window == (10, 20)

    def test_zero_residual_bound_is_honoured(self):
        with pytest.raises(FitRejected):
            growth_exponent(discrete_ball_sizes(20), max_residual=0.0)

    def test_heisenberg(self):
        report = growth_exponent(discrete_ball_sizes(20))
        assert 3.5 <= report.fitted_exponent <= 4.3
        assert report.summary()["exponent"] == report.fitted_exponent

    def test_free_group_rejected(self):
        with pytest.raises(FitRejected) as err:
            growth_exponent(discrete_ball_sizes(10, "free2"))
        assert err.value.report.fit_residual > 0.05

    def test_too_few_records(self):
        with pytest.raises(DomainError):
            growth_exponent(discrete_ball_sizes(6, "z2"))


class TestPansu:
    def test_left_translation_is_exact(self, rng):
        g0, g, h = (random_point(rng) for _ in range(3))
        for t in (1.0, 0.25, 1e-3):
            quotient = pansu_quotient(left_translation(g0), g, h, t)
            assert quotient.as_tuple() == pytest.approx(h.as_tuple(), rel=1e-6, abs=1e-9)

    @pytest.mark.parametrize("t", [1.0, 0.5, 0.25, 0.125])
    def test_translation_quotient_to_roundoff(self, rng, t):
        g0, g, h = (random_point(rng, 1.0) for _ in range(3))
        quotient = pansu_quotient(left_translation(g0), g, h, t)
        assert quotient.as_tuple() == pytest.approx(h.as_tuple(), rel=0, abs=1e-12)

    @pytest.mark.parametrize("t", [1.0, 0.5, 0.25, 0.125])
    def test_dilation_quotient_to_roundoff(self, rng, t):
        g, h = random_point(rng, 1.0), random_point(rng, 1.0)
        quotient = pansu_quotient(dilation(1.5), g, h, t)
        assert quotient.as_tuple() == pytest.approx(dilate(h, 1.5).as_tuple(), rel=0, abs=1e-12)

    def test_dilation_commutes(self, rng):
        g, h = random_point(rng), random_point(rng)
        quotient = pansu_quotient(dilation(1.5), g, h, 0.125)
        assert quotient.as_tuple() == pytest.approx(dilate(h, 1.5).as_tuple(), rel=1e-9, abs=1e-9)

    def test_shear_horizontal_direction(self):
        sched = pansu_schedule(shear, E, P(1, 0, 0))
        assert all(q == P(1, 0, 0) for q in sched.quotients)

    def test_shear_converges_linearly(self):
        sched = pansu_schedule(shear, E, P(0, 1, 0), halvings=8)
        assert sched.ratios == pytest.approx([0.5] * 7)
        assert sched.richardson.as_tuple() == pytest.approx((0.0, 1.0, 0.0), abs=1e-12)

    def test_rejects_nonpositive_t(self):
        with pytest.raises(DomainError):
            pansu_quotient(shear, E, P(1, 0, 0), 0)
