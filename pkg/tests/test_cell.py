import math

import numpy as np
import pytest
from scipy import integrate

from edpconv.cell import (CellProblemSpec, conjecture_check, contact_relation_wiggly_energy,
                          convexity_inequality, joint_convexity_probe, m0, m0_oracle, moments,
                          phi_extract, r_eff_wiggly_energy, r_eff_wiggly_energy_slope,
                          riemannian_distances)
from edpconv.core import PeriodicCoefficient


@pytest.fixture(scope="module")
def cos_spec(cosine):
    return CellProblemSpec.wiggly_dissipation(cosine)


def const_spec(c=1.3):
    return CellProblemSpec.wiggly_dissipation(PeriodicCoefficient.constant(c))


class TestWigglyDissipation:
    @pytest.mark.parametrize("v, xi", [(1.0, 0.5), (-0.7, 2.0), (0.0, 1.0), (2.0, 0.0)])
    def test_constant_is_dual_sum(self, v, xi):
        c = 1.3
        sol = m0(const_spec(c), v, xi)
        assert sol.value == pytest.approx(0.5 * c * v * v + 0.5 * xi * xi / c, rel=1e-12, abs=1e-15)
        if v != 0.0:
            assert np.allclose(sol.b, 1.0, atol=1e-10)

    def test_axis_v(self, cos_spec, cosine_moments_ref):
        _, half, _ = cosine_moments_ref
        assert cos_spec.value(1.0, 0.0) == pytest.approx(half / 2, rel=1e-6)

    def test_contact(self, cos_spec):
        assert cos_spec.value(1.0, 1.0) == pytest.approx(1.0, abs=1e-9)

    def test_zero_rate_concentrates(self, cos_spec):
        sol = m0(cos_spec, 0.0, 1.0)
        assert sol.value == pytest.approx(1 / 3.6, rel=1e-12)
        assert sol.concentrated

    def test_solution_invariants(self, cos_spec):
        for v, xi in [(0.3, -1.2), (1.5, 0.2), (-1.0, 1.0)]:
            sol = m0(cos_spec, v, xi)
            assert np.all(sol.b >= 0)
            assert abs(sol.constraint_residual) <= 1e-10
            assert sol.value >= v * xi - 1e-9


class TestOracle:
    def test_trivial(self):
        spec = CellProblemSpec.wiggly_dissipation(PeriodicCoefficient.constant(1.0))
        assert m0_oracle(spec, 1.0, 1.0) == pytest.approx(1.0, abs=1e-6)

    def test_needs_rate(self, cos_spec):
        with pytest.raises(ValueError):
            m0_oracle(cos_spec, 0.0, 1.0)

    @pytest.mark.parametrize("v, xi", [(1.0, 0.0), (0.5, 0.5), (-1.5, 1.0), (0.25, -2.0)])
    def test_cosine_cross_validation(self, cos_spec, v, xi):
        assert m0_oracle(cos_spec, v, xi) == pytest.approx(cos_spec.value(v, xi), rel=1e-5)

    @pytest.mark.parametrize("v, xi", [(1.0, 0.0), (0.5, 0.5), (1.0, 2.0), (-0.5, -1.0)])
    def test_wiggly_energy_cross_validation(self, v, xi):
        spec = CellProblemSpec.wiggly_energy(1.0, 1.0)
        assert m0_oracle(spec, v, xi) == pytest.approx(spec.value(v, xi), rel=1e-5)

    def test_power_coefficient(self):
        spec = CellProblemSpec.wiggly_dissipation(PeriodicCoefficient.power(0.05, 4.0))
        # the oracle's uniform nodes resolve the kinked coefficient to ~1e-4
        assert m0_oracle(spec, 1.0, 0.5, n_b=2048) == pytest.approx(spec.value(1.0, 0.5), rel=1e-4)


class TestMoments:
    def test_cosine(self, cosine, cosine_moments_ref):
        m = moments(cosine)
        mean, half, mx = cosine_moments_ref
        assert m.mean == pytest.approx(mean, abs=1e-12)
        assert m.root_mean == pytest.approx(half, rel=1e-10)
        assert m.maximum == pytest.approx(mx, abs=1e-12)

    def test_constant(self):
        assert moments(PeriodicCoefficient.constant(2.5)) == pytest.approx((2.5, 2.5, 2.5))

    def test_power(self):
        m = moments(PeriodicCoefficient.power(0.05, 4.0))
        f = lambda y: 0.05 + abs(2 * y - 1) ** 4  # noqa: E731
        mean = integrate.quad(f, 0, 1, points=[0.5])[0]
        half = integrate.quad(lambda y: math.sqrt(f(y)), 0, 1, points=[0.5], epsabs=1e-13)[0] ** 2
        assert m.mean == pytest.approx(mean, rel=1e-10)
        assert m.root_mean == pytest.approx(half, rel=1e-9)
        assert m.root_mean < m.mean < m.maximum


class TestPhi:
    def test_constant(self):
        tab = phi_extract(CellProblemSpec.wiggly_dissipation(PeriodicCoefficient.constant(1.0)),
                          [0.0, 0.5, 1.0])
        assert np.allclose(tab.phi, 0.5, atol=1e-12)

    def test_cosine_endpoints(self, cos_spec):
        tab = phi_extract(cos_spec, np.linspace(0, 1, 11))
        assert all(e <= 1e-6 for e in tab.endpoint_errors().values())
        assert tab.phi[5] == pytest.approx(0.5, abs=1e-6)
        assert tab.phi[-1] == pytest.approx(1 / 3.6, abs=1e-6)
        assert np.all(tab.phi >= tab.lower_bound - 1e-9)

    def test_rejects_outside_unit_interval(self, cos_spec):
        with pytest.raises(ValueError):
            phi_extract(cos_spec, [1.2])


class TestConjecture:
    def test_constant_equality(self):
        worst, diff = conjecture_check(const_spec(1.0), np.linspace(-1, 1, 5), np.linspace(-1, 1, 5))
        assert np.max(np.abs(diff)) <= 1e-12

    def test_cosine(self, cos_spec):
        g = np.linspace(-2, 2, 9)
        worst, diff = conjecture_check(cos_spec, g, g, workers=2)
        assert worst <= 1e-8
        # M0 sees only |v| and xi^2, so equality holds on both diagonals
        line = np.abs(g)[:, None] == np.abs(g)[None, :]
        assert np.all(diff[~line] < 0)
        assert np.max(np.abs(diff[line])) <= 1e-8


class TestNonConvexity:
    def test_constant_has_no_violation(self):
        assert joint_convexity_probe(const_spec(1.0), 1.0) <= 1e-12

    def test_midpoint_on_contact_line(self):
        spec = CellProblemSpec.wiggly_dissipation(PeriodicCoefficient.power(0.05, 4.0))
        mbar = spec.moments().mean
        assert spec.value(0.5, 0.5 * mbar) == pytest.approx(mbar / 4, abs=1e-9)

    def test_small_alpha_violates(self):
        mu = PeriodicCoefficient.power(0.01, 4.0)
        spec = CellProblemSpec.wiggly_dissipation(mu)
        margin = convexity_inequality(mu)
        probe = joint_convexity_probe(spec, 1.0)
        assert margin > 0
        # probe = margin / 4 exactly by the three closed-form evaluations
        assert probe == pytest.approx(margin / 4, rel=1e-6)
        assert probe > 1e-3


class TestHomogeneityAndConvexity:
    @pytest.mark.parametrize("t", [2.0, 1 / 3])
    def test_degree_two(self, cos_spec, t):
        for v, xi in [(0.7, 0.4), (-1.1, 0.9), (0.3, -1.6)]:
            assert cos_spec.value(t * v, t * xi) == pytest.approx(t * t * cos_spec.value(v, xi),
                                                                  rel=1e-8)

    def test_partial_convexity(self, cos_spec):
        g = np.linspace(-2, 2, 21)
        for fixed in (-1.0, 0.0, 0.8):
            row = np.array([cos_spec.value(v, fixed) for v in g])
            col = np.array([cos_spec.value(fixed, x) for x in g])
            assert np.min(np.diff(row, 2)) >= -1e-10
            assert np.min(np.diff(col, 2)) >= -1e-10


class TestDistances:
    def test_constant(self):
        d = riemannian_distances(PeriodicCoefficient.constant(1.0), 0.0, 2.0)
        assert d == pytest.approx((2.0, 2.0))

    def test_cosine(self, cosine, cosine_moments_ref):
        eff, low = riemannian_distances(cosine, 0.0, 1.0)
        assert eff == pytest.approx(1.0, abs=1e-12)
        assert low == pytest.approx(math.sqrt(cosine_moments_ref[1]), rel=1e-10)

    def test_state_dependent(self, cosine_moments_ref):
        mu = PeriodicCoefficient.cosine(0.8, 1.0, q_factor=lambda q: 1 + q * q, q_bounds=(1.0, 2.0))
        eff, low = riemannian_distances(mu, 0.0, 1.0)
        ref = integrate.quad(lambda q: math.sqrt(1 + q * q), 0, 1)[0]
        assert eff == pytest.approx(ref, rel=1e-9)
        assert low == pytest.approx(ref * math.sqrt(cosine_moments_ref[1]), rel=1e-9)
        assert low < eff

    def test_order(self, cosine):
        with pytest.raises(ValueError):
            riemannian_distances(cosine, 1.0, 0.0)


class TestWigglyEnergy:
    spec = CellProblemSpec.wiggly_energy(1.0, 1.0)

    def test_contact_example(self):
        assert self.spec.value(1.0, math.sqrt(2)) == pytest.approx(math.sqrt(2), abs=1e-8)

    def test_plateau(self):
        assert self.spec.value(0.0, 0.5) == pytest.approx(0.0, abs=1e-12)

    def test_tiny_amplitude_is_dual_sum(self):
        spec = CellProblemSpec.wiggly_energy(1e-9, 2.0)
        assert spec.value(0.6, 1.0) == pytest.approx(0.5 * 2 * 0.36 + 0.25, rel=1e-7)

    def test_contact_relation(self):
        assert contact_relation_wiggly_energy(1.0, 1.0, 1.0) == 0.0
        assert contact_relation_wiggly_energy(1.0, 1.0, math.sqrt(2)) == pytest.approx(1.0)
        assert contact_relation_wiggly_energy(1.0, 1.0, -2.0) == pytest.approx(-math.sqrt(3))

    def test_contact_curve(self):
        xi = np.linspace(-3, 3, 25)
        v = contact_relation_wiggly_energy(1.0, 1.0, xi)
        gaps = [self.spec.value(a, b) - a * b for a, b in zip(v, xi)]
        assert max(abs(g) for g in gaps) <= 1e-6 * 10

    def test_r_eff(self):
        assert r_eff_wiggly_energy(1.0, 1.0, 0.0) == 0.0
        quad = integrate.quad(lambda w: math.sqrt(1 + w * w), 0, 1, epsabs=1e-13)[0]
        assert r_eff_wiggly_energy(1.0, 1.0, 1.0) == pytest.approx(quad, abs=1e-12)
        assert r_eff_wiggly_energy_slope(2.0, 1.0, 1e-12) == pytest.approx(2.0)

    def test_slope_inverts_contact(self):
        A, rho = 1.5, 0.7
        xi = np.array([1.5, 2.0, 3.0, -4.0])
        v = contact_relation_wiggly_energy(A, rho, xi)
        assert np.allclose(np.sqrt(A * A + (rho * v) ** 2), np.abs(xi), rtol=1e-14)
