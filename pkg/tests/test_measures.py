"""Gibbs grids, KL / Fisher functionals, and Laplace diagnostics."""

import math

import numpy as np
import pytest

from ballistic_fi import (
    NumericalError,
    PreconditionError,
    build_gibbs,
    density_from_masses,
    fisher_information,
    gaussian_density,
    get_potential,
    gibbs_to_csv,
    kl_divergence,
    laplace_gap,
    rescaled_moments,
)
from ballistic_fi.measures import tail_envelope_mass

from oracles import gaussian_kl, partition_value


class TestBuildGibbs:
    def test_gaussian_partition(self, quadratic1):
        mu = build_gibbs(quadratic1, 1.0, resolution=200)
        assert mu.z == pytest.approx(math.sqrt(2 * math.pi), rel=1e-6)

    def test_gaussian_partition_cold(self, quadratic2):
        mu = build_gibbs(quadratic2, 0.1, resolution=400)
        assert mu.z == pytest.approx(math.sqrt(2 * math.pi * 0.05), rel=1e-6)

    def test_sine_squared_against_adaptive_simpson(self, sine2):
        mu = build_gibbs(sine2, 0.1, resolution=400)
        z_oracle = partition_value(lambda x: x * x + math.sin(x) ** 2, 0.1)
        assert mu.z == pytest.approx(z_oracle, rel=1e-6)

    def test_unit_mass(self, sine2):
        for t in (1.0, 0.1, 0.01):
            mu = build_gibbs(sine2, t, resolution=300)
            assert abs(float(mu.weights.sum()) - 1.0) < 1e-8
            assert np.all(mu.weights >= 0)

    def test_tail_envelope(self, sine2):
        for t in (0.2, 0.05, 0.01):
            mu = build_gibbs(sine2, t, resolution=300)
            assert tail_envelope_mass(mu, 0.9309) < 1e-10

    def test_log_weights_finite_when_weights_underflow(self, sine2):
        mu = build_gibbs(sine2, 0.01, resolution=400)
        assert np.any(mu.weights == 0.0)  # far tails underflow at this temperature
        assert np.all(np.isfinite(mu.log_weights))

    def test_fixed_radius(self, quadratic1):
        mu = build_gibbs(quadratic1, 1.0, resolution=100, radius_policy=8.0)
        assert mu.truncation_radius == 8.0
        assert mu.points[0] == pytest.approx(-8.0)

    def test_invalid_temperature(self, quadratic1):
        with pytest.raises(PreconditionError):
            build_gibbs(quadratic1, 0.0)

    def test_nondecaying_boundary_rejected(self, quadratic1):
        # a tiny fixed radius leaves visible mass at the boundary
        with pytest.raises(NumericalError, match="decay"):
            build_gibbs(quadratic1, 1.0, resolution=100, radius_policy=0.5)

    def test_csv_dump_round_trip(self, quadratic1):
        mu = build_gibbs(quadratic1, 1.0, resolution=20)
        text = gibbs_to_csv(mu)
        lines = text.strip().splitlines()
        assert lines[0] == "x,f,weight"
        assert len(lines) == mu.n + 1
        x0, f0, w0 = (float(v) for v in lines[1].split(","))
        assert x0 == pytest.approx(float(mu.points[0]))
        assert w0 == pytest.approx(float(mu.weights[0]), abs=1e-18)


class TestKL:
    def test_identity_is_zero(self, quadratic1):
        mu = build_gibbs(quadratic1, 1.0, resolution=100)
        masses = mu.weights.copy()
        masses[0] = masses[-1] = 0.0
        nu = density_from_masses(mu, masses)
        assert kl_divergence(nu, mu) == pytest.approx(0.0, abs=1e-10)

    def test_shifted_gaussian(self, quadratic1):
        mu = build_gibbs(quadratic1, 1.0, resolution=100)
        nu = gaussian_density(mu, 1.0, 1.0)
        assert kl_divergence(nu, mu) == pytest.approx(0.5, abs=1e-4)

    def test_narrow_gaussian(self, quadratic1):
        mu = build_gibbs(quadratic1, 1.0, resolution=100)
        nu = gaussian_density(mu, 0.0, math.sqrt(0.5))
        expected = 0.5 * (0.5 - 1.0 - math.log(0.5))
        assert kl_divergence(nu, mu) == pytest.approx(expected, abs=1e-4)

    def test_nonnegative_random_densities(self, quadratic1):
        mu = build_gibbs(quadratic1, 1.0, resolution=60)
        rng = np.random.default_rng(5)
        for _ in range(20):
            masses = rng.uniform(0, 1, mu.n) * (np.abs(mu.points) < 5)
            masses[0] = masses[-1] = 0.0
            nu = density_from_masses(mu, masses)
            assert kl_divergence(nu, mu) >= 0.0


class TestFisherInformation:
    def test_identity_is_zero(self, quadratic1):
        mu = build_gibbs(quadratic1, 1.0, resolution=100)
        masses = mu.weights.copy()
        masses[0] = masses[-1] = 0.0
        nu = density_from_masses(mu, masses)
        assert fisher_information(nu, mu) == pytest.approx(0.0, abs=1e-8)

    def test_shifted_gaussian(self, quadratic1):
        mu = build_gibbs(quadratic1, 1.0, resolution=100)
        nu = gaussian_density(mu, 1.0, 1.0)
        assert fisher_information(nu, mu) == pytest.approx(1.0, abs=1e-3)

    def test_narrow_gaussian(self, quadratic1):
        mu = build_gibbs(quadratic1, 1.0, resolution=100)
        nu = gaussian_density(mu, 0.0, math.sqrt(0.5))
        assert fisher_information(nu, mu) == pytest.approx(0.5, abs=1e-3)

    def test_two_bump_support_runs(self, quadratic1):
        # differencing must not straddle the zero-mass gap between bumps
        mu = build_gibbs(quadratic1, 1.0, resolution=60)
        x = mu.points
        masses = np.exp(-0.5 * ((x - 2) / 0.4) ** 2) * (np.abs(x - 2) < 1.5)
        masses += np.exp(-0.5 * ((x + 2) / 0.4) ** 2) * (np.abs(x + 2) < 1.5)
        masses[0] = masses[-1] = 0.0
        nu = density_from_masses(mu, masses)
        fi = fisher_information(nu, mu)
        assert math.isfinite(fi) and fi > 0


class TestRefinementConvergence:
    """Functionals are stable under 2x refinement, with FI at second order.

    On Gaussian pairs the trapezoid discretization is spectrally accurate,
    so KL and FI are refinement-invariant to rounding; the O(dx^2) error of
    the centered-difference Fisher term only becomes visible against a
    non-quadratic log-density.
    """

    def test_gaussian_pair_refinement_invariance(self):
        p = get_potential("quadratic", alpha=1.0)
        vals = []
        for res in (40, 80):
            mu = build_gibbs(p, 1.0, resolution=res, radius_policy=12.0)
            nu = gaussian_density(mu, 0.8, 1.3)
            vals.append((kl_divergence(nu, mu), fisher_information(nu, mu)))
        assert vals[0][0] == pytest.approx(vals[1][0], abs=1e-12)
        assert vals[0][1] == pytest.approx(vals[1][1], abs=1e-10)
        assert vals[0][0] == pytest.approx(gaussian_kl(0.8, 1.3, 0.0, 1.0), abs=1e-12)

    def test_fisher_order_at_least_1_8(self, sine2):
        def fi_at(res):
            mu = build_gibbs(sine2, 0.1, resolution=res, radius_policy=6.0)
            nu = gaussian_density(mu, 0.8, 0.3)
            return fisher_information(nu, mu)

        ref = fi_at(1600)
        e1 = abs(fi_at(50) - ref)
        e2 = abs(fi_at(100) - ref)
        order = math.log2(e1 / e2)
        assert order >= 1.8, (e1, e2, order)


class TestGaussianLSIInstance:
    """KL <= (t / 2 alpha) FI for Gibbs measures of quadratics."""

    @pytest.mark.parametrize("alpha,t", [(1.0, 1.0), (2.0, 0.1), (0.5, 0.5)])
    def test_family(self, alpha, t):
        p = get_potential("quadratic", alpha=alpha)
        mu = build_gibbs(p, t, resolution=150)
        sig = math.sqrt(t / alpha)
        for c, s in [(0.5, sig), (1.0, sig), (-2 * sig, 0.7 * sig), (sig, 1.4 * sig)]:
            nu = gaussian_density(mu, c, s)
            kl = kl_divergence(nu, mu)
            fi = fisher_information(nu, mu)
            assert kl <= (t / (2 * alpha)) * fi + 1e-6


class TestRescaledMoments:
    def test_gaussian_all_temperatures(self, quadratic1):
        for t in (1.0, 0.25, 0.05):
            mu = build_gibbs(quadratic1, t, resolution=200)
            mom = rescaled_moments(mu)
            assert mom.var_z == pytest.approx(1.0, abs=1e-4)
            assert mom.mean_z == pytest.approx(0.0, abs=1e-8)

    def test_sine_squared_limit(self, sine2):
        mu = build_gibbs(sine2, 0.01, resolution=400)
        mom = rescaled_moments(mu)
        # limiting variance 1 / f''(0) = 1/4
        assert abs(mom.var_z - 0.25) / 0.25 < 0.03

    def test_sine_squared_monotone_approach(self, sine2):
        resid = []
        for t in (0.2, 0.1, 0.05, 0.02, 0.01):
            mu = build_gibbs(sine2, t, resolution=400)
            resid.append(abs(rescaled_moments(mu).var_z - 0.25))
        for a, b in zip(resid, resid[1:]):
            assert b <= a + 1e-3


class TestLaplaceGap:
    @pytest.mark.parametrize("alpha,t", [(1.0, 1.0), (2.0, 0.1), (0.5, 0.3)])
    def test_quadratic_exact(self, alpha, t):
        p = get_potential("quadratic", alpha=alpha)
        assert abs(laplace_gap(p, t)) < 1e-8

    def test_sine_squared_small(self, sine2):
        assert abs(laplace_gap(sine2, 0.01)) < 0.05

    def test_sine_squared_shrinks(self, sine2):
        assert abs(laplace_gap(sine2, 0.01)) < abs(laplace_gap(sine2, 0.1))

    def test_requires_minimizer(self, double_well):
        with pytest.raises(PreconditionError):
            laplace_gap(double_well, 0.1)


class TestSupportViolations:
    def test_mass_on_boundary_rejected(self, quadratic1):
        mu = build_gibbs(quadratic1, 1.0, resolution=50)
        masses = np.ones(mu.n)
        with pytest.raises(PreconditionError, match="boundary"):
            density_from_masses(mu, masses)

    def test_negative_mass_rejected(self, quadratic1):
        mu = build_gibbs(quadratic1, 1.0, resolution=50)
        masses = np.zeros(mu.n)
        masses[5] = -1.0
        with pytest.raises(PreconditionError):
            density_from_masses(mu, masses)

    def test_foreign_grid_rejected(self, quadratic1, quadratic2):
        mu1 = build_gibbs(quadratic1, 1.0, resolution=50)
        mu2 = build_gibbs(quadratic2, 0.1, resolution=50)  # different points
        nu = gaussian_density(mu1, 0.5, 1.0)
        with pytest.raises(PreconditionError):
            kl_divergence(nu, mu2)
