import math

import numpy as np
import pytest

from nearext.distributions import Gaussian, QExponential, Uniform, cdf, quantile
from nearext.errors import ClassificationError, DomainError, ParameterError
from nearext.evs import (DegenerateLimit, FrechetLimit, GumbelLimit,
                         NormalizingWeights, WeibullLimit, classify_domain,
                         finite_sample_max_cdf, limiting_cdf, limiting_pdf,
                         normalizing_weights, rescaled_limit_cdf,
                         rescaled_limit_density, sup_cdf_distance)

E_INV = math.exp(-1.0)

# frozen from a 30-digit mpmath evaluation of the normal quantile
GAUSS_B_10 = 1.28155156554460047
GAUSS_A_10 = 0.50769019903702781


class TestFiniteSampleMax:
    def test_uniform_square(self):
        assert finite_sample_max_cdf(Uniform(0, 1), 2, 0.5) == pytest.approx(0.25)

    def test_single_draw_reduces_to_cdf(self, parent_specs):
        for spec in parent_specs:
            x = float(quantile(spec, 0.37))
            assert finite_sample_max_cdf(spec, 1, x) == pytest.approx(
                float(cdf(spec, x)), abs=1e-15)

    def test_at_gumbel_location(self):
        # cdf(b_N) = 1 - 1/N by construction, so G(b_N)^N = (1 - 1/N)^N
        n = 1000
        w = normalizing_weights(Gaussian(1.0), GumbelLimit(), n)
        got = finite_sample_max_cdf(Gaussian(1.0), n, w.location)
        assert got == pytest.approx((1 - 1 / n) ** n, abs=1e-12)
        assert got == pytest.approx(0.3677, abs=5e-4)

    def test_zero_set_size_rejected(self):
        with pytest.raises(DomainError):
            finite_sample_max_cdf(Gaussian(1.0), 0, 0.0)

    def test_is_valid_cdf(self, parent_specs):
        for spec in parent_specs:
            x = np.asarray(quantile(spec, np.linspace(1e-6, 1 - 1e-6, 200)))
            v = finite_sample_max_cdf(spec, 25, x)
            assert np.all(np.diff(v) >= -1e-15)
            assert v[0] >= 0.0 and v[-1] <= 1.0


class TestLimitLaws:
    def test_reference_points(self):
        assert limiting_cdf(GumbelLimit(), 0.0) == pytest.approx(E_INV)
        assert limiting_cdf(FrechetLimit(2.0), 1.0) == pytest.approx(E_INV)
        assert limiting_cdf(WeibullLimit(1.0), -1.0) == pytest.approx(E_INV)

    def test_support_edges(self):
        assert limiting_cdf(WeibullLimit(2.0), 1.0) == 1.0
        assert limiting_cdf(FrechetLimit(1.0), -1.0) == 0.0
        assert limiting_cdf(DegenerateLimit(2.0), 1.99) == 0.0
        assert limiting_cdf(DegenerateLimit(2.0), 2.0) == 1.0

    def test_parameter_validation(self):
        with pytest.raises(ParameterError):
            WeibullLimit(0.5)
        with pytest.raises(ParameterError):
            FrechetLimit(0.0)

    def test_densities_integrate_to_one(self):
        from scipy.integrate import quad
        assert quad(lambda x: limiting_pdf(GumbelLimit(), x), -10, 40)[0] == \
            pytest.approx(1.0, abs=1e-8)
        assert quad(lambda x: limiting_pdf(FrechetLimit(2.0), x), 0, np.inf)[0] == \
            pytest.approx(1.0, abs=1e-8)
        assert quad(lambda x: limiting_pdf(WeibullLimit(1.5), x), -40, 0)[0] == \
            pytest.approx(1.0, abs=1e-8)


class TestClassification:
    def test_gaussian_is_gumbel(self):
        assert classify_domain(Gaussian(3.0)) == GumbelLimit()

    def test_qexp_is_frechet_with_tail_index(self):
        fam = classify_domain(QExponential(1.3))
        assert isinstance(fam, FrechetLimit)
        assert fam.alpha == pytest.approx(10.0 / 3.0)

    def test_uniform_is_weibull_one(self):
        assert classify_domain(Uniform(0, 1)) == WeibullLimit(1.0)


class TestWeights:
    def test_uniform(self):
        w = normalizing_weights(Uniform(0, 1), WeibullLimit(1.0), 10)
        assert w.location == pytest.approx(1.0)
        assert w.scale == pytest.approx(0.1)

    def test_qexp(self):
        w = normalizing_weights(QExponential(2.0), FrechetLimit(1.0), 10)
        assert w.scale == pytest.approx(9.0, abs=1e-12)
        assert w.location == 0.0

    def test_gaussian(self):
        w = normalizing_weights(Gaussian(1.0), GumbelLimit(), 10)
        assert w.location == pytest.approx(GAUSS_B_10, abs=1e-12)
        assert w.scale == pytest.approx(GAUSS_A_10, abs=1e-12)

    def test_positive_scale_everywhere(self, parent_specs):
        for spec in parent_specs:
            for n in (2, 10, 100, 10_000):
                w = normalizing_weights(spec, classify_domain(spec), n)
                assert w.scale > 0.0

    def test_family_mismatch_rejected(self):
        with pytest.raises(ClassificationError):
            normalizing_weights(Gaussian(1.0), FrechetLimit(1.0), 10)
        with pytest.raises(ClassificationError):
            normalizing_weights(QExponential(1.3), FrechetLimit(1.0), 10)

    def test_set_size_validation(self):
        with pytest.raises(DomainError):
            normalizing_weights(Gaussian(1.0), GumbelLimit(), 1)


class TestRescaledDensity:
    def test_gumbel_origin(self):
        w = NormalizingWeights(scale=1.0, location=0.0, set_size=10)
        assert rescaled_limit_density(GumbelLimit(), w, 0.0) == pytest.approx(E_INV)

    def test_scale_division(self):
        w = NormalizingWeights(scale=2.0, location=0.0, set_size=10)
        assert rescaled_limit_density(GumbelLimit(), w, 0.0) == \
            pytest.approx(0.18393972058572117)

    def test_frechet_density_point(self):
        w = NormalizingWeights(scale=1.0, location=0.0, set_size=10)
        # alpha x^(-alpha-1) exp(-x^(-alpha)) at x=1, alpha=1 -> e^-1
        assert rescaled_limit_density(FrechetLimit(1.0), w, 1.0) == pytest.approx(E_INV)


class TestConvergence:
    def test_sup_distance_decreases(self, parent_specs):
        for spec in parent_specs:
            sups = [sup_cdf_distance(spec, n) for n in (100, 1000, 10_000)]
            assert sups[0] > sups[1] > sups[2], (spec, sups)

    def test_gaussian_slow_convergence_witness(self):
        # the finite-sample vs limiting gap is still visible at N=1000
        assert sup_cdf_distance(Gaussian(1.0), 1000) > 0.005

    def test_rescaled_cdf_consistency(self):
        spec = Gaussian(1.0)
        n = 100
        w = normalizing_weights(spec, GumbelLimit(), n)
        x = np.linspace(w.location - 1, w.location + 3, 50)
        direct = limiting_cdf(GumbelLimit(), (x - w.location) / w.scale)
        assert np.allclose(rescaled_limit_cdf(GumbelLimit(), w, x), direct)
