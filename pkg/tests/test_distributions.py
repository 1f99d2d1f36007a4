import numpy as np
import pytest
from scipy import integrate

from vmar import (
    DegenerateModelError,
    ModelStructureError,
    MvtParams,
    chi2_quantile,
    chi2_sf,
    jarque_bera,
    mvt_logpdf,
    mvt_sample,
)

from conftest import random_spd


class TestMvtDensity:
    def test_standard_cauchy_at_mode(self):
        params = MvtParams(scale=[[1.0]], df=1.0)
        assert mvt_logpdf([0.0], params) == pytest.approx(-np.log(np.pi), abs=1e-12)

    def test_gaussian_limit(self):
        params = MvtParams(scale=[[1.0]], df=1e6)
        normal = -0.5 * np.log(2 * np.pi) - 0.5
        assert mvt_logpdf([1.0], params) == pytest.approx(normal, abs=1e-4)

    def test_bivariate_density_integrates_to_one(self):
        params = MvtParams(scale=[[4.0, 0.5], [0.5, 1.0]], df=3.0)
        total, _ = integrate.dblquad(
            lambda y, x: np.exp(mvt_logpdf([x, y], params)),
            -80.0, 80.0, -80.0, 80.0,
        )
        assert total == pytest.approx(1.0, abs=1e-3)

    @pytest.mark.parametrize("df", [1.0, 1.5, 3.0, 30.0])
    def test_univariate_normalization(self, df):
        params = MvtParams(scale=[[2.5]], df=df)
        total, _ = integrate.quad(
            lambda x: np.exp(mvt_logpdf([x], params)), -np.inf, np.inf
        )
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_maximized_at_origin(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            n = int(rng.integers(1, 4))
            params = MvtParams(scale=random_spd(rng, n), df=float(rng.uniform(0.5, 8)))
            x = rng.normal(size=n)
            assert mvt_logpdf(x, params) < mvt_logpdf(np.zeros(n), params)

    def test_non_spd_scale_rejected(self):
        with pytest.raises(DegenerateModelError):
            MvtParams(scale=[[1.0, 2.0], [2.0, 1.0]], df=3.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ModelStructureError):
            mvt_logpdf([0.0, 0.0], MvtParams(scale=[[1.0]], df=3.0))


class TestMvtSampling:
    def test_low_correlation_under_identity_scale(self):
        rng = np.random.default_rng(10)
        x = mvt_sample(100_000, MvtParams(scale=np.eye(2), df=3.0), rng)
        corr = np.corrcoef(x.T)[0, 1]
        assert abs(corr) < 0.02

    def test_gaussian_limit_variance(self):
        rng = np.random.default_rng(11)
        x = mvt_sample(200_000, MvtParams(scale=[[1.0]], df=1e8), rng)
        assert np.var(x) == pytest.approx(1.0, rel=0.02)

    def test_seed_replay_is_bit_identical(self):
        params = MvtParams(scale=[[2.0, 0.3], [0.3, 1.0]], df=4.0)
        a = mvt_sample(1000, params, np.random.default_rng(99))
        b = mvt_sample(1000, params, np.random.default_rng(99))
        assert a.tobytes() == b.tobytes()

    def test_scale_recovered_from_large_sample(self):
        # Sample covariance times (df-2)/df estimates the scale matrix.
        rng = np.random.default_rng(12)
        scale = np.array([[2.0, 0.6], [0.6, 1.0]])
        params = MvtParams(scale=scale, df=5.0)
        x = mvt_sample(1_000_000, params, rng)
        rescaled = np.cov(x.T) * (5.0 - 2.0) / 5.0
        assert np.linalg.norm(rescaled - scale) / np.linalg.norm(scale) < 0.03

    def test_covariance_undefined_for_heavy_tails(self):
        with pytest.raises(DegenerateModelError):
            MvtParams(scale=[[1.0]], df=1.5).covariance()


class TestChiSquare:
    def test_table_quantiles(self):
        assert chi2_quantile(0.95, 1) == pytest.approx(3.841, abs=1e-3)
        assert chi2_quantile(0.95, 4) == pytest.approx(9.488, abs=1e-3)

    def test_survival_at_zero(self):
        for df in (1, 2, 7.5):
            assert chi2_sf(0.0, df) == 1.0

    @pytest.mark.parametrize("df", [1, 2, 4, 9])
    @pytest.mark.parametrize("q", [0.5, 0.9, 0.95, 0.99])
    def test_quantile_survival_round_trip(self, df, q):
        assert chi2_sf(chi2_quantile(q, df), df) == pytest.approx(1.0 - q, abs=1e-8)

    def test_domain_errors(self):
        with pytest.raises(ModelStructureError):
            chi2_sf(-1.0, 2)
        with pytest.raises(ModelStructureError):
            chi2_quantile(1.0, 2)
        with pytest.raises(ModelStructureError):
            chi2_quantile(0.0, 2)


class TestJarqueBera:
    def test_exactly_normal_moments(self):
        # Symmetric sample with kurtosis pinned to 3: +/-1 twice, eight zeros.
        x = np.array([1.0, 1.0, -1.0, -1.0] + [0.0] * 8)
        result = jarque_bera(x)
        assert result.stat == pytest.approx(0.0, abs=1e-14)
        assert result.pvalue == pytest.approx(1.0, abs=1e-12)

    def test_size_under_normality(self):
        rng = np.random.default_rng(21)
        rejections = 0
        trials = 1000
        for _ in range(trials):
            x = rng.standard_normal(10_000)
            if jarque_bera(x).pvalue < 0.05 * 1.0:
                rejections += 1
        assert 0.03 <= rejections / trials <= 0.075

    def test_detects_heavy_tails(self):
        rng = np.random.default_rng(22)
        big = 0
        trials = 200
        for _ in range(trials):
            x = rng.standard_t(3, size=500)
            if jarque_bera(x).stat > 20.0:
                big += 1
        assert big / trials >= 0.9

    def test_detects_skew(self):
        rng = np.random.default_rng(23)
        x = rng.chisquare(3, size=2000)
        assert jarque_bera(x).pvalue < 1e-6

    def test_preconditions(self):
        with pytest.raises(ModelStructureError):
            jarque_bera([1.0] * 7)
        with pytest.raises(DegenerateModelError):
            jarque_bera([2.0] * 50)
