import math

import numpy as np
import pytest

from gasvol.errors import ConfigError, EstimationError
from gasvol.garch import (ConditionalVarianceTable, GarchParams,
                          conditional_variance_oracle, innovation_correction,
                          news_impact_comparison, transformed_innovation,
                          write_oracle_csv)

P = GarchParams(alpha0=0.1, alpha1=0.3, beta=0.2)


class TestParams:
    def test_validation(self):
        with pytest.raises(ConfigError):
            GarchParams(alpha0=0.0, alpha1=0.3, beta=0.2)
        with pytest.raises(ConfigError):
            GarchParams(alpha0=0.1, alpha1=0.0, beta=0.2)
        with pytest.raises(ConfigError):
            GarchParams(alpha0=0.1, alpha1=0.3, beta=-0.1)
        with pytest.raises(ConfigError):
            GarchParams(alpha0=0.1, alpha1=0.6, beta=0.4)

    def test_constants(self):
        assert P.unconditional_variance == pytest.approx(0.2, rel=1e-14)
        assert P.zero_excess == pytest.approx(0.04, rel=1e-14)
        assert P.sigma2_zero == pytest.approx(0.14, rel=1e-14)
        p0 = GarchParams(alpha0=0.1, alpha1=0.5, beta=0.0)
        assert p0.sigma2_zero == pytest.approx(p0.alpha0, rel=1e-14)
        assert P.sigma2_zero > P.alpha0  # strictly, since beta > 0


class TestInnovationTransform:
    def test_unit_fixed_point(self):
        assert transformed_innovation(1.0, P) == pytest.approx(1.0, abs=1e-15)

    def test_zero_maps_to_zero(self):
        assert transformed_innovation(0.0, P) == 0.0

    def test_direct_arithmetic(self):
        got = transformed_innovation(-2.0, P)
        assert got == pytest.approx(-math.sqrt((0.3 * 4 + 0.2) / 0.5), rel=1e-14)
        assert got == pytest.approx(-1.67332, abs=1e-5)

    def test_sign_and_floor(self):
        eps = np.array([-3.0, -0.5, 0.4, 2.5])
        out = transformed_innovation(eps, P)
        assert np.all(np.sign(out) == np.sign(eps))
        floor = math.sqrt(P.beta / (P.alpha1 + P.beta))
        assert np.all(np.abs(out) >= floor - 1e-15)

    def test_square_is_affine_in_square(self):
        rng = np.random.default_rng(0)
        eps = rng.normal(size=100)
        out = transformed_innovation(eps, P)
        expected = (P.alpha1 * eps ** 2 + P.beta) / (P.alpha1 + P.beta)
        assert np.allclose(out ** 2, expected, rtol=1e-13)

    def test_beta_zero_is_identity(self):
        p0 = GarchParams(alpha0=0.1, alpha1=0.5, beta=0.0)
        eps = np.linspace(-3, 3, 11)
        assert np.allclose(transformed_innovation(eps, p0), eps, atol=1e-15)


class TestInnovationCorrection:
    def test_unit(self):
        assert innovation_correction(1.0, P) == pytest.approx(1.0, abs=1e-15)

    def test_large_limit(self):
        limit = 1.0 + P.beta / P.alpha1
        assert innovation_correction(1e12, P) == pytest.approx(limit, abs=1e-12)

    def test_chained_value(self):
        e = transformed_innovation(-2.0, P)
        got = innovation_correction(e, P)
        assert got == pytest.approx(1.0 + (0.2 / 0.3) * (1.0 - 1.0 / 2.8), rel=1e-13)
        assert got == pytest.approx(1.42857, abs=1e-5)

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            innovation_correction(0.0, P)

    def test_beta_zero_is_one(self):
        p0 = GarchParams(alpha0=0.1, alpha1=0.5, beta=0.0)
        eps = np.array([-2.0, 0.3, 1.7])
        assert np.allclose(innovation_correction(eps, p0), 1.0, atol=1e-15)

    def test_exact_reconstruction_identity(self):
        # the transform and its correction multiply back to the original
        # squared innovation: e_tilde^2 * C = eps^2 exactly
        rng = np.random.default_rng(1)
        eps = rng.normal(size=1000)
        eps = eps[eps != 0]
        et = transformed_innovation(eps, P)
        c = innovation_correction(et, P)
        assert np.allclose(et ** 2 * c, eps ** 2, rtol=1e-12)


class TestMomentIdentities:
    def test_first_and_second_moments(self):
        rng = np.random.default_rng(7)
        n = 1_000_000
        eps = rng.standard_normal(n)
        eps = np.where(eps == 0, 1e-12, eps)
        et = transformed_innovation(eps, P)
        c = innovation_correction(et, P)
        first = et * np.sqrt(c)
        second = et ** 2 * c
        se1 = first.std() / math.sqrt(n)
        se2 = second.std() / math.sqrt(n)
        assert abs(first.mean()) <= 4 * se1
        assert abs(second.mean() - 1.0) <= 4 * se2


@pytest.fixture(scope="module")
def oracle_table():
    return conditional_variance_oracle(P, mc_paths=400_000, seed=11)


class TestOracle:
    def test_path_floor(self):
        with pytest.raises(ConfigError):
            conditional_variance_oracle(P, mc_paths=10_000)

    def test_deterministic(self):
        t1 = conditional_variance_oracle(P, mc_paths=100_000, seed=5)
        t2 = conditional_variance_oracle(P, mc_paths=100_000, seed=5)
        assert np.array_equal(t1.sigma2, t2.sigma2)
        assert np.array_equal(t1.count, t2.count)

    def test_center_cell(self, oracle_table):
        tab = oracle_table
        j = int(np.argmin(np.abs(tab.x)))
        assert not tab.flagged[j]
        assert abs(tab.sigma2[j] - tab.sigma2_zero) <= 3 * tab.se[j]

    def test_stored_constants(self, oracle_table):
        tab = oracle_table
        assert tab.sigma2_zero == pytest.approx(P.alpha0 + P.zero_excess, rel=1e-14)
        assert tab.zero_excess == pytest.approx(
            P.beta * P.alpha0 / (1 - P.alpha1 - P.beta), rel=1e-14)

    def test_representation_identity(self):
        # sanity for the whole construction: the binned conditional variance
        # matches alpha0 + (alpha1+beta) x^2 E[1/C | X = x] computed from the
        # same path's innovations
        n = 500_000
        rng = np.random.default_rng(23)
        eps = rng.standard_normal(n + 500)
        x = np.empty(n + 500)
        s2 = P.unconditional_variance
        xv = 0.0
        for t, e in enumerate(eps.tolist()):
            if t > 0:
                s2 = P.alpha0 + P.alpha1 * xv * xv + P.beta * s2
            xv = math.sqrt(s2) * e
            x[t] = xv
        x = x[500:]
        eps = eps[500:]
        et = transformed_innovation(np.where(eps == 0, 1e-12, eps), P)
        inv_c = 1.0 / innovation_correction(et, P)

        reg, resp, invc_lag = x[:-1], x[1:] ** 2, inv_c[:-1]
        for x0 in (0.3, 0.6, 0.9):
            mask = np.abs(reg - x0) <= 0.025
            count = int(mask.sum())
            assert count > 500
            lhs = float(resp[mask].mean())
            rhs = P.alpha0 + P.persistence * x0 ** 2 * float(invc_lag[mask].mean())
            se = float(resp[mask].std()) / math.sqrt(count)
            assert abs(lhs - rhs) <= 4 * se

    def test_beta_zero_degenerates_to_arch(self):
        p0 = GarchParams(alpha0=0.1, alpha1=0.5, beta=0.0)
        tab = conditional_variance_oracle(p0, mc_paths=200_000, seed=5)
        ok = ~tab.flagged
        dev = np.abs(tab.sigma2[ok] - (0.1 + 0.5 * tab.x[ok] ** 2)) / tab.se[ok]
        assert np.all(dev <= 4.0)
        assert np.mean(dev <= 3.0) >= 0.95

    def test_csv_export(self, tmp_path, oracle_table):
        out = tmp_path / "oracle.csv"
        write_oracle_csv(oracle_table, out)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "x,sigma2,se,count,flagged,coef_ratio"
        assert len(lines) == oracle_table.x.size + 1

    def test_interpolator(self, oracle_table):
        interp = oracle_table.interpolator()
        vals = interp([0.0, 0.5])
        assert np.all(np.isfinite(vals))
        assert vals[0] == pytest.approx(0.14, abs=0.02)


class TestNewsImpact:
    @pytest.fixture(scope="class")
    def curves(self):
        return news_impact_comparison(P, series_len=5000, seed=2, n_grid=41)

    def test_u_shape(self, curves):
        for band in (curves.garch, curves.baseline):
            est = band.estimate
            j_min = int(np.nanargmin(est))
            x_min = curves.grid[j_min]
            assert abs(x_min) < 0.35
            assert est[0] > est[j_min] and est[-1] > est[j_min]

    def test_minima_near_their_levels(self, curves):
        # the minimum of the GARCH curve sits at the zero-point variance,
        # the baseline's at the plain intercept; each inside its own band
        j = int(np.argmin(np.abs(curves.grid)))
        g, b = curves.garch, curves.baseline
        assert g.lower[j] <= P.sigma2_zero <= g.upper[j]
        assert b.lower[j] <= P.alpha0 <= b.upper[j]

    def test_deterministic(self):
        c1 = news_impact_comparison(P, series_len=2000, seed=9, n_grid=21)
        c2 = news_impact_comparison(P, series_len=2000, seed=9, n_grid=21)
        assert np.array_equal(c1.garch.estimate, c2.garch.estimate)
        assert np.array_equal(c1.baseline.estimate, c2.baseline.estimate)
