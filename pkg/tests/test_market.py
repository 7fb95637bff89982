import numpy as np
import pytest

from ttpricer import (
    MarketModel,
    StripConditionError,
    black_scholes_price,
    char_fn_gbm,
    corr_matrix_plus,
    payoff_call,
    payoff_fourier_call,
    payoff_fourier_min,
    payoff_min,
)
from conftest import BENCH, single_asset_model

# Black-Scholes value at the benchmark parameters, frozen from the
# 10^6-point trapezoid of the discounted lognormal integral (see
# lognormal_quadrature_price below); the closed form agrees to 1e-11.
BS_BENCH_FROZEN = 33.05617069978057


def lognormal_quadrature_price(model, n=1_000_000, width=10.0):
    """Discounted payoff integral against the terminal log-price density."""
    mean = np.log(model.s0[0]) + (model.r - 0.5 * model.sigma[0] ** 2) * model.T
    sd = model.sigma[0] * np.sqrt(model.T)
    x = np.linspace(mean - width * sd, mean + width * sd, n)
    density = np.exp(-((x - mean) ** 2) / (2 * sd**2)) / (sd * np.sqrt(2 * np.pi))
    payoff = np.maximum(np.exp(x) - model.strike, 0.0)
    return np.exp(-model.r * model.T) * np.trapezoid(payoff * density, x)


class TestCorrMatrixPlus:
    def test_beta_zero_is_identity(self):
        np.testing.assert_array_equal(corr_matrix_plus(4, 0.0), np.eye(4))

    def test_beta_one_gives_half_off_diagonal(self):
        corr = corr_matrix_plus(3, 1.0)
        off = corr[~np.eye(3, dtype=bool)]
        np.testing.assert_allclose(off, 0.5)
        np.testing.assert_allclose(np.diag(corr), 1.0)

    def test_beta_half_off_diagonal_third_and_pd(self):
        corr = corr_matrix_plus(5, 0.5)
        assert corr[0, 1] == pytest.approx(1.0 / 3.0)
        np.linalg.cholesky(corr)

    @pytest.mark.parametrize("beta", [0.0, 0.25, 0.5, 0.75, 1.0])
    def test_positive_definite_up_to_thirty_assets(self, beta):
        np.linalg.cholesky(corr_matrix_plus(30, beta))

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            corr_matrix_plus(3, -0.1)
        with pytest.raises(ValueError):
            corr_matrix_plus(3, 1.5)
        with pytest.raises(ValueError):
            corr_matrix_plus(0, 0.5)


class TestMarketModel:
    def test_scalar_broadcast(self):
        m = MarketModel(d=3, **BENCH)
        np.testing.assert_array_equal(m.sigma, [0.5] * 3)
        np.testing.assert_array_equal(m.s0, [100.0] * 3)
        np.testing.assert_array_equal(m.corr, np.eye(3))

    def test_not_positive_definite_rejected(self):
        corr = np.array([[1.0, 0.99, -0.99], [0.99, 1.0, 0.99], [-0.99, 0.99, 1.0]])
        with pytest.raises(ValueError, match="positive definite"):
            MarketModel(d=3, corr=corr, **BENCH)

    def test_unit_diagonal_enforced(self):
        corr = np.eye(2) * 1.001
        with pytest.raises(ValueError, match="unit diagonal"):
            MarketModel(d=2, corr=corr, **BENCH)

    @pytest.mark.parametrize(
        "override", [dict(sigma=-0.5), dict(T=0.0), dict(s0=0.0), dict(strike=-1.0)]
    )
    def test_positivity_validation(self, override):
        params = dict(BENCH, **override)
        with pytest.raises(ValueError):
            MarketModel(d=1, **params)

    def test_from_dict_with_beta(self):
        m = MarketModel.from_dict(
            {"d": 3, "r": 0.3, "sigma": 0.5, "T": 1.0, "s0": 100, "strike": 100,
             "beta": 0.5}
        )
        assert m.corr[0, 1] == pytest.approx(1.0 / 3.0)

    def test_from_dict_rejects_unknown_and_conflicting_keys(self):
        with pytest.raises(ValueError, match="unknown"):
            MarketModel.from_dict({"volatility": 0.5})
        with pytest.raises(ValueError, match="not both"):
            MarketModel.from_dict({"d": 2, "beta": 0.5, "corr": np.eye(2)})


class TestBlackScholes:
    def test_worthless_strike_limit(self):
        m = MarketModel(d=1, r=0.3, sigma=0.5, T=1.0, s0=100.0, strike=1e-7)
        assert black_scholes_price(m) == pytest.approx(100.0, rel=1e-6)

    def test_zero_volatility_limit(self):
        m = MarketModel(d=1, r=0.3, sigma=1e-8, T=1.0, s0=100.0, strike=100.0)
        want = 100.0 - 100.0 * np.exp(-0.3)
        assert black_scholes_price(m) == pytest.approx(want, rel=1e-9)

    def test_benchmark_value_against_quadrature(self):
        m = single_asset_model()
        closed = black_scholes_price(m)
        quad = lognormal_quadrature_price(m)
        assert closed == pytest.approx(quad, rel=1e-9)
        assert closed == pytest.approx(BS_BENCH_FROZEN, rel=1e-12)

    def test_domain_errors(self):
        m = single_asset_model()
        with pytest.raises(ValueError, match="maturity"):
            black_scholes_price(m, t=1.0)
        with pytest.raises(ValueError, match="d=1"):
            black_scholes_price(MarketModel(d=2, **BENCH))


class TestPayoffs:
    @pytest.mark.parametrize("s,k,want", [(150, 100, 50), (100, 100, 0), (80, 100, 0)])
    def test_call(self, s, k, want):
        assert payoff_call(s, k) == want

    def test_min_basic(self):
        assert payoff_min([120.0, 110.0, 130.0], 100.0) == 10.0
        assert payoff_min([120.0, 90.0], 100.0) == 0.0

    def test_min_reduces_to_call_for_one_asset(self):
        for s in (80.0, 100.0, 150.0):
            assert payoff_min([s], 100.0) == payoff_call(s, 100.0)

    def test_min_rejects_empty(self):
        with pytest.raises(ValueError):
            payoff_min(np.empty((4, 0)), 100.0)


class TestCharFn:
    def test_at_zero_is_one(self):
        for d in (1, 2, 5):
            m = MarketModel.with_plus_correlation(d=d, beta=0.5, **BENCH)
            assert char_fn_gbm(m, np.zeros(d)) == pytest.approx(1.0 + 0.0j)

    def test_gaussian_modulus_on_real_axis(self):
        m = single_asset_model()
        for u in (0.5, 1.0, 3.0):
            got = abs(char_fn_gbm(m, np.array([u])))
            want = np.exp(-0.5 * m.sigma[0] ** 2 * m.T * u**2)
            assert got == pytest.approx(want, rel=1e-12)

    def test_matches_density_fourier_sum(self):
        # trapezoid of exp(iux) against the sampled terminal density
        m = single_asset_model()
        mean = np.log(m.s0[0]) + (m.r - 0.5 * m.sigma[0] ** 2) * m.T
        sd = m.sigma[0] * np.sqrt(m.T)
        x = np.linspace(mean - 12 * sd, mean + 12 * sd, 1 << 17)
        density = np.exp(-((x - mean) ** 2) / (2 * sd**2)) / (sd * np.sqrt(2 * np.pi))
        for u in (0.3, 1.7, -2.2):
            quad = np.trapezoid(np.exp(1j * u * x) * density, x)
            assert abs(char_fn_gbm(m, np.array([u])) - quad) <= 1e-8

    def test_hermitian_symmetry(self):
        m = MarketModel.with_plus_correlation(d=3, beta=0.5, **BENCH)
        rng = np.random.default_rng(3)
        for _ in range(10):
            u = rng.standard_normal(3)
            lhs = char_fn_gbm(m, -u)
            rhs = np.conj(char_fn_gbm(m, u))
            assert abs(lhs - rhs) <= 1e-12 * abs(rhs)

    def test_log_concave_modulus_along_axes(self):
        m = MarketModel.with_plus_correlation(d=2, beta=0.5, **BENCH)
        alpha = 2.5
        us = np.linspace(-4, 4, 41)
        for axis in range(2):
            vals = []
            for u in us:
                z = np.zeros(2, dtype=complex) + 1j * alpha
                z[axis] += u
                vals.append(np.log(abs(char_fn_gbm(m, z))))
            second = np.diff(vals, 2)
            assert np.isfinite(vals).all()
            assert np.all(second <= 1e-9)


def call_transform_quadrature(z, strike, upper=40.0, n=400_000):
    x = np.linspace(np.log(strike), upper, n)
    return np.trapezoid(np.exp(1j * z * x) * (np.exp(x) - strike), x)


class TestPayoffFourierCall:
    def test_unit_strike_closed_form(self):
        for z in (0.7 + 2.0j, -1.3 + 1.5j):
            assert payoff_fourier_call(z, 1.0) == pytest.approx(-1.0 / (z * (z - 1j)))

    def test_matches_defining_integral(self):
        for z in (2.0j, 0.8 + 1.7j, -1.1 + 2.4j):
            got = payoff_fourier_call(z, 1.3)
            want = call_transform_quadrature(z, 1.3)
            assert abs(got - want) <= 1e-6 * abs(want)

    def test_strip_violation_raises(self):
        with pytest.raises(StripConditionError):
            payoff_fourier_call(0.5j, 100.0)


def min_transform_quadrature_2d(z, strike, span=20.0, n=2000):
    x = np.linspace(np.log(strike), np.log(strike) + span, n)
    x1, x2 = np.meshgrid(x, x, indexing="ij")
    payoff = np.maximum(np.minimum(np.exp(x1), np.exp(x2)) - strike, 0.0)
    f = np.exp(1j * (z[0] * x1 + z[1] * x2)) * payoff
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    h = x[1] - x[0]
    return np.sum(f * np.outer(w, w)) * h * h


class TestPayoffFourierMin:
    def test_reduces_to_call_at_one_asset(self):
        for z in (2.0j, 0.8 + 1.7j, -2.3 + 3.1j):
            got = payoff_fourier_min(np.array([z]), 100.0)
            want = payoff_fourier_call(z, 100.0)
            assert abs(got - want) <= 1e-12 * abs(want)

    def test_two_asset_unit_strike_arithmetic(self):
        got = payoff_fourier_min(np.array([1j, 1j]), 1.0)
        assert got == pytest.approx(1.0 + 0.0j)

    def test_matches_two_dimensional_integral(self):
        z = np.array([0.4 + 0.9j, -0.3 + 0.8j])
        got = payoff_fourier_min(z, 1.3)
        want = min_transform_quadrature_2d(z, 1.3)
        assert abs(got - want) <= 1e-4 * abs(want)

    def test_strip_violations_name_the_condition(self):
        with pytest.raises(StripConditionError, match="Im z_j > 0"):
            payoff_fourier_min(np.array([1.0 - 0.1j, 2.0j]), 100.0)
        with pytest.raises(StripConditionError, match="sum"):
            payoff_fourier_min(np.array([0.3j, 0.3j]), 100.0)

    def test_analytic_in_the_strip(self):
        # Cauchy-Riemann: d/d(Re z_j) equals -i d/d(Im z_j) inside the strip
        z0 = np.array([0.5 + 0.8j, -0.7 + 0.9j])
        h = 1e-5
        for j in range(2):
            zp, zm = z0.copy(), z0.copy()
            zp[j] += h
            zm[j] -= h
            d_re = (payoff_fourier_min(zp, 100.0) - payoff_fourier_min(zm, 100.0)) / (
                2 * h
            )
            zp, zm = z0.copy(), z0.copy()
            zp[j] += 1j * h
            zm[j] -= 1j * h
            d_im = (payoff_fourier_min(zp, 100.0) - payoff_fourier_min(zm, 100.0)) / (
                2 * h
            )
            assert abs(d_re - (-1j) * d_im) <= 1e-6 * abs(d_re)

    def test_batch_matches_pointwise(self):
        rng = np.random.default_rng(9)
        z = rng.standard_normal((6, 3)) + 1j * (0.5 + rng.random((6, 3)))
        batch = payoff_fourier_min(z, 100.0)
        for k in range(6):
            assert batch[k] == pytest.approx(payoff_fourier_min(z[k], 100.0))
