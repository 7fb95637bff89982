"""Market model and analytic building blocks.

Correlated multi-asset geometric Brownian motion with a common strike,
the Black-Scholes closed form, payoff functions, the characteristic
function on shifted contours, the Fourier transforms of the call and
min payoffs, and the one-parameter "plus" correlation family.

Contour points are plain complex vectors ``z`` with ``z_j = u_j + i a_j``;
the analyticity-strip conditions of each transform are enforced as hard
preconditions.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr

from .errors import StripConditionError

__all__ = [
    "MarketModel",
    "black_scholes_price",
    "payoff_call",
    "payoff_min",
    "char_fn_gbm",
    "payoff_fourier_call",
    "payoff_fourier_min",
    "corr_matrix_plus",
]


def corr_matrix_plus(d, beta):
    """Correlation matrix with ``beta / (1 + beta)`` off the diagonal.

    Positive definite for all ``0 <= beta <= 1``: it is a rescaled rank-one
    update of the identity with eigenvalues ``(1 + beta*d')/(1 + beta)`` and
    ``1/(1 + beta)``.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    corr = np.full((d, d), beta / (1.0 + beta))
    np.fill_diagonal(corr, 1.0)
    return corr


class MarketModel:
    """Multi-asset GBM parameters plus a strike.

    Parameters
    ----------
    r : float
        Risk-free rate per year; also the default per-asset drift rate.
    sigma : float or sequence
        Per-asset volatilities (per sqrt(year)).
    corr : array_like or None
        d x d correlation matrix; identity when omitted.  Must be symmetric
        positive definite with a unit diagonal.
    T : float
        Maturity in years.
    s0 : float or sequence
        Spot prices.
    strike : float
        Common strike.
    rates : sequence, optional
        Per-asset drift rates; defaults to ``r`` for every asset.
        Discounting always uses the scalar ``r``.
    d : int, optional
        Asset count when every other argument is scalar.
    """

    def __init__(self, r, sigma, T, s0, strike, corr=None, rates=None, d=None):
        if d is None:
            for probe in (sigma, s0, rates):
                if probe is not None and np.ndim(probe) > 0:
                    d = len(probe)
                    break
            else:
                d = corr.shape[0] if corr is not None else 1
        self.d = int(d)
        self.r = float(r)
        self.T = float(T)
        self.strike = float(strike)
        self.sigma = np.broadcast_to(np.asarray(sigma, float), (self.d,)).copy()
        self.s0 = np.broadcast_to(np.asarray(s0, float), (self.d,)).copy()
        self.rates = (
            np.full(self.d, self.r)
            if rates is None
            else np.broadcast_to(np.asarray(rates, float), (self.d,)).copy()
        )
        corr = np.eye(self.d) if corr is None else np.asarray(corr, float)
        if corr.shape != (self.d, self.d):
            raise ValueError(f"corr must be {self.d}x{self.d}, got {corr.shape}")
        if not np.allclose(corr, corr.T, atol=1e-12):
            raise ValueError("corr must be symmetric")
        if np.max(np.abs(np.diag(corr) - 1.0)) > 1e-12:
            raise ValueError("corr must have a unit diagonal")
        try:
            self.chol = np.linalg.cholesky(corr)
        except np.linalg.LinAlgError as exc:
            raise ValueError("corr must be positive definite") from exc
        self.corr = corr

        if self.T <= 0:
            raise ValueError("T must be > 0")
        if self.strike <= 0:
            raise ValueError("strike must be > 0")
        if np.any(self.sigma <= 0):
            raise ValueError("sigma must be > 0")
        if np.any(self.s0 <= 0):
            raise ValueError("s0 must be > 0")

        # log-price drift mu_j = ln s0_j + r_j T - sigma_j^2 Sigma_jj T / 2
        self.log_drift = (
            np.log(self.s0)
            + self.rates * self.T
            - 0.5 * self.sigma**2 * np.diag(self.corr) * self.T
        )
        # quadratic form sigma_j sigma_k Sigma_jk T of the log-price covariance
        self.log_cov = np.outer(self.sigma, self.sigma) * self.corr * self.T
        for arr in (self.sigma, self.s0, self.rates, self.corr, self.chol,
                    self.log_drift, self.log_cov):
            arr.flags.writeable = False

    @classmethod
    def with_plus_correlation(cls, d, beta, r=0.3, sigma=0.5, T=1.0, s0=100.0,
                              strike=100.0):
        """Model with the one-parameter correlation family ``corr_matrix_plus``."""
        return cls(r=r, sigma=sigma, T=T, s0=s0, strike=strike,
                   corr=corr_matrix_plus(d, beta), d=d)

    @classmethod
    def from_dict(cls, cfg):
        """Build from a config mapping.

        Recognized keys: ``d``, ``r``, ``sigma``, ``T``, ``s0``, ``strike``,
        and either ``beta`` or an explicit ``corr`` matrix.
        """
        known = {"d", "r", "sigma", "T", "s0", "strike", "beta", "corr", "rates"}
        unknown = set(cfg) - known
        if unknown:
            raise ValueError(f"unknown model keys: {sorted(unknown)}")
        if "beta" in cfg and "corr" in cfg:
            raise ValueError("give either beta or corr, not both")
        d = cfg.get("d")
        corr = None
        if "corr" in cfg:
            corr = np.asarray(cfg["corr"], float)
            d = corr.shape[0] if d is None else d
        elif "beta" in cfg:
            if d is None:
                raise ValueError("beta requires d")
            corr = corr_matrix_plus(d, float(cfg["beta"]))
        return cls(
            r=cfg.get("r", 0.3),
            sigma=cfg.get("sigma", 0.5),
            T=cfg.get("T", 1.0),
            s0=cfg.get("s0", 100.0),
            strike=cfg.get("strike", 100.0),
            corr=corr,
            rates=cfg.get("rates"),
            d=d,
        )

    def __repr__(self):
        return (
            f"MarketModel(d={self.d}, r={self.r}, sigma={self.sigma.tolist()}, "
            f"T={self.T}, s0={self.s0.tolist()}, strike={self.strike})"
        )


def black_scholes_price(model, t=0.0):
    """Closed-form European call value for a single asset.

    ``S0 Phi(d1) - K e^{-r(T-t)} Phi(d2)``; the normal CDF comes from
    ``scipy.special.ndtr`` (full double precision).
    """
    if model.d != 1:
        raise ValueError(f"closed form needs d=1, model has d={model.d}")
    if t >= model.T:
        raise ValueError(f"valuation time {t} must precede maturity {model.T}")
    s0, k, sig = model.s0[0], model.strike, model.sigma[0]
    tau = model.T - t
    vol = sig * np.sqrt(tau)
    d1 = (np.log(s0 / k) + (model.r + 0.5 * sig**2) * tau) / vol
    d2 = d1 - vol
    return float(s0 * ndtr(d1) - k * np.exp(-model.r * tau) * ndtr(d2))


def payoff_call(s_t, strike):
    """European call payoff ``max(S_T - K, 0)``."""
    return np.maximum(np.asarray(s_t) - strike, 0.0)


def payoff_min(s_t, strike):
    """Min-option payoff ``max(min_j S_T^j - K, 0)`` over the last axis."""
    s_t = np.asarray(s_t)
    if s_t.ndim == 0 or s_t.shape[-1] == 0:
        raise ValueError("payoff_min needs at least one asset value")
    return np.maximum(s_t.min(axis=-1) - strike, 0.0)


def char_fn_gbm(model, z):
    """Characteristic function of the terminal log-prices at complex ``z``.

    ``exp(i z . mu - z^T C z / 2)`` with ``mu_j = ln s0_j + r_j T
    - sigma_j^2 Sigma_jj T / 2`` and ``C_jk = sigma_j sigma_k Sigma_jk T``.
    Entire in ``z``; accepts a single point ``(d,)`` or a batch ``(m, d)``.
    """
    z = np.asarray(z, dtype=np.complex128)
    squeeze = z.ndim == 1
    z = np.atleast_2d(z)
    if z.shape[-1] != model.d:
        raise ValueError(f"z must have {model.d} components, got {z.shape[-1]}")
    lin = z @ model.log_drift
    quad = np.einsum("mj,jk,mk->m", z, model.log_cov, z)
    out = np.exp(1j * lin - 0.5 * quad)
    return out[0] if squeeze else out


def payoff_fourier_call(z, strike):
    """Fourier transform of the call payoff, ``-K^{iz+1} / (z (z - i))``.

    Valid only on the strip ``Im z > 1`` where the defining integral
    converges; ``K`` powers use the principal branch (K is real positive).
    """
    z = np.asarray(z, dtype=np.complex128)
    if np.any(z.imag <= 1.0):
        bad = z.reshape(-1)[np.argmin(np.atleast_1d(z.imag))]
        raise StripConditionError(
            f"call transform needs Im z > 1, got Im z = {bad.imag}"
        )
    return -np.exp((1j * z + 1.0) * np.log(strike)) / (z * (z - 1j))


def payoff_fourier_min(z, strike):
    """Fourier transform of the min payoff on the shifted contour.

    ``(-1)^(d-1) K^{1 + i w} / ((1 + i w) prod_j (i z_j))`` with
    ``w = sum_j z_j``, valid on the strip ``Im z_j > 0`` for all ``j`` and
    ``sum_j Im z_j > 1``.  Reduces to :func:`payoff_fourier_call` at d=1.
    Accepts a single point ``(d,)`` or a batch ``(m, d)``.
    """
    z = np.asarray(z, dtype=np.complex128)
    squeeze = z.ndim == 1
    z = np.atleast_2d(z)
    d = z.shape[-1]
    if np.any(z.imag <= 0.0):
        raise StripConditionError("min transform needs Im z_j > 0 for every j")
    shift_sum = z.imag.sum(axis=-1)
    if np.any(shift_sum <= 1.0):
        raise StripConditionError(
            f"min transform needs sum_j Im z_j > 1, got {shift_sum.min()}"
        )
    w = z.sum(axis=-1)
    out = (
        (-1.0) ** (d - 1)
        * np.exp((1.0 + 1j * w) * np.log(strike))
        / ((1.0 + 1j * w) * np.prod(1j * z, axis=-1))
    )
    return out[0] if squeeze else out
