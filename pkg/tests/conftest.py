import pytest

from ttpricer import (
    CrossConfig,
    GridSpec,
    MarketModel,
    TensorTrain,
    price_fourier_tt,
    price_monte_carlo,
    table1_hyperparams,
)

# Model parameters shared by the benchmark experiments.
BENCH = dict(r=0.3, sigma=0.5, T=1.0, s0=100.0, strike=100.0)


def random_tt(rng, phys_dims, bond_dim, scale=1.0):
    """Random complex tensor train with the given uniform internal bond."""
    d = len(phys_dims)
    bonds = [1] + [bond_dim] * (d - 1) + [1]
    cores = []
    for k in range(d):
        shape = (bonds[k], phys_dims[k], bonds[k + 1])
        cores.append(
            scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
        )
    return TensorTrain(cores)


def single_asset_model():
    return MarketModel(d=1, **BENCH)


def plus_model(d, beta=0.5):
    return MarketModel.with_plus_correlation(d=d, beta=beta, **BENCH)


def bench_grid(d, n=50):
    if d == 1:
        return GridSpec(n=n, eta=0.5, alpha=3.0, d=1)
    eta = table1_hyperparams(d)[0]
    return GridSpec(n=n, eta=eta, alpha=5.0 / d, d=d)


@pytest.fixture(scope="session")
def table_runs():
    """Table-style tensor-train pricing runs shared by the acceptance tests."""
    runs = {}
    for d in (2, 3, 4, 5, 6, 10):
        eta, bond_v, bond_phi = table1_hyperparams(d)
        grid = bench_grid(d)
        result = price_fourier_tt(
            plus_model(d),
            grid,
            cfg_phi=CrossConfig(bond_dim=bond_phi, seed=1234 + d),
            cfg_v=CrossConfig(bond_dim=bond_v, seed=1234 + d),
        )
        runs[d] = {
            "result": result,
            "grid": grid,
            "bond_v": bond_v,
            "bond_phi": bond_phi,
        }
    return runs


@pytest.fixture(scope="session")
def mc_baselines():
    """Monte Carlo reference prices for the dimensions the table runs cover."""
    out = {}
    for d in (5, 6):
        out[d] = price_monte_carlo(plus_model(d), 1_000_000, seed=777)
    return out
