import numpy as np
import pytest

from vmar import ModelOrder, MultiplicativeVMAR, Representation


def random_spd(rng, n, scale=1.0):
    a = rng.normal(size=(n, n))
    return scale * (a @ a.T + n * np.eye(n))


def random_coeff_stack(rng, p, n, radius):
    """Coefficient matrices rescaled so the companion spectral radius hits ``radius``."""
    from vmar.model import polynomial_spectral_radius

    if p == 0:
        return np.zeros((0, n, n))
    mats = rng.uniform(-1.0, 1.0, size=(p, n, n))
    current = polynomial_spectral_radius(mats)
    if current > 0:
        c = radius / current
        mats = mats * (c ** np.arange(1, p + 1))[:, None, None]
    return mats


def random_stationary_model(rng, n_max=4, r_max=3, s_max=3, representation=Representation.LEAD_FIRST):
    n = int(rng.integers(1, n_max + 1))
    r = int(rng.integers(0, r_max + 1))
    s = int(rng.integers(0, s_max + 1))
    if r + s == 0:
        s = 1
    phi = random_coeff_stack(rng, r, n, rng.uniform(0.2, 0.9))
    psi = random_coeff_stack(rng, s, n, rng.uniform(0.2, 0.9))
    return MultiplicativeVMAR(
        order=ModelOrder(n, r, s),
        phi=phi,
        psi=psi,
        sigma=random_spd(rng, n),
        lam=float(rng.uniform(2.0, 12.0)),
        representation=representation,
    )


@pytest.fixture
def bivariate_cb_dgp():
    """The bivariate VMAR(1,1) study design with a rank-1 lead matrix."""
    return MultiplicativeVMAR(
        order=ModelOrder(2, 1, 1),
        phi=[[[0.5, 0.1], [0.2, 0.3]]],
        psi=[[[0.3, 0.25], [0.6, 0.5]]],
        sigma=[[4.0, 0.5], [0.5, 1.0]],
        lam=3.0,
    )


@pytest.fixture
def bivariate_full_dgp():
    """The bivariate design with a full-rank lead matrix."""
    return MultiplicativeVMAR(
        order=ModelOrder(2, 1, 1),
        phi=[[[0.5, 0.1], [0.2, 0.3]]],
        psi=[[[0.1, 0.4], [0.6, 0.5]]],
        sigma=[[4.0, 0.5], [0.5, 1.0]],
        lam=3.0,
    )
