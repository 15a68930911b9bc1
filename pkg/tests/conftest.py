import numpy as np
import pytest

from gausscap import symplectic as sp


def random_cm(n_modes, rng, max_nu=3.0, scale=0.5):
    """Random valid covariance matrix: ``S diag(nu) S^T`` with ``nu >= 1``."""
    nu = rng.uniform(1.0, max_nu, n_modes)
    S = sp.random_symplectic(n_modes, rng, scale)
    return S @ np.diag(np.repeat(nu, 2)) @ S.T


def random_pure_cm(n_modes, rng, scale=0.5):
    S = sp.random_symplectic(n_modes, rng, scale)
    return S @ S.T


def g_oracle(x):
    """Entropy of a thermal state with ``x`` photons, written out directly."""
    if x == 0:
        return 0.0
    return (x + 1) * np.log2(x + 1) - x * np.log2(x)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_minimal_channel(rng):
    """Random single-mode channel saturating the CP condition (one environment mode)."""
    from gausscap.channels import GaussianChannel

    X = rng.normal(size=(2, 2))
    k = abs(1.0 - np.linalg.det(X))
    return GaussianChannel(X, k * random_pure_cm(1, rng))


def random_cp_channel(n_modes, rng, extra_noise=0.5):
    from gausscap.channels import GaussianChannel, tensor

    base = tensor(*[random_minimal_channel(rng) for _ in range(n_modes)])
    L = rng.normal(size=(2 * n_modes, 2 * n_modes))
    S_pre = sp.random_symplectic(n_modes, rng)
    X = base.X @ S_pre
    return GaussianChannel(X, base.Y + extra_noise * L @ L.T / (2 * n_modes))
