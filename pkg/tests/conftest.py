import numpy as np
import pytest

from volterra_merton.kernels import Kernel
from volterra_merton.models import VectorModel, WishartModel

# Two-asset Wishart market calibrated by Buraschi, Porchia & Trojani (2010);
# the drift constant is N N^T = 10 Q^T Q.
BPT10_M = np.array([[-1.21, 0.491], [0.3292, -1.271]])
BPT10_Q = np.array([[0.167, 0.033], [0.001, 0.09]])
BPT10_RHO = np.array([-0.115, -0.549])
BPT10_V = np.array([4.722, 3.317])


def bpt10_noise() -> np.ndarray:
    vals, vecs = np.linalg.eigh(10.0 * BPT10_Q.T @ BPT10_Q)
    return vecs @ np.diag(np.sqrt(vals)) @ vecs.T


def make_wishart(gamma: float = 0.2, alpha: float = 0.99, sigma0_scale: float = 0.25,
                 rate: float = 0.0, alphas=None) -> WishartModel:
    if alphas is None:
        alphas = (alpha, alpha)
    kernels = [Kernel.fractional(1.0, a) for a in alphas]
    return WishartModel(
        mean_reversion=BPT10_M,
        vol_of_vol=BPT10_Q,
        noise=bpt10_noise(),
        rho=BPT10_RHO,
        market_price=BPT10_V,
        sigma0=sigma0_scale * np.eye(2),
        gamma=gamma,
        kernel=kernels,
        rate=rate,
    )


def make_rough_heston(alpha: float = 0.7, gamma: float = 0.5, rate: float = 0.0) -> VectorModel:
    return VectorModel(
        theta=[1.0],
        nu=[0.3],
        drift=[[-1.0]],
        rho=[-0.5],
        v0=[0.04],
        gamma=gamma,
        kernel=[Kernel.fractional(1.0, alpha)],
        rate=rate,
    )


def make_degenerate_pair(alpha: float = 0.7) -> VectorModel:
    return VectorModel(
        theta=[1.0, 0.8],
        nu=[0.3, 0.25],
        drift=[[-1.0, 0.1], [0.05, -1.2]],
        rho=[-0.5, -0.5],
        v0=[0.04, 0.06],
        gamma=0.5,
        kernel=[Kernel.fractional(1.0, alpha)] * 2,
        rate=0.01,
    )


def rk4_path(f, shape, horizon: float, n_steps: int) -> np.ndarray:
    """Classical RK4 on psi' = f(psi), psi(0) = 0; reference for smooth kernels."""
    h = horizon / n_steps
    y = np.zeros(shape)
    out = np.empty((n_steps + 1,) + tuple(np.shape(y)))
    out[0] = y
    for n in range(n_steps):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[n + 1] = y
    return out


@pytest.fixture(scope="session")
def wishart_bpt10():
    return make_wishart()
