"""Market model parameter records, validation, and derived quantities."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .kernels import Kernel, SampledFunction, TimeGrid, kernel_weights

__all__ = [
    "VectorModel",
    "WishartModel",
    "validate",
    "distortion_constant",
    "lambda_matrix",
    "lambda_condition_number",
    "expected_variance_curve",
    "rate_on_grid",
]

Rate = float | Callable[[float], float]


def _rate_fn(rate: Rate) -> Callable[[float], float]:
    if callable(rate):
        return rate
    value = float(rate)
    return lambda t: value


def rate_on_grid(rate: Rate, grid: TimeGrid) -> np.ndarray:
    fn = _rate_fn(rate)
    return np.array([fn(float(t)) for t in grid.nodes])


def _kernel_list(kernel, d: int) -> list[Kernel]:
    if isinstance(kernel, Kernel):
        return [kernel] * d
    kernels = list(kernel)
    if len(kernels) != d:
        raise ValueError(f"expected {d} kernels, got {len(kernels)}")
    return kernels


@dataclass(frozen=True)
class VectorModel:
    """Multi-asset market with componentwise square-root Volterra volatility.

    theta  -- risk premia per unit variance, >= 0
    nu     -- vol-of-vol diagonal
    drift  -- variance drift matrix D, nonnegative off the diagonal
    rho    -- per-asset stock/volatility correlation in [-1, 1]
    v0     -- initial variance level V0 >= 0; the input curve is
              v0(t) = V0 + int_0^t K(t-s) b0 ds with b0 >= 0
    rate   -- deterministic risk-free rate (constant or function of time)
    gamma  -- relative risk aversion, in (0, 1)
    kernel -- one Kernel per component (diagonal multivariate kernel)
    """

    theta: np.ndarray
    nu: np.ndarray
    drift: np.ndarray
    rho: np.ndarray
    v0: np.ndarray
    gamma: float
    kernel: list[Kernel]
    rate: Rate = 0.0
    b0: np.ndarray | None = None

    def __post_init__(self) -> None:
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        d = theta.shape[0]
        nu = np.atleast_1d(np.asarray(self.nu, dtype=float))
        drift = np.atleast_2d(np.asarray(self.drift, dtype=float))
        rho = np.atleast_1d(np.asarray(self.rho, dtype=float))
        v0 = np.atleast_1d(np.asarray(self.v0, dtype=float))
        b0 = np.zeros(d) if self.b0 is None else np.atleast_1d(np.asarray(self.b0, dtype=float))
        for name, arr, shape in (
            ("nu", nu, (d,)),
            ("drift", drift, (d, d)),
            ("rho", rho, (d,)),
            ("v0", v0, (d,)),
            ("b0", b0, (d,)),
        ):
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "drift", drift)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "v0", v0)
        object.__setattr__(self, "b0", b0)
        object.__setattr__(self, "kernel", _kernel_list(self.kernel, d))

    @property
    def d(self) -> int:
        return self.theta.shape[0]

    def rate_at(self, t: float) -> float:
        return _rate_fn(self.rate)(t)

    def input_curve(self, grid: TimeGrid) -> np.ndarray:
        """v0(t_j) = V0 + b0 * int_0^t K on the grid, shape (n+1, d)."""
        out = np.tile(self.v0, (grid.n_steps + 1, 1))
        if np.any(self.b0 != 0.0):
            for i, k in enumerate(self.kernel):
                cum = np.concatenate(([0.0], np.cumsum(kernel_weights(k, grid).cell)))
                out[:, i] += self.b0[i] * cum
        return out


@dataclass(frozen=True)
class WishartModel:
    """Multi-asset market with matrix-valued (Wishart-type) Volterra volatility.

    mean_reversion -- drift matrix M
    vol_of_vol     -- diffusion matrix Q
    noise          -- matrix N entering the drift constant N N^T
    rho            -- stock/volatility correlation vector, rho^T rho <= 1
    market_price   -- market price of risk vector v
    sigma0         -- initial covariance, symmetric positive definite
    rate, gamma, kernel -- as in VectorModel
    """

    mean_reversion: np.ndarray
    vol_of_vol: np.ndarray
    noise: np.ndarray
    rho: np.ndarray
    market_price: np.ndarray
    sigma0: np.ndarray
    gamma: float
    kernel: list[Kernel]
    rate: Rate = 0.0

    def __post_init__(self) -> None:
        M = np.atleast_2d(np.asarray(self.mean_reversion, dtype=float))
        d = M.shape[0]
        Q = np.atleast_2d(np.asarray(self.vol_of_vol, dtype=float))
        N = np.atleast_2d(np.asarray(self.noise, dtype=float))
        rho = np.atleast_1d(np.asarray(self.rho, dtype=float))
        v = np.atleast_1d(np.asarray(self.market_price, dtype=float))
        sigma0 = np.atleast_2d(np.asarray(self.sigma0, dtype=float))
        for name, arr, shape in (
            ("mean_reversion", M, (d, d)),
            ("vol_of_vol", Q, (d, d)),
            ("noise", N, (d, d)),
            ("rho", rho, (d,)),
            ("market_price", v, (d,)),
            ("sigma0", sigma0, (d, d)),
        ):
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}")
        object.__setattr__(self, "mean_reversion", M)
        object.__setattr__(self, "vol_of_vol", Q)
        object.__setattr__(self, "noise", N)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "market_price", v)
        object.__setattr__(self, "sigma0", sigma0)
        object.__setattr__(self, "kernel", _kernel_list(self.kernel, d))

    @property
    def d(self) -> int:
        return self.mean_reversion.shape[0]

    @property
    def drift_constant(self) -> np.ndarray:
        return self.noise @ self.noise.T

    def rate_at(self, t: float) -> float:
        return _rate_fn(self.rate)(t)


_PD_FLOOR = 1e-12


def validate(model) -> list[str]:
    """All invariant violations of a model, as human-readable strings.

    An empty list means the model is admissible; violations are data, not
    exceptions, so configuration loaders can report them all at once.
    """
    violations: list[str] = []
    if isinstance(model, VectorModel):
        for i, th in enumerate(model.theta):
            if th < 0.0:
                violations.append(f"theta[{i}] < 0")
        for i, nv in enumerate(model.nu):
            if nv <= 0.0:
                violations.append(f"nu[{i}] <= 0")
        d = model.d
        for i in range(d):
            for j in range(d):
                if i != j and model.drift[i, j] < 0.0:
                    violations.append(f"D[{i}][{j}] < 0")
        for i, r in enumerate(model.rho):
            if not -1.0 <= r <= 1.0:
                violations.append(f"rho[{i}] outside [-1, 1]")
        for i, v in enumerate(model.v0):
            if v < 0.0:
                violations.append(f"v0[{i}] < 0")
        if model.b0 is not None:
            for i, b in enumerate(model.b0):
                if b < 0.0:
                    violations.append(f"b0[{i}] < 0")
    elif isinstance(model, WishartModel):
        rho = model.rho
        if float(rho @ rho) > 1.0 + 1e-12:
            violations.append("rho^T rho > 1")
        sigma0 = model.sigma0
        if not np.allclose(sigma0, sigma0.T, atol=1e-12, rtol=0.0):
            violations.append("sigma0 not symmetric")
        else:
            smallest = float(np.linalg.eigvalsh(0.5 * (sigma0 + sigma0.T)).min())
            if smallest <= _PD_FLOOR:
                violations.append(f"sigma0 not positive definite (min eigenvalue {smallest:.3e})")
    else:
        raise TypeError(f"unsupported model type {type(model)!r}")
    if not 0.0 < model.gamma < 1.0:
        violations.append("gamma outside (0, 1)")
    return violations


def distortion_constant(gamma: float, rho: float) -> float:
    """Distortion exponent c = (1-gamma) / (1-gamma+gamma rho^2), in (0, 1]."""
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    if not -1.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [-1, 1]")
    return (1.0 - gamma) / (1.0 - gamma + gamma * rho**2)


def lambda_matrix(model: VectorModel) -> np.ndarray:
    """Effective variance drift D + gamma/(1-gamma) diag(nu rho theta)."""
    g = model.gamma / (1.0 - model.gamma)
    return model.drift + g * np.diag(model.nu * model.rho * model.theta)


def lambda_condition_number(model: VectorModel) -> float:
    return float(np.linalg.cond(lambda_matrix(model)))


def expected_variance_curve(
    model: VectorModel, grid: TimeGrid, drift_matrix: np.ndarray | None = None
) -> SampledFunction:
    """Mean variance curve solving xi(t) = v0(t) + int_0^t K(t-s) B xi(s) ds.

    By default B is the tilted drift from ``lambda_matrix`` (the forward curve
    entering the distortion value function); pass ``drift_matrix=model.drift``
    for the physical-measure mean.  The linear Volterra equation is stepped
    implicitly with the trapezoidal product weights, which is equivalent to
    the resolvent-integral representation but avoids sampling the singular
    resolvent.
    """
    B = lambda_matrix(model) if drift_matrix is None else np.asarray(drift_matrix, dtype=float)
    d = model.d
    if B.shape != (d, d):
        raise ValueError(f"drift matrix must be {d}x{d}")
    n_steps = grid.n_steps
    per = [kernel_weights(k, grid) for k in model.kernel]
    cell = np.stack([w.cell for w in per], axis=1)
    corr = np.stack([w.corrector for w in per], axis=1)
    base = np.empty_like(corr)
    base[0] = np.nan
    base[1:] = cell - corr[1:]
    forced = model.input_curve(grid)
    xi = np.zeros((n_steps + 1, d))
    xi[0] = forced[0]
    gvals = np.empty_like(xi)  # g = B xi, convolved row-wise with K_i
    gvals[0] = B @ xi[0]
    newest = corr[1]
    lhs = np.eye(d) - np.diag(newest) @ B
    for n in range(1, n_steps + 1):
        w = base[n:0:-1].copy()
        if n > 1:
            w[1:] += corr[n:1:-1]
        hist = np.einsum("jd,jd->d", w, gvals[:n])
        sol = np.linalg.solve(lhs, forced[n] + hist)
        if not np.all(np.isfinite(sol)):
            raise FloatingPointError("expected-variance iteration diverged")
        xi[n] = sol
        gvals[n] = B @ sol
    return SampledFunction(grid, xi)
