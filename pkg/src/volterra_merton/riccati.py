"""Riccati-Volterra solvers based on the fractional Adams scheme.

Solves fixed-point equations of convolution type,

    psi(t) = int_0^t F(psi)(t - s) K(s) ds,

for row-vector valued psi with componentwise-quadratic F and for symmetric
matrix valued psi with the quadratic map of the Wishart case.  K is diagonal
with one scalar kernel per component (vector case) or per column (matrix
case).  Time stepping is predictor-corrector (PECE) product integration:
left-rectangle predictor with exact cell integrals of K, one corrector sweep
with the trapezoidal product weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .kernels import Kernel, TimeGrid, kernel_weights

__all__ = [
    "VectorRiccatiRHS",
    "MatrixRiccatiRHS",
    "RiccatiPath",
    "BlowUp",
    "RiccatiBlowUpError",
    "vector_rhs_degenerate",
    "vector_rhs_general",
    "wishart_rhs",
    "solve_riccati_vector",
    "solve_riccati_matrix",
    "global_existence_diagonal",
    "fixed_point_residual",
]

DEFAULT_BLOWUP_THRESHOLD = 1e8


@dataclass(frozen=True)
class VectorRiccatiRHS:
    """Quadratic right-hand side F(psi) = const + psi @ linear + quad * psi**2.

    psi is a row vector; ``quad`` acts componentwise.
    """

    const: np.ndarray
    linear: np.ndarray
    quad: np.ndarray

    def __post_init__(self) -> None:
        const = np.atleast_1d(np.asarray(self.const, dtype=float))
        linear = np.atleast_2d(np.asarray(self.linear, dtype=float))
        quad = np.atleast_1d(np.asarray(self.quad, dtype=float))
        d = const.shape[0]
        if linear.shape != (d, d) or quad.shape != (d,):
            raise ValueError("inconsistent coefficient shapes")
        object.__setattr__(self, "const", const)
        object.__setattr__(self, "linear", linear)
        object.__setattr__(self, "quad", quad)

    @property
    def dim(self) -> int:
        return self.const.shape[0]

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        return self.const + psi @ self.linear + self.quad * psi**2


@dataclass(frozen=True)
class MatrixRiccatiRHS:
    """Matrix right-hand side f(psi) = psi A + A^T psi + 2 psi S psi + C.

    ``quadratic`` (S) and ``constant`` (C) must be symmetric; f then maps
    symmetric matrices to symmetric matrices.  Evaluations are symmetrized to
    kill floating-point asymmetry.
    """

    linear: np.ndarray
    quadratic: np.ndarray
    constant: np.ndarray

    def __post_init__(self) -> None:
        lin = np.atleast_2d(np.asarray(self.linear, dtype=float))
        quad = np.atleast_2d(np.asarray(self.quadratic, dtype=float))
        const = np.atleast_2d(np.asarray(self.constant, dtype=float))
        d = lin.shape[0]
        for name, m in (("linear", lin), ("quadratic", quad), ("constant", const)):
            if m.shape != (d, d):
                raise ValueError(f"{name} must be {d}x{d}")
        for name, m in (("quadratic", quad), ("constant", const)):
            if not np.allclose(m, m.T, atol=1e-12, rtol=0.0):
                raise ValueError(f"{name} must be symmetric")
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "quadratic", 0.5 * (quad + quad.T))
        object.__setattr__(self, "constant", 0.5 * (const + const.T))

    @property
    def dim(self) -> int:
        return self.linear.shape[0]

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        out = psi @ self.linear + self.linear.T @ psi + 2.0 * psi @ self.quadratic @ psi + self.constant
        return 0.5 * (out + out.T)


@dataclass(frozen=True)
class BlowUp:
    """Metadata for a numerically diverging solution (finite-horizon estimate)."""

    detected_at: float
    norm: float


class RiccatiBlowUpError(RuntimeError):
    """Raised by consumers that require a solution on the whole horizon."""

    def __init__(self, blowup: BlowUp):
        super().__init__(
            f"Riccati-Volterra solution diverges near t = {blowup.detected_at:.6g} "
            f"(norm {blowup.norm:.3e}); horizon estimate T_max <= {blowup.detected_at:.6g}"
        )
        self.blowup = blowup


@dataclass(frozen=True)
class RiccatiPath:
    """Solution samples psi(t_j) with blow-up metadata and a quadrature residual.

    ``values`` has shape (n_steps+1, d) for the vector equation and
    (n_steps+1, d, d) for the matrix one; nodes past a detected blow-up hold
    the last finite value.
    """

    grid: TimeGrid
    values: np.ndarray
    blowup: BlowUp | None
    residual: float

    @property
    def ok(self) -> bool:
        return self.blowup is None

    def require_global(self) -> "RiccatiPath":
        if self.blowup is not None:
            raise RiccatiBlowUpError(self.blowup)
        return self

    def at_time_to_go(self, j: int) -> np.ndarray:
        """psi(T - t_j) by grid-index mirroring."""
        return self.values[self.grid.n_steps - j]


def _as_kernel_list(kernel, d: int) -> list[Kernel]:
    if isinstance(kernel, Kernel):
        return [kernel] * d
    kernels = list(kernel)
    if len(kernels) != d:
        raise ValueError(f"expected {d} kernels, got {len(kernels)}")
    return kernels


def vector_rhs_degenerate(model) -> VectorRiccatiRHS:
    """Right-hand side of the distortion-transform equation (equal leverages).

    Valid only when every component shares one stock-volatility correlation;
    the distortion exponent c enters the constant term.
    """
    rho = np.asarray(model.rho, dtype=float)
    if not np.allclose(rho, rho[0], atol=1e-14, rtol=0.0):
        raise ValueError("degenerate construction requires equal correlations")
    from .models import distortion_constant, lambda_matrix

    gamma = model.gamma
    c = distortion_constant(gamma, float(rho[0]))
    theta = np.asarray(model.theta, dtype=float)
    nu = np.asarray(model.nu, dtype=float)
    const = gamma / (2.0 * c * (1.0 - gamma)) * theta**2
    return VectorRiccatiRHS(const=const, linear=lambda_matrix(model), quad=0.5 * nu**2)


def vector_rhs_general(model) -> VectorRiccatiRHS:
    """Right-hand side of the general-correlation equation."""
    from .models import lambda_matrix

    gamma = model.gamma
    if not 0.0 < gamma < 1.0:
        raise ValueError("risk aversion gamma must lie in (0, 1)")
    theta = np.asarray(model.theta, dtype=float)
    nu = np.asarray(model.nu, dtype=float)
    rho = np.asarray(model.rho, dtype=float)
    const = gamma / (2.0 * (1.0 - gamma)) * theta**2
    quad = 0.5 * nu**2 * (1.0 + gamma * rho**2 / (1.0 - gamma))
    return VectorRiccatiRHS(const=const, linear=lambda_matrix(model), quad=quad)


def wishart_rhs(model) -> MatrixRiccatiRHS:
    """Matrix right-hand side of the Wishart-volatility equation.

    linear    = M + g/(1-g) Q^T rho v^T
    quadratic = Q^T Q + g/(1-g) Q^T rho rho^T Q   (symmetrized)
    constant  = g/(2(1-g)) v v^T
    """
    gamma = model.gamma
    if not 0.0 < gamma < 1.0:
        raise ValueError("risk aversion gamma must lie in (0, 1)")
    M = np.asarray(model.mean_reversion, dtype=float)
    Q = np.asarray(model.vol_of_vol, dtype=float)
    rho = np.asarray(model.rho, dtype=float).reshape(-1, 1)
    v = np.asarray(model.market_price, dtype=float).reshape(-1, 1)
    g = gamma / (1.0 - gamma)
    linear = M + g * (Q.T @ rho) @ v.T
    quadratic = Q.T @ Q + g * (Q.T @ rho) @ (rho.T @ Q)
    constant = 0.5 * g * (v @ v.T)
    return MatrixRiccatiRHS(
        linear=linear,
        quadratic=0.5 * (quadratic + quadratic.T),
        constant=0.5 * (constant + constant.T),
    )


def _stack_weights(kernels: Sequence[Kernel], grid: TimeGrid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cell, base and corrector arrays stacked per component, shape (., d)."""
    per = [kernel_weights(k, grid) for k in kernels]
    cell = np.stack([w.cell for w in per], axis=1)
    corr = np.stack([w.corrector for w in per], axis=1)
    base = np.empty_like(corr)
    base[0] = np.nan
    base[1:] = cell - corr[1:]
    return cell, corr, base


def _step_rows(cell: np.ndarray, corr: np.ndarray, base: np.ndarray, n: int):
    """Predictor weights (n, d) and corrector weights ((n, d), newest (d,))."""
    pred = cell[n - 1 :: -1]
    corr_hist = base[n:0:-1].copy()
    if n > 1:
        corr_hist[1:] += corr[n:1:-1]
    return pred, corr_hist, corr[1]


def solve_riccati_vector(
    kernel,
    rhs: VectorRiccatiRHS,
    grid: TimeGrid,
    blowup_threshold: float = DEFAULT_BLOWUP_THRESHOLD,
) -> RiccatiPath:
    """PECE product-integration solve of the row-vector Riccati equation.

    On blow-up the returned path is truncated (values frozen at the last
    finite node) and carries the estimated divergence time.
    """
    d = rhs.dim
    kernels = _as_kernel_list(kernel, d)
    cell, corr, base = _stack_weights(kernels, grid)
    n_steps = grid.n_steps
    psi = np.zeros((n_steps + 1, d))
    fvals = np.empty((n_steps + 1, d))
    fvals[0] = rhs(psi[0])
    blowup = None
    for n in range(1, n_steps + 1):
        pred_w, corr_w, newest = _step_rows(cell, corr, base, n)
        hist = fvals[:n]
        pred = np.einsum("jd,jd->d", pred_w, hist)
        pred_norm = float(np.max(np.abs(pred)))
        if pred_norm > blowup_threshold or np.isinf(pred_norm):
            blowup = BlowUp(detected_at=grid.nodes[n - 1], norm=pred_norm)
            psi[n:] = psi[n - 1]
            break
        val = np.einsum("jd,jd->d", corr_w, hist) + newest * rhs(pred)
        norm = float(np.max(np.abs(val)))
        if np.isnan(norm):
            # predictor was finite, so NaN here means bad inputs, not blow-up
            raise FloatingPointError(f"non-finite Riccati step at t = {grid.nodes[n]:.6g}")
        if norm > blowup_threshold or np.isinf(norm):
            blowup = BlowUp(detected_at=grid.nodes[n - 1], norm=norm)
            psi[n:] = psi[n - 1]
            break
        psi[n] = val
        fvals[n] = rhs(val)
    residual = np.nan if blowup is not None else fixed_point_residual(
        RiccatiPath(grid, psi, None, np.nan), kernels, rhs
    )
    return RiccatiPath(grid, psi, blowup, residual)


def solve_riccati_matrix(
    kernel,
    rhs: MatrixRiccatiRHS,
    grid: TimeGrid,
    blowup_threshold: float = DEFAULT_BLOWUP_THRESHOLD,
) -> RiccatiPath:
    """PECE solve of the symmetric matrix Riccati equation.

    The diagonal kernel acts column by column: column i of the convolution
    uses kernel K_i.  With equal component kernels symmetry is automatic;
    with distinct kernels each iterate is re-symmetrized.
    """
    d = rhs.dim
    kernels = _as_kernel_list(kernel, d)
    cell, corr, base = _stack_weights(kernels, grid)
    n_steps = grid.n_steps
    psi = np.zeros((n_steps + 1, d, d))
    fvals = np.empty((n_steps + 1, d, d))
    fvals[0] = rhs(psi[0])
    blowup = None
    for n in range(1, n_steps + 1):
        pred_w, corr_w, newest = _step_rows(cell, corr, base, n)
        hist = fvals[:n]
        pred = np.einsum("ji,jli->li", pred_w, hist)
        pred = 0.5 * (pred + pred.T)
        pred_norm = float(np.max(np.abs(pred)))
        if pred_norm > blowup_threshold or np.isinf(pred_norm):
            blowup = BlowUp(detected_at=grid.nodes[n - 1], norm=pred_norm)
            psi[n:] = psi[n - 1]
            break
        val = np.einsum("ji,jli->li", corr_w, hist) + newest[None, :] * rhs(pred)
        val = 0.5 * (val + val.T)
        norm = float(np.max(np.abs(val)))
        if np.isnan(norm):
            raise FloatingPointError(f"non-finite Riccati step at t = {grid.nodes[n]:.6g}")
        if norm > blowup_threshold or np.isinf(norm):
            blowup = BlowUp(detected_at=grid.nodes[n - 1], norm=norm)
            psi[n:] = psi[n - 1]
            break
        psi[n] = val
        fvals[n] = rhs(val)
    residual = np.nan if blowup is not None else fixed_point_residual(
        RiccatiPath(grid, psi, None, np.nan), kernels, rhs
    )
    return RiccatiPath(grid, psi, blowup, residual)


def fixed_point_residual(path: RiccatiPath, kernel, rhs) -> float:
    """Sup-norm of psi - F(psi)*K on the grid, by midpoint product quadrature.

    The check integrates the midpoint interpolant of F(psi) against the exact
    cell integrals of K, a rule independent of the solver's trapezoidal
    corrector weights.  Matrix paths compare against the symmetrized
    convolution, which is the fixed point the solver targets (exact no-op for
    equal component kernels).
    """
    if path.blowup is not None:
        raise ValueError("residual undefined for a blown-up path")
    grid = path.grid
    vals = path.values
    d = vals.shape[1]
    kernels = _as_kernel_list(kernel, d)
    cell = np.stack([kernel_weights(k, grid).cell for k in kernels], axis=1)
    fvals = np.array([rhs(v) for v in vals])
    mid = 0.5 * (fvals[:-1] + fvals[1:])
    worst = 0.0
    for n in range(1, grid.n_steps + 1):
        w = cell[n - 1 :: -1]
        if vals.ndim == 2:
            approx = np.einsum("jd,jd->d", w, mid[:n])
        else:
            approx = np.einsum("ji,jli->li", w, mid[:n])
            approx = 0.5 * (approx + approx.T)
        worst = max(worst, float(np.max(np.abs(vals[n] - approx))))
    return worst


@dataclass(frozen=True)
class GlobalExistenceVerdict:
    """Componentwise global-existence check for diagonal volatility drift.

    ``applicable`` is False when the drift matrix is not diagonal, in which
    case the criterion says nothing (distinct from a False verdict).
    """

    applicable: bool
    per_component: np.ndarray | None

    @property
    def all_ok(self) -> bool:
        return bool(self.applicable and self.per_component is not None and self.per_component.all())


def global_existence_diagonal(model) -> GlobalExistenceVerdict:
    """Sufficient conditions for a global solution, per component i:

        delta_i + g/(1-g) nu_i rho_i theta_i < 0, and
        (delta_i + g/(1-g) nu_i rho_i theta_i)^2
            - g/(1-g) (1-g+g rho_i^2)/(1-g) nu_i^2 theta_i^2 > 0.
    """
    D = np.asarray(model.drift, dtype=float)
    if not np.allclose(D, np.diag(np.diag(D)), atol=0.0, rtol=0.0):
        return GlobalExistenceVerdict(applicable=False, per_component=None)
    gamma = model.gamma
    g = gamma / (1.0 - gamma)
    delta = np.diag(D)
    nu = np.asarray(model.nu, dtype=float)
    rho = np.asarray(model.rho, dtype=float)
    theta = np.asarray(model.theta, dtype=float)
    lam = delta + g * nu * rho * theta
    disc = lam**2 - g * ((1.0 - gamma + gamma * rho**2) / (1.0 - gamma)) * nu**2 * theta**2
    return GlobalExistenceVerdict(applicable=True, per_component=(lam < 0.0) & (disc > 0.0))
