"""Finite-difference solver for the vortex (Gauss) equation on the cylinder.

The conformal factor u of the induced metric I = 2 e^{2u} g satisfies

    (1/2) Lap_g u = e^{2u} - e^{-2u} |q|_g^2 + (1/2) K_g

with Lap_g = (1/g)(d_xx + d_yy), periodic in x and Dirichlet in y.  The
residual F(u) is monotone decreasing in u, so damped Newton from u = 0
converges and the solution is sandwiched between explicit sub/super
solutions of the form +-beta exp(-2 alpha y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import qdiff
from .errors import IllPosedError, NoBarrierFoundError, NoConvergenceError
from .qdiff import ChartMode, EndChart

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 50

ALPHA_SCAN = tuple(0.05 * k for k in range(1, 11))   # 0.05 .. 0.5
BETA_SCAN = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)


@dataclass(frozen=True)
class CylinderGrid:
    """Uniform grid on [0, 2*pi) x [y0, ymax], periodic in x."""

    nx: int
    ny: int
    y0: float
    ymax: float

    def __post_init__(self):
        if self.nx < 8 or self.nx % 2:
            raise ValueError("nx must be even and >= 8")
        if self.ny < 8:
            raise ValueError("ny must be >= 8")

    @property
    def dx(self) -> float:
        return 2.0 * math.pi / self.nx

    @property
    def dy(self) -> float:
        return (self.ymax - self.y0) / (self.ny - 1)

    @property
    def x(self) -> np.ndarray:
        return self.dx * np.arange(self.nx)

    @property
    def y(self) -> np.ndarray:
        return self.y0 + self.dy * np.arange(self.ny)

    def mesh_w(self) -> np.ndarray:
        """Complex coordinates w = x + i*y at the nodes, shape (ny, nx)."""
        return self.x[None, :] + 1j * self.y[:, None]

    @classmethod
    def for_chart(cls, chart: EndChart, nx: int = 64, ny: int = 129) -> "CylinderGrid":
        return cls(nx, ny, chart.y0, chart.ymax)


def _coefficients(chart: EndChart, grid: CylinderGrid):
    """Per-node |q|_g^2 and per-row (g, K_g); failures become IllPosed."""
    try:
        qn2 = np.asarray(qdiff.q_norm_sq(chart, grid.mesh_w()), dtype=float)
        g, kg = qdiff.background_at(chart, grid.y)
    except Exception as exc:  # noqa: BLE001 - re-raise with solver context
        raise IllPosedError(f"coefficient evaluation failed: {exc}") from exc
    if not (np.all(np.isfinite(qn2)) and np.all(g > 0)):
        raise IllPosedError("coefficients not finite and positive")
    return qn2, g, kg


def pde_residual(u, chart: EndChart, grid: CylinderGrid) -> np.ndarray:
    """F(u) = (1/2) Lap_g u - e^{2u} + e^{-2u} |q|_g^2 - (1/2) K_g.

    Second-order central differences, periodic in x; the y-boundary rows
    carry no Laplacian and report the zeroth-order terms only.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.ny, grid.nx):
        raise ValueError(f"field shape {u.shape} != grid {(grid.ny, grid.nx)}")
    qn2, g, kg = _coefficients(chart, grid)
    res = -np.exp(2.0 * u) + np.exp(-2.0 * u) * qn2 - 0.5 * kg[:, None]
    lap = np.zeros_like(u)
    lap[1:-1, :] += (u[2:, :] - 2.0 * u[1:-1, :] + u[:-2, :]) / grid.dy**2
    lap[1:-1, :] += (
        np.roll(u, -1, axis=1)[1:-1, :]
        - 2.0 * u[1:-1, :]
        + np.roll(u, 1, axis=1)[1:-1, :]
    ) / grid.dx**2
    res[1:-1, :] += 0.5 * lap[1:-1, :] / g[1:-1, None]
    return res


def _laplacian_matrix(grid: CylinderGrid, g: np.ndarray):
    """Sparse (1/2) Lap_g on interior nodes, Dirichlet rows eliminated."""
    nx, ny = grid.nx, grid.ny
    ni = ny - 2
    n = ni * nx
    idx = np.arange(n)
    iy = idx // nx
    ix = idx % nx
    cx = 0.5 / (g[iy + 1] * grid.dx**2)
    cy = 0.5 / (g[iy + 1] * grid.dy**2)
    rows, cols, vals = [idx], [idx], [-2.0 * (cx + cy)]
    # periodic x neighbours
    for shift in (1, -1):
        rows.append(idx)
        cols.append(iy * nx + (ix + shift) % nx)
        vals.append(cx)
    # y neighbours, dropping links into the Dirichlet rows
    for shift in (1, -1):
        keep = (iy + shift >= 0) & (iy + shift < ni)
        rows.append(idx[keep])
        cols.append((iy[keep] + shift) * nx + ix[keep])
        vals.append(cy[keep])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


@dataclass(frozen=True)
class BoundarySpec:
    """Dirichlet data on the y = y0 and y = ymax rows.

    ``None`` selects the defaults: zero on the outer row, the barrier
    midpoint on the inner row (zero for cusp ends, where the barriers are
    the constant pair).
    """

    inner: float | np.ndarray | None = None
    outer: float | np.ndarray | None = 0.0

    def rows(self, chart: EndChart, grid: CylinderGrid):
        inner = self.inner
        if inner is None:
            if chart.mode is ChartMode.FLAT:
                pair = make_barriers(chart, grid)
                inner = 0.5 * (pair.u_plus[0, :] + pair.u_minus[0, :])
            else:
                inner = 0.0
        outer = 0.0 if self.outer is None else self.outer
        return (
            np.broadcast_to(np.asarray(inner, dtype=float), (grid.nx,)).copy(),
            np.broadcast_to(np.asarray(outer, dtype=float), (grid.nx,)).copy(),
        )


@dataclass
class GridSolution:
    """Converged conformal factor u with solver metadata."""

    u: np.ndarray
    residual_norm: float
    newton_iters: int
    chart: EndChart
    grid: CylinderGrid

    def phi(self) -> np.ndarray:
        """phi = u + (1/2) log g, the conformal factor of I = 2 e^{2 phi} |dw|^2."""
        g, _ = qdiff.background_at(self.chart, self.grid.y)
        return self.u + 0.5 * np.log(g)[:, None]


def solve_vortex(
    chart: EndChart,
    grid: CylinderGrid,
    bc: BoundarySpec | None = None,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
    initial=None,
) -> GridSolution:
    """Damped Newton iteration for the vortex equation.

    The Jacobian of the residual is the (1/2) Lap_g stencil plus the
    strictly negative diagonal -2 e^{2u} - 2 e^{-2u} |q|_g^2, so each
    linearization is invertible; steps are halved while the sup-norm
    residual fails to decrease.
    """
    qn2, g, _ = _coefficients(chart, grid)
    inner_row, outer_row = (bc or BoundarySpec()).rows(chart, grid)
    u = np.zeros((grid.ny, grid.nx)) if initial is None else np.array(initial, dtype=float)
    u[0, :] = inner_row
    u[-1, :] = outer_row
    lap = _laplacian_matrix(grid, g)
    cy = 0.5 / (g * grid.dy**2)

    def interior_residual(field):
        return pde_residual(field, chart, grid)[1:-1, :].ravel()

    res = interior_residual(u)
    res_norm = float(np.max(np.abs(res)))
    iters = 0
    while res_norm > tol and iters < max_iters:
        ui = u[1:-1, :]
        diag = (-2.0 * np.exp(2.0 * ui) - 2.0 * np.exp(-2.0 * ui) * qn2[1:-1, :]).ravel()
        jac = lap + sp.diags(diag)
        delta = splu(jac.tocsc()).solve(-res)
        step = 1.0
        for _ in range(12):
            trial = u.copy()
            trial[1:-1, :] += step * delta.reshape(grid.ny - 2, grid.nx)
            trial_res = interior_residual(trial)
            trial_norm = float(np.max(np.abs(trial_res)))
            if trial_norm < res_norm or trial_norm <= tol:
                break
            step *= 0.5
        u, res, res_norm = trial, trial_res, trial_norm
        iters += 1
    if res_norm > tol:
        raise NoConvergenceError(
            f"Newton stalled at residual {res_norm:.3e} after {iters} iterations",
            residual=res_norm,
            iterations=iters,
        )
    return GridSolution(u, res_norm, iters, chart, grid)


@dataclass(frozen=True)
class BarrierPair:
    """Super/sub solution pair u+ = beta exp(-2 alpha y), u- = -u+ capped at -B."""

    u_minus: np.ndarray
    u_plus: np.ndarray
    alpha: float
    beta: float
    B: float


def _barrier_fields(grid: CylinderGrid, alpha: float, beta: float, cap: float):
    profile = beta * np.exp(-2.0 * alpha * grid.y)[:, None]
    u_plus = np.broadcast_to(profile, (grid.ny, grid.nx)).copy()
    u_minus = np.maximum(-u_plus, -cap)
    return u_minus, u_plus


def check_barrier(pair: BarrierPair, chart: EndChart, grid: CylinderGrid) -> bool:
    """Discrete barrier inequalities at every interior node.

    The supersolution must have non-positive residual, the subsolution
    non-negative residual, and the pair must be ordered.
    """
    if np.any(pair.u_minus > pair.u_plus):
        return False
    res_plus = pde_residual(pair.u_plus, chart, grid)[1:-1, :]
    res_minus = pde_residual(pair.u_minus, chart, grid)[1:-1, :]
    return bool(np.all(res_plus <= 1e-12) and np.all(res_minus >= -1e-12))


def make_barriers(chart: EndChart, grid: CylinderGrid) -> BarrierPair:
    """Scan the (alpha, beta) lattice until the discrete inequalities hold.

    Exponential barriers of this shape exist only for flat ends; cusp ends
    use the constant pair instead (handled by the caller).
    """
    if chart.mode is not ChartMode.FLAT:
        raise NoBarrierFoundError(
            "exponential barriers require a non-vanishing residue; "
            "cusp ends use constant barriers"
        )
    for beta in BETA_SCAN:
        for alpha in ALPHA_SCAN:
            cap = beta * math.exp(-2.0 * alpha * grid.y0)
            u_minus, u_plus = _barrier_fields(grid, alpha, beta, cap)
            pair = BarrierPair(u_minus, u_plus, alpha, beta, cap)
            if check_barrier(pair, chart, grid):
                return pair
    raise NoBarrierFoundError(
        f"barrier scan exhausted for residue {chart.residue} on {grid}"
    )
