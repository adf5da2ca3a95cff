"""Second-fundamental-form machinery on a solved cylinder grid.

From a converged conformal factor the traceless shape operator B, the
principal curvature field lambda = sqrt(-det B), and the two pullback
metrics h_{l,r} = I((E +- JB) ., (E +- JB) .) are assembled node-wise.
Row integrals of h recover the boundary lengths of the peripheral curves;
finite-difference Gaussian curvature closes the loop against the algebraic
curvature -1 - det B.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qdiff
from .errors import DegenerateError, SingularFlowError
from .vortex import CylinderGrid, GridSolution

#: Complex structure of the cylinder in the (d_x, d_y) frame, oriented so
#: that the left metric h_l = I((E + JB) ., .) carries the boundary length
#: 4*pi*sqrt(|R| + Im R).
J = np.array([[0.0, 1.0], [-1.0, 0.0]])

DEGENERATE_TOL = 1e-8


@dataclass
class SurfaceData:
    """Induced-metric coefficient and shape operator fields on the grid.

    ``i_coef`` is the coefficient of I = 2 e^{2 phi} |dw|^2; ``b`` holds the
    2x2 traceless shape operator at each node, shape (ny, nx, 2, 2).
    """

    i_coef: np.ndarray
    b: np.ndarray
    grid: CylinderGrid

    def det_b(self) -> np.ndarray:
        return (
            self.b[..., 0, 0] * self.b[..., 1, 1]
            - self.b[..., 0, 1] * self.b[..., 1, 0]
        )


def shape_operator(sol: GridSolution, chart=None) -> SurfaceData:
    """B = I^{-1} Re(2 q) from a converged solution.

    With the differential coefficient f and phi = u + (1/2) log g this is
    e^{-2 phi} [[Re f, -Im f], [-Im f, -Re f]]; traceless by construction.
    """
    chart = chart if chart is not None else sol.chart
    grid = sol.grid
    f = np.asarray(qdiff.q_at(chart, grid.mesh_w()), dtype=complex)
    e2phi = np.exp(2.0 * sol.phi())
    b = np.empty((grid.ny, grid.nx, 2, 2))
    b[..., 0, 0] = f.real / e2phi
    b[..., 0, 1] = -f.imag / e2phi
    b[..., 1, 0] = -f.imag / e2phi
    b[..., 1, 1] = -f.real / e2phi
    return SurfaceData(2.0 * e2phi, b, grid)


def principal_curvature(data: SurfaceData):
    """lambda = sqrt(-det B) per node, its interior maximum, and the margin 1 - max."""
    lam = np.sqrt(np.maximum(-data.det_b(), 0.0))
    lam_max = float(np.max(lam[1:-1, :]))
    return lam, lam_max, 1.0 - lam_max


@dataclass
class MetricField:
    """Symmetric 2x2 metric per node: components (xx, xy, yy) on the grid."""

    g_xx: np.ndarray
    g_xy: np.ndarray
    g_yy: np.ndarray
    grid: CylinderGrid

    def det(self) -> np.ndarray:
        return self.g_xx * self.g_yy - self.g_xy**2


def induced_metric(data: SurfaceData, side: str) -> tuple[MetricField, np.ndarray]:
    """Pullback metric h = I((E + s JB) ., (E + s JB) .), s = +1 left / -1 right.

    Returns the metric field together with the mask of nodes where
    det(E + s JB) = 1 - lambda^2 degenerates (the lambda = 1 locus, where
    the metric is positive semidefinite only).
    """
    sign = {"left": 1.0, "right": -1.0}[side]
    m = np.broadcast_to(np.eye(2), data.b.shape).copy()
    m += sign * np.einsum("ab,ijbc->ijac", J, data.b)
    h = data.i_coef[..., None, None] * np.einsum("ijba,ijbc->ijac", m, m)
    det_m = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    degenerate = np.abs(det_m) <= DEGENERATE_TOL
    return (
        MetricField(h[..., 0, 0], h[..., 0, 1], h[..., 1, 1], data.grid),
        degenerate,
    )


def boundary_length(h: MetricField, y: float) -> float:
    """Length of the horizontal loop at height y in the metric h.

    Trapezoid rule over the periodic row (spectrally accurate there);
    y must land on a grid row.
    """
    grid = h.grid
    j = int(round((y - grid.y0) / grid.dy))
    if not (0 <= j < grid.ny) or abs(grid.y0 + j * grid.dy - y) > 1e-9:
        raise ValueError(f"y = {y} is not a grid row")
    row = h.g_xx[j, :]
    if np.any(row < 0):
        raise DegenerateError(f"metric not positive along the row y = {y}")
    return float(np.sum(np.sqrt(row)) * grid.dx)


def _d_dx(field, dx):
    return (np.roll(field, -1, axis=1) - np.roll(field, 1, axis=1)) / (2.0 * dx)


def _d_dy(field, dy):
    out = np.full_like(field, np.nan)
    out[1:-1, :] = (field[2:, :] - field[:-2, :]) / (2.0 * dy)
    return out


def discrete_curvature(h: MetricField) -> np.ndarray:
    """Gaussian curvature of a metric field by the Brioschi formula.

    Second-order differences, periodic in x; the two y-boundary rows (and
    one further ring for the nested derivative) are NaN.  Nodes where the
    determinant is not positive are NaN as well.
    """
    grid = h.grid
    dx, dy = grid.dx, grid.dy
    e, f, g = h.g_xx, h.g_xy, h.g_yy
    det = h.det()

    e_x, e_y = _d_dx(e, dx), _d_dy(e, dy)
    f_x, f_y = _d_dx(f, dx), _d_dy(f, dy)
    g_x, g_y = _d_dx(g, dx), _d_dy(g, dy)
    e_yy = _d_dy(e_y, dy)
    g_xx = _d_dx(_d_dx(g, dx), dx)
    f_xy = _d_dy(f_x, dy)

    m1 = np.empty(e.shape + (3, 3))
    m1[..., 0, 0] = -0.5 * e_yy + f_xy - 0.5 * g_xx
    m1[..., 0, 1] = 0.5 * e_x
    m1[..., 0, 2] = f_x - 0.5 * e_y
    m1[..., 1, 0] = f_y - 0.5 * g_x
    m1[..., 1, 1] = e
    m1[..., 1, 2] = f
    m1[..., 2, 0] = 0.5 * g_y
    m1[..., 2, 1] = f
    m1[..., 2, 2] = g

    m2 = np.empty_like(m1)
    m2[..., 0, 0] = 0.0
    m2[..., 0, 1] = 0.5 * e_y
    m2[..., 0, 2] = 0.5 * g_x
    m2[..., 1, 0] = 0.5 * e_y
    m2[..., 1, 1] = e
    m2[..., 1, 2] = f
    m2[..., 2, 0] = 0.5 * g_x
    m2[..., 2, 1] = f
    m2[..., 2, 2] = g

    with np.errstate(invalid="ignore", divide="ignore"):
        k = (np.linalg.det(m1) - np.linalg.det(m2)) / det**2
        k = np.where(det > DEGENERATE_TOL, k, np.nan)
    return k


def conformal_metric_field(coef: np.ndarray, grid: CylinderGrid) -> MetricField:
    """Metric coef * (dx^2 + dy^2) as a MetricField."""
    coef = np.broadcast_to(np.asarray(coef, dtype=float), (grid.ny, grid.nx)).copy()
    return MetricField(coef, np.zeros_like(coef), coef.copy(), grid)


def gauss_equation_defect(sol: GridSolution, chart=None) -> float:
    """Sup-norm of K(I) - (-1 - det B) over the valid interior nodes.

    The curvature of the induced metric comes from finite differences, the
    right side from the algebraic shape-operator data; the two routes agree
    up to the discretization error of the stencils.
    """
    data = shape_operator(sol, chart)
    k = discrete_curvature(conformal_metric_field(data.i_coef, data.grid))
    target = -1.0 - data.det_b()
    diff = np.abs(k - target)
    return float(np.nanmax(diff))


def normal_flow_shape(b, r: float) -> np.ndarray:
    """Shape operator after flowing distance r along the normal.

    B_r = (cos r E + sin r B)^{-1} (-sin r E + cos r B); the inversion
    fails where cos r E + sin r B is singular.
    """
    b = np.asarray(b, dtype=float)
    c, s = math.cos(r), math.sin(r)
    m = c * np.eye(2) + s * b
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(det) < 1e-12:
        raise SingularFlowError(f"normal flow singular at r = {r}")
    inv = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det
    return inv @ (-s * np.eye(2) + c * b)
