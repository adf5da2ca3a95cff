"""Frame-field transport along paths in the cylinder.

The moving frame F = (v1, v2, N, sigma) of a maximal embedding satisfies
the linear system dF = F (U dw + V d(conj w)) with connection matrices
built from the conformal factor phi and the differential coefficient q.
Integrating along rays produces the embedding (last column of F);
integrating along horizontal loops produces the peripheral holonomy, whose
eigenvalue moduli are the classification data.

The flow preserves the hermitian (2,2) Gram matrix of the frame; the
integrator does not enforce this, conservation is monitored through
``unitarity_defect`` and the quadric residual of the embedding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import RectBivariateSpline

from . import qdiff
from .adscore import GRAM, SpacetimePoint, minkowski_inner
from .errors import NotRealError, OutOfChartError, StepTooLargeError
from .horo import A0
from .vortex import GridSolution

TRUNCATION_LIMIT = 1e-3   # per-step local truncation guard
REAL_COLUMN_TOL = 1e-6    # largest tolerated imaginary part of sigma


class ConformalField:
    """Evaluates phi, its w-derivative, and q anywhere in the chart.

    Grid-backed fields take phi = u + (1/2) log g on the solver grid;
    derivatives come from central differences of the grid (periodic in x,
    one-sided second order at the y-edges) and everything off-grid is read
    through bicubic splines in a periodic x-margin.  Constant fields
    bypass interpolation and have exact derivatives zero.
    """

    def __init__(self, phi_fn, phi_w_fn, q_fn, y_range=None, grid=None, chart=None):
        self._phi = phi_fn
        self._phi_w = phi_w_fn
        self._q = q_fn
        self.y_range = y_range
        self.grid = grid
        self.chart = chart

    @classmethod
    def constant(cls, phi0: float = 0.0, q0: complex = 1.0) -> "ConformalField":
        phi0 = float(phi0)
        q0 = complex(q0)

        def phi(w):
            return np.broadcast_to(phi0, np.shape(w)).copy()

        def phi_w(w):
            return np.zeros(np.shape(w), dtype=complex)

        def q(w):
            return np.broadcast_to(q0, np.shape(w)).copy().astype(complex)

        return cls(phi, phi_w, q)

    @classmethod
    def from_solution(cls, sol: GridSolution) -> "ConformalField":
        grid = sol.grid
        chart = sol.chart
        phi = sol.phi()
        dx, dy = grid.dx, grid.dy
        phi_x = (np.roll(phi, -1, axis=1) - np.roll(phi, 1, axis=1)) / (2.0 * dx)
        phi_y = np.empty_like(phi)
        phi_y[1:-1, :] = (phi[2:, :] - phi[:-2, :]) / (2.0 * dy)
        phi_y[0, :] = (-3.0 * phi[0, :] + 4.0 * phi[1, :] - phi[2, :]) / (2.0 * dy)
        phi_y[-1, :] = (3.0 * phi[-1, :] - 4.0 * phi[-2, :] + phi[-3, :]) / (2.0 * dy)

        pad = 3
        x_ext = dx * np.arange(-pad, grid.nx + pad)

        def wrap(field):
            return np.concatenate(
                [field[:, -pad:], field, field[:, :pad]], axis=1
            )

        splines = [
            RectBivariateSpline(grid.y, x_ext, wrap(f), kx=3, ky=3)
            for f in (phi, phi_x, phi_y)
        ]

        def ev(spline, w):
            w = np.asarray(w, dtype=complex)
            x = np.mod(w.real, 2.0 * math.pi)
            return spline.ev(w.imag, x).reshape(np.shape(w))

        return cls(
            phi_fn=lambda w: ev(splines[0], w),
            phi_w_fn=lambda w: 0.5 * (ev(splines[1], w) - 1j * ev(splines[2], w)),
            q_fn=lambda w: np.asarray(qdiff.q_at(chart, w), dtype=complex),
            y_range=(grid.y0, grid.ymax),
            grid=grid,
            chart=chart,
        )

    def check_w(self, w):
        if self.y_range is None:
            return
        y = np.asarray(w).imag
        lo, hi = self.y_range
        if np.any(y < lo - 1e-9) or np.any(y > hi + 1e-9):
            raise OutOfChartError(f"path leaves the chart range y in [{lo}, {hi}]")

    def phi(self, w):
        return self._phi(w)

    def phi_w(self, w):
        return self._phi_w(w)

    def q(self, w):
        return self._q(w)


def connection_matrices(w, field: ConformalField):
    """Connection pair (U, V) at w: dF = F (U dw + V d(conj w))."""
    field.check_w(w)
    u, v = _uv_batch(np.asarray([w], dtype=complex), field)
    return u[0], v[0]


def _uv_batch(ws: np.ndarray, field: ConformalField):
    """Vectorized U, V over a flat array of points, shapes (n, 4, 4)."""
    phi = np.asarray(field.phi(ws), dtype=float)
    phi_w = np.asarray(field.phi_w(ws), dtype=complex)
    q = np.asarray(field.q(ws), dtype=complex)
    ep = np.exp(phi)
    em = np.exp(-phi)
    n = ws.shape[0]
    u = np.zeros((n, 4, 4), dtype=complex)
    v = np.zeros((n, 4, 4), dtype=complex)
    u[:, 0, 0] = phi_w
    u[:, 1, 1] = -phi_w
    u[:, 0, 3] = ep
    u[:, 1, 2] = q * em
    u[:, 2, 0] = q * em
    u[:, 3, 1] = ep
    phi_wb = np.conj(phi_w)
    qb = np.conj(q)
    v[:, 0, 0] = -phi_wb
    v[:, 1, 1] = phi_wb
    v[:, 0, 2] = qb * em
    v[:, 1, 3] = ep
    v[:, 2, 1] = qb * em
    v[:, 3, 0] = ep
    return u, v


@dataclass
class FrameState:
    """Frame matrix with its basepoint in the w-plane."""

    F: np.ndarray
    basepoint: complex

    @classmethod
    def initial(cls, basepoint: complex = 0j, b0: np.ndarray | None = None) -> "FrameState":
        """Default start frame: the standard base frame, optionally moved
        by a global isometry b0 (which only relocates the surface)."""
        f = A0.copy() if b0 is None else np.asarray(b0, dtype=complex) @ A0
        return cls(f, complex(basepoint))


def _rk4_steps(ws_half: np.ndarray, wdot: complex, dt: float, field: ConformalField):
    """Transfer matrices P_i with F_{i+1} = F_i P_i for one polyline leg.

    ``ws_half`` holds the 2n+1 sample points (nodes and midpoints).  The
    right-multiplicative structure of the ODE lets the classical RK4 stage
    combination be assembled per step with batched matrix products.
    """
    u, v = _uv_batch(ws_half, field)
    c = u * wdot + v * np.conj(wdot)
    scale = float(np.max(np.sum(np.abs(c), axis=2)))
    if (dt * scale) ** 5 / 120.0 > TRUNCATION_LIMIT:
        raise StepTooLargeError(
            f"local truncation estimate {(dt * scale) ** 5 / 120.0:.2e} "
            f"exceeds {TRUNCATION_LIMIT:.0e}; reduce the step"
        )
    c0 = c[0:-1:2]
    cm = c[1::2]
    c1 = c[2::2]
    eye = np.eye(4, dtype=complex)
    k2 = cm + 0.5 * dt * (c0 @ cm)
    k3 = cm + 0.5 * dt * (k2 @ cm)
    k4 = c1 + dt * (k3 @ c1)
    return eye + (dt / 6.0) * (c0 + 2.0 * k2 + 2.0 * k3 + k4)


def _leg_samples(w_from: complex, w_to: complex, h: float):
    length = abs(w_to - w_from)
    n = max(1, int(math.ceil(length / h)))
    dt = length / n
    wdot = (w_to - w_from) / length
    ts = np.linspace(0.0, length, 2 * n + 1)
    return w_from + wdot * ts, wdot, dt


def integrate_ray(
    start: FrameState,
    path: Sequence[complex],
    field: ConformalField,
    h: float,
    collect: int = 0,
) -> FrameState | tuple[FrameState, list]:
    """Classical RK4 for dF = F (U dw + V d(conj w)) along a polyline.

    ``path`` lists waypoints after the basepoint; an empty path returns the
    start unchanged.  With ``collect`` = k > 0, every k-th intermediate
    frame is also returned as (w, F) pairs.
    """
    if field.grid is not None:
        h = min(h, field.grid.dx, field.grid.dy)
    f = np.array(start.F, dtype=complex)
    w = complex(start.basepoint)
    samples = []
    for target in path:
        target = complex(target)
        if target == w:
            continue
        ws, wdot, dt = _leg_samples(w, target, h)
        field.check_w(ws)
        steps = _rk4_steps(ws, wdot, dt, field)
        for i in range(steps.shape[0]):
            f = f @ steps[i]
            if collect and (i + 1) % collect == 0:
                samples.append((ws[2 * (i + 1)], f.copy()))
        w = target
    state = FrameState(f, w)
    return (state, samples) if collect else state


def holonomy_loop(field: ConformalField, y: float, h: float | None = None) -> np.ndarray:
    """Transport matrix around the horizontal loop at height y.

    Solves dPhi/dx = Phi A(x) with A = U + V along x in [0, 2*pi] from the
    identity; the result is conjugate to the peripheral holonomy.
    """
    if h is None:
        h = (
            0.5 * min(field.grid.dx, field.grid.dy)
            if field.grid is not None
            else 2.0 * math.pi / 1024
        )
    ws, wdot, dt = _leg_samples(1j * y, 2.0 * math.pi + 1j * y, h)
    field.check_w(ws)
    steps = _rk4_steps(ws, wdot, dt, field)
    phi_mat = np.eye(4, dtype=complex)
    for i in range(steps.shape[0]):
        phi_mat = phi_mat @ steps[i]
    return phi_mat


def eigenvalue_log_moduli(m: np.ndarray) -> np.ndarray:
    """Log-moduli of the eigenvalues, descending, via the (2,2) pairing.

    A transport matrix H preserves the hermitian (2,2) form, so its
    spectrum is closed under mu -> 1/conj(mu) and the log-moduli split
    into +-pairs.  Computing the small pair directly is hopeless once
    |H| ~ 1/eps; instead both ends are read off as the dominant pair of H
    and of G H* G = H^{-1}.
    """
    m = np.asarray(m, dtype=complex)
    top = np.sort(np.log(np.abs(np.linalg.eigvals(m))))[::-1]
    inv = GRAM @ m.conj().T @ GRAM
    bottom = np.sort(np.log(np.abs(np.linalg.eigvals(inv))))[::-1]
    return np.array([top[0], top[1], -bottom[1], -bottom[0]])


def embedding_point(state: FrameState) -> SpacetimePoint:
    """Surface point carried by the frame: real part of the last column,
    renormalized onto the quadric."""
    col = state.F[:, 3]
    scale = float(np.max(np.abs(col)))
    if scale == 0.0:
        raise NotRealError("frame column vanished")
    if float(np.max(np.abs(col.imag))) > REAL_COLUMN_TOL * scale:
        raise NotRealError(
            f"sigma column has imaginary part {np.max(np.abs(col.imag)):.2e} "
            f"relative to scale {scale:.2e}"
        )
    vec = col.real
    norm = minkowski_inner(vec, vec)
    if norm >= 0:
        raise NotRealError("sigma column left the timelike cone")
    vec = vec / math.sqrt(-norm)
    return SpacetimePoint(*(float(c) for c in vec))


def unitarity_defect(f) -> float:
    """Sup-norm of F* G F - G, the conserved Gram matrix of the frame."""
    f = np.asarray(f.F if isinstance(f, FrameState) else f, dtype=complex)
    return float(np.max(np.abs(f.conj().T @ GRAM @ f - GRAM)))


def quadric_residual(state: FrameState | np.ndarray, relative: bool = True) -> float:
    """Deviation |<sigma, sigma> + 1| of the carried surface point.

    With ``relative`` the defect is scaled by the squared euclidean norm of
    sigma: far along a ray the coordinates grow like exp(mu r) and the
    bilinear form is a difference of comparably huge terms, so the absolute
    defect bottoms out at eps * |sigma|^2 no matter how the point was
    produced.  The relative form stays meaningful at every scale and
    coincides with the absolute one while |sigma| ~ 1.
    """
    col = state.F[:, 3] if isinstance(state, FrameState) else np.asarray(state)
    vec = col.real if np.iscomplexobj(col) else col
    defect = abs(minkowski_inner(vec, vec) + 1.0)
    if relative:
        defect /= max(1.0, float(np.dot(vec, vec)))
    return defect


def boundary_direction(state: FrameState):
    """Projective limit direction of the surface point carried by a frame.

    Far along a ray the embedding coordinates blow up while the direction
    converges to a null vector; normalizing by the largest coordinate is
    the overflow-safe way to read it off.
    """
    vec = state.F[:, 3].real
    peak = float(np.max(np.abs(vec)))
    if peak == 0.0:
        raise NotRealError("frame column vanished")
    return vec / peak


def ray_fan(
    field: ConformalField,
    directions: Sequence[float],
    base: complex | None = None,
    h: float | None = None,
    margin: float = 0.0,
):
    """Integrate rays from a basepoint out to the top of the chart.

    ``directions`` are angles iota in (0, pi) in the w-plane; each ray runs
    from the base (default: bottom of the chart on the x = 0 line) until
    y = ymax - margin.  Returns [(iota, FrameState)] in direction order;
    independent rays, callers may fan out over threads.
    """
    if field.y_range is None:
        raise ValueError("ray fan needs a chart-backed field")
    lo, hi = field.y_range
    base = complex(0.0, lo) if base is None else complex(base)
    if h is None:
        h = 0.5 * min(field.grid.dx, field.grid.dy) if field.grid is not None else 0.02
    out = []
    for iota in directions:
        if not (0.0 < iota < math.pi):
            raise ValueError("ray directions must lie in (0, pi)")
        reach = (hi - margin - base.imag) / math.sin(iota)
        target = base + reach * complex(math.cos(iota), math.sin(iota))
        out.append((float(iota), integrate_ray(FrameState.initial(base), [target], field, h=h)))
    return out


def flatness_defect(field: ConformalField, grid=None) -> float:
    """Sup-norm of (1/2) Lap phi - e^{2 phi} + e^{-2 phi} |q|^2 on the grid.

    Zero exactly when phi solves the flatness equation of the frame
    system; for grid-backed fields the flat Laplacian is the same
    five-point stencil used by the solver.  Constant fields have zero
    Laplacian and reduce to the pointwise formula.
    """
    grid = grid if grid is not None else (field.grid)
    if grid is None:
        phi0 = float(np.asarray(field.phi(0j)))
        q0 = complex(np.asarray(field.q(0j), dtype=complex))
        return abs(-math.exp(2 * phi0) + math.exp(-2 * phi0) * abs(q0) ** 2)
    w = grid.mesh_w()
    phi = np.asarray(field.phi(w), dtype=float)
    q = np.asarray(field.q(w), dtype=complex)
    lap = (
        np.roll(phi, -1, axis=1) - 2.0 * phi + np.roll(phi, 1, axis=1)
    ) / grid.dx**2
    lap[1:-1, :] += (phi[2:, :] - 2.0 * phi[1:-1, :] + phi[:-2, :]) / grid.dy**2
    res = 0.5 * lap - np.exp(2.0 * phi) + np.exp(-2.0 * phi) * np.abs(q) ** 2
    return float(np.max(np.abs(res[1:-1, :])))
