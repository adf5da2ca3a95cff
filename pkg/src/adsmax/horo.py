"""Closed-form reference surface for constant unit differential data.

With phi = 0 and q = d(omega)^2 the frame field integrates explicitly to
F0(omega) = A0 exp(U0 omega + V0 conj(omega)); the embedding is the last
column.  The constant matrix U0 omega + V0 conj(omega) is diagonalized by
one unitary S with eigenvalues (2 Re, 2 Im, -2 Re, -2 Im)(omega), which
turns F0 into a product of constant matrices and diagonal exponentials and
makes the surface cheap to evaluate far out.  Projective limits along rays
form a light-like quadrilateral on the boundary torus.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .adscore import NullDirection, SpacetimePoint
from .errors import HyperbolicOverflowError

#: Hyperbolic arguments beyond this overflow float64 (sinh(2*350) < inf).
OVERFLOW_LIMIT = 350.0

U0 = np.array(
    [[0, 0, 0, 1],
     [0, 0, 1, 0],
     [1, 0, 0, 0],
     [0, 1, 0, 0]], dtype=complex)

V0 = np.array(
    [[0, 0, 1, 0],
     [0, 0, 0, 1],
     [0, 1, 0, 0],
     [1, 0, 0, 0]], dtype=complex)

A0 = np.array(
    [[1, 1, 0, 0],
     [-1j, 1j, 0, 0],
     [0, 0, 1, 1],
     [0, 0, -1, 1]], dtype=complex) / math.sqrt(2.0)

A0_INV = np.array(
    [[1, 1j, 0, 0],
     [1, -1j, 0, 0],
     [0, 0, 1, -1],
     [0, 0, 1, 1]], dtype=complex) / math.sqrt(2.0)


def _check_overflow(omega: complex):
    if abs(omega.real) > OVERFLOW_LIMIT or abs(omega.imag) > OVERFLOW_LIMIT:
        raise HyperbolicOverflowError(f"|Re omega| or |Im omega| > {OVERFLOW_LIMIT}")


@lru_cache(maxsize=1)
def compute_diagonalizer() -> np.ndarray:
    """Unitary S with S^-1 (U0 w + V0 cw) S = diag(2Re w, 2Im w, -2Re w, -2Im w).

    Computed, not transcribed: U0 + V0 and i(U0 - V0) are a commuting
    hermitian pair, so they are diagonalized simultaneously.  The +-2
    eigenspaces of the first are one-dimensional; its kernel splits under
    the second.  Columns are ordered by eigenvalue pattern and the phase is
    fixed by making the first sizable component real positive.
    """
    k1 = (U0 + V0).real
    k2 = (1j * (U0 - V0))
    evals, vecs = np.linalg.eigh(k1)
    columns = {}
    for target in (2.0, -2.0):
        (j,) = np.where(np.abs(evals - target) < 1e-9)[0]
        columns[(target, 0.0)] = vecs[:, j].astype(complex)
    kernel = vecs[:, np.abs(evals) < 1e-9]
    sub = kernel.conj().T @ k2 @ kernel
    sub_evals, sub_vecs = np.linalg.eigh(sub)
    for target in (2.0, -2.0):
        (j,) = np.where(np.abs(sub_evals - target) < 1e-9)[0]
        columns[(0.0, target)] = kernel @ sub_vecs[:, j]
    order = [(2.0, 0.0), (0.0, 2.0), (-2.0, 0.0), (0.0, -2.0)]
    s = np.stack([columns[key] for key in order], axis=1)
    for j in range(4):
        col = s[:, j]
        k = np.argmax(np.abs(col) > 1e-9)
        s[:, j] = col * (abs(col[k]) / col[k])
        s[:, j] /= np.linalg.norm(s[:, j])
    return s


@dataclass(frozen=True)
class HoroConstants:
    A0: np.ndarray
    U0: np.ndarray
    V0: np.ndarray
    S: np.ndarray


def constants() -> HoroConstants:
    return HoroConstants(A0.copy(), U0.copy(), V0.copy(), compute_diagonalizer())


def sigma0(omega: complex) -> SpacetimePoint:
    """Embedding (sinh 2Re, sinh 2Im, cosh 2Re, cosh 2Im)(omega) / sqrt(2)."""
    omega = complex(omega)
    _check_overflow(omega)
    a, b = 2.0 * omega.real, 2.0 * omega.imag
    r = math.sqrt(2.0)
    return SpacetimePoint(
        math.sinh(a) / r, math.sinh(b) / r, math.cosh(a) / r, math.cosh(b) / r
    )


def frame0(omega: complex) -> np.ndarray:
    """Closed-form frame A0 S diag(e^{2Re}, e^{2Im}, e^{-2Re}, e^{-2Im}) S^*."""
    omega = complex(omega)
    _check_overflow(omega)
    s = compute_diagonalizer()
    d = np.exp([2.0 * omega.real, 2.0 * omega.imag, -2.0 * omega.real, -2.0 * omega.imag])
    return (A0 @ s) @ (d[:, None] * s.conj().T)


# Table of projective ray limits: each open quadrant of directions has a
# single null limit vector; the four diagonal directions limit onto whole
# light-like edges parameterized by s > 0.
_SECTOR_VERTICES = (
    np.array([1.0, 0.0, 1.0, 0.0]),    # theta in (-pi/4, pi/4)
    np.array([0.0, 1.0, 0.0, 1.0]),    # theta in (pi/4, 3*pi/4)
    np.array([-1.0, 0.0, 1.0, 0.0]),   # theta in (3*pi/4, 5*pi/4)
    np.array([0.0, -1.0, 0.0, 1.0]),   # theta in (5*pi/4, 7*pi/4)
)

_EDGE_FAMILIES = (
    lambda s: np.array([1.0, s, 1.0, s]),      # theta = pi/4
    lambda s: np.array([-s, 1.0, s, 1.0]),     # theta = 3*pi/4
    lambda s: np.array([-1.0, -s, 1.0, s]),    # theta = 5*pi/4
    lambda s: np.array([s, -1.0, s, 1.0]),     # theta = 7*pi/4
)


@dataclass(frozen=True)
class SawtoothEdge:
    """Light-like boundary edge swept along a diagonal ray direction.

    ``family(s)`` for s > 0 gives the projective vector; the endpoints are
    the vertices of the adjacent sectors.
    """

    theta: float
    family: Callable[[float], np.ndarray]
    start: NullDirection
    end: NullDirection

    def at(self, s: float) -> NullDirection:
        if s <= 0:
            raise ValueError("edge parameter must be positive")
        return NullDirection.from_array(self.family(s))


def sector_vertices() -> tuple[NullDirection, ...]:
    """The four null vertices of the boundary quadrilateral, in theta order."""
    return tuple(NullDirection.from_array(v) for v in _SECTOR_VERTICES)


def ray_limit(theta: float):
    """Projective limit of sigma0 along the ray t -> t e^{i theta}.

    Returns a ``NullDirection`` for generic directions and a
    ``SawtoothEdge`` for the four diagonal directions, where the limit
    sweeps a light-like segment as the ray is offset vertically.
    """
    theta = float(theta) % (2.0 * math.pi)
    quadrant = (theta + math.pi / 4.0) / (math.pi / 2.0)
    k = int(math.floor(quadrant)) % 4
    if abs(quadrant - round(quadrant)) < 1e-12:
        k_edge = (int(round(quadrant)) - 1) % 4
        verts = sector_vertices()
        return SawtoothEdge(
            theta=theta,
            family=_EDGE_FAMILIES[k_edge],
            start=verts[k_edge],
            end=verts[(k_edge + 1) % 4],
        )
    return sector_vertices()[k]


def projective_normalize(vec) -> np.ndarray:
    """Scale a vector by its largest-magnitude coordinate (overflow safe)."""
    vec = np.asarray(vec, dtype=float)
    peak = np.max(np.abs(vec))
    if peak == 0.0:
        raise ValueError("zero vector")
    return vec / peak


def edge_parameter(k_edge: int, y: float, t: float = 40.0) -> float:
    """Sampled edge parameter s(y) along the k-th diagonal ray offset by i*y.

    The projective limit of sigma0(t e^{i theta} + i y) for diagonal theta
    is family(s(y)); no closed form is asserted, the value is sampled at a
    large radius as the ratio of the s-slot to the unit-slot coordinate.
    """
    theta = math.pi / 4.0 + (k_edge % 4) * math.pi / 2.0
    omega = t * cmath.exp(1j * theta) + 1j * y
    vec = projective_normalize(sigma0(omega).as_array())
    s_slot, unit_slot = ((1, 0), (0, 1))[k_edge % 2]
    return float(abs(vec[s_slot]) / abs(vec[unit_slot]))
