"""Linear algebra of the signature-(2,2) form and the boundary torus.

The ambient model is R^4 with the bilinear form

    <x, y> = x0*y0 + x1*y1 - x2*y2 - x3*y3

whose -1 level set is the (double cover of the) anti-de Sitter quadric.
Null directions correspond to points of the boundary torus S^1 x S^1 via
angle coordinates (theta, theta'), and achronality of boundary curves is
the 1-Lipschitz condition between the two angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateError, NotNullError, ZeroVectorError

TWO_PI = 2.0 * math.pi

#: Diagonal of the signature-(2,2) Gram matrix.
SIGNS = np.array([1.0, 1.0, -1.0, -1.0])

#: Gram matrix G = diag(1, 1, -1, -1).
GRAM = np.diag(SIGNS)

QUADRIC_TOL = 1e-9      # absolute, for membership in <x,x> = -1
NULL_RTOL = 1e-9        # relative, for membership in the null cone
ACHRONAL_TOL = 1e-6     # slack in the 1-Lipschitz test


def minkowski_inner(x, y) -> float:
    """Signature-(2,2) bilinear form x0*y0 + x1*y1 - x2*y2 - x3*y3."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(x[0] * y[0] + x[1] * y[1] - x[2] * y[2] - x[3] * y[3])


def hermitian_inner(z, w) -> complex:
    """Hermitian extension <z, w> = z1*cw1 + z2*cw2 - z3*cw3 - z4*cw4.

    The conjugate falls on the second argument; restricted to real vectors
    this is exactly ``minkowski_inner``.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    cw = np.conj(w)
    return complex(z[0] * cw[0] + z[1] * cw[1] - z[2] * cw[2] - z[3] * cw[3])


def quadric_defect(x) -> float:
    """|<x,x> + 1| for a point that should sit on the quadric."""
    return abs(minkowski_inner(x, x) + 1.0)


@dataclass(frozen=True)
class SpacetimePoint:
    """Point of the quadric <x,x> = -1 in R^{2,2}."""

    x0: float
    x1: float
    x2: float
    x3: float

    @classmethod
    def from_array(cls, vec, check: bool = True) -> "SpacetimePoint":
        vec = np.asarray(vec, dtype=float)
        p = cls(*(float(c) for c in vec))
        if check and quadric_defect(vec) > QUADRIC_TOL:
            raise ValueError(
                f"point off the quadric: <x,x>+1 = {minkowski_inner(vec, vec) + 1:.3e}"
            )
        return p

    def as_array(self) -> np.ndarray:
        return np.array([self.x0, self.x1, self.x2, self.x3])


class TorusPoint(NamedTuple):
    """Angles (theta, theta') on the boundary torus, reduced mod 2*pi."""

    theta: float
    theta_prime: float


def _reduce_angle(a: float) -> float:
    a = math.fmod(a, TWO_PI)
    return a + TWO_PI if a < 0.0 else a


def torus_point(theta: float, theta_prime: float) -> TorusPoint:
    return TorusPoint(_reduce_angle(theta), _reduce_angle(theta_prime))


def null_defect(v) -> float:
    """Relative deviation of v from the null cone x0^2+x1^2 = x2^2+x3^2."""
    v = np.asarray(v, dtype=float)
    norm2 = float(np.dot(v, v))
    if norm2 == 0.0:
        raise ZeroVectorError("zero vector has no direction")
    return abs(minkowski_inner(v, v)) / norm2


@dataclass(frozen=True)
class NullDirection:
    """Projective null direction, stored via a sign-normalized representative.

    The representative has x3 >= 0, with ties broken by x2 >= 0 (and then
    x1 >= 0), which makes equality tests deterministic.
    """

    x0: float
    x1: float
    x2: float
    x3: float

    @classmethod
    def from_array(cls, vec) -> "NullDirection":
        vec = np.asarray(vec, dtype=float)
        defect = null_defect(vec)
        if defect > NULL_RTOL:
            raise NotNullError(f"vector not null: relative defect {defect:.3e}")
        vec = vec / np.max(np.abs(vec))
        for k in (3, 2, 1, 0):
            if abs(vec[k]) > 1e-14:
                if vec[k] < 0:
                    vec = -vec
                break
        return cls(*(float(c) for c in vec))

    def as_array(self) -> np.ndarray:
        return np.array([self.x0, self.x1, self.x2, self.x3])


def null_to_torus(v) -> TorusPoint:
    """Map a null direction to its torus coordinates.

    Inverts the boundary extension of the disk-times-circle model: the null
    direction (cos t, sin t, cos t', sin t') maps to (t, t').  Input may be
    any array-like representative; the sign normalization of
    ``NullDirection`` is applied first so that antipodal representatives of
    the same projective point agree.
    """
    if not isinstance(v, NullDirection):
        v = NullDirection.from_array(v)
    theta = math.atan2(v.x1, v.x0)
    theta_prime = math.atan2(v.x3, v.x2)
    return torus_point(theta, theta_prime)


def torus_to_null(p: TorusPoint) -> NullDirection:
    """Section of ``null_to_torus``: (t, t') -> (cos t, sin t, cos t', sin t')."""
    return NullDirection.from_array(
        [math.cos(p[0]), math.sin(p[0]), math.cos(p[1]), math.sin(p[1])]
    )


def circle_distance(a: float, b: float) -> float:
    """Shortest-arc distance on S^1 = R / 2*pi*Z."""
    d = math.fmod(abs(a - b), TWO_PI)
    return min(d, TWO_PI - d)


class AchronalReport(NamedTuple):
    achronal: bool
    max_slope: float


def is_achronal_chain(samples: Sequence[TorusPoint], tol: float = ACHRONAL_TOL) -> AchronalReport:
    """1-Lipschitz test for a cyclically ordered chain on the torus.

    Each consecutive pair (including the wrap-around pair) must satisfy
    d(theta'_i, theta'_{i+1}) <= d(theta_i, theta_{i+1}) within tolerance,
    the discrete form of local achronality.  The slack is absolute for
    short chords and proportional for long ones (slope <= 1 + tol), so the
    verdict is scale-consistent.  Returns the verdict together with the
    largest slope ratio encountered.
    """
    if len(samples) < 2:
        raise ValueError("need at least two samples")
    ok = True
    max_slope = 0.0
    n = len(samples)
    coincide = 10.0 * tol
    for i in range(n):
        t0, p0 = samples[i]
        t1, p1 = samples[(i + 1) % n]
        dt = circle_distance(t0, t1)
        dp = circle_distance(p0, p1)
        if dt <= tol:
            # effectively one sample point; a genuinely vertical jump is
            # degenerate, sub-resolution jitter is not
            if dp > coincide:
                raise DegenerateError(
                    f"samples {i},{(i + 1) % n} coincide in theta but differ in theta'"
                )
            continue
        if dp <= coincide and dt <= coincide:
            continue
        max_slope = max(max_slope, dp / dt)
        if dp > dt + tol * max(1.0, dt):
            ok = False
    return AchronalReport(ok, max_slope)


def so22_defect(m) -> float:
    """Sup-norm of M^T G M - G; zero exactly on the isometry group O(2,2)."""
    m = np.asarray(m, dtype=float)
    return float(np.max(np.abs(m.T @ GRAM @ m - GRAM)))
