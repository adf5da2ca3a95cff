"""Residue-driven classification of the peripheral holonomy.

Everything here is a closed-form function of the residue R of the
quadratic differential at the puncture: the limiting transport matrix of
the horizontal loops, its eigenvalue exponents, hyperbolic/parabolic type
with boundary lengths of the left and right metrics, the time orientation
of the boundary saw-tooth, and the per-puncture decorations that label the
resulting structures.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ZeroResidueError
from .horo import A0, A0_INV


class HolonomyKind(enum.Enum):
    HYPERBOLIC = "hyperbolic"
    PARABOLIC = "parabolic"


class Sawtooth(enum.Enum):
    FUTURE = "future-directed"
    PAST = "past-directed"
    NONE = "none"


class VertexRank(enum.Enum):
    SECOND_BIGGEST = "second-biggest"
    SECOND_SMALLEST = "second-smallest"
    NOT_APPLICABLE = "n/a"


def peripheral_matrix_frame(r: complex) -> np.ndarray:
    """Limiting loop-transport matrix in the unitary frame (complex entries)."""
    r = complex(r)
    if r == 0:
        raise ZeroResidueError("transport matrix undefined at zero residue")
    s = math.sqrt(abs(r))
    a = r / s
    ab = a.conjugate()
    return np.array(
        [[0, 0, -ab, s],
         [0, 0, -a, s],
         [-a, -ab, 0, 0],
         [s, s, 0, 0]], dtype=complex)


def peripheral_matrix(r: complex) -> np.ndarray:
    """Real realization of the limiting transport matrix.

    The unitary-frame matrix is conjugated into ambient coordinates by the
    base frame; the result is real and lies in the Lie algebra of the
    isometry group (M^T G + G M = 0).  Eigenvalues are unchanged.
    """
    m = A0 @ peripheral_matrix_frame(r) @ A0_INV
    if np.max(np.abs(m.imag)) > 1e-12 * max(1.0, np.max(np.abs(m.real))):
        raise ArithmeticError("real realization failed")
    return m.real.copy()


def char_poly_eigen(r: complex) -> np.ndarray:
    """Eigenvalue exponents (l1, l2, -l2, -l1), sorted descending.

    These are the roots of t^4 - 4|R| t^2 + 4 Im(R)^2, namely
    l1 = sqrt(2(|R| + |Re R|)) and l2 = sqrt(2(|R| - |Re R|)).
    """
    r = complex(r)
    l1 = math.sqrt(2.0 * (abs(r) + abs(r.real)))
    l2 = math.sqrt(2.0 * max(abs(r) - abs(r.real), 0.0))
    return np.array([l1, l2, -l2, -l1])


@dataclass(frozen=True)
class HolonomyReport:
    """Peripheral classification data for one residue."""

    residue: complex
    lam: np.ndarray                 # four exponents, descending
    left_type: HolonomyKind
    right_type: HolonomyKind
    ell_left: float
    ell_right: float
    sawtooth: Sawtooth
    vertex_rank: VertexRank

    @property
    def lengths(self) -> tuple[float, float]:
        return (self.ell_left, self.ell_right)


def holonomy_type(r: complex) -> HolonomyReport:
    """Type and translation lengths of the left/right peripheral holonomies.

    Re R != 0: both hyperbolic with lengths 4*pi*sqrt(|R| +- Im R).
    Re R == 0, Im R > 0: right parabolic, left hyperbolic.
    Re R == 0, Im R < 0: left parabolic, right hyperbolic.
    R == 0: both parabolic.  Parabolic sides report length zero.  The
    left/right factor assignment in the mixed cases follows the paper's
    stated convention; the eigenvalue data alone cannot distinguish the
    factors.
    """
    r = complex(r)
    hy, pa = HolonomyKind.HYPERBOLIC, HolonomyKind.PARABOLIC
    if r.real != 0.0:
        left, right = hy, hy
        # |R| -+ Im R >= 0 exactly; clamp the float cancellation near the axis
        ell_l = 4.0 * math.pi * math.sqrt(max(abs(r) + r.imag, 0.0))
        ell_r = 4.0 * math.pi * math.sqrt(max(abs(r) - r.imag, 0.0))
    elif r.imag > 0.0:
        left, right = hy, pa
        ell_l = 4.0 * math.pi * math.sqrt(2.0 * r.imag)
        ell_r = 0.0
    elif r.imag < 0.0:
        left, right = pa, hy
        ell_l = 0.0
        ell_r = 4.0 * math.pi * math.sqrt(-2.0 * r.imag)
    else:
        left, right = pa, pa
        ell_l = ell_r = 0.0
    tooth, rank = sawtooth_of(r)
    return HolonomyReport(
        residue=r,
        lam=char_poly_eigen(r),
        left_type=left,
        right_type=right,
        ell_left=ell_l,
        ell_right=ell_r,
        sawtooth=tooth,
        vertex_rank=rank,
    )


def tooth_orientation(r: complex) -> Sawtooth:
    """Time orientation of the inserted saw-tooth, by the sign of Re R alone.

    Defined whenever the end is both-hyperbolic (Re R != 0); the middle
    vertex rank additionally needs Im R != 0, see ``sawtooth_of``.
    """
    r = complex(r)
    if r.real > 0.0:
        return Sawtooth.FUTURE
    if r.real < 0.0:
        return Sawtooth.PAST
    return Sawtooth.NONE


def sawtooth_of(r: complex) -> tuple[Sawtooth, VertexRank]:
    """Time orientation of the boundary saw-tooth and the rank of its
    middle vertex among the holonomy eigenvalues.

    Determined by the signs of (Re R, Im R); degenerate residues (either
    part zero) carry no saw-tooth data.
    """
    r = complex(r)
    if r.real == 0.0 or r.imag == 0.0:
        return (Sawtooth.NONE, VertexRank.NOT_APPLICABLE)
    tooth = Sawtooth.FUTURE if r.real > 0.0 else Sawtooth.PAST
    if r.real * r.imag > 0.0:
        rank = VertexRank.SECOND_BIGGEST
    else:
        rank = VertexRank.SECOND_SMALLEST
    return (tooth, rank)


def length_lambda_consistency(r: complex) -> float:
    """Cross-check defect between the length formulas and the exponents.

    |(l_left + l_right)/(4 pi) - l1| + ||l_left - l_right|/(4 pi) - l2|
    vanishes identically; both sides are computed through independent
    formula sets.
    """
    rep = holonomy_type(r)
    lam = char_poly_eigen(r)
    s = (rep.ell_left + rep.ell_right) / (4.0 * math.pi)
    d = abs(rep.ell_left - rep.ell_right) / (4.0 * math.pi)
    return abs(s - lam[0]) + abs(d - lam[1])


@dataclass(frozen=True)
class DecorationReport:
    eps: tuple
    rules: tuple                       # one of "i", "ii", "iii", "iv" per puncture
    hyperbolic_pairs: int              # punctures with both sides hyperbolic
    sign_choice_count: int             # 2 ** hyperbolic_pairs


def decoration_of(residues) -> DecorationReport:
    """Decorations of the punctures from the signs of the residues.

    eps = +1 / -1 for positive / negative real part (both sides
    hyperbolic, the sign distinguishing the two structures with the same
    holonomy), eps = 0 otherwise.  Also reports which admissibility rule
    each residue matches and the number 2^n of structures sharing the
    boundary lengths, n counting the both-hyperbolic punctures.
    """
    eps = []
    rules = []
    for r in residues:
        r = complex(r)
        if r.real > 0.0:
            eps.append(1)
            rules.append("i")
        elif r.real < 0.0:
            eps.append(-1)
            rules.append("ii")
        elif r != 0:
            eps.append(0)
            rules.append("iii")
        else:
            eps.append(0)
            rules.append("iv")
    n = sum(1 for e in eps if e != 0)
    return DecorationReport(tuple(eps), tuple(rules), n, 2**n)
