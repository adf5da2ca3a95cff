"""One puncture end in the cylinder coordinate w = x + i*y.

The puncture neighbourhood 0 < |z| < eps lifts under z = exp(i*w) to the
half-cylinder y > -log(eps), x periodic mod 2*pi.  A quadratic differential
with a pole of order <= 2 and residue R pulls back to

    q = -(R + sum_m a_m exp(i*m*w)) dw^2,

so the end is described by the residue, a finite Fourier tail, and the
y-range of the chart.  The background metric is |R| |dw|^2 (flat) for a
non-vanishing residue and |dw|^2 / (2 y^2) (curvature -2) at a cusp, with
an optional smooth blend between the two zones.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfChartError, PoleTooHighError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

MAX_TAIL_MODE = 8  # exp(-m*y) corrections above this are numerically invisible


class ChartMode(enum.Enum):
    FLAT = "flat"    # R != 0, flat background |R| |dw|^2
    CUSP = "cusp"    # R == 0, cusp background |dw|^2 / (2 y^2)


@dataclass(frozen=True)
class EndChart:
    """Laurent data of one end plus the y-range of the cylinder chart.

    ``tail`` maps the mode m >= 1 to the coefficient a_m of exp(i*m*w).
    ``collar`` optionally holds (y_lo, y_hi): below y_lo the background is
    the cusp-type zone, above y_hi the flat zone, blended smoothly between.
    It only makes sense for flat ends.
    """

    residue: complex
    tail: tuple = ()                 # ((m, a_m), ...) with m >= 1
    y0: float = 1.0
    ymax: float = 9.0
    mode: ChartMode = ChartMode.FLAT
    collar: tuple | None = None

    def __post_init__(self):
        if not (0.0 < self.y0 < self.ymax):
            raise ValueError("need 0 < y0 < ymax")
        if (self.mode is ChartMode.CUSP) != (self.residue == 0):
            raise ValueError("cusp mode holds exactly when the residue vanishes")
        for m, _ in self.tail:
            if not (1 <= m <= MAX_TAIL_MODE):
                raise ValueError(f"tail mode {m} outside 1..{MAX_TAIL_MODE}")
        if self.collar is not None:
            lo, hi = self.collar
            if not (self.y0 <= lo < hi <= self.ymax):
                raise ValueError("collar must sit inside [y0, ymax]")
            if self.mode is ChartMode.CUSP:
                raise ValueError("collar only applies to flat ends")

    def check_y(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(y < self.y0 - 1e-12) or np.any(y > self.ymax + 1e-12):
            raise OutOfChartError(
                f"y outside chart range [{self.y0}, {self.ymax}]"
            )


def make_chart(residue: complex, tail=(), y0=1.0, ymax=9.0, collar=None) -> EndChart:
    """Build an ``EndChart``, inferring the mode from the residue."""
    residue = complex(residue)
    mode = ChartMode.CUSP if residue == 0 else ChartMode.FLAT
    tail = tuple((int(m), complex(a)) for m, a in tail)
    return EndChart(residue, tail, float(y0), float(ymax), mode, collar)


def q_at(chart: EndChart, w):
    """Coefficient of the pulled-back differential in dw^2 at w.

    Returns -(R + sum_m a_m exp(i*m*w)); vectorized over w.
    """
    w = np.asarray(w, dtype=complex)
    chart.check_y(w.imag)
    total = np.full_like(w, chart.residue, dtype=complex)
    for m, a in chart.tail:
        total = total + a * np.exp(1j * m * w)
    return -total if w.ndim else complex(-total)


def _smoothstep(t):
    """Quintic smoothstep: C^2 ramp from 0 at t=0 to 1 at t=1."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def _log_g(chart: EndChart, y):
    """log of the conformal coefficient of the background metric."""
    y = np.asarray(y, dtype=float)
    log_cusp = -np.log(2.0 * y * y)
    if chart.mode is ChartMode.CUSP:
        return log_cusp
    log_flat = math.log(abs(chart.residue))
    if chart.collar is None:
        return np.broadcast_to(np.asarray(log_flat), y.shape).copy()
    lo, hi = chart.collar
    s = _smoothstep((y - lo) / (hi - lo))
    return (1.0 - s) * log_cusp + s * log_flat


def background_at(chart: EndChart, y):
    """Background metric coefficient g(y) > 0 and its curvature K_g(y).

    Flat ends: g = |R|, K = 0.  Cusp ends: g = 1/(2 y^2), K = -2.  On a
    configured collar the zones are blended in log space and the curvature
    has no closed form; it is computed by finite differences of log g
    (K = -(log g)'' / (2 g) for metrics that depend on y alone).
    """
    scalar = np.ndim(y) == 0
    y = np.atleast_1d(np.asarray(y, dtype=float))
    chart.check_y(y)
    if chart.mode is ChartMode.CUSP:
        g = 0.5 / (y * y)
        kg = np.full_like(y, -2.0)
    elif chart.collar is None:
        g = np.full_like(y, abs(chart.residue))
        kg = np.zeros_like(y)
    else:
        lo, hi = chart.collar
        dh = 1e-4
        g = np.exp(_log_g(chart, y))
        d2 = (_log_g(chart, y + dh) - 2.0 * _log_g(chart, y) + _log_g(chart, y - dh)) / dh**2
        kg = -d2 / (2.0 * g)
        # exact values and coefficients on the pure zones
        below = y <= lo
        above = y >= hi
        g = np.where(below, 0.5 / (y * y), g)
        g = np.where(above, abs(chart.residue), g)
        kg = np.where(below, -2.0, kg)
        kg = np.where(above, 0.0, kg)
    if scalar:
        return float(g[0]), float(kg[0])
    return g, kg


def q_norm_sq(chart: EndChart, w):
    """Squared g-norm of the differential: |q|^2 / g^2 at Im w."""
    w = np.asarray(w, dtype=complex)
    g, _ = background_at(chart, w.imag if w.ndim else complex(w).imag)
    val = np.abs(q_at(chart, w)) ** 2 / np.asarray(g) ** 2
    return val if w.ndim else float(val)


def residue_from_z_chart(laurent, lowest_order: int = -2, **chart_kwargs) -> EndChart:
    """Convert z-chart Laurent coefficients of q to an ``EndChart``.

    ``laurent[k]`` is the coefficient of z^(lowest_order + k).  Under
    z = exp(i*w) one has dz^2 = -z^2 dw^2, so the coefficient of z^n picks
    up the factor exp(i*(n+2)*w); the z^-2 coefficient is the residue and
    higher coefficients feed the exp(i*m*w) tail.
    """
    laurent = [complex(c) for c in laurent]
    if lowest_order < -2:
        for k in range(-2 - lowest_order):
            if laurent[k] != 0:
                raise PoleTooHighError(
                    f"nonzero coefficient at z^{lowest_order + k}: pole order > 2"
                )
        laurent = laurent[-2 - lowest_order:]
        lowest_order = -2
    coeffs = {}
    for k, c in enumerate(laurent):
        n = lowest_order + k
        if c != 0:
            coeffs[n] = c
    residue = coeffs.pop(-2, 0j)
    tail = tuple(sorted((n + 2, c) for n, c in coeffs.items()))
    return make_chart(residue, tail, **chart_kwargs)


def load_chart(source) -> EndChart:
    """Read an ``EndChart`` from a TOML file path or a parsed mapping.

    Keys: residue_re, residue_im, tail (list of [m, re, im]), y0, ymax,
    mode ("flat" | "cusp"), optional collar = [y_lo, y_hi].
    """
    if isinstance(source, dict):
        data = source
    else:
        with open(source, "rb") as fh:
            data = tomllib.load(fh)
        data = data.get("chart", data)
    residue = complex(data.get("residue_re", 0.0), data.get("residue_im", 0.0))
    tail = tuple((int(m), complex(re, im)) for m, re, im in data.get("tail", []))
    collar = tuple(data["collar"]) if "collar" in data else None
    chart = make_chart(
        residue, tail, data.get("y0", 1.0), data.get("ymax", 9.0), collar
    )
    if "mode" in data and ChartMode(data["mode"]) is not chart.mode:
        raise ValueError(
            f"declared mode {data['mode']!r} inconsistent with residue {residue}"
        )
    return chart
