import math

import numpy as np
import pytest

import adsmax as am
from adsmax.errors import OutOfChartError, PoleTooHighError
from adsmax.qdiff import ChartMode


def test_q_at_unit_model_is_minus_residue():
    chart = am.make_chart(1.0)
    for w in [0.3 + 2j, 5.0 + 8.5j, 1j]:
        assert am.q_at(chart, w) == -1.0


def test_q_at_tail_decays_to_minus_residue():
    chart = am.make_chart(3 + 4j, tail=[(1, 0.1)], ymax=60.0)
    assert am.q_at(chart, 50j) == pytest.approx(-(3 + 4j), abs=1e-20)


def test_q_at_cusp_with_tail_direct():
    chart = am.make_chart(0.0, tail=[(1, 1.0)], y0=0.5)
    # pole-free evaluation right at the inner edge: -(0 + e^{i w}), w = 0.5i
    assert am.q_at(chart, 0.5j) == pytest.approx(-math.exp(-0.5), abs=1e-15)


def test_q_at_out_of_chart():
    chart = am.make_chart(1.0, y0=1.0, ymax=9.0)
    with pytest.raises(OutOfChartError):
        am.q_at(chart, 0.5j)
    with pytest.raises(OutOfChartError):
        am.q_at(chart, 10j)


def test_background_flat_and_cusp_values():
    flat = am.make_chart(3 + 4j)
    g, k = am.background_at(flat, 2.0)
    assert g == 5.0 and k == 0.0

    cusp = am.make_chart(0.0)
    g, k = am.background_at(cusp, 1.0)
    assert g == pytest.approx(0.5) and k == -2.0
    g, k = am.background_at(cusp, 2.0)
    assert g == pytest.approx(1.0 / 8.0) and k == -2.0


def test_background_collar_smooth_and_positive():
    chart = am.make_chart(2.0, y0=1.0, ymax=9.0, collar=(2.0, 4.0))
    ys = np.linspace(1.0, 9.0, 400)
    g, k = am.background_at(chart, ys)
    assert np.all(g > 0)
    # pure zones on both sides of the collar
    assert np.allclose(g[ys <= 1.9], 1.0 / (2 * ys[ys <= 1.9] ** 2))
    assert np.allclose(g[ys >= 4.1], 2.0)
    assert np.allclose(k[ys <= 1.9], -2.0) and np.allclose(k[ys >= 4.1], 0.0)
    # finite-difference second derivative of g stays bounded through the blend
    h = ys[1] - ys[0]
    d2 = (g[2:] - 2 * g[1:-1] + g[:-2]) / h**2
    assert np.max(np.abs(d2)) < 50.0


def test_q_norm_sq_unit_models():
    chart = am.make_chart(1.0)
    assert am.q_norm_sq(chart, 0.2 + 3j) == 1.0
    chart = am.make_chart(3 + 4j)
    assert am.q_norm_sq(chart, 1.5j) == pytest.approx(1.0, abs=1e-15)
    cusp = am.make_chart(0.0)
    assert am.q_norm_sq(cusp, 2j) == 0.0


def test_q_norm_sq_tends_to_one_with_tail():
    chart = am.make_chart(-2 + 1j, tail=[(1, 0.3), (2, 0.1 - 0.2j)], ymax=30.0)
    xs = np.linspace(0, 2 * math.pi, 9)
    vals = [np.abs(am.q_norm_sq(chart, xs + 1j * y) - 1.0).max() for y in (5.0, 10.0, 20.0)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 1e-8


def test_residue_from_z_chart_basic():
    chart = am.residue_from_z_chart([3 + 4j])
    assert chart.residue == 3 + 4j and chart.tail == ()


def test_residue_from_z_chart_pole_too_high():
    with pytest.raises(PoleTooHighError):
        am.residue_from_z_chart([1.0, 0.0], lowest_order=-3)


def test_residue_from_z_chart_matches_direct_pullback():
    # q(z) = 1/z^2 + 5/z; oracle: evaluate the z-chart form composed with
    # z = e^{iw} (dz^2 = -z^2 dw^2) at 10 sample points.
    chart = am.residue_from_z_chart([1.0, 5.0])
    assert chart.residue == 1.0
    assert chart.tail == ((1, 5 + 0j),)
    rng = np.random.default_rng(3)
    for _ in range(10):
        w = complex(rng.uniform(0, 2 * math.pi), rng.uniform(1.0, 6.0))
        z = np.exp(1j * w)
        direct = (1.0 / z**2 + 5.0 / z) * (-(z**2))
        assert am.q_at(chart, w) == pytest.approx(direct, rel=1e-12)


def test_residue_from_z_chart_higher_coefficients():
    # q(z) = (2 - i)/z^2 + 3/z + 0.5 + 0.25 z
    chart = am.residue_from_z_chart([2 - 1j, 3.0, 0.5, 0.25])
    assert chart.tail == ((1, 3 + 0j), (2, 0.5 + 0j), (3, 0.25 + 0j))
    rng = np.random.default_rng(5)
    for _ in range(10):
        w = complex(rng.uniform(0, 2 * math.pi), rng.uniform(1.0, 6.0))
        z = np.exp(1j * w)
        direct = ((2 - 1j) / z**2 + 3.0 / z + 0.5 + 0.25 * z) * (-(z**2))
        assert am.q_at(chart, w) == pytest.approx(direct, rel=1e-12)


def test_mode_inference_and_validation():
    assert am.make_chart(0.0).mode is ChartMode.CUSP
    assert am.make_chart(0.5j).mode is ChartMode.FLAT
    with pytest.raises(ValueError):
        am.EndChart(residue=0j, mode=ChartMode.FLAT)
    with pytest.raises(ValueError):
        am.make_chart(1.0, y0=3.0, ymax=2.0)


def test_load_chart_roundtrip(tmp_path):
    cfg = tmp_path / "end.toml"
    cfg.write_text(
        """
[chart]
residue_re = 3.0
residue_im = 4.0
tail = [[1, 0.1, 0.0]]
y0 = 1.0
ymax = 9.0
mode = "flat"
"""
    )
    chart = am.load_chart(cfg)
    assert chart.residue == 3 + 4j
    assert chart.tail == ((1, 0.1 + 0j),)
    assert chart.mode is ChartMode.FLAT

    bad = tmp_path / "bad.toml"
    bad.write_text("[chart]\nresidue_re = 1.0\nmode = \"cusp\"\n")
    with pytest.raises(ValueError):
        am.load_chart(bad)
