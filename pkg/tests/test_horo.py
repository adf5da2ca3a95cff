import math

import numpy as np
import pytest

import adsmax as am
from adsmax.errors import HyperbolicOverflowError
from adsmax.horo import (
    A0,
    SawtoothEdge,
    U0,
    V0,
    edge_parameter,
    projective_normalize,
    sector_vertices,
)

from oracles import numeric_derivative


def test_sigma0_values():
    r = math.sqrt(2.0)
    assert np.allclose(am.sigma0(0j).as_array(), [0, 0, 1 / r, 1 / r])
    assert np.allclose(
        am.sigma0(1.0).as_array(),
        [math.sinh(2) / r, 0, math.cosh(2) / r, 1 / r],
    )


def test_sigma0_on_quadric_exactly():
    rng = np.random.default_rng(0)
    for _ in range(50):
        om = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        v = am.sigma0(om).as_array()
        # exact identity cosh^2 - sinh^2 = 1; float rounding scales with |v|^2
        assert am.minkowski_inner(v, v) == pytest.approx(-1.0, abs=1e-14 * (1 + v @ v))


def test_sigma0_overflow_guard():
    with pytest.raises(HyperbolicOverflowError):
        am.sigma0(400.0)


def test_frame0_at_zero_is_base_frame():
    assert np.allclose(am.frame0(0j), A0, atol=1e-14)


def test_frame0_last_column_is_sigma0():
    rng = np.random.default_rng(1)
    for _ in range(20):
        om = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        assert np.max(np.abs(am.frame0(om)[:, 3] - am.sigma0(om).as_array())) < 1e-12


def test_frame0_solves_frame_ode():
    # d/dt F0(om + t) = F0 (U0 + V0) along the real direction; oracle is a
    # fourth-order numerical derivative of the closed form.
    om = 0.4 - 0.2j
    d_real = numeric_derivative(lambda t: am.frame0(om + t), 0.0)
    assert np.max(np.abs(d_real - am.frame0(om) @ (U0 + V0))) < 1e-6
    d_imag = numeric_derivative(lambda t: am.frame0(om + 1j * t), 0.0)
    assert np.max(np.abs(d_imag - am.frame0(om) @ (1j * (U0 - V0)))) < 1e-6


def test_diagonalizer_unitary_and_diagonalizes():
    s = am.compute_diagonalizer()
    assert np.max(np.abs(s.conj().T @ s - np.eye(4))) < 1e-13
    for om, diag in [(1.0 + 0j, [2, 0, -2, 0]), (1j, [0, 2, 0, -2])]:
        m = U0 * om + V0 * np.conj(om)
        d = np.linalg.inv(s) @ m @ s
        assert np.max(np.abs(d - np.diag(diag))) < 1e-12


def test_diagonalizer_random_omega():
    s = am.compute_diagonalizer()
    rng = np.random.default_rng(2)
    for _ in range(20):
        om = complex(rng.normal(), rng.normal())
        m = U0 * om + V0 * np.conj(om)
        target = np.diag([2 * om.real, 2 * om.imag, -2 * om.real, -2 * om.imag])
        assert np.max(np.abs(np.linalg.inv(s) @ m @ s - target)) < 1e-12


def test_frame0_columns_unitary_frame():
    rng = np.random.default_rng(3)
    for _ in range(10):
        om = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        assert am.unitarity_defect(am.frame0(om)) < 1e-10


def test_ray_limit_table_vertices():
    assert np.allclose(am.ray_limit(0.0).as_array(), [1, 0, 1, 0])
    assert np.allclose(am.ray_limit(math.pi / 2).as_array(), [0, 1, 0, 1])
    assert np.allclose(am.ray_limit(math.pi).as_array(), [-1, 0, 1, 0])
    assert np.allclose(am.ray_limit(3 * math.pi / 2).as_array(), [0, -1, 0, 1])


def test_ray_limit_edges_join_vertices():
    verts = sector_vertices()
    for k, theta in enumerate([math.pi / 4, 3 * math.pi / 4, 5 * math.pi / 4, 7 * math.pi / 4]):
        edge = am.ray_limit(theta)
        assert isinstance(edge, SawtoothEdge)
        assert edge.start == verts[k]
        assert edge.end == verts[(k + 1) % 4]
        # the edge is light-like: both torus angles move at unit speed
        p_lo = am.null_to_torus(edge.at(0.5))
        p_hi = am.null_to_torus(edge.at(2.0))
        from adsmax.adscore import circle_distance

        assert circle_distance(p_lo.theta, p_hi.theta) == pytest.approx(
            circle_distance(p_lo.theta_prime, p_hi.theta_prime), abs=1e-12
        )


def test_ray_limits_match_sampled_sigma0():
    # 32 directions away from the diagonals, margin 0.2 rad; the sampled
    # surface point at t = 20 lands within 1e-4 of the table vertex
    for center in (0.0, math.pi / 2, math.pi, 3 * math.pi / 2):
        for theta in center + np.linspace(-(math.pi / 4 - 0.2), math.pi / 4 - 0.2, 8):
            sampled = am.null_to_torus(
                projective_normalize(am.sigma0(20.0 * np.exp(1j * theta)).as_array())
            )
            predicted = am.null_to_torus(am.ray_limit(theta))
            from adsmax.adscore import circle_distance

            dist = math.hypot(
                circle_distance(sampled.theta, predicted.theta),
                circle_distance(sampled.theta_prime, predicted.theta_prime),
            )
            assert dist < 1e-4


def test_edge_parameter_positive_monotone():
    for k in range(4):
        vals = [edge_parameter(k, y) for y in (0.2, 0.5, 1.0, 1.5)]
        assert all(v > 0 for v in vals)
        diffs = np.diff(vals)
        assert np.all(diffs > 0) or np.all(diffs < 0)
