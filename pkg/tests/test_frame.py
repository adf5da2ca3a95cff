import math

import numpy as np
import pytest
from scipy.linalg import expm

import adsmax as am
from adsmax.errors import NotRealError, OutOfChartError, StepTooLargeError
from adsmax.frame import FrameState, _uv_batch
from adsmax.horo import A0, U0, V0


def unit_field(residue):
    """Analytic field of the unit model: phi = log|R|/2, q = -R."""
    return am.ConformalField.constant(0.5 * math.log(abs(residue)), -residue)


def test_connection_matrices_horospherical():
    fld = am.ConformalField.constant(0.0, 1.0)
    u, v = am.connection_matrices(0.3 + 0.4j, fld)
    assert np.allclose(u, U0, atol=1e-14)
    assert np.allclose(v, V0, atol=1e-14)


def test_connection_matrices_unit_model_match_limit_matrix():
    r = 3 + 4j
    u, v = am.connection_matrices(1j, unit_field(r))
    s5 = math.sqrt(5.0)
    assert u[1, 2] == pytest.approx(-(3 + 4j) / s5, abs=1e-14)
    assert u[0, 3] == pytest.approx(s5, abs=1e-14)
    from adsmax.classify import peripheral_matrix_frame

    assert np.allclose(u + v, peripheral_matrix_frame(r), atol=1e-14)


def test_connection_matrices_cusp_zero_q_entries():
    fld = am.ConformalField.constant(-0.5 * math.log(2.0) - math.log(2.0), 0.0)
    u, v = am.connection_matrices(2j, fld)
    assert u[1, 2] == 0 and u[2, 0] == 0 and v[0, 2] == 0 and v[2, 1] == 0


def test_integrate_empty_path_identity():
    fld = am.ConformalField.constant(0.0, 1.0)
    start = FrameState.initial(0j)
    out = am.integrate_ray(start, [], fld, h=0.01)
    assert np.array_equal(out.F, start.F)


def test_integrate_ray_matches_closed_form():
    # criterion-1 oracle at module level: scaled entry-wise deviation
    fld = am.ConformalField.constant(0.0, 1.0)
    worst = 0.0
    for k in range(8):
        om = 3.0 * np.exp(2j * math.pi * k / 8)
        state = am.integrate_ray(FrameState.initial(0j), [om], fld, h=0.005)
        f0 = am.frame0(om)
        worst = max(worst, np.max(np.abs(state.F - f0)) / max(1.0, np.max(np.abs(f0))))
    assert worst <= 1e-8


def test_integrate_ray_multi_leg_path():
    fld = am.ConformalField.constant(0.0, 1.0)
    state = am.integrate_ray(FrameState.initial(0j), [1.0, 1 + 1j, 0.5 + 0.5j], fld, h=0.005)
    f0 = am.frame0(0.5 + 0.5j)
    assert np.max(np.abs(state.F - f0)) / max(1.0, np.max(np.abs(f0))) < 1e-8


def test_rk4_order_four():
    fld = am.ConformalField.constant(0.0, 1.0)
    om = 2.5 + 0.5j
    f0 = am.frame0(om)
    errs = []
    for h in (0.02, 0.01):
        st = am.integrate_ray(FrameState.initial(0j), [om], fld, h=h)
        errs.append(np.max(np.abs(st.F - f0)))
    assert errs[0] > 1e-12  # above rounding floor, ratio meaningful
    assert errs[0] / errs[1] >= 14.0


def test_horizontal_transport_matches_matrix_exponential():
    # x-independent connection: the transport over one period is exactly
    # exp(2 pi (U + V)); matrix exponential is the oracle.  Entry-wise the
    # RK4 drift scales with the top exponent (~3e-10 for R = 3+4i at this
    # step); the spectral comparison at 1e-10 lives in the acceptance suite
    for r in (1.0 + 0j, 3 + 4j):
        fld = unit_field(r)
        u, v = am.connection_matrices(5j, fld)
        target = expm(2.0 * math.pi * (u + v))
        h = am.holonomy_loop(fld, 5.0, h=2 * math.pi / 4096)
        assert np.max(np.abs(h - target)) / np.max(np.abs(target)) < 1e-8


def test_step_too_large_guard():
    fld = am.ConformalField.constant(0.0, 100.0)
    with pytest.raises(StepTooLargeError):
        am.integrate_ray(FrameState.initial(0j), [3.0 + 0j], fld, h=0.5)


def test_out_of_chart_path(unit_solution):
    fld = am.ConformalField.from_solution(unit_solution)
    with pytest.raises(OutOfChartError):
        am.integrate_ray(FrameState.initial(1j), [12j], fld, h=0.05)


def test_embedding_point_values():
    assert np.allclose(
        am.embedding_point(FrameState(am.frame0(0j), 0j)).as_array(),
        np.array([0, 0, 1, 1]) / math.sqrt(2),
        atol=1e-14,
    )
    expect = np.array([math.sinh(2), 0, math.cosh(2), 1]) / math.sqrt(2)
    assert np.allclose(
        am.embedding_point(FrameState(am.frame0(1.0), 1.0)).as_array(), expect, atol=1e-12
    )


def test_embedding_point_flags_imaginary():
    f = am.frame0(0j).astype(complex)
    f[:, 3] = 1j * np.ones(4)
    with pytest.raises(NotRealError):
        am.embedding_point(FrameState(f, 0j))


def test_quadric_conservation_along_integration():
    fld = am.ConformalField.constant(0.0, 1.0)
    for om in (1.5 + 0.5j, -2j, 3.0 + 0j):
        st = am.integrate_ray(FrameState.initial(0j), [om], fld, h=0.005)
        assert am.quadric_residual(st) <= 1e-8


def test_unitarity_defect_examples():
    assert am.unitarity_defect(am.frame0(2.0 - 1j)) <= 1e-10
    assert am.unitarity_defect(1.1 * am.frame0(0j)) == pytest.approx(0.21, abs=1e-12)
    # path length 10 within a moderate region, h = 0.01
    fld = am.ConformalField.constant(0.0, 1.0)
    path = [1 + 1j, -1 + 2j, 1.5 - 0.5j, -1.2 - 1j, 1 + 1.5j]
    st = am.integrate_ray(FrameState.initial(0j), path, fld, h=0.01)
    assert am.unitarity_defect(st) <= 1e-7


def rect_defect(fld, corner, width, height, h):
    x0, y0 = corner
    start = FrameState.initial(complex(x0, y0))
    loop = [
        complex(x0 + width, y0),
        complex(x0 + width, y0 + height),
        complex(x0, y0 + height),
        complex(x0, y0),
    ]
    out = am.integrate_ray(start, loop, fld, h=h)
    return np.max(np.abs(out.F - start.F))


def test_path_independence_contractible_rectangle(unit_solution):
    # flat connection: transporting around a rectangle returns the start.
    # The rectangle is kept moderate so the frame growth across it stays
    # well inside float range (the defect floor is eps amplified by the
    # round-trip growth).
    fld = am.ConformalField.from_solution(unit_solution)
    assert am.flatness_defect(fld) <= 1e-9
    assert rect_defect(fld, (1.0, 2.0), 1.0, 1.0, h=0.005) < 1e-6


def test_path_independence_perturbed_floor(perturbed_solution):
    # with a grid-backed field the interpolated connection is flat only up
    # to the discretization error of u and its differences; the loop
    # defect sits at that floor (~3e-5 on 64 x 129) and refines at second
    # order, it is not an integrator artifact
    fld = am.ConformalField.from_solution(perturbed_solution)
    coarse = rect_defect(fld, (1.0, 2.0), 1.0, 1.0, h=0.01)
    assert coarse < 1e-4
    chart = perturbed_solution.chart
    fine_sol = am.solve_vortex(chart, am.CylinderGrid.for_chart(chart, 128, 257))
    fine = rect_defect(am.ConformalField.from_solution(fine_sol), (1.0, 2.0), 1.0, 1.0, h=0.01)
    assert coarse / fine > 3.0


def test_loop_homotopy_invariance_perturbed(perturbed_solution):
    fld = am.ConformalField.from_solution(perturbed_solution)
    h = 2 * math.pi / 2048
    spectra = [
        am.eigenvalue_log_moduli(am.holonomy_loop(fld, y, h=h)) for y in (6.0, 7.5, 9.0)
    ]
    scale = max(1.0, np.max(np.abs(spectra[0])))
    for other in spectra[1:]:
        assert np.max(np.abs(other - spectra[0])) / scale < 1e-3


def test_holonomy_cusp_unipotent():
    # q = 0 cusp: A_y is nilpotent, transport is unipotent, all moduli 1
    fld = am.ConformalField.constant(-0.5 * math.log(2.0 * 25.0), 0.0)  # y = 5 profile value
    h = am.holonomy_loop(fld, 5.0, h=2 * math.pi / 2048)
    # constant-phi cusp field drops the phi_y entries; build the honest one
    chart = am.make_chart(0.0)
    grid = am.CylinderGrid.for_chart(chart)
    sol = am.solve_vortex(chart, grid, am.BoundarySpec(0.0, 0.0))
    fld = am.ConformalField.from_solution(sol)
    h = am.holonomy_loop(fld, 5.0, h=2 * math.pi / 2048)
    assert np.max(np.abs(am.eigenvalue_log_moduli(h))) <= 1e-3


def test_flatness_defect_formula_cases():
    assert am.flatness_defect(am.ConformalField.constant(0.0, 2.0)) == pytest.approx(3.0, abs=1e-12)
    assert am.flatness_defect(am.ConformalField.constant(0.0, 1.0)) <= 1e-15


def test_uv_batch_matches_single(perturbed_solution):
    fld = am.ConformalField.from_solution(perturbed_solution)
    ws = np.array([0.5 + 2j, 1.0 + 3j, 4.0 + 8j])
    ub, vb = _uv_batch(ws, fld)
    for i, w in enumerate(ws):
        u, v = am.connection_matrices(w, fld)
        assert np.allclose(u, ub[i]) and np.allclose(v, vb[i])
