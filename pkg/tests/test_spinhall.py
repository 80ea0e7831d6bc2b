import numpy as np
import pytest

from photonwf import operators as ops
from photonwf.gauge import BerryGauge, gauge_angle_field
from photonwf.kgrid import Field, build_grid
from photonwf.spinhall import (
    BOX_WIDTHS,
    SpinHallScenario,
    berry_phase_check,
    run_scenario,
    scan_theta,
)
from photonwf.wavefunction import (
    TwoComponentWavefunction,
    alpha,
    embed,
    gaussian_profile,
    helicity_state,
    make_gaussian_packet,
)

from conftest import X, Z

THETAS = [np.pi / 6, np.pi / 4, np.pi / 3, np.pi / 2]


def test_scenario_validation():
    with pytest.raises(ValueError):
        SpinHallScenario(10.0, 0.0, 1)
    with pytest.raises(ValueError):
        SpinHallScenario(10.0, np.pi, 1)
    with pytest.raises(ValueError):
        SpinHallScenario(10.0, 0.1, 1, divergence=0.01)
    with pytest.raises(ValueError):
        SpinHallScenario(10.0, 1.0, 0)
    s = SpinHallScenario(10.0, np.pi / 3, 1)
    k0 = s.k0_vector()
    assert np.linalg.norm(k0) == pytest.approx(10.0)
    assert np.arccos(k0 @ s.gauge_vector / 10) == pytest.approx(np.pi / 3)


def test_quarter_angle_shift():
    r = run_scenario(SpinHallScenario(10.0, np.pi / 4, 1, 0.01))
    assert np.linalg.norm(r.measured_b) == pytest.approx(0.1, rel=0.02)
    assert r.relative_error <= 0.02
    v0 = np.cross([0, 0, 1], SpinHallScenario(10.0, np.pi / 4, 1).k0_vector())
    v0 /= np.linalg.norm(v0)
    assert np.asarray(r.measured_b) @ v0 > 0


def test_normal_incidence_has_no_shift():
    r = run_scenario(SpinHallScenario(10.0, np.pi / 2, 1, 0.01))
    assert np.linalg.norm(r.measured_b) <= 1e-4 / 10
    assert r.predicted_magnitude == 0.0


@pytest.mark.parametrize("theta", THETAS[:3])
def test_helicity_flips_shift(theta):
    a = run_scenario(SpinHallScenario(10.0, theta, 1))
    b = run_scenario(SpinHallScenario(10.0, theta, -1))
    ma, mb = np.asarray(a.measured_b), np.asarray(b.measured_b)
    assert np.linalg.norm(ma + mb) <= 1e-6 * np.linalg.norm(ma)


def test_shift_is_transverse_and_equals_barycenter():
    for th in THETAS[:3]:
        r = run_scenario(SpinHallScenario(10.0, th, 1))
        b = np.asarray(r.measured_b)
        assert r.transverse_leak <= 1e-3 * np.linalg.norm(b) + 1e-9
        np.testing.assert_allclose(r.measured_x, b, atol=1e-6)
        np.testing.assert_allclose(r.canonical_position, 0, atol=1e-6)


def test_scan_magnitudes_and_scaling():
    res = scan_theta(1, 10.0, THETAS)
    mags = [np.linalg.norm(r.measured_b) for r in res]
    np.testing.assert_allclose(mags[:3], [0.1732, 0.1, 0.0577], rtol=2e-3)
    assert mags[3] <= 1e-5
    assert mags[0] > mags[1] > mags[2] > mags[3]
    double = scan_theta(1, 20.0, THETAS[:3], divergence=0.01)
    for a, b in zip(res, double):
        assert np.linalg.norm(b.measured_b) == pytest.approx(0.5 * np.linalg.norm(a.measured_b), rel=1e-2)
    neg = scan_theta(-1, 10.0, THETAS)
    for a, b in zip(res, neg):
        np.testing.assert_allclose(b.measured_b, -np.asarray(a.measured_b),
                                   atol=1e-6 * max(np.linalg.norm(a.measured_b), 1e-12))


def test_scan_flags_infeasible_angles():
    res = scan_theta(1, 10.0, [0.05, np.pi / 4, 4.0])
    assert [r.feasible for r in res] == [False, True, False]
    assert "divergence" in res[0].message
    assert np.isnan(res[0].relative_error)


def test_numeric_b_cross_check_runs():
    r = run_scenario(SpinHallScenario(10.0, np.pi / 3, 1, 0.01, n=21), check_numeric=True)
    assert r.relative_error <= 0.02


def test_error_scales_with_divergence_squared():
    # an isotropic Gaussian averages each harmonic component of A_B exactly;
    # an anisotropic packet exposes the second-moment correction
    for theta in (np.pi / 4, np.pi / 3):
        ratios = []
        for d in (0.004, 0.008, 0.016):
            s = SpinHallScenario(10.0, theta, 1, d)
            k0 = s.k0_vector()
            grid = build_grid(k0, BOX_WIDTHS * d * 10, 41, (0, 0, 1))
            st = make_gaussian_packet(grid, k0, np.array([1.0, 0.4, 1.0]) * d, 1)
            b = ops.expectation_vector(ops.op_b_analytic(Z), st).real
            p = s.predicted()
            ratios.append(np.linalg.norm(b - p) / np.linalg.norm(p) / d**2)
        assert max(ratios) / min(ratios) < 1.05
        assert min(ratios) > 0.1


def _helicity_vector(grid, sigma, gauge=Z):
    prof = Field(grid, gaussian_profile(grid, grid.center, 0.15))
    return embed(helicity_state(prof, sigma, gauge=gauge))


@pytest.mark.parametrize("sigma", [1, -1])
def test_berry_phase_fit(grid21, sigma):
    f = _helicity_vector(grid21, sigma)
    same = berry_phase_check(f, Z, Z)
    assert same.passed and same.max_phase_deviation <= 1e-15
    rep = berry_phase_check(f, Z, X)
    assert rep.sigma == sigma and rep.passed
    assert rep.fit_residual <= 1e-10
    # the fitted phase field is -sigma times the gauge angle
    phi = gauge_angle_field(grid21, Z, X).values
    ft = TwoComponentWavefunction(grid21, helicity_state(
        Field(grid21, gaussian_profile(grid21, grid21.center, 0.15)), sigma).values, None, gauge=X)
    ratio = np.sum(np.conj(f.values) * embed(ft).values, -1) / np.sum(np.abs(f.values) ** 2, -1)
    np.testing.assert_allclose(np.angle(ratio * np.exp(1j * sigma * phi)), 0, atol=1e-10)


def test_superposition_has_no_single_phase(grid21):
    f = _helicity_vector(grid21, 1)
    g = _helicity_vector(grid21, -1)
    mix = f.replace(values=f.values + 0.6 * g.values)
    rep = berry_phase_check(mix, Z, X, sigma=1)
    assert not rep.passed
    assert rep.fit_residual > 1e-3
