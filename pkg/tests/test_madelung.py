import numpy as np
import pytest

from src.errors import BranchCutCrossingError, NodalPointError, PoleError
from src.madelung import (
    action_phase_check,
    classical_potential_chi,
    continuity_residual,
    decompose,
    divergence_Q,
    energy_and_hj,
    helmholtz_curl_scan,
    log_density_rate_residual,
    normalized_residual,
    potential_U,
    potential_velocity_fd,
    quantum_potential,
    schrodinger_residual,
    track_velocity_potential,
)
from src.models import WaveModel
from src.numerics import FDConfig
from src.quantization import bohr_model, coulomb_energy, orbital_energy

POINT = np.array([-1.0, 0.5, 0.3])


def test_decompose_central_field(central_model, natural):
    fields = decompose(central_model, POINT, 0.0, natural)
    rho2 = POINT[0] ** 2 + POINT[1] ** 2
    assert fields.f == pytest.approx(float(central_model.density(POINT)), rel=1e-12)
    assert fields.S == pytest.approx(np.log(fields.f))
    assert fields.Phi == pytest.approx(2.0 * fields.phi)
    assert 0.0 <= fields.phi < 2.0 * np.pi
    assert fields.branch_index == 0
    np.testing.assert_allclose(fields.v, np.array([-POINT[1], POINT[0], 0.0]) / rho2, rtol=1e-12)
    np.testing.assert_allclose(fields.v_s, 0.0)
    assert abs(fields.Q) < 1e-12


def test_dirac_velocity_comes_from_the_vector_potential(dirac_model, natural):
    fields = decompose(dirac_model, POINT, 0.0, natural)
    rho2 = POINT[0] ** 2 + POINT[1] ** 2
    np.testing.assert_allclose(fields.v_p, 0.0, atol=1e-15)
    np.testing.assert_allclose(fields.v_s, 2.0 * np.array([-POINT[1], POINT[0], 0.0]) / rho2, rtol=1e-12)


def test_finite_difference_decomposition_matches_analytic(central_model, natural):
    analytic = decompose(central_model, POINT, 0.2, natural)
    numeric = decompose(central_model, POINT, 0.2, natural, FDConfig())
    np.testing.assert_allclose(numeric.v, analytic.v, rtol=1e-6)
    assert abs(numeric.Q) < 1e-5


def test_divergence_of_flow_vanishes_for_vortices(central_model, natural, off_axis_points):
    for p in off_axis_points[:8]:
        assert abs(divergence_Q(central_model, p, 0.0, natural, FDConfig())) < 1e-6


def _amplitude_ratio(nu, kappa, r):
    """Delta|Psi|/|Psi| of sqrt(C) r^(nu/2) exp(-kappa r / 2), written out by hand."""
    a, b = nu / 2.0, kappa / 2.0
    return a * (a + 1.0) / r ** 2 - 2.0 * b * (a + 1.0) / r + b * b


def test_potential_of_central_field(central_model, natural):
    r = np.linalg.norm(POINT)
    rho2 = POINT[0] ** 2 + POINT[1] ** 2
    # nu = kappa = 1: 3/(4 r^2) - 3/(2 r) + 1/4
    ratio = 0.75 / r ** 2 - 1.5 / r + 0.25
    expected = -0.5 + 0.5 * (ratio - 1.0 / rho2)
    assert potential_U(central_model, POINT, 0.7, natural) == pytest.approx(expected, rel=1e-12)
    assert quantum_potential(central_model, POINT, 0.0, natural) == pytest.approx(-0.5 * ratio, rel=1e-12)
    assert classical_potential_chi(central_model, POINT, 0.0, natural) == pytest.approx(
        central_model.energy - 0.5 / rho2, rel=1e-12
    )


@pytest.mark.parametrize("factory", [WaveModel.central_field, WaveModel.dirac_string])
def test_total_energy_is_the_eigenvalue(factory, natural, off_axis_points):
    model = factory(1.0, 1.0, 2, -0.5)
    for p in off_axis_points[:10]:
        balance = energy_and_hj(model, p, 0.0, natural)
        assert balance.W == pytest.approx(-0.5, rel=1e-10)
        assert balance.hj_residual < 1e-10


def test_energy_with_external_potential(central_model, natural):
    balance = energy_and_hj(central_model, POINT, 0.0, natural, potential_energy=lambda x: 0.0)
    rho2 = POINT[0] ** 2 + POINT[1] ** 2
    assert balance.W == pytest.approx(0.5 / rho2)


@pytest.mark.parametrize("nu, kappa, k", [(1.0, 1.0, 2), (2.0, 0.5, -1), (0.5, 3.0, 3)])
def test_flux_line_potential_has_the_closed_form(nu, kappa, k, natural, off_axis_points):
    model = WaveModel.dirac_string(nu, kappa, k, -0.3)
    for p in off_axis_points[:10]:
        expected = -0.3 + 0.5 * _amplitude_ratio(nu, kappa, np.linalg.norm(p))
        assert potential_U(model, p, 0.0, natural) == pytest.approx(expected, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("r", [0.5, 1.0, 3.0])
def test_coulomb_energy_of_the_flux_line_field(k, r, natural):
    model = WaveModel.dirac_string(1.0, 1.0, k, -0.5)
    coulomb = lambda x: coulomb_energy(np.linalg.norm(x), 1, natural)
    balance = energy_and_hj(model, (r, 0.0, 0.0), 0.0, natural, potential_energy=coulomb)
    assert balance.W == pytest.approx(orbital_energy(r, 1, k, natural), rel=1e-12, abs=1e-12)
    assert balance.W == pytest.approx(k * k / (2.0 * r * r) - 1.0 / r, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("Z, k", [(1, 1), (2, 1), (1, 3)])
def test_hamilton_jacobi_holds_only_on_the_bohr_orbit(Z, k, natural):
    level = bohr_model(Z, k, natural)
    model = WaveModel.dirac_string(1.0, 1.0 / level.radius, k, level.energy)
    coulomb = lambda x: coulomb_energy(np.linalg.norm(x), Z, natural)
    on_orbit = energy_and_hj(model, (level.radius, 0.0, 0.0), 0.0, natural, potential_energy=coulomb)
    assert on_orbit.W == pytest.approx(-Z * Z / (2.0 * k * k), rel=1e-12)
    assert on_orbit.hj_residual < 1e-12
    for factor in (0.5, 2.0):
        off = energy_and_hj(model, (factor * level.radius, 0.0, 0.0), 0.0, natural, potential_energy=coulomb)
        assert off.hj_residual > 1e-3


@pytest.mark.parametrize(
    "model",
    [
        WaveModel.central_field(1.0, 1.0, 1, -0.5),
        WaveModel.dirac_string(1.0, 1.0, 2, -0.5),
        WaveModel.free_gaussian(1.0),
    ],
)
def test_field_satisfies_the_hydrodynamic_equations(model, natural, off_axis_points):
    for p in off_axis_points[:8]:
        assert schrodinger_residual(model, p, 0.5, natural) < 1e-10
        assert log_density_rate_residual(model, p, 0.5, natural) < 1e-10
        assert continuity_residual(model, p, 0.5, natural) < 1e-6


def test_normalized_residual():
    assert normalized_residual(0.0, 1.0, floor=0.5) == pytest.approx(1.0)
    assert normalized_residual(0.0, 0.0) == 0.0


def test_action_phase_along_a_flow_line(central_model, natural):
    assert action_phase_check(central_model, POINT, 0.0, natural) < 1e-6


def test_points_on_the_axis_are_rejected(central_model, natural):
    with pytest.raises(PoleError):
        decompose(central_model, (0.0, 0.0, 1.0), 0.0, natural)


def test_nodal_point_is_rejected(natural):
    model = WaveModel.central_field(1.0, 1.0, 0, -0.5)
    with pytest.raises(NodalPointError):
        decompose(model, (0.0, 0.0, 0.0), 0.0, natural)


def test_fd_potential_velocity_matches_analytic(central_model, natural):
    numeric = potential_velocity_fd(central_model, POINT, 0.0, natural)
    np.testing.assert_allclose(numeric, decompose(central_model, POINT, 0.0, natural).v_p, rtol=1e-6)


def test_fd_potential_velocity_at_the_phase_cut(central_model, natural):
    with pytest.raises(BranchCutCrossingError):
        potential_velocity_fd(central_model, (1.0, 1e-8, 0.0), 0.0, natural)


def test_potential_velocity_is_curl_free_off_the_cut(central_model, natural, off_axis_points):
    scan = helmholtz_curl_scan(central_model, off_axis_points[:12], 0.0, natural)
    assert scan.evaluated + scan.excluded == 12
    assert scan.evaluated > 0
    assert scan.max_curl < 1e-6


@pytest.mark.parametrize("k", [1, 2, -3])
def test_velocity_potential_gains_branches_around_the_axis(k, natural):
    model = WaveModel.central_field(1.0, 1.0, k, -0.5)
    angles = np.linspace(0.0, 2.0 * np.pi, 129)
    points = np.column_stack([np.cos(angles), np.sin(angles), np.zeros_like(angles)])
    track = track_velocity_potential(model, points, 0.0, natural)
    assert track.branch_index[0] == 0
    assert track.branch_index[-1] == 2 * k
    assert track.Phi[-1] - track.Phi[0] == pytest.approx(4.0 * np.pi * k)
