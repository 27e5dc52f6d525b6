import numpy as np
import pytest
from scipy import constants as codata

from src.constants import PhysicalConstants
from src.errors import PreconditionError
from src.models import ModelKind, WaveModel
from src.numerics import FDConfig, SphericalShell, fd_gradient, fd_laplacian, volume_integral


def test_natural_units_are_atomic_units(natural):
    assert natural.hbar == natural.m == natural.q_e == 1.0
    assert natural.alpha == -0.5
    assert natural.gamma == -1.0
    assert natural.h == pytest.approx(2.0 * np.pi)
    assert 4.0 * np.pi * natural.epsilon_0 == pytest.approx(1.0)
    assert natural.energy_unit_ev == pytest.approx(27.211386, rel=1e-6)


def test_si_constants_are_consistent(si):
    assert si.hbar == codata.hbar
    assert si.mu_0 * si.epsilon_0 * si.c ** 2 == pytest.approx(1.0, rel=1e-9)
    assert si.energy_unit_ev * codata.e == pytest.approx(1.0)


def test_constants_validation():
    with pytest.raises(PreconditionError):
        PhysicalConstants.from_mode("cgs")
    with pytest.raises(PreconditionError):
        PhysicalConstants(hbar=0.0, m=1.0, q_e=1.0, epsilon_0=1.0, mu_0=1.0, c=1.0)
    with pytest.raises(PreconditionError):
        PhysicalConstants(hbar=1.0, m=1.0, q_e=0.0, epsilon_0=1.0, mu_0=1.0, c=1.0)


def test_central_density_is_normalized():
    for nu, kappa in ((1.0, 1.0), (2.0, 0.5)):
        model = WaveModel.central_field(nu, kappa, 1, -0.5)
        total = volume_integral(model.density, SphericalShell(0.0, np.inf, tail_radius=40.0 / kappa))
        assert total == pytest.approx(1.0, rel=1e-8)


def test_density_is_modulus_squared(central_model, natural, off_axis_points):
    psi = central_model.psi(off_axis_points, 0.3, natural)
    np.testing.assert_allclose(central_model.density(off_axis_points), np.abs(psi) ** 2, rtol=1e-12)


@pytest.mark.parametrize("kind", ["central", "dirac", "gaussian", "plane"])
def test_analytic_derivatives_match_finite_differences(kind, natural, off_axis_points):
    model = {
        "central": WaveModel.central_field(1.0, 1.0, 2, -0.5),
        "dirac": WaveModel.dirac_string(2.0, 1.5, 1, -0.5),
        "gaussian": WaveModel.free_gaussian(1.3),
        "plane": WaveModel.plane_wave((0.3, -0.2, 0.5), natural),
    }[kind]
    t = 0.4
    for p in off_axis_points[:10]:
        field = lambda q: model.psi(q, t, natural)
        np.testing.assert_allclose(model.grad_psi(p, t, natural), fd_gradient(field, p), rtol=1e-6, atol=1e-10)
        assert complex(model.laplacian_psi(p, t, natural)) == pytest.approx(
            complex(fd_laplacian(field, p, FDConfig(order=4))), rel=1e-6, abs=1e-8
        )


def test_time_derivative_of_gaussian(natural):
    model = WaveModel.free_gaussian(0.8)
    x = np.array([0.4, -0.3, 0.9])
    h = 1e-5
    numeric = (model.psi(x, 1.0 + h, natural) - model.psi(x, 1.0 - h, natural)) / (2 * h)
    assert complex(model.dpsi_dt(x, 1.0, natural)) == pytest.approx(complex(numeric), rel=1e-7)
    assert model.density(x, 1.0, natural) == pytest.approx(abs(model.psi(x, 1.0, natural)) ** 2, rel=1e-12)


def test_time_broadcasts_against_points(central_model, natural, off_axis_points):
    times = np.linspace(0.0, 1.0, len(off_axis_points))
    psi = central_model.psi(off_axis_points, times, natural)
    assert psi.shape == (len(off_axis_points),)
    assert psi[-1] == pytest.approx(complex(central_model.psi(off_axis_points[-1], 1.0, natural)))


def test_closed_form_velocity(natural, off_axis_points):
    for model in (WaveModel.central_field(1.0, 1.0, -2, -0.5), WaveModel.dirac_string(1.0, 1.0, 3, -0.5)):
        v = natural.hbar / natural.m * model.phase_gradient(off_axis_points, 0.0, natural)
        v = v + natural.gamma * model.vector_potential(off_axis_points, natural)
        np.testing.assert_allclose(model.closed_form_velocity(off_axis_points, 0.0, natural), v, rtol=1e-10)


def test_radial_laplacian_ratio_uses_amplitude_exponents(natural):
    model = WaveModel.dirac_string(1.0, 1.0, 1, -0.5)
    x = np.array([0.8, 0.6, 1.1])
    r = np.linalg.norm(x)
    numeric = fd_laplacian(lambda q: abs(model.psi(q, 0.0, natural)), x) / abs(model.psi(x, 0.0, natural))
    assert float(model.radial_laplacian_ratio(r)) == pytest.approx(numeric, rel=1e-5)


def test_model_properties(central_model):
    assert central_model.kind is ModelKind.CENTRAL_FIELD
    assert central_model.has_axis_pole
    assert central_model.characteristic_length == 1.0
    assert central_model.exclusion_radius == pytest.approx(1e-6)
    assert not WaveModel.central_field(1.0, 1.0, 0, -0.5).has_axis_pole
    assert WaveModel.dirac_string(1.0, 1.0, 1, 0.0).has_vector_potential
    assert not WaveModel.plane_wave((1.0, 0.0, 0.0), PhysicalConstants.natural()).normalizable
    assert not WaveModel.free_gaussian(1.0).is_stationary


def test_plane_wave_energy(natural):
    model = WaveModel.plane_wave((3.0, 0.0, 4.0), natural)
    assert model.energy == pytest.approx(12.5)


def test_model_validation():
    with pytest.raises(PreconditionError):
        WaveModel.central_field(1.0, 1.0, 1.5, -0.5)
    with pytest.raises(PreconditionError):
        WaveModel.central_field(1.0, 0.0, 1, -0.5)
    with pytest.raises(PreconditionError):
        WaveModel.free_gaussian(-1.0)
