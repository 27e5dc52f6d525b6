import numpy as np
import pytest

from src.contour import ComplexPath
from src.errors import PoleError, PreconditionError
from src.numerics import Curve3
from src.transport import (
    TrajectoryFamily,
    characteristic_rhs,
    evolution_phase,
    evolution_rotate,
    integrate_characteristic,
    path_sum,
    rotation_sheet_shift,
    stationary_continuity_residual,
)

START = (1.0, 0.0, 0.5)


def test_characteristic_rhs(natural):
    np.testing.assert_allclose(characteristic_rhs((2.0, 0.0, 1.0), 2, natural), [0.0, -1.0, 0.0])
    with pytest.raises(PoleError):
        characteristic_rhs((0.0, 0.0, 1.0), 1, natural)


def test_characteristic_closes_after_one_period(central_model, natural):
    path = integrate_characteristic(START, 1, natural, density=central_model.density)
    assert path.period == pytest.approx(2.0 * np.pi)
    assert path.measured_period == pytest.approx(path.period, rel=1e-8)
    assert path.radius_drift < 1e-8
    assert path.return_error < 1e-8
    assert path.density_spread < 1e-8
    assert len(path.times) == 1025


@pytest.mark.parametrize("k", [-2, 3])
def test_period_scales_with_the_winding(k, natural):
    start = (0.0, 2.0, -1.0)
    path = integrate_characteristic(start, k, natural, revolutions=2.0)
    assert path.period == pytest.approx(2.0 * np.pi * 4.0 / abs(k))
    assert path.measured_period == pytest.approx(path.period, rel=1e-8)
    assert path.return_error < 1e-8
    np.testing.assert_allclose(path.positions[:, 2], -1.0)


def test_characteristic_without_winding_stays_put(natural):
    path = integrate_characteristic(START, 0, natural, steps_per_revolution=64)
    assert path.period == np.inf
    assert path.return_error == 0.0
    np.testing.assert_allclose(path.positions, np.broadcast_to(START, path.positions.shape))


def test_characteristic_preconditions(natural):
    with pytest.raises(PreconditionError):
        integrate_characteristic(START, 1, natural, steps_per_revolution=32)
    with pytest.raises(PoleError):
        integrate_characteristic((0.0, 0.0, 1.0), 1, natural)


def test_characteristic_csv(natural, tmp_path):
    path = integrate_characteristic(START, 1, natural, steps_per_revolution=64)
    assert list(path.to_frame().columns) == ["t", "x", "y", "z", "f"]
    path.to_csv(tmp_path / "characteristic.csv")
    assert (tmp_path / "characteristic.csv").read_text().startswith("t,x,y,z,f")


def test_axisymmetric_density_is_stationary(central_model, natural, off_axis_points):
    residual = stationary_continuity_residual(central_model.density, 1, off_axis_points[:10], natural)
    assert residual.worst < 1e-6


def test_off_axis_blob_is_not_stationary(natural, off_axis_points):
    blob = lambda x: np.exp(-np.sum((np.asarray(x) - np.array([0.5, 0.0, 0.0])) ** 2, axis=-1))
    residual = stationary_continuity_residual(blob, 1, off_axis_points[:10], natural)
    assert residual.advection > 1e-3


def test_rotation_preserves_the_modulus():
    psi = np.array([1.0 + 1.0j, -0.3j, 2.0])
    rotated = evolution_rotate(psi, 1.3)
    np.testing.assert_allclose(np.abs(rotated), np.abs(psi))
    np.testing.assert_allclose(evolution_rotate(rotated, -0.4), evolution_rotate(psi, 0.9))


def test_rotation_sheet_shift():
    assert rotation_sheet_shift(1.0, 2.0 * np.pi + 0.1) == 1
    assert rotation_sheet_shift(1.0, -0.1) == -1
    assert rotation_sheet_shift(1.0j, np.pi) == 0


def test_evolution_phase_is_the_action(central_model, natural):
    orbit = Curve3.orbit(START, 1.0, 0.0, np.pi)
    phase = evolution_phase(central_model, 0.0, np.pi, orbit, natural)
    assert phase.h_integral == pytest.approx(-0.5 * np.pi, rel=1e-10)
    assert phase.p_dr_integral == pytest.approx(np.pi, rel=1e-10)
    assert phase.action_over_hbar == pytest.approx(1.5 * np.pi, rel=1e-10)
    assert phase.residual < 1e-10


def test_evolution_phase_needs_a_central_field(dirac_model, natural):
    with pytest.raises(PreconditionError):
        evolution_phase(dirac_model, 0.0, 1.0, Curve3.stationary(START, 0.0, 1.0), natural)


def test_single_path_sum():
    family = TrajectoryFamily.rotation_family(1.0 + 1.0j, 0.7, [0], hbar=1.0)
    total = path_sum(family)
    assert abs(total) == pytest.approx(1.0, rel=1e-12)
    assert np.angle(total) == pytest.approx(0.7, rel=1e-12)


def test_windings_interfere():
    family = TrajectoryFamily.rotation_family(2.0, 0.7, [0, 1], hbar=1.0)
    np.testing.assert_allclose(family.actions, [0.7, 0.7 + 2.0 * np.pi], rtol=1e-12)
    assert abs(path_sum(family)) == pytest.approx(1.0, rel=1e-12)
    assert abs(path_sum(family, hbar=2.0)) < 1e-10


def test_family_json_restores_the_sum():
    family = TrajectoryFamily.rotation_family(0.5j, -1.2, [-1, 0, 2], hbar=1.0)
    restored = TrajectoryFamily.from_json(family.to_json())
    assert len(restored) == 3
    assert len(restored.paths) == 3
    assert path_sum(restored) == pytest.approx(path_sum(family), abs=1e-15)


def test_family_validation():
    with pytest.raises(PreconditionError):
        TrajectoryFamily([0.0, 1.0], [1.0], hbar=1.0)
    with pytest.raises(PreconditionError):
        TrajectoryFamily([0.0, 0.0], [1.0, 1.0], hbar=1.0,
                         paths=(ComplexPath.segment(1.0, 2.0), ComplexPath.segment(1.0, 3.0)))
    with pytest.raises(PreconditionError):
        path_sum(TrajectoryFamily([], [], hbar=1.0))
