import numpy as np
import pytest

from src.contour import (
    ComplexPath,
    complex_action_decompose,
    lagrangian_on_path,
    log_integral,
    mirror_identity_check,
    path_difference,
    phase_along,
    refine_and_unwrap,
    sheet_ledger,
    winding_number,
    winding_report,
    z12,
)
from src.errors import NearPoleError, PreconditionError, UnresolvedWindingError
from src.numerics import Curve3


@pytest.mark.parametrize("turns", [1, 3, -2])
def test_winding_of_circles_around_the_origin(turns):
    assert winding_number(ComplexPath.circle(1.0, turns=turns)) == turns


def test_circle_away_from_the_origin_does_not_wind():
    assert winding_number(ComplexPath.circle(1.0, center=3.0 + 1.0j)) == 0


def test_winding_of_an_open_path():
    with pytest.raises(PreconditionError):
        winding_number(ComplexPath.segment(1.0, 2.0))


def test_fractional_winding_is_unresolved():
    with pytest.raises(UnresolvedWindingError):
        winding_number(ComplexPath(np.array([0.0, 1.0]), np.array([1.0, 1.0j]), closed=True))


def test_log_integral_around_the_origin():
    assert log_integral(ComplexPath.circle(2.0)) == pytest.approx(2.0j * np.pi, rel=1e-12)
    report = winding_report(ComplexPath.circle(0.5, turns=-1))
    assert report.winding == -1
    assert report.total_phase == pytest.approx(-2.0 * np.pi)


def test_log_integral_along_a_segment():
    assert log_integral(ComplexPath.segment(1.0, 2.0)) == pytest.approx(np.log(2.0), rel=1e-13)


def test_log_spiral_selects_the_branch():
    principal = log_integral(ComplexPath.log_spiral(1.0, -1.0))
    wound = log_integral(ComplexPath.log_spiral(1.0, -1.0, windings=1))
    assert principal == pytest.approx(1.0j * np.pi, rel=1e-12)
    assert wound == pytest.approx(3.0j * np.pi, rel=1e-12)


def test_reversed_path_negates_the_integral():
    path = ComplexPath.log_spiral(1.0 + 1.0j, -2.0, windings=2)
    assert log_integral(path.reversed()) == pytest.approx(-log_integral(path), rel=1e-12)


def test_paths_around_opposite_sides_differ_by_one_turn():
    upper = ComplexPath.log_spiral(1.0, -1.0)
    lower = ComplexPath.log_spiral(1.0, -1.0, windings=-1)
    diff = path_difference(upper, lower)
    assert diff.integer == 1
    assert diff.residue < 1e-10
    assert diff.loop_winding == 1


def test_paths_in_the_same_class_agree():
    straight = ComplexPath.segment(1.0, 2.0j, samples=8)
    arc = ComplexPath.log_spiral(1.0, 2.0j)
    diff = path_difference(straight, arc)
    assert diff.integer == 0
    assert diff.residue < 1e-10


def test_concatenate_requires_a_shared_junction():
    with pytest.raises(PreconditionError):
        ComplexPath.segment(1.0, 2.0).concatenate(ComplexPath.segment(3.0, 4.0))


def test_refinement_keeps_argument_steps_small():
    refined = refine_and_unwrap(ComplexPath.polyline([1.0, -1.0 + 0.5j]))
    steps = np.angle(refined.xi[1:] / refined.xi[:-1])
    assert np.all(np.abs(steps) < np.pi / 4)
    assert refined.phase[-1] - refined.phase[0] == pytest.approx(np.angle(-1.0 + 0.5j))


def test_chord_through_the_origin_is_rejected():
    with pytest.raises(NearPoleError):
        refine_and_unwrap(ComplexPath.polyline([1.0, -1.0]))
    with pytest.raises(NearPoleError):
        ComplexPath.segment(0.0, 1.0)


def test_sheet_ledger_counts_turns():
    sheets = sheet_ledger(ComplexPath.circle(1.0, turns=2))
    assert sheets[0] == 0
    assert np.all(np.diff(sheets) >= 0)
    assert sheets.max() >= 1


def test_z12_of_a_full_turn():
    result = z12(1.0, 1.0, ComplexPath.circle(1.0))
    assert result.z == pytest.approx(2.0j * np.pi, rel=1e-12)
    assert result.sheet == 1
    assert result.S12 == pytest.approx(0.0, abs=1e-12)
    assert result.Phi12 == pytest.approx(4.0 * np.pi)


def test_z12_needs_matching_endpoints():
    with pytest.raises(PreconditionError):
        z12(1.0, 3.0, ComplexPath.segment(1.0, 2.0))


def test_mirror_identity():
    for psi12 in (2.0 + 3.0j, -0.4 + 0.1j, 5.0):
        assert mirror_identity_check(psi12) < 1e-12


def test_path_csv(tmp_path):
    path = refine_and_unwrap(ComplexPath.circle(1.0, samples=9))
    frame = path.to_frame()
    assert list(frame.columns) == ["tau", "re", "im", "phase", "sheet"]
    path.to_csv(tmp_path / "loop.csv")
    restored = ComplexPath.from_csv(tmp_path / "loop.csv", closed=True)
    assert winding_number(restored) == 1


@pytest.fixture
def orbit():
    # the flow line through (1, 0, 0.5) turns at dphi/dt = k / rho^2 = 1
    return Curve3.orbit((1.0, 0.0, 0.5), 1.0, 0.0, np.pi)


def test_complex_action_along_the_flow(central_model, natural, orbit):
    action = complex_action_decompose(central_model, orbit, 0.0, np.pi, natural)
    assert action.re_z == pytest.approx(0.0, abs=1e-10)
    assert action.im_z == pytest.approx(1.5 * np.pi, rel=1e-10)
    assert action.endpoint_residual < 1e-8


def test_lagrangian_is_the_phase_rate(central_model, natural, orbit):
    sample = lagrangian_on_path(central_model, orbit, 1.0, natural)
    assert sample.legendre == pytest.approx(1.5, rel=1e-12)
    assert sample.residual < 1e-6


def test_phase_along_the_flow(central_model, natural, orbit):
    path = phase_along(central_model, orbit, 0.0, np.pi, natural)
    assert path.total_phase == pytest.approx(1.5 * np.pi, rel=1e-10)
