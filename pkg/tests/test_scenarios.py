import json

import numpy as np
import pytest

from src.config import SCENARIOS, parse_config
from src.errors import PreconditionError
from src.report import Check
from src.scenarios import (
    SCENARIO_DESCRIPTIONS,
    SUITES,
    Task,
    _outcome,
    run_scenario,
    run_tasks,
    sample_off_axis_points,
)

QUICK = {"samples": 40, "path_demo": {"family_size": 16}, "contour": {"pairs": 12}, "radii": [0.5, 2.0]}

EXPECTED_DATA = {
    "central-field": {"fields.csv", "characteristic.csv", "loop.csv"},
    "dirac-string": {"fields.csv", "loop.csv"},
    "conformal-map": {"fields.csv"},
    "contour-suite": {"loop.csv"},
    "bohr-table": {"bohr_table.csv"},
    "path-demo": {"family.json"},
}


def _config(scenario, **extra):
    return parse_config({"scenario": scenario, **QUICK, **extra})


def test_every_scenario_has_a_suite():
    assert set(SUITES) == set(SCENARIOS) == set(SCENARIO_DESCRIPTIONS)


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_scenario_passes(scenario):
    report = run_scenario(_config(scenario))
    failures = [(c.name, c.computed, c.tolerance, c.message) for c in report.failures]
    assert report.passed, failures
    assert set(report.frames) | set(report.files) == EXPECTED_DATA[scenario]
    names = [c.name for c in report.checks]
    assert names == sorted(names)
    assert len(set(names)) == len(names)


def test_bohr_table_in_si_units():
    report = run_scenario(_config("bohr-table", units="si", bohr={"Z": [1, 2], "k": [1, 2, 3]}))
    assert report.passed
    assert len(report.frames["bohr_table.csv"]) == 6


def test_flux_line_with_negative_winding():
    report = run_scenario(_config("dirac-string", model={"k": -3}))
    assert report.passed, [c.name for c in report.failures]


def test_flux_line_width_comes_from_the_model():
    narrow = run_scenario(_config("dirac-string"))
    assert "dirac.regularized_delta" not in {c.name for c in narrow.failures}
    wide = run_scenario(_config("dirac-string", model={"sigma": 2.0}))
    assert "dirac.regularized_delta" in {c.name for c in wide.failures}


@pytest.mark.parametrize("Z", [1, 2])
def test_flux_line_coulomb_orbit(Z):
    report = run_scenario(_config("dirac-string", model={"Z": Z}))
    names = {c.name for c in report.checks}
    assert {"dirac.coulomb_energy", "dirac.coulomb_orbit", "dirac.coulomb_off_orbit",
            "dirac.potential_closed_form"} <= names
    assert report.passed, [c.name for c in report.failures]


def test_central_field_without_winding():
    report = run_scenario(_config("central-field", model={"k": 0}))
    names = {c.name for c in report.checks}
    assert "quantization.loop_balance" not in names
    assert "characteristic.stationary" in names
    assert report.passed, [c.name for c in report.failures]


def test_reruns_are_identical():
    cfg = _config("contour-suite")
    first = run_scenario(cfg, max_workers=1).to_dict()
    second = run_scenario(cfg, max_workers=4).to_dict()
    first.pop("timestamp")
    second.pop("timestamp")
    assert json.dumps(first, sort_keys=True) == json.dumps(second, sort_keys=True)


def test_seed_changes_the_samples():
    a = sample_off_axis_points(np.random.default_rng(1), 20, 0.2, 5.0, 0.1)
    b = sample_off_axis_points(np.random.default_rng(2), 20, 0.2, 5.0, 0.1)
    assert a.shape == (20, 3)
    assert np.all(np.hypot(a[:, 0], a[:, 1]) >= 0.1)
    assert not np.allclose(a, b)


def test_failing_task_becomes_a_failed_check():
    def broken():
        raise PreconditionError("bad input")

    merged = run_tasks([
        Task("ok", "1 = 1", lambda: _outcome(Check.exact("ok", "1 = 1", 1, 1))),
        Task("broken", "never", broken),
    ])
    by_name = {c.name: c for c in merged.checks}
    assert by_name["ok"].passed
    assert not by_name["broken"].passed
    assert "PreconditionError" in by_name["broken"].message


def test_programming_errors_are_not_swallowed():
    def typo():
        return {}["missing"]

    with pytest.raises(KeyError):
        run_tasks([Task("typo", "never", typo)])
