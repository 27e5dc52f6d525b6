import json
from pathlib import Path

import pytest

from src.config import (
    DEFAULT_TOLERANCES,
    OUT_DIR_ENV,
    SCENARIOS,
    ModelParams,
    ScenarioConfig,
    apply_overrides,
    load_config,
    parse_config,
    resolve_out_dir,
)
from src.errors import ConfigError

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def test_defaults():
    cfg = ScenarioConfig()
    assert cfg.scenario == "central-field"
    assert cfg.units == "natural"
    assert cfg.tolerance("loop") == DEFAULT_TOLERANCES["loop"]
    assert cfg.tolerance("no-such-check") == DEFAULT_TOLERANCES["default"]
    assert cfg.constants().mode == "natural"


def test_tolerance_scale_multiplies_every_tolerance():
    cfg = parse_config({"tolerance_scale": 10.0, "tolerances": {"loop": 1e-9}})
    assert cfg.tolerance("loop") == pytest.approx(1e-8)
    assert cfg.tolerance("bohr") == pytest.approx(1e-3)


def test_model_energy_defaults_to_the_bound_state(natural):
    assert ModelParams(kappa=2.0).resolved_energy(natural) == pytest.approx(-2.0)
    assert ModelParams(energy=0.3).resolved_energy(natural) == 0.3


def test_sections_are_mapped():
    cfg = parse_config({
        "scenario": "bohr-table",
        "units": "si",
        "fd": {"step": 1e-4, "order": 4},
        "quadrature": {"rule": "simpson", "panels": 8},
        "transport": {"steps_per_revolution": 256, "revolutions": 2.0},
        "bohr": {"Z": [1], "k": [1, 2]},
        "path_demo": {"family_size": 16},
        "contour": {"pairs": 5},
        "radii": [0.5, 2],
    })
    assert cfg.fd.order == 4
    assert cfg.quadrature.rule == "simpson"
    assert cfg.steps_per_revolution == 256
    assert cfg.bohr_Z == (1,)
    assert cfg.bohr_k == (1, 2)
    assert cfg.family_size == 16
    assert cfg.pairs == 5
    assert cfg.radii == (0.5, 2.0)


@pytest.mark.parametrize(
    "document, path",
    [
        ({"colour": "red"}, "colour"),
        ({"model": {"mass": 1}}, "model.mass"),
        ({"tolerances": {"looop": 1e-3}}, "tolerances.looop"),
        ({"fd": {"stepsize": 1e-3}}, "fd.stepsize"),
        ({"scenario": "everything"}, "scenario"),
        ({"units": "cgs"}, "units"),
        ({"tolerances": {"loop": -1.0}}, "tolerances.loop"),
        ({"transport": {"steps_per_revolution": 10}}, "transport.steps_per_revolution"),
        ({"quadrature": {"rule": "trapezoid"}}, "quadrature.rule"),
        ({"fd": {"order": 3}}, "fd"),
        ({"scenario": "dirac-string", "model": {"k": 0}}, "model.k"),
        ({"model": {"Z": 0}}, "model.Z"),
        ({"model": {"Z": 1.5}}, "model.Z"),
        ({"model": {"sigma": 0.0}}, "model.sigma"),
        ({"bohr": {"k": [0, 1]}}, "bohr.k"),
        ({"radii": [1.0, -1.0]}, "radii"),
        ({"seed": -3}, "seed"),
    ],
)
def test_invalid_documents_name_the_field(document, path):
    with pytest.raises(ConfigError) as info:
        parse_config(document)
    assert info.value.path == path


def test_shipped_configs_are_valid():
    files = sorted(CONFIG_DIR.glob("*.json"))
    assert {load_config(str(f)).scenario for f in files} == set(SCENARIOS)


def test_missing_or_broken_files(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "absent.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{\"scenario\": ")
    with pytest.raises(ConfigError) as info:
        load_config(str(broken))
    assert info.value.path == "<file>"


def test_no_config_means_defaults():
    assert load_config(None) == ScenarioConfig()


def test_overrides_are_validated():
    cfg = apply_overrides(ScenarioConfig(), scenario="path-demo", tolerance_scale=2.0)
    assert cfg.scenario == "path-demo"
    assert cfg.tolerance_scale == 2.0
    with pytest.raises(ConfigError):
        apply_overrides(cfg, tolerance_scale=0.0)


def test_echo_is_json_ready():
    echoed = json.loads(json.dumps(ScenarioConfig().echo()))
    assert echoed["model"]["k"] == 1
    assert echoed["radii"] == [0.1, 1.0, 10.0]
    assert list(echoed["tolerances"]) == sorted(DEFAULT_TOLERANCES)


def test_output_directory_precedence(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = ScenarioConfig(out_dir="from-config")
    monkeypatch.setenv(OUT_DIR_ENV, "from-env")
    assert resolve_out_dir("from-cli", cfg) == Path("from-cli")
    assert resolve_out_dir(None, cfg) == Path("from-env")
    monkeypatch.delenv(OUT_DIR_ENV)
    assert resolve_out_dir(None, cfg) == Path("from-config")


def test_output_directory_from_dotenv(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv(OUT_DIR_ENV, "placeholder")
    monkeypatch.delenv(OUT_DIR_ENV)
    (tmp_path / ".env").write_text(f"{OUT_DIR_ENV}=from-dotenv\n")
    assert resolve_out_dir(None, ScenarioConfig()) == Path("from-dotenv")
