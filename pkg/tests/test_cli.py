import json
from pathlib import Path

from src.cli import EXIT_CONFIG, EXIT_FAILED_CHECKS, EXIT_OK, EXIT_WRITE, main
from src.config import SCENARIOS

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def _quick_config(tmp_path, **extra):
    path = tmp_path / "quick.json"
    path.write_text(json.dumps({"scenario": "bohr-table", "bohr": {"Z": [1], "k": [1, 2]}, **extra}))
    return str(path)


def test_list_scenarios(capsys):
    assert main(["--list"]) == EXIT_OK
    out = capsys.readouterr().out
    for name in SCENARIOS:
        assert name in out


def test_run_writes_the_report(tmp_path, capsys):
    out_dir = tmp_path / "out"
    assert main(["--config", str(CONFIG_DIR / "bohr_table.json"), "--out", str(out_dir)]) == EXIT_OK
    report = json.loads((out_dir / "report.json").read_text())
    assert report["scenario"] == "bohr-table"
    assert report["pass"] is True
    assert (out_dir / "summary.csv").exists()
    assert (out_dir / "bohr_table.csv").exists()
    assert "bohr-table" in capsys.readouterr().out


def test_scenario_flag_overrides_the_config(tmp_path):
    out_dir = tmp_path / "out"
    code = main(["--config", _quick_config(tmp_path, samples=20, path_demo={"family_size": 8}),
                 "--scenario", "path-demo", "--out", str(out_dir)])
    assert code == EXIT_OK
    assert json.loads((out_dir / "report.json").read_text())["scenario"] == "path-demo"


def test_failed_checks_exit_with_one(tmp_path, capsys):
    code = main(["--config", _quick_config(tmp_path), "--tolerance-scale", "1e-30", "--out", str(tmp_path / "o")])
    assert code == EXIT_FAILED_CHECKS
    assert "FAILED" in capsys.readouterr().out


def test_invalid_config_exits_with_two(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"scenario": "bohr-table", "tolerances": {"bhor": 1e-3}}))
    assert main(["--config", str(path), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert not (tmp_path / "o").exists()


def test_unwritable_output_exits_with_three(tmp_path):
    blocker = tmp_path / "occupied"
    blocker.write_text("")
    assert main(["--config", _quick_config(tmp_path), "--out", str(blocker)]) == EXIT_WRITE


def test_reports_differ_only_in_the_timestamp(tmp_path):
    config = _quick_config(tmp_path)
    main(["--config", config, "--out", str(tmp_path / "a")])
    main(["--config", config, "--out", str(tmp_path / "b")])
    first = json.loads((tmp_path / "a" / "report.json").read_text())
    second = json.loads((tmp_path / "b" / "report.json").read_text())
    first.pop("timestamp")
    second.pop("timestamp")
    assert first == second
    assert (tmp_path / "a" / "bohr_table.csv").read_text() == (tmp_path / "b" / "bohr_table.csv").read_text()
