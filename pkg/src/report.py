"""
Check records, run reports and their serialization.

report.json holds everything; summary.csv has one row per check. Wall-clock
values live only under the `timestamp` key, so two runs of the same config
produce identical files apart from that object.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List

import numpy as np
import pandas as pd

from src.errors import ReportWriteError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CSV_FLOAT_FORMAT = "%.12e"


@dataclass(frozen=True)
class Check:
    """
    One verified identity.

    `anchor` states the identity in a few symbols.
    """

    name: str
    anchor: str
    computed: float
    expected: float
    tolerance: float
    passed: bool
    message: str = ""

    def __post_init__(self):
        object.__setattr__(self, "computed", _as_float(self.computed))
        object.__setattr__(self, "expected", _as_float(self.expected))
        object.__setattr__(self, "tolerance", _as_float(self.tolerance))
        object.__setattr__(self, "passed", bool(self.passed))

    @classmethod
    def residual(cls, name: str, anchor: str, value: float, tolerance: float, message: str = "") -> "Check":
        """Residual that must stay below the tolerance."""
        value = float(value)
        return cls(name, anchor, value, 0.0, tolerance, bool(value < tolerance), message)

    @classmethod
    def close(cls, name: str, anchor: str, computed: float, expected: float, tolerance: float,
              relative: bool = True, message: str = "") -> "Check":
        """|computed - expected| within tolerance, relative to |expected| unless it is zero."""
        computed, expected = float(computed), float(expected)
        gap = abs(computed - expected)
        if relative and expected != 0:
            gap /= abs(expected)
        return cls(name, anchor, computed, expected, tolerance, bool(gap <= tolerance), message)

    @classmethod
    def exact(cls, name: str, anchor: str, computed, expected, message: str = "") -> "Check":
        """Integer or boolean outcomes."""
        return cls(name, anchor, computed, expected, 0.0, bool(computed == expected), message)

    @classmethod
    def failed(cls, name: str, anchor: str, message: str) -> "Check":
        return cls(name, anchor, math.nan, math.nan, math.nan, False, message)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "computed": _json_value(self.computed),
            "expected": _json_value(self.expected),
            "tolerance": _json_value(self.tolerance),
            "pass": self.passed,
            "message": self.message,
        }


def _as_float(value) -> float:
    if isinstance(value, (bool, np.bool_)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        raise TypeError("complex check values must be split into real quantities")
    return float(value)


def _json_value(value):
    """Floats with NaN/inf as null; complex as {re, im}; arrays as lists."""
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": _json_value(value.real), "im": _json_value(value.imag)}
    if isinstance(value, np.ndarray):
        return [_json_value(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _json_value(v) for k, v in value.items()}
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


@dataclass
class Report:
    """Checks of one scenario run with its data products."""

    scenario: str
    checks: List[Check]
    config: dict
    frames: Dict[str, pd.DataFrame] = field(default_factory=dict)
    files: Dict[str, str] = field(default_factory=dict)
    started_at: str = ""
    runtime_s: float = 0.0

    def __post_init__(self):
        self.checks = sorted(self.checks, key=lambda c: c.name)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[Check]:
        return [c for c in self.checks if not c.passed]

    def summary(self) -> dict:
        failed = len(self.failures)
        return {"total": len(self.checks), "passed": len(self.checks) - failed, "failed": failed}

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "scenario": self.scenario,
            "pass": self.passed,
            "summary": self.summary(),
            "checks": [c.to_dict() for c in self.checks],
            "config": _json_value(self.config),
            "data_files": sorted(list(self.frames) + list(self.files)),
            "timestamp": {"started_at": self.started_at, "runtime_s": round(self.runtime_s, 6)},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    def summary_frame(self) -> pd.DataFrame:
        columns = ["name", "anchor", "computed", "expected", "tolerance", "pass", "message"]
        rows = [
            [c.name, c.anchor, c.computed, c.expected, c.tolerance, c.passed, c.message]
            for c in self.checks
        ]
        return pd.DataFrame(rows, columns=columns)


def emit_report(report: Report, out_dir) -> List[Path]:
    """
    Write report.json, summary.csv and the scenario data files.

    Args:
        report: Finished report
        out_dir: Output directory, created when missing

    Returns:
        Paths written, in writing order

    Raises:
        ReportWriteError: the directory or a file cannot be written
    """
    out = Path(out_dir)
    written: List[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        target = out / "report.json"
        target.write_text(report.to_json(), encoding="utf-8")
        written.append(target)

        target = out / "summary.csv"
        report.summary_frame().to_csv(target, index=False, float_format=CSV_FLOAT_FORMAT)
        written.append(target)

        for name, frame in sorted(report.frames.items()):
            target = out / name
            frame.to_csv(target, index=False, float_format=CSV_FLOAT_FORMAT)
            written.append(target)

        for name, text in sorted(report.files.items()):
            target = out / name
            target.write_text(text, encoding="utf-8")
            written.append(target)
    except OSError as exc:
        raise ReportWriteError(f"cannot write report to {out}: {exc}") from exc

    logger.info("Wrote %d files to %s", len(written), out)
    return written
