"""
Batch scenario runner.

    python -m src.cli --config configs/central_field.json --out out/central

Exit codes: 0 all checks passed, 1 a check failed, 2 invalid config,
3 the report could not be written.
"""

import argparse
import logging
from typing import List, Optional

from src.config import SCENARIOS, apply_overrides, load_config, resolve_out_dir
from src.errors import ConfigError, ReportWriteError
from src.report import emit_report
from src.scenarios import SCENARIO_DESCRIPTIONS, run_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED_CHECKS = 1
EXIT_CONFIG = 2
EXIT_WRITE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riemann-quant",
        description="Run verification scenarios and write JSON/CSV reports.",
    )
    parser.add_argument("--config", help="JSON scenario config (defaults apply when omitted)")
    parser.add_argument("--out", help="output directory; overrides RIEMANN_QUANT_OUT and the config")
    parser.add_argument("--scenario", choices=SCENARIOS, help="scenario to run; overrides the config")
    parser.add_argument("--tolerance-scale", type=float, help="multiply every tolerance by this factor")
    parser.add_argument("--list", action="store_true", help="print the available scenarios and exit")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s - %(levelname)s - %(message)s",
    )

    if args.list:
        for name in SCENARIOS:
            print(f"{name:15s} {SCENARIO_DESCRIPTIONS[name]}")
        return EXIT_OK

    try:
        cfg = apply_overrides(load_config(args.config), args.scenario, args.tolerance_scale)
    except ConfigError as exc:
        logger.error("Invalid config: %s", exc)
        return EXIT_CONFIG

    report = run_scenario(cfg)
    out_dir = resolve_out_dir(args.out, cfg)
    try:
        emit_report(report, out_dir)
    except ReportWriteError as exc:
        logger.error("%s", exc)
        return EXIT_WRITE

    summary = report.summary()
    print(f"{cfg.scenario}: {summary['passed']}/{summary['total']} checks passed -> {out_dir}")
    for check in report.failures:
        print(f"  FAILED {check.name}: {check.message or check.anchor}")
    return EXIT_OK if report.passed else EXIT_FAILED_CHECKS


if __name__ == "__main__":
    raise SystemExit(main())
