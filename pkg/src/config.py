"""
Scenario configuration for the batch runner.

A run is described by one JSON document. It is mapped onto a frozen
ScenarioConfig and validated before any computation; unknown keys are
rejected with their path so a typo never silently falls back to a default.
"""

import json
import logging
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, Optional, Tuple

from dotenv import find_dotenv, load_dotenv

from src.constants import UNIT_MODES, PhysicalConstants
from src.errors import ConfigError, PreconditionError
from src.numerics import QUADRATURE_RULES, FDConfig, QuadratureConfig

logger = logging.getLogger(__name__)

OUT_DIR_ENV = "RIEMANN_QUANT_OUT"

SCENARIOS = (
    "central-field",
    "dirac-string",
    "conformal-map",
    "contour-suite",
    "bohr-table",
    "path-demo",
)

DEFAULT_TOLERANCES: Dict[str, float] = {
    "circulation": 1e-10,
    "jacobian": 1e-12,
    "area": 1e-8,
    "path_independence": 1e-6,
    "schrodinger": 1e-6,
    "continuity": 1e-6,
    "hamilton_jacobi": 1e-6,
    "action_phase": 1e-6,
    "characteristic": 1e-8,
    "loop": 1e-10,
    "loop_balance": 1e-8,
    "integer": 1e-6,
    "bohr": 1e-4,
    "bohr_stationary": 1e-6,
    "dirac_flux": 1e-10,
    "gauge": 1e-6,
    "evolution": 1e-6,
    "interference": 1e-12,
    "path_sum": 1e-10,
    "curl": 1e-6,
    "mirror": 1e-12,
    "default": 1e-6,
}

_TOP_KEYS = {
    "scenario", "units", "model", "tolerances", "tolerance_scale", "samples", "seed",
    "out_dir", "fd", "quadrature", "transport", "bohr", "path_demo", "contour", "radii",
}
_MODEL_KEYS = {"nu", "kappa", "k", "energy", "Z", "sigma"}
_FD_KEYS = {"step", "order", "richardson", "laplacian_step"}
_QUADRATURE_KEYS = {"rule", "panels", "points"}
_TRANSPORT_KEYS = {"steps_per_revolution", "revolutions"}
_BOHR_KEYS = {"Z", "k"}
_PATH_DEMO_KEYS = {"family_size"}
_CONTOUR_KEYS = {"pairs"}


@dataclass(frozen=True)
class ModelParams:
    """
    Parameters of the closed-form models.

    energy None means -hbar^2 kappa^2 / 2m. Z is the nuclear charge of the
    Coulomb orbit check and sigma the width of the smoothed flux line in units
    of the characteristic length.
    """

    nu: float = 1.0
    kappa: float = 1.0
    k: int = 1
    energy: Optional[float] = None
    Z: int = 1
    sigma: float = 0.1

    def resolved_energy(self, consts: PhysicalConstants) -> float:
        if self.energy is not None:
            return self.energy
        return -consts.hbar ** 2 * self.kappa ** 2 / (2.0 * consts.m)


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated run description."""

    scenario: str = "central-field"
    units: str = "natural"
    model: ModelParams = ModelParams()
    tolerances: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    tolerance_scale: float = 1.0
    samples: int = 1000
    seed: int = 12345
    out_dir: str = "out"
    fd: FDConfig = FDConfig()
    quadrature: QuadratureConfig = QuadratureConfig()
    steps_per_revolution: int = 1024
    revolutions: float = 1.0
    radii: Tuple[float, ...] = (0.1, 1.0, 10.0)
    bohr_Z: Tuple[int, ...] = (1, 2, 3)
    bohr_k: Tuple[int, ...] = (1, 2, 3, 4, 5)
    family_size: int = 128
    pairs: int = 100

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError("scenario", f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        if self.units not in UNIT_MODES:
            raise ConfigError("units", f"expected one of {UNIT_MODES}, got {self.units!r}")
        if not self.tolerance_scale > 0:
            raise ConfigError("tolerance_scale", "must be positive")
        for name, value in self.tolerances.items():
            if not (isinstance(value, (int, float)) and value > 0):
                raise ConfigError(f"tolerances.{name}", f"must be a positive number, got {value!r}")
        for path, value in (("samples", self.samples), ("transport.steps_per_revolution", self.steps_per_revolution),
                            ("path_demo.family_size", self.family_size), ("contour.pairs", self.pairs)):
            if not (isinstance(value, int) and value > 0):
                raise ConfigError(path, f"must be a positive integer, got {value!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed", f"must be a non-negative integer, got {self.seed!r}")
        if self.steps_per_revolution < 64:
            raise ConfigError("transport.steps_per_revolution", "at least 64 steps are needed")
        if not self.revolutions > 0:
            raise ConfigError("transport.revolutions", "must be positive")
        if not self.radii or any(not r > 0 for r in self.radii):
            raise ConfigError("radii", "loop radii must be positive")
        if not self.bohr_Z or any(z < 1 for z in self.bohr_Z):
            raise ConfigError("bohr.Z", "nuclear charges must be >= 1")
        if not self.bohr_k or any(k < 1 for k in self.bohr_k):
            raise ConfigError("bohr.k", "levels must be >= 1")
        self._check_model()

    def _check_model(self) -> None:
        m = self.model
        if self.scenario in ("central-field", "dirac-string", "path-demo"):
            if not m.kappa > 0:
                raise ConfigError("model.kappa", "must be positive")
            if m.nu < 0:
                raise ConfigError("model.nu", "must be non-negative")
            if int(m.k) != m.k:
                raise ConfigError("model.k", "must be an integer")
        if self.scenario == "dirac-string" and m.k == 0:
            raise ConfigError("model.k", "a flux line needs k != 0")
        if not m.sigma > 0:
            raise ConfigError("model.sigma", "must be positive")
        if isinstance(m.Z, bool) or not isinstance(m.Z, int) or m.Z < 1:
            raise ConfigError("model.Z", f"must be an integer >= 1, got {m.Z!r}")

    def tolerance(self, name: str) -> float:
        """Tolerance `name` multiplied by the global scale."""
        return self.tolerances.get(name, self.tolerances.get("default", 1e-6)) * self.tolerance_scale

    def constants(self) -> PhysicalConstants:
        return PhysicalConstants.from_mode(self.units)

    def echo(self) -> dict:
        """JSON-ready copy of the configuration for the report."""
        data = asdict(self)
        data["tolerances"] = dict(sorted(self.tolerances.items()))
        for key in ("radii", "bohr_Z", "bohr_k"):
            data[key] = list(data[key])
        return data


def _reject_unknown(section: dict, allowed: set, prefix: str) -> None:
    if not isinstance(section, dict):
        raise ConfigError(prefix or "<root>", "expected a JSON object")
    for key in section:
        if key not in allowed:
            raise ConfigError(f"{prefix}.{key}" if prefix else key, "unknown key")


def _build(factory, section: dict, path: str):
    try:
        return factory(**section)
    except ConfigError:
        raise
    except (PreconditionError, TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from exc


def parse_config(data: dict) -> ScenarioConfig:
    """
    Map a decoded JSON document onto ScenarioConfig.

    Args:
        data: Decoded document

    Returns:
        Validated ScenarioConfig

    Raises:
        ConfigError: unknown key or invalid value, with its dotted path
    """
    _reject_unknown(data, _TOP_KEYS, "")
    kwargs = {key: data[key] for key in ("scenario", "units", "samples", "seed", "out_dir", "tolerance_scale")
              if key in data}

    model = data.get("model", {})
    _reject_unknown(model, _MODEL_KEYS, "model")
    kwargs["model"] = _build(ModelParams, model, "model")

    tolerances = data.get("tolerances", {})
    _reject_unknown(tolerances, set(DEFAULT_TOLERANCES), "tolerances")
    kwargs["tolerances"] = {**DEFAULT_TOLERANCES, **tolerances}

    fd = data.get("fd", {})
    _reject_unknown(fd, _FD_KEYS, "fd")
    kwargs["fd"] = _build(FDConfig, fd, "fd")

    quadrature = data.get("quadrature", {})
    _reject_unknown(quadrature, _QUADRATURE_KEYS, "quadrature")
    if "rule" in quadrature and quadrature["rule"] not in QUADRATURE_RULES:
        raise ConfigError("quadrature.rule", f"expected one of {QUADRATURE_RULES}")
    kwargs["quadrature"] = _build(QuadratureConfig, quadrature, "quadrature")

    transport = data.get("transport", {})
    _reject_unknown(transport, _TRANSPORT_KEYS, "transport")
    kwargs.update(transport)

    bohr = data.get("bohr", {})
    _reject_unknown(bohr, _BOHR_KEYS, "bohr")
    if "Z" in bohr:
        kwargs["bohr_Z"] = tuple(bohr["Z"])
    if "k" in bohr:
        kwargs["bohr_k"] = tuple(bohr["k"])

    demo = data.get("path_demo", {})
    _reject_unknown(demo, _PATH_DEMO_KEYS, "path_demo")
    kwargs.update(demo)

    contour = data.get("contour", {})
    _reject_unknown(contour, _CONTOUR_KEYS, "contour")
    kwargs.update(contour)

    if "radii" in data:
        kwargs["radii"] = tuple(float(r) for r in data["radii"])
    return _build(ScenarioConfig, kwargs, "<root>")


def load_config(path: Optional[str]) -> ScenarioConfig:
    """Read and validate a JSON config file; None gives the defaults."""
    if path is None:
        return ScenarioConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    cfg = parse_config(data)
    logger.info("Loaded %s config from %s", cfg.scenario, path)
    return cfg


def apply_overrides(cfg: ScenarioConfig, scenario: Optional[str] = None,
                    tolerance_scale: Optional[float] = None) -> ScenarioConfig:
    """Command-line overrides; re-runs validation."""
    changes = {}
    if scenario is not None:
        changes["scenario"] = scenario
    if tolerance_scale is not None:
        changes["tolerance_scale"] = tolerance_scale
    return replace(cfg, **changes) if changes else cfg


def resolve_out_dir(cli_out: Optional[str], cfg: ScenarioConfig) -> Path:
    """Output directory: --out, then RIEMANN_QUANT_OUT (.env honoured), then the config."""
    if cli_out:
        return Path(cli_out)
    load_dotenv(find_dotenv(usecwd=True))
    env_out = os.getenv(OUT_DIR_ENV)
    if env_out:
        logger.debug("output directory from %s", OUT_DIR_ENV)
        return Path(env_out)
    return Path(cfg.out_dir)
