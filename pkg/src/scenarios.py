"""
Verification Scenarios

Each scenario builds a list of independent tasks. A task computes one or more
checks and may contribute a data file. Tasks run on a thread pool; a task that
raises is recorded as a failed check and the run continues. Random inputs are
drawn from the seeded generator before any task starts, so the outcome does
not depend on scheduling.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import constants as codata

from src.config import ScenarioConfig
from src.conformal import (
    StripDomain,
    area_integral,
    conformality_defect,
    forward_map,
    inverse_map,
    jacobian,
    jacobian_continuity_residual,
    univalence_check,
    z_plane_univalent,
)
from src.constants import PhysicalConstants
from src.contour import (
    ComplexPath,
    complex_action_decompose,
    lagrangian_on_path,
    log_integral,
    mirror_identity_check,
    path_difference,
    refine_and_unwrap,
    sheet_ledger,
    winding_number,
    z12,
)
from src.errors import RiemannQuantError
from src.madelung import (
    action_phase_check,
    classical_potential_chi,
    continuity_residual,
    decompose,
    energy_and_hj,
    helmholtz_curl_scan,
    log_density_rate_residual,
    normalized_residual,
    potential_U,
    quantum_potential,
    schrodinger_residual,
    track_velocity_potential,
)
from src.models import WaveModel
from src.numerics import Curve3, FDConfig, fd_laplacian
from src.quantization import (
    LoopSpec,
    angular_momentum,
    bohr_model,
    bohr_table,
    circulation_of_angle_gradient,
    coulomb_energy,
    delta_field_consistency,
    dirac_flux_and_charge,
    dirac_vector_potential,
    gauge_check,
    loop_action_decomposition,
    momentum_loop_integral,
    orbital_energy,
    regularized_string_flux,
)
from src.report import Check, Report
from src.transport import (
    TrajectoryFamily,
    evolution_phase,
    evolution_rotate,
    integrate_characteristic,
    path_sum,
    rotation_sheet_shift,
    stationary_continuity_residual,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi

SCENARIO_DESCRIPTIONS = {
    "central-field": "Madelung residuals, Schrodinger identity, characteristics and loop quantization of the vortex field",
    "dirac-string": "flux line: gauge, flux, magnetic charge and the field with a vector potential",
    "conformal-map": "Jacobian law, univalence strips and the area identity of exp(M/2)",
    "contour-suite": "winding numbers, path independence modulo 2 pi i, mirror identity and complex action",
    "bohr-table": "orbit radii and energies for k = 1..5, Z = 1..3",
    "path-demo": "rotation evolution operator and finite path sums",
}


@dataclass
class Outcome:
    checks: List[Check] = field(default_factory=list)
    frames: Dict[str, pd.DataFrame] = field(default_factory=dict)
    files: Dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Task:
    name: str
    anchor: str
    run: Callable[[], Outcome]


def _outcome(*checks: Check, frames: Optional[Dict[str, pd.DataFrame]] = None,
             files: Optional[Dict[str, str]] = None) -> Outcome:
    return Outcome(list(checks), dict(frames or {}), dict(files or {}))


def _guarded(task: Task) -> Outcome:
    """Run a task; computation errors become a failed check named after it."""
    try:
        return task.run()
    except (RiemannQuantError, ArithmeticError, ValueError) as exc:
        logger.warning("Task %s failed: %s: %s", task.name, type(exc).__name__, exc)
        return _outcome(Check.failed(task.name, task.anchor, f"{type(exc).__name__}: {exc}"))


def run_tasks(tasks: Sequence[Task], max_workers: Optional[int] = None) -> Outcome:
    """Run tasks concurrently and merge their outcomes in task order."""
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        outcomes = list(pool.map(_guarded, tasks))
    merged = Outcome()
    for outcome in outcomes:
        merged.checks.extend(outcome.checks)
        merged.frames.update(outcome.frames)
        merged.files.update(outcome.files)
    return merged


def sample_off_axis_points(rng: np.random.Generator, count: int, r_min: float, r_max: float,
                           rho_min: float) -> np.ndarray:
    """
    Points uniform in direction and radius, drawn until `count` lie at
    cylindrical radius >= rho_min.
    """
    kept: List[np.ndarray] = []
    total = 0
    while total < count:
        n = 2 * (count - total)
        r = rng.uniform(r_min, r_max, n)
        cos_theta = rng.uniform(-1.0, 1.0, n)
        azimuth = rng.uniform(0.0, TWO_PI, n)
        sin_theta = np.sqrt(1.0 - cos_theta ** 2)
        pts = np.column_stack([
            r * sin_theta * np.cos(azimuth),
            r * sin_theta * np.sin(azimuth),
            r * cos_theta,
        ])
        pts = pts[np.hypot(pts[:, 0], pts[:, 1]) >= rho_min]
        kept.append(pts)
        total += len(pts)
    return np.concatenate(kept)[:count]


def _max_over(func: Callable[[np.ndarray], float], points: np.ndarray) -> float:
    return float(max(func(p) for p in points))


def _field_model(cfg: ScenarioConfig, consts: PhysicalConstants, dirac: bool = False) -> WaveModel:
    m = cfg.model
    factory = WaveModel.dirac_string if dirac else WaveModel.central_field
    return factory(m.nu, m.kappa, int(m.k), m.resolved_energy(consts))


def _orbit(model: WaveModel, consts: PhysicalConstants, fraction: float = 0.5) -> Tuple[Curve3, float]:
    """Trajectory moving with <v> at rho = L for a fraction of a period (at rest when k = 0)."""
    L = model.characteristic_length
    start = (L, 0.0, 0.2 * L)
    if model.k == 0:
        span = consts.m * L * L / consts.hbar
        return Curve3.stationary(start, 0.0, span), span
    omega = consts.hbar * model.k / (consts.m * L * L)
    span = fraction * TWO_PI / abs(omega)
    return Curve3.orbit(start, omega, 0.0, span), span


# ---------------------------------------------------------------------------
# central-field
# ---------------------------------------------------------------------------

def central_field_suite(cfg: ScenarioConfig, consts: PhysicalConstants, rng: np.random.Generator) -> List[Task]:
    """Identities of the stationary vortex field f = C r^nu exp(-kappa r), phi = k phi_az - E t / hbar."""
    model = _field_model(cfg, consts)
    L = model.characteristic_length
    k = model.k
    points = sample_off_axis_points(rng, cfg.samples, 0.2 * L, 5.0 * L, 0.1 * L)
    tol = cfg.tolerance

    def circulation() -> Outcome:
        worst = max(
            abs(circulation_of_angle_gradient(LoopSpec(1.0, n)) - TWO_PI * n) for n in range(-3, 4)
        )
        return _outcome(Check.residual("circulation.k_fold", "oint (grad phi_az, d rho) = 2 pi k", worst,
                                       tol("circulation")))

    def schrodinger() -> Outcome:
        value = _max_over(lambda p: schrodinger_residual(model, p, 0.0, consts), points)
        return _outcome(Check.residual("madelung.schrodinger", "Schrodinger equation with recovered U",
                                       value, tol("schrodinger")))

    def continuity() -> Outcome:
        value = _max_over(lambda p: continuity_residual(model, p, 0.0, consts, cfg.fd), points)
        return _outcome(Check.residual("madelung.continuity", "df/dt + div(f <v>) = 0", value, tol("continuity")))

    def hamilton_jacobi() -> Outcome:
        value = _max_over(lambda p: energy_and_hj(model, p, 0.0, consts).hj_residual, points)
        return _outcome(Check.residual("madelung.hamilton_jacobi", "(hbar/2) dPhi/dt + W = 0", value,
                                       tol("hamilton_jacobi")))

    def log_density() -> Outcome:
        value = _max_over(lambda p: log_density_rate_residual(model, p, 0.0, consts), points)
        return _outcome(Check.residual("madelung.log_density_rate", "dS/dt = -Q along the flow", value,
                                       tol("continuity")))

    def action_phase() -> Outcome:
        value = _max_over(lambda p: action_phase_check(model, p, 0.0, consts), points[:4])
        return _outcome(Check.residual("madelung.action_phase", "hbar Phi / 2 = integral of L dt + const",
                                       value, tol("action_phase")))

    def curl() -> Outcome:
        scan = helmholtz_curl_scan(model, points[:50], 0.0, consts, cfg.fd)
        return _outcome(Check.residual("madelung.potential_curl", "rot <v_p> = 0 off the axis", scan.max_curl,
                                       tol("curl"), f"{scan.excluded} points excluded at the phase cut"))

    def potential_track() -> Outcome:
        angles = 0.3 + np.linspace(0.0, TWO_PI, 257)
        ring = np.column_stack([L * np.cos(angles), L * np.sin(angles), np.full_like(angles, 0.2 * L)])
        track = track_velocity_potential(model, ring, 0.0, consts)
        turns = (track.Phi[-1] - track.Phi[0]) / (2.0 * TWO_PI)
        return _outcome(
            Check.close("madelung.potential_turns", "Phi gains 4 pi k per revolution", turns, k,
                        tol("loop"), relative=False),
            Check.exact("madelung.branch_index", "Phi - 2 phi = 2 pi n", int(track.branch_index[-1]), 2 * k),
        )

    def characteristics() -> Outcome:
        starts = [(0.5 * L, 0.0, 0.0), (L, 0.0, 0.25 * L), (2.0 * L * np.cos(1.0), 2.0 * L * np.sin(1.0), -0.5 * L)]
        if k == 0:
            return _outcome(Check.exact("characteristic.stationary", "dr/dt = 0 for k = 0",
                                        integrate_characteristic(starts[0], k, consts).return_error, 0.0))
        density = lambda x: model.density(x)
        runs = [
            integrate_characteristic(s, k, consts, cfg.steps_per_revolution, cfg.revolutions, density)
            for s in starts
        ]
        limit = tol("characteristic")
        period_error = max(abs(c.measured_period - c.period) / c.period for c in runs)
        return _outcome(
            Check.residual("characteristic.return", "orbit closes after one period",
                           max(c.return_error for c in runs), limit),
            Check.residual("characteristic.radius", "rho is constant along dr/dt = -<v>",
                           max(c.radius_drift for c in runs), limit),
            Check.residual("characteristic.density", "f is constant along characteristics",
                           max(c.density_spread for c in runs), limit),
            Check.residual("characteristic.period", "T = 2 pi m rho0^2 / (hbar |k|)", period_error, limit),
            frames={"characteristic.csv": runs[0].to_frame()},
        )

    def stationary() -> Outcome:
        profile = lambda q: float(model.density(q))
        positive = stationary_continuity_residual(profile, k, points, consts, cfg.fd, L)
        control = stationary_continuity_residual(lambda q: float(q[0]), k or 1, points[:100], consts, cfg.fd, L)
        limit = tol("continuity")
        return _outcome(
            Check.residual("transport.advection", "(<v>, grad f) = 0", positive.advection, limit),
            Check.residual("transport.divergence", "div(f grad u) = 0", positive.divergence, limit),
            Check(
                "transport.negative_control",
                "f = rho cos(phi_az) is not transported",
                control.advection,
                1e6 * positive.worst,
                limit,
                control.advection > limit and control.advection >= 1e6 * positive.worst,
            ),
        )

    def loops() -> Outcome:
        expected = consts.h * k
        rows = []
        for R in cfg.radii:
            report = momentum_loop_integral(model, LoopSpec(R * L), consts, tolerance=tol("integer"))
            rows.append({"radius": R * L, **report.to_dict()})
        frame = pd.DataFrame(rows)
        unit = abs(expected) if k else consts.h
        spread = float(np.max(np.abs(frame["loop_integral"] - expected))) / unit
        recovered = frame["k_recovered"].to_numpy()
        mismatches = sum(
            momentum_loop_integral(
                WaveModel.central_field(model.nu, model.kappa, n, model.energy), LoopSpec(L), consts,
                tolerance=tol("integer"),
            ).k_recovered != n
            for n in range(-3, 4)
        )
        return _outcome(
            Check.residual("quantization.loop_radius_independence", "oint (<p>, dr) = 2 pi hbar k", spread,
                           tol("loop")),
            Check.exact("quantization.loop_k_recovered", "oint (<p>, dr) / h = k", int(np.all(recovered == k)), 1),
            Check.exact("quantization.integer_recovery", "k recovered for k = -3..3", int(mismatches), 0),
            frames={"loop.csv": frame},
        )

    def loop_balance() -> Outcome:
        decomposition = loop_action_decomposition(model, LoopSpec(L), consts)
        return _outcome(Check.residual("quantization.loop_balance", "oint (p_p, dr) = S + H0 T = h k",
                                       decomposition.balance_residual, tol("loop_balance")))

    def angular() -> Outcome:
        Lz = angular_momentum(model, (L, 0.0, 0.3 * L), consts)[2]
        return _outcome(Check.close("quantization.angular_momentum", "[rho, <p>]_z = hbar k", Lz, consts.hbar * k,
                                    tol("default"), relative=bool(k)))

    def fields() -> Outcome:
        rows = []
        for p in points:
            d = decompose(model, p, 0.0, consts)
            rows.append({
                "x": p[0], "y": p[1], "z": p[2],
                "f": d.f, "S": d.S, "phi": d.phi, "Phi": d.Phi,
                "vx": d.v[0], "vy": d.v[1], "vz": d.v[2], "Q": d.Q,
                "U": potential_U(model, p, 0.0, consts),
                "e_chi": classical_potential_chi(model, p, 0.0, consts),
                "quantum_potential": quantum_potential(model, p, 0.0, consts),
            })
        return _outcome(frames={"fields.csv": pd.DataFrame(rows)})

    tasks = [
        Task("circulation.k_fold", "oint (grad phi_az, d rho) = 2 pi k", circulation),
        Task("madelung.schrodinger", "Schrodinger equation with recovered U", schrodinger),
        Task("madelung.continuity", "df/dt + div(f <v>) = 0", continuity),
        Task("madelung.hamilton_jacobi", "(hbar/2) dPhi/dt + W = 0", hamilton_jacobi),
        Task("madelung.log_density_rate", "dS/dt = -Q along the flow", log_density),
        Task("madelung.action_phase", "hbar Phi / 2 = integral of L dt + const", action_phase),
        Task("madelung.potential_curl", "rot <v_p> = 0 off the axis", curl),
        Task("madelung.potential_track", "Phi gains 4 pi k per revolution", potential_track),
        Task("characteristic", "dr/dt = -<v>", characteristics),
        Task("transport.stationary", "(<v>, grad f) = 0", stationary),
        Task("quantization.loops", "oint (<p>, dr) = 2 pi hbar k", loops),
        Task("quantization.angular_momentum", "[rho, <p>]_z = hbar k", angular),
        Task("fields", "Madelung fields", fields),
    ]
    if k != 0:
        tasks.append(Task("quantization.loop_balance", "oint (p_p, dr) = S + H0 T = h k", loop_balance))
    return tasks


# ---------------------------------------------------------------------------
# dirac-string
# ---------------------------------------------------------------------------

def dirac_string_suite(cfg: ScenarioConfig, consts: PhysicalConstants, rng: np.random.Generator) -> List[Task]:
    """Field with a quantized flux line A = -hbar k / (q_e rho) e_phi and real phase."""
    model = _field_model(cfg, consts, dirac=True)
    L = model.characteristic_length
    k = model.k
    points = sample_off_axis_points(rng, cfg.samples, 0.2 * L, 5.0 * L, 0.1 * L)
    tol = cfg.tolerance

    def schrodinger() -> Outcome:
        value = _max_over(lambda p: schrodinger_residual(model, p, 0.0, consts), points)
        return _outcome(Check.residual("dirac.schrodinger", "Schrodinger equation with A and recovered U", value,
                                       tol("schrodinger")))

    def continuity() -> Outcome:
        value = _max_over(lambda p: continuity_residual(model, p, 0.0, consts, cfg.fd), points)
        return _outcome(Check.residual("dirac.continuity", "df/dt + div(f gamma A) = 0", value, tol("continuity")))

    def hamilton_jacobi() -> Outcome:
        value = _max_over(lambda p: energy_and_hj(model, p, 0.0, consts).hj_residual, points)
        return _outcome(Check.residual("dirac.hamilton_jacobi", "(hbar/2) dPhi/dt + W = 0", value,
                                       tol("hamilton_jacobi")))

    def potential_closed_form() -> Outcome:
        fd4 = replace(cfg.fd, order=4)
        amplitude = lambda q: np.abs(model.psi(q, 0.0, consts))
        floor = consts.hbar ** 2 / (consts.m * L * L)
        worst = 0.0
        for p in points[:200]:
            ratio = float(fd_laplacian(amplitude, p, fd4, L)) / float(amplitude(p))
            closed = model.energy + consts.hbar ** 2 / (2.0 * consts.m) * ratio
            worst = max(worst, normalized_residual(potential_U(model, p, 0.0, consts), -closed, floor=floor))
        return _outcome(Check.residual("dirac.potential_closed_form", "U = E + (hbar^2/2m) Delta|Psi| / |Psi|",
                                       worst, tol("schrodinger")))

    def coulomb_orbit() -> Outcome:
        Z, n = cfg.model.Z, abs(k)
        level = bohr_model(Z, n, consts, cfg.fd)
        orbit_model = WaveModel.dirac_string(model.nu, 1.0 / level.radius, k, level.energy)
        coulomb = lambda x: coulomb_energy(float(np.linalg.norm(x)), Z, consts)
        radii = level.radius * np.array([0.5, 1.0, 2.0])
        balances = [
            energy_and_hj(orbit_model, (r, 0.0, 0.0), 0.0, consts, potential_energy=coulomb) for r in radii
        ]
        drift = max(abs(b.W - orbital_energy(r, Z, n, consts)) for b, r in zip(balances, radii)) / abs(level.energy)
        off_orbit = min(balances[0].hj_residual, balances[2].hj_residual)
        return _outcome(
            Check.residual("dirac.coulomb_energy", "W = hbar^2 k^2 / (2 m rho^2) - Z e^2 / (4 pi eps0 r)", drift,
                           tol("hamilton_jacobi")),
            Check.residual("dirac.coulomb_orbit", "(hbar/2) dPhi/dt + W = 0 at r = r_k",
                           balances[1].hj_residual, tol("bohr_stationary")),
            Check.exact("dirac.coulomb_off_orbit", "(hbar/2) dPhi/dt + W != 0 off r_k",
                        bool(off_orbit > tol("bohr_stationary")), True),
        )

    def flux() -> Outcome:
        drift = delta_field_consistency(k, [R * L for R in cfg.radii], consts)
        rows = []
        for R in cfg.radii:
            report = dirac_flux_and_charge(LoopSpec(R * L), k, consts)
            rows.append({"radius": R * L, **report.to_dict()})
        return _outcome(
            Check.residual("dirac.flux_radius_independence", "flux = -2 pi hbar k / q_e", drift, tol("dirac_flux")),
            frames={"loop.csv": pd.DataFrame(rows)},
        )

    def charge() -> Outcome:
        report = dirac_flux_and_charge(LoopSpec(L), k, consts)
        mismatches = sum(
            dirac_flux_and_charge(LoopSpec(1.0), n, consts).dirac_k != n for n in range(-5, 6) if n
        )
        units = abs(report.q_m_wb - consts.mu_0 * report.q_m_am) / abs(report.q_m_wb)
        return _outcome(
            Check.exact("dirac.k_recovered", "q_e q_m / (2 pi hbar) = k", report.dirac_k, k),
            Check.exact("dirac.k_range", "k recovered for k = -5..5", int(mismatches), 0),
            Check.residual("dirac.charge_residue", "q_e q_m / (2 pi hbar) is an integer", report.residue,
                           tol("integer")),
            Check.residual("dirac.charge_units", "q_m[Wb] = mu_0 q_m[A m]", units, tol("dirac_flux")),
        )

    def divergence() -> Outcome:
        worst = 0.0
        for p in points[:200]:
            sample = dirac_vector_potential(p, k, consts, cfg.fd)
            rho = float(np.hypot(p[0], p[1]))
            worst = max(worst, abs(sample.div_A) * rho / sample.scale)
        return _outcome(Check.residual("dirac.div_A", "div A = 0 off the axis", worst, tol("gauge")))

    def gauges() -> Outcome:
        residuals = [gauge_check(model, p, 0.0, consts, cfg.fd) for p in points[:200]]
        return _outcome(
            Check.residual("gauge.coulomb", "div A = 0", max(r.coulomb for r in residuals), tol("gauge")),
            Check.residual("gauge.lorenz", "(eps mu / c^2) dchi/dt + div A = 0",
                           max(r.lorenz for r in residuals), tol("gauge")),
        )

    def momentum_loop() -> Outcome:
        report = momentum_loop_integral(model, LoopSpec(L), consts, tolerance=tol("integer"))
        return _outcome(
            Check.exact("dirac.loop_k", "oint (<p>, dr) = -q_e oint (A, dr) = 2 pi hbar k", report.k_recovered, k),
            Check.close("dirac.loop_flux_term", "-q_e oint (A, dr) = h k", report.flux_term, consts.h * k,
                        tol("loop")),
        )

    def regularized() -> Outcome:
        smoothed = regularized_string_flux(k, cfg.model.sigma * L, L, consts, cfg.fd, cfg.quadrature)
        return _outcome(
            Check.residual("dirac.regularized_stokes", "flux of rot A_sigma = oint (A_sigma, dr)",
                           smoothed.stokes_residual, tol("default")),
            Check.residual("dirac.regularized_delta", "flux of a narrow line = -2 pi hbar k / q_e",
                           smoothed.delta_residual, tol("default")),
        )

    def angular() -> Outcome:
        Lz = angular_momentum(model, (L, 0.0, 0.3 * L), consts)[2]
        return _outcome(Check.close("dirac.angular_momentum", "[rho, m gamma A]_z = hbar k", Lz, consts.hbar * k,
                                    tol("default")))

    def fields() -> Outcome:
        rows = []
        for p in points:
            d = decompose(model, p, 0.0, consts)
            rows.append({
                "x": p[0], "y": p[1], "z": p[2], "f": d.f, "S": d.S,
                "Ax": d.A[0], "Ay": d.A[1], "Az": d.A[2],
                "vx": d.v[0], "vy": d.v[1], "vz": d.v[2],
                "e_chi": classical_potential_chi(model, p, 0.0, consts),
            })
        return _outcome(frames={"fields.csv": pd.DataFrame(rows)})

    return [
        Task("dirac.schrodinger", "Schrodinger equation with A and recovered U", schrodinger),
        Task("dirac.continuity", "df/dt + div(f gamma A) = 0", continuity),
        Task("dirac.hamilton_jacobi", "(hbar/2) dPhi/dt + W = 0", hamilton_jacobi),
        Task("dirac.potential_closed_form", "U = E + (hbar^2/2m) Delta|Psi| / |Psi|", potential_closed_form),
        Task("dirac.coulomb", "Coulomb orbit of the flux-line field", coulomb_orbit),
        Task("dirac.flux", "flux = -2 pi hbar k / q_e", flux),
        Task("dirac.charge", "q_e q_m / (2 pi hbar) = k", charge),
        Task("dirac.div_A", "div A = 0 off the axis", divergence),
        Task("gauge", "Coulomb and Lorenz gauges", gauges),
        Task("dirac.loop", "oint (<p>, dr) = 2 pi hbar k", momentum_loop),
        Task("dirac.regularized", "smoothed flux line", regularized),
        Task("dirac.angular_momentum", "[rho, m gamma A]_z = hbar k", angular),
        Task("fields", "Madelung fields", fields),
    ]


# ---------------------------------------------------------------------------
# conformal-map
# ---------------------------------------------------------------------------

def conformal_map_suite(cfg: ScenarioConfig, consts: PhysicalConstants, rng: np.random.Generator) -> List[Task]:
    """Psi = exp(M / 2) on the M = S + i Phi plane."""
    n = 10 * cfg.samples
    M = rng.uniform(-4.0, 4.0, n) + 1j * rng.uniform(0.0, 2.0 * TWO_PI, n)
    increments = np.exp(1j * rng.uniform(0.0, TWO_PI, (64, 2))) * 1e-8
    model = _field_model(cfg, consts)
    L = model.characteristic_length
    points = sample_off_axis_points(rng, min(cfg.samples, 200), 0.2 * L, 5.0 * L, 0.1 * L)
    tol = cfg.tolerance

    def density_law() -> Outcome:
        f = np.abs(forward_map(M)) ** 2
        worst = float(np.max(np.abs(f - 4.0 * jacobian(M)) / f))
        return _outcome(Check.residual("conformal.density_jacobian", "|Psi|^2 = 4 J, J = e^S / 4", worst,
                                       tol("jacobian")))

    def fd_order() -> Outcome:
        point = 0.3 + 1.1j
        exact = float(jacobian(point))
        coarse = abs(jacobian(point, "finite-difference", FDConfig(step=1e-2)) - exact)
        fine = abs(jacobian(point, "finite-difference", FDConfig(step=5e-3)) - exact)
        order = float(np.log2(coarse / fine))
        return _outcome(Check("conformal.fd_jacobian_order", "FD Jacobian converges to e^S / 4", order, 2.0, 0.1,
                              order >= 1.9))

    def area() -> Outcome:
        value = area_integral(StripDomain(-np.inf, 0.0, 0.0, 2.0 * TWO_PI), cfg.quadrature)
        return _outcome(Check.close("conformal.area", "integral of e^S / 4 over S < 0, 0 < Phi < 4 pi = pi",
                                    value, np.pi, tol("area")))

    def univalence() -> Outcome:
        inside = univalence_check(StripDomain(-2.0, 2.0, 0.0, 2.0 * TWO_PI))
        outside = univalence_check(StripDomain(-2.0, 2.0, 0.0, 2.0 * TWO_PI + 1.0))
        first, second = outside.witness
        gap = abs(complex(forward_map(first)) - complex(forward_map(second)))
        return _outcome(
            Check.exact("conformal.univalent_4pi", "exp(M/2) is univalent for Phi-width <= 4 pi",
                        inside.univalent, True),
            Check.exact("conformal.not_univalent_wider", "a wider strip has a colliding pair",
                        outside.univalent, False),
            Check.residual("conformal.witness_collision", "exp(M/2) = exp((M + 4 pi i)/2)", gap, tol("jacobian")),
            Check.exact("conformal.z_plane_strip", "exp(Z) is univalent for Im-width <= 2 pi",
                        z_plane_univalent(TWO_PI) and not z_plane_univalent(TWO_PI + 0.1), True),
        )

    def inverse() -> Outcome:
        back = inverse_map(forward_map(M))
        worst = float(np.max(np.abs(back - M)))
        return _outcome(Check.residual("conformal.inverse", "2 Ln exp(M/2) = M on the 4 pi strip", worst,
                                       tol("jacobian") * 1e2))

    def angles() -> Outcome:
        worst = max(conformality_defect(m, a, b) for m, (a, b) in zip(M[:64], increments))
        return _outcome(Check.residual("conformal.angles", "exp(M/2) preserves angles", worst, tol("default")))

    def jacobian_flow() -> Outcome:
        value = _max_over(lambda p: jacobian_continuity_residual(model, p, 0.0, consts, cfg.fd), points)
        return _outcome(Check.residual("conformal.jacobian_continuity", "dJ/dt + div(J <v>) = 0", value,
                                       tol("continuity")))

    def lattice() -> Outcome:
        grid = StripDomain(-2.0, 2.0, 0.0, 2.0 * TWO_PI).lattice()
        psi = forward_map(grid)
        frame = pd.DataFrame({
            "S": grid.real, "Phi": grid.imag, "u": psi.real, "v": psi.imag, "J": jacobian(grid),
        })
        return _outcome(frames={"fields.csv": frame})

    return [
        Task("conformal.density_jacobian", "|Psi|^2 = 4 J", density_law),
        Task("conformal.fd_jacobian_order", "FD Jacobian converges to e^S / 4", fd_order),
        Task("conformal.area", "integral of e^S / 4 = pi", area),
        Task("conformal.univalence", "univalence strips", univalence),
        Task("conformal.inverse", "2 Ln exp(M/2) = M", inverse),
        Task("conformal.angles", "exp(M/2) preserves angles", angles),
        Task("conformal.jacobian_continuity", "dJ/dt + div(J <v>) = 0", jacobian_flow),
        Task("fields", "map lattice", lattice),
    ]


# ---------------------------------------------------------------------------
# contour-suite
# ---------------------------------------------------------------------------

def contour_suite(cfg: ScenarioConfig, consts: PhysicalConstants, rng: np.random.Generator) -> List[Task]:
    """Branch-tracked integrals of d xi / xi."""
    pairs = []
    for _ in range(cfg.pairs):
        a, b = np.exp(rng.uniform(-1.0, 1.0, 2) + 1j * rng.uniform(0.0, TWO_PI, 2))
        n1, n2 = rng.integers(-2, 3, 2)
        pairs.append((complex(a), complex(b), int(n1), int(n2)))
    ratios = np.exp(rng.uniform(-2.0, 2.0, 32) + 1j * rng.uniform(-np.pi, np.pi, 32))
    model = _field_model(cfg, consts)
    tol = cfg.tolerance

    def windings() -> Outcome:
        mismatches = sum(winding_number(ComplexPath.circle(1.0, 0.0, n)) != n for n in (-3, -2, -1, 1, 2, 3))
        outside = winding_number(ComplexPath.circle(1.0, 2.0, 1))
        phase_gap = max(
            abs(log_integral(ComplexPath.circle(1.0, 0.0, n), cfg.quadrature).imag - TWO_PI * n)
            for n in (-3, -2, -1, 1, 2, 3)
        )
        return _outcome(
            Check.exact("contour.winding_circle", "circles around 0 wind n times", int(mismatches), 0),
            Check.exact("contour.winding_outside", "a circle not enclosing 0 winds 0 times", outside, 0),
            Check.residual("contour.log_integral_phase", "Im oint d xi / xi = 2 pi n", phase_gap, tol("circulation")),
        )

    def independence() -> Outcome:
        worst, wrong = 0.0, 0
        for a, b, n1, n2 in pairs:
            result = path_difference(ComplexPath.log_spiral(a, b, n1), ComplexPath.log_spiral(a, b, n2),
                                     cfg.quadrature)
            worst = max(worst, result.residue)
            wrong += int(result.integer != n1 - n2 or result.loop_winding != result.integer)
        return _outcome(
            Check.residual("contour.path_independence", "(I1 - I2) / (2 pi i) is an integer", worst,
                           tol("path_independence")),
            Check.exact("contour.loop_winding", "the integer is the winding of path1 - path2", wrong, 0),
        )

    def mirror() -> Outcome:
        worst = max(mirror_identity_check(r, cfg.quadrature) for r in ratios)
        return _outcome(Check.residual("contour.mirror_identity", "(1/2) int_{1/Psi}^{Psi} = int_1^{Psi}", worst,
                                       tol("mirror")))

    def sheets() -> Outcome:
        wrong = 0
        for n in (-2, -1, 0, 1, 2):
            psi1, psi2 = complex(ratios[0]), complex(ratios[1])
            result = z12(psi1, psi2, ComplexPath.log_spiral(psi1, psi2, n), cfg.quadrature)
            wrong += int(result.sheet != n)
        spiral = ComplexPath.from_function(lambda t: np.exp(1j * (0.1 + t)), 0.0, 3.0 * TWO_PI, 193)
        ledger = sheet_ledger(spiral)
        refined = refine_and_unwrap(spiral)
        return _outcome(
            Check.exact("contour.z12_sheet", "Phi12 / 2 = Arg Psi12 + 2 pi n", wrong, 0),
            Check.exact("contour.sheet_ledger", "three turns cross three sheets", int(ledger[-1] - ledger[0]), 3),
            frames={"loop.csv": refined.to_frame()},
        )

    def complex_action() -> Outcome:
        traj, span = _orbit(model, consts)
        action = complex_action_decompose(model, traj, 0.0, span, consts, cfg.quadrature)
        sample = lagrangian_on_path(model, traj, 0.25 * span, consts, cfg.fd)
        return _outcome(
            Check.residual("contour.complex_action", "Z12 = -(1/2) int Q dt + (i/hbar) int L dt",
                           action.endpoint_residual, tol("evolution")),
            Check.residual("contour.lagrangian", "L = (hbar/2) dPhi/dt along the trajectory", sample.residual,
                           tol("evolution")),
        )

    return [
        Task("contour.windings", "winding numbers", windings),
        Task("contour.independence", "path independence modulo 2 pi i", independence),
        Task("contour.mirror_identity", "mirror identity", mirror),
        Task("contour.sheets", "Riemann sheets", sheets),
        Task("contour.complex_action", "complex action", complex_action),
    ]


# ---------------------------------------------------------------------------
# bohr-table
# ---------------------------------------------------------------------------

def bohr_table_suite(cfg: ScenarioConfig, consts: PhysicalConstants, rng: np.random.Generator) -> List[Task]:
    """Circular Coulomb orbits with hbar k angular momentum."""
    tol = cfg.tolerance
    reference_radius = codata.physical_constants["Bohr radius"][0] if consts.mode == "si" else 1.0
    reference_ev = -codata.physical_constants["Rydberg constant times hc in eV"][0]

    def ground_state() -> Outcome:
        level = bohr_model(1, 1, consts, cfg.fd)
        return _outcome(
            Check.close("bohr.radius", "r_1 = 4 pi eps0 hbar^2 / (e^2 m)", level.radius, reference_radius, tol("bohr")),
            Check.close("bohr.energy_ev", "E_1 = -e^4 m / (32 pi^2 eps0^2 hbar^2)", level.energy_ev, reference_ev,
                        tol("bohr")),
        )

    def table() -> Outcome:
        frame = bohr_table(cfg.bohr_Z, cfg.bohr_k, consts, cfg.fd)
        base = bohr_model(1, 1, consts, cfg.fd)
        scale_r = frame["radius"] / (base.radius * frame["k"] ** 2 / frame["Z"]) - 1.0
        scale_e = frame["energy"] / (base.energy * frame["Z"] ** 2 / frame["k"] ** 2) - 1.0
        scaling = float(max(np.max(np.abs(scale_r)), np.max(np.abs(scale_e))))
        return _outcome(
            Check.residual("bohr.stationary_point", "dW/dr = 0 at r_k", float(frame["stationary_residual"].max()),
                           tol("bohr_stationary")),
            Check.residual("bohr.energy_at_radius", "W(r_k) = E_k", float(frame["energy_residual"].max()),
                           tol("bohr_stationary")),
            Check.residual("bohr.scaling", "r_k ~ k^2 / Z, E_k ~ Z^2 / k^2", scaling, tol("default")),
            frames={"bohr_table.csv": frame},
        )

    return [
        Task("bohr.ground_state", "ground state", ground_state),
        Task("bohr.table", "Bohr table", table),
    ]


# ---------------------------------------------------------------------------
# path-demo
# ---------------------------------------------------------------------------

def path_demo_suite(cfg: ScenarioConfig, consts: PhysicalConstants, rng: np.random.Generator) -> List[Task]:
    """Evolution as rotation of Psi and finite sums over paths."""
    n = cfg.samples
    psi1 = rng.normal(size=n) + 1j * rng.normal(size=n)
    dphi = rng.uniform(-2.0 * TWO_PI, 2.0 * TWO_PI, n)
    extra = rng.uniform(-2.0 * TWO_PI, 2.0 * TWO_PI, n)
    seed_psi = complex(psi1[0])
    family_dphi = float(dphi[0])
    model = _field_model(cfg, consts)
    tol = cfg.tolerance

    def rotation() -> Outcome:
        psi2 = evolution_rotate(psi1, dphi)
        psi12 = np.exp(1j * dphi)
        product = float(np.max(np.abs(psi12 * psi1 - psi2) / np.abs(psi2)))
        magnitude = float(np.max(np.abs(np.abs(psi2) - np.abs(psi1)) / np.abs(psi1)))
        composed = evolution_rotate(evolution_rotate(psi1, dphi), extra)
        direct = evolution_rotate(psi1, dphi + extra)
        composition = float(np.max(np.abs(np.angle(composed / direct))))
        return _outcome(
            Check.residual("evolution.product", "Psi12 Psi1 = Psi2", product, tol("interference")),
            Check.residual("evolution.magnitude", "|Psi2| = |Psi1|", magnitude, tol("interference")),
            Check.residual("evolution.composition", "rotations compose additively", composition,
                           tol("interference")),
        )

    def sheets() -> Outcome:
        wrong = 0
        for psi, angle in zip(psi1[:50], dphi[:50]):
            arc = ComplexPath.from_function(lambda s, p=psi, a=angle: p * np.exp(1j * a * s), 0.0, 1.0, 64)
            wrong += int(sheet_ledger(arc)[-1] != rotation_sheet_shift(psi, angle))
        return _outcome(Check.exact("evolution.sheet_shift", "rotation moves Psi across floor(phase / 2 pi) sheets",
                                    wrong, 0))

    def single_path() -> Outcome:
        psi_end = complex(psi1[1])
        family = TrajectoryFamily.from_paths([ComplexPath.log_spiral(seed_psi, psi_end, 1)], consts.hbar,
                                             cfg.quadrature)
        expected = psi_end / seed_psi
        gap = abs(path_sum(family) - expected) / abs(expected)
        return _outcome(Check.residual("path_sum.single_path", "one path sums to Psi12", gap, tol("path_sum")))

    def interference() -> Outcome:
        action = float(consts.hbar * dphi[1])
        family = TrajectoryFamily([action, action + np.pi * consts.hbar], [1.0, 1.0], consts.hbar)
        return _outcome(Check.residual("path_sum.destructive", "action gap pi hbar cancels", abs(path_sum(family)),
                                       tol("interference")))

    def equal_phase() -> Outcome:
        family = TrajectoryFamily.rotation_family(seed_psi, family_dphi, range(cfg.family_size), consts.hbar)
        text = family.to_json()
        restored = TrajectoryFamily.from_json(text)
        value = path_sum(family)
        gap = abs(value - np.exp(1j * family_dphi))
        return _outcome(
            Check.residual("path_sum.equal_phase", "rotations differing by 2 pi n add in phase", gap,
                           tol("path_sum")),
            Check.residual("path_sum.json_restore", "family survives its JSON form",
                           abs(path_sum(restored) - value), tol("interference")),
            files={"family.json": text},
        )

    def evolution() -> Outcome:
        traj, span = _orbit(model, consts)
        phase = evolution_phase(model, 0.0, span, traj, consts, cfg.quadrature)
        action = complex_action_decompose(model, traj, 0.0, span, consts, cfg.quadrature)
        return _outcome(
            Check.residual("evolution.phase", "S12 / hbar = Phi12 / 2 along the trajectory", phase.residual,
                           tol("evolution")),
            Check.close("evolution.matches_complex_action", "S12 / hbar = Im Z12", phase.action_over_hbar,
                        action.im_z, tol("evolution"), relative=False),
        )

    return [
        Task("evolution.rotation", "Psi2 = exp(i dphi) Psi1", rotation),
        Task("evolution.sheet_shift", "sheet ledger of a rotation", sheets),
        Task("path_sum.single_path", "one path sums to Psi12", single_path),
        Task("path_sum.destructive", "action gap pi hbar cancels", interference),
        Task("path_sum.equal_phase", "equal-phase family", equal_phase),
        Task("evolution.phase", "S12 / hbar = Phi12 / 2", evolution),
    ]


SUITES: Dict[str, Callable[[ScenarioConfig, PhysicalConstants, np.random.Generator], List[Task]]] = {
    "central-field": central_field_suite,
    "dirac-string": dirac_string_suite,
    "conformal-map": conformal_map_suite,
    "contour-suite": contour_suite,
    "bohr-table": bohr_table_suite,
    "path-demo": path_demo_suite,
}


def run_scenario(cfg: ScenarioConfig, max_workers: Optional[int] = None) -> Report:
    """
    Execute the suite mapped to cfg.scenario.

    Args:
        cfg: Validated configuration
        max_workers: Thread pool size (executor default when None)

    Returns:
        Report with checks sorted by name, data frames and the config echo
    """
    started_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
    clock = time.perf_counter()
    consts = cfg.constants()
    rng = np.random.default_rng(cfg.seed)

    tasks = SUITES[cfg.scenario](cfg, consts, rng)
    logger.info("Running %s: %d tasks in %s units", cfg.scenario, len(tasks), cfg.units)
    merged = run_tasks(tasks, max_workers)

    report = Report(
        scenario=cfg.scenario,
        checks=merged.checks,
        config=cfg.echo(),
        frames=merged.frames,
        files=merged.files,
        started_at=started_at,
        runtime_s=time.perf_counter() - clock,
    )
    for check in report.failures:
        logger.warning("FAILED %s (%s): computed %.6e, expected %.6e %s", check.name, check.anchor,
                       check.computed, check.expected, check.message)
    summary = report.summary()
    logger.info("%s: %d/%d checks passed", cfg.scenario, summary["passed"], summary["total"])
    return report
