"""
Transport along characteristics, the rotation evolution operator and a
finite path sum.

For the vortex models the stationary continuity equation is transported along
circles about the OZ axis, dr/dt = -<v>, which are integrated with fixed-step
RK4 so that reruns are bit-identical.
"""

import json
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import pandas as pd

from src.constants import PhysicalConstants
from src.contour import ComplexPath, log_integral, phase_along
from src.errors import PoleError, PreconditionError
from src.madelung import energy_and_hj, phase_derivatives
from src.models import ModelKind, WaveModel
from src.numerics import (
    POLE_EXCLUSION,
    Curve3,
    FDConfig,
    PointLike,
    QuadratureConfig,
    as_point,
    fd_divergence,
    fd_gradient,
    integrate_flow,
    quadrature_nodes,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
ENDPOINT_TOLERANCE = 1e-12


def characteristic_rhs(p: PointLike, k: int, consts: PhysicalConstants,
                       exclusion_radius: float = 0.0) -> np.ndarray:
    """dx/dt = (hbar k / m) y / rho^2, dy/dt = -(hbar k / m) x / rho^2, dz/dt = 0."""
    x = as_point(p)
    rho2 = x[0] ** 2 + x[1] ** 2
    if rho2 == 0 or np.sqrt(rho2) < exclusion_radius:
        raise PoleError("characteristic at the axis", x)
    c = consts.hbar * k / consts.m
    return np.array([c * x[1] / rho2, -c * x[0] / rho2, 0.0])


@dataclass(frozen=True)
class Characteristic:
    """RK4 characteristic with its invariants measured."""

    start: np.ndarray
    times: np.ndarray
    positions: np.ndarray
    density: np.ndarray
    period: float
    measured_period: float
    radius_drift: float
    density_spread: float
    return_error: float

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": self.times,
            "x": self.positions[:, 0],
            "y": self.positions[:, 1],
            "z": self.positions[:, 2],
            "f": self.density,
        })

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False, float_format="%.12e")


def integrate_characteristic(
    start: PointLike,
    k: int,
    consts: PhysicalConstants,
    steps_per_revolution: int = 1024,
    revolutions: float = 1.0,
    density: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    exclusion_radius: Optional[float] = None,
) -> Characteristic:
    """
    Integrate the characteristic through `start` with fixed-step RK4.

    Args:
        start: Off-axis starting point
        k: Winding integer of the vortex
        consts: Physical constants
        steps_per_revolution: RK4 steps per period (at least 64)
        revolutions: Number of periods to integrate
        density: Vectorized density sampled along the trajectory (ones when None)
        exclusion_radius: Axis exclusion radius; 1e-6 rho0 by default

    Returns:
        Characteristic with radius drift, density spread, return error and the
        period measured from the unwrapped polar angle
    """
    if steps_per_revolution < 64:
        raise PreconditionError("at least 64 steps per revolution are required")
    x0 = as_point(start)
    rho0 = float(np.hypot(x0[0], x0[1]))
    eps = POLE_EXCLUSION * rho0 if exclusion_radius is None else exclusion_radius
    if rho0 == 0 or rho0 < eps:
        raise PoleError("characteristic must start off the axis", x0)

    nominal = TWO_PI * consts.m * rho0 ** 2 / consts.hbar
    period = nominal / abs(k) if k else np.inf
    span = (period if k else nominal) * revolutions
    steps = max(1, int(round(steps_per_revolution * revolutions)))
    dt = span / steps

    def guard(y, trace):
        if np.hypot(y[0], y[1]) < eps:
            raise PoleError("characteristic approached the axis", y, trace)

    if k == 0:
        times = dt * np.arange(steps + 1)
        positions = np.broadcast_to(x0, (steps + 1, 3)).copy()
    else:
        times, positions = integrate_flow(
            lambda t, y: characteristic_rhs(y, k, consts, eps), x0, 0.0, dt, steps, guard
        )

    f = np.ones(len(times)) if density is None else np.asarray(density(positions), dtype=float)
    radii = np.hypot(positions[:, 0], positions[:, 1])
    angle = np.unwrap(np.arctan2(positions[:, 1], positions[:, 0]))
    swept = abs(angle[-1] - angle[0])
    measured = times[-1] * TWO_PI / swept if swept > 0 else np.inf
    f_scale = float(np.max(np.abs(f))) or 1.0
    logger.debug("characteristic from rho0=%g: %d steps, dt=%.3e", rho0, steps, dt)
    return Characteristic(
        start=x0,
        times=times,
        positions=positions,
        density=f,
        period=period,
        measured_period=measured,
        radius_drift=float(np.max(np.abs(radii - rho0)) / rho0),
        density_spread=float((np.max(f) - np.min(f)) / f_scale),
        return_error=float(np.linalg.norm(positions[-1] - x0) / rho0),
    )


@dataclass(frozen=True)
class StationaryResidual:
    advection: float
    divergence: float

    @property
    def worst(self) -> float:
        return max(self.advection, self.divergence)


def stationary_continuity_residual(
    f_profile: Callable[[np.ndarray], float],
    k: int,
    points: Sequence[PointLike],
    consts: PhysicalConstants,
    cfg: FDConfig = FDConfig(),
    scale: float = 1.0,
) -> StationaryResidual:
    """
    Largest normalized residuals over the samples of

    - (<v>, grad f) = 0 with <v> = (hbar k / m rho) e_phi, relative to |v| (|grad f| + f / L)
    - div(f grad u) = 0 with u the azimuthal angle, relative to (|grad f| + f / L) / rho

    Args:
        f_profile: Density as a function of a 3-vector
        scale: Characteristic length L (sets the FD step and the floor)
    """
    advection, divergence = 0.0, 0.0
    for p in points:
        x = as_point(p)
        rho2 = x[0] ** 2 + x[1] ** 2
        rho = np.sqrt(rho2)
        if rho < POLE_EXCLUSION * scale:
            raise PoleError("sample inside the axis exclusion zone", x)
        e_phi_over_rho = np.array([-x[1], x[0], 0.0]) / rho2
        v = consts.hbar * k / consts.m * e_phi_over_rho
        f = float(f_profile(x))
        grad_f = fd_gradient(f_profile, x, cfg, scale, POLE_EXCLUSION * scale)
        size = float(np.linalg.norm(grad_f)) + abs(f) / scale
        if size == 0:
            continue
        speed = float(np.linalg.norm(v))
        if speed > 0:
            advection = max(advection, abs(float(v @ grad_f)) / (speed * size))

        def flux(q):
            r2 = q[0] ** 2 + q[1] ** 2
            return float(f_profile(q)) * np.array([-q[1], q[0], 0.0]) / r2

        div = fd_divergence(flux, x, cfg, scale, POLE_EXCLUSION * scale)
        divergence = max(divergence, abs(div) / (size / rho))
    return StationaryResidual(advection=advection, divergence=divergence)


# ---------------------------------------------------------------------------
# Evolution as rotation
# ---------------------------------------------------------------------------

def evolution_rotate(psi1, dphi):
    """Psi2 = exp(i dphi) Psi1; |Psi2| = |Psi1|."""
    return np.asarray(psi1, dtype=complex) * np.exp(1j * np.asarray(dphi, dtype=float))


def rotation_sheet_shift(psi, dphi):
    """Number of Riemann sheets crossed when Psi is rotated by dphi."""
    start = np.mod(np.angle(psi), TWO_PI)
    return np.floor((start + np.asarray(dphi, dtype=float)) / TWO_PI).astype(int)


@dataclass(frozen=True)
class EvolutionPhase:
    action_over_hbar: float
    h_integral: float
    p_dr_integral: float
    endpoint_phase: float

    @property
    def residual(self) -> float:
        return abs(self.action_over_hbar - self.endpoint_phase) / max(1.0, abs(self.endpoint_phase))


def evolution_phase(model: WaveModel, t1: float, t2: float, traj: Curve3, consts: PhysicalConstants,
                    cfg: QuadratureConfig = QuadratureConfig()) -> EvolutionPhase:
    """
    Action S12 = -integral of H dt + integral of (p_p, dr) along a trajectory.

    The endpoint phase Phi12 / 2 is tracked across sheets by unwrapping
    Psi(r(t), t) along the trajectory, so full revolutions count.
    """
    if model.kind is not ModelKind.CENTRAL_FIELD:
        raise PreconditionError("evolution_phase applies to central-field models")
    times, weights = quadrature_nodes(t1, t2, cfg)
    positions, velocities = traj.points(times), traj.tangent(times)
    h_values = np.empty(len(times))
    p_values = np.empty(len(times))
    for i, (x, v, t) in enumerate(zip(positions, velocities, times)):
        h_values[i] = energy_and_hj(model, x, t, consts).W
        p_values[i] = consts.hbar * float(phase_derivatives(model, x, t, consts).phase_gradient @ v)
    h_integral = float(weights @ h_values)
    p_integral = float(weights @ p_values)
    endpoint = phase_along(model, traj, t1, t2, consts).total_phase
    return EvolutionPhase(
        action_over_hbar=(p_integral - h_integral) / consts.hbar,
        h_integral=h_integral,
        p_dr_integral=p_integral,
        endpoint_phase=endpoint,
    )


# ---------------------------------------------------------------------------
# Path sum
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TrajectoryFamily:
    """Finite family of paths from xi1 to xi2 with their actions and magnitude ratios."""

    actions: np.ndarray
    magnitude_ratios: np.ndarray
    hbar: float
    paths: tuple = ()

    def __post_init__(self):
        actions = np.atleast_1d(np.asarray(self.actions, dtype=float))
        ratios = np.atleast_1d(np.asarray(self.magnitude_ratios, dtype=float))
        if actions.shape != ratios.shape:
            raise PreconditionError("actions and magnitude ratios differ in length")
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "magnitude_ratios", ratios)
        object.__setattr__(self, "paths", tuple(self.paths))
        if self.paths:
            first = self.paths[0]
            for path in self.paths[1:]:
                tol = ENDPOINT_TOLERANCE * max(1.0, abs(first.start), abs(first.end))
                if abs(path.start - first.start) > tol or abs(path.end - first.end) > tol:
                    raise PreconditionError("family paths do not share their end points")

    def __len__(self) -> int:
        return len(self.actions)

    @classmethod
    def from_paths(cls, paths: Sequence[ComplexPath], hbar: float,
                   cfg: QuadratureConfig = QuadratureConfig()) -> "TrajectoryFamily":
        """Action hbar Im(integral of d xi / xi) and ratio |xi_end / xi_start| per path."""
        values = [log_integral(path, cfg) for path in paths]
        return cls(
            actions=[hbar * z.imag for z in values],
            magnitude_ratios=[np.exp(z.real) for z in values],
            hbar=hbar,
            paths=tuple(paths),
        )

    @classmethod
    def rotation_family(cls, psi1: complex, dphi: float, windings: Sequence[int], hbar: float,
                        samples: int = 64) -> "TrajectoryFamily":
        """Arcs exp(i s) psi1, s from 0 to dphi + 2 pi n, one per winding n."""
        psi1 = complex(psi1)
        target = complex(evolution_rotate(psi1, dphi))
        paths = []
        for n in windings:
            total = dphi + TWO_PI * n
            path = ComplexPath.from_function(lambda s, a=total: psi1 * np.exp(1j * a * s), 0.0, 1.0, samples)
            xi = path.xi.copy()
            xi[-1] = target
            paths.append(ComplexPath(path.tau, xi, False, path.generator))
        return cls.from_paths(paths, hbar)

    def to_dict(self) -> dict:
        return {
            "hbar": self.hbar,
            "actions": self.actions.tolist(),
            "magnitude_ratios": self.magnitude_ratios.tolist(),
            "paths": [
                {"tau": p.tau.tolist(), "re": p.xi.real.tolist(), "im": p.xi.imag.tolist()}
                for p in self.paths
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TrajectoryFamily":
        data = json.loads(text)
        paths = tuple(
            ComplexPath(np.asarray(p["tau"]), np.asarray(p["re"]) + 1j * np.asarray(p["im"]))
            for p in data.get("paths", [])
        )
        return cls(data["actions"], data["magnitude_ratios"], data["hbar"], paths)


def path_sum(family: TrajectoryFamily, hbar: Optional[float] = None) -> complex:
    """(1/N) sum of |Psi12| exp(i S12 / hbar) over the family."""
    if len(family) == 0:
        raise PreconditionError("path sum over an empty family")
    hbar = family.hbar if hbar is None else hbar
    terms = family.magnitude_ratios * np.exp(1j * family.actions / hbar)
    return complex(np.mean(terms))
