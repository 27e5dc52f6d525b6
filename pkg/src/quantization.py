"""
Loop quantization, the Bohr model and the magnetic charge of a flux line.

Loop integrals of the momentum are recovered as integer multiples of
h = 2 pi hbar. Flux through a loop is always obtained from the circulation of
the vector potential (Stokes), never from a pointwise delta-function field.
"""

import json
import logging
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from src.constants import PhysicalConstants
from src.contour import ComplexPath, winding_number
from src.errors import DegenerateOrbitError, PoleError, PoleOnPathError, PreconditionError
from src.madelung import classical_potential_chi, energy_and_hj, flow_velocity, phase_derivatives
from src.models import ModelKind, WaveModel
from src.numerics import (
    POLE_EXCLUSION,
    Curve3,
    FDConfig,
    PointLike,
    QuadratureConfig,
    as_point,
    fd_curl,
    fd_derivative,
    fd_divergence,
    line_integral,
    quadrature_nodes,
)

logger = logging.getLogger(__name__)

INTEGER_TOLERANCE = 1e-6


@dataclass(frozen=True)
class LoopSpec:
    """
    Circle of radius `radius` on a sphere centred on the OZ axis.

    The loop sits at polar angle `theta`, so its cylindrical radius is
    radius * sin(theta) at height z + radius * cos(theta). `center` shifts the
    loop sideways, e.g. to build loops that do not enclose the axis.
    """

    radius: float
    k_loop: int = 1
    samples: Optional[int] = None
    theta: float = np.pi / 2
    center: tuple = (0.0, 0.0)
    z: float = 0.0

    def __post_init__(self):
        if not self.radius > 0:
            raise PreconditionError(f"loop radius must be positive, got {self.radius!r}")
        if int(self.k_loop) != self.k_loop:
            raise PreconditionError("k_loop must be an integer")
        samples = self.samples or 64 * max(1, abs(self.k_loop))
        if samples < 64 * abs(self.k_loop):
            raise PreconditionError(f"{samples} samples are too few for {self.k_loop} traversals")
        object.__setattr__(self, "samples", samples)

    @property
    def rho(self) -> float:
        return float(self.radius * np.sin(self.theta))

    @property
    def height(self) -> float:
        return float(self.z + self.radius * np.cos(self.theta))

    @property
    def encloses_axis(self) -> bool:
        return float(np.hypot(*self.center)) < self.rho

    def curve(self) -> Curve3:
        return Curve3.circle(self.rho, self.k_loop, self.center, self.height)

    def quadrature(self) -> QuadratureConfig:
        """Gauss-Legendre with `samples` nodes per traversal."""
        panels = max(1, self.samples // 8 // max(1, abs(self.k_loop)))
        return QuadratureConfig("gauss-legendre", panels * max(1, abs(self.k_loop)), 8)

    def axis_winding(self) -> int:
        """Winding of the loop's projection around the axis, from its unwrapped phase."""
        if self.k_loop == 0:
            return 0
        path = ComplexPath.circle(self.rho, complex(*self.center), self.k_loop, self.samples + 1)
        return winding_number(path)


@dataclass
class QuantizationReport:
    loop_integral: float
    k_recovered: int
    residual: float
    phase_term: float
    flux_term: float
    hk_term: float
    h0t_term: Optional[float] = None
    passed: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _axis_guard(loop: LoopSpec, exclusion_radius: float) -> None:
    gap = abs(loop.rho - float(np.hypot(*loop.center)))
    if loop.k_loop != 0 and gap <= exclusion_radius:
        raise PoleOnPathError("loop passes through the axis exclusion zone", (loop.center[0], loop.center[1], loop.height))


def angle_gradient(q: np.ndarray) -> np.ndarray:
    """grad of the azimuthal angle, e_phi / rho."""
    rho2 = q[0] ** 2 + q[1] ** 2
    return np.array([-q[1], q[0], 0.0]) / rho2


def circulation_of_angle_gradient(loop: LoopSpec, exclusion_radius: float = POLE_EXCLUSION) -> float:
    """Circulation of grad(phi_az) around the loop; 2 pi k_loop when it encloses the axis."""
    _axis_guard(loop, exclusion_radius)
    return line_integral(angle_gradient, loop.curve(), loop.quadrature(), exclusion_radius)


def _recover(value: float, consts: PhysicalConstants, tolerance: float):
    quanta = value / consts.h
    n = int(np.rint(quanta))
    residual = abs(quanta - n)
    return n, residual, residual < tolerance


def momentum_loop_integral(model: WaveModel, loop: LoopSpec, consts: PhysicalConstants,
                           t: float = 0.0, tolerance: float = INTEGER_TOLERANCE) -> QuantizationReport:
    """
    Loop integral of <p> = m <v>, split into the phase term (hbar grad phi)
    and the flux term -q_e times the circulation of A.

    The recovered integer is value / h rounded; the report passes when the
    rounding residue is below `tolerance`.
    """
    _axis_guard(loop, model.exclusion_radius)
    curve, cfg = loop.curve(), loop.quadrature()
    phase_term = line_integral(
        lambda q: consts.hbar * model.phase_gradient(q, t, consts), curve, cfg, model.exclusion_radius
    )
    flux = line_integral(lambda q: model.vector_potential(q, consts), curve, cfg, model.exclusion_radius)
    flux_term = -consts.q_e * flux
    value = phase_term + flux_term
    n, residual, passed = _recover(value, consts, tolerance)
    logger.debug("momentum loop integral %.15g -> k = %d", value, n)
    return QuantizationReport(
        loop_integral=value,
        k_recovered=n,
        residual=residual,
        phase_term=phase_term,
        flux_term=flux_term,
        hk_term=consts.h * n,
        passed=passed,
    )


@dataclass(frozen=True)
class LoopActionDecomposition:
    loop_integral: float
    action: float
    h0t_term: float
    hk_term: float
    period: float

    @property
    def balance_residual(self) -> float:
        """|loop - (S + H0 T)| in units of h."""
        return abs(self.loop_integral - (self.action + self.h0t_term)) / max(abs(self.hk_term), 1e-300)


def loop_action_decomposition(model: WaveModel, loop: LoopSpec, consts: PhysicalConstants) -> LoopActionDecomposition:
    """
    Closed-orbit identity: loop integral of p_p = S (over a period) + H0 T = h |k|.

    The orbit is the circle of the loop travelled with <v>, period
    T = 2 pi m rho^2 / (hbar |k|).
    """
    if model.kind is not ModelKind.CENTRAL_FIELD or model.k == 0:
        raise DegenerateOrbitError("no closed characteristic: needs a central-field model with k != 0")
    if np.hypot(*loop.center) > 0:
        raise PreconditionError("the orbit loop must be centred on the axis")
    _axis_guard(loop, model.exclusion_radius)

    rho = loop.rho
    omega = consts.hbar * model.k / (consts.m * rho * rho)
    period = 2.0 * np.pi / abs(omega)
    orbit = Curve3.orbit((rho, 0.0, loop.height), omega, 0.0, period)
    cfg = loop.quadrature()

    loop_integral = line_integral(
        lambda q: consts.hbar * model.phase_gradient(q, 0.0, consts), orbit, cfg, model.exclusion_radius
    )
    times, weights = quadrature_nodes(0.0, period, cfg)
    positions, velocities = orbit.points(times), orbit.tangent(times)
    lagrangian = np.empty(len(times))
    energy = np.empty(len(times))
    for i, (x, v, s) in enumerate(zip(positions, velocities, times)):
        d = phase_derivatives(model, x, s, consts)
        energy[i] = energy_and_hj(model, x, s, consts).W
        lagrangian[i] = consts.hbar * float(d.phase_gradient @ v) - energy[i]
    return LoopActionDecomposition(
        loop_integral=loop_integral,
        action=float(weights @ lagrangian),
        h0t_term=float(weights @ energy),
        hk_term=consts.h * abs(model.k),
        period=period,
    )


def angular_momentum(model: WaveModel, p: PointLike, consts: PhysicalConstants, t: float = 0.0) -> np.ndarray:
    """[rho_vec, <p>] with rho_vec = (x, y, 0)."""
    x = as_point(p)
    rho_vec = np.array([x[0], x[1], 0.0])
    if model.has_axis_pole and np.hypot(x[0], x[1]) < model.exclusion_radius:
        raise PoleError("point inside the axis exclusion zone", x)
    return np.cross(rho_vec, consts.m * flow_velocity(model, x, t, consts))


# ---------------------------------------------------------------------------
# Bohr model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BohrLevel:
    Z: int
    k: int
    radius: float
    energy: float
    energy_ev: float
    stationary_radius: float
    stationary_residual: float
    energy_residual: float


def coulomb_energy(r, Z: int, consts: PhysicalConstants):
    return -Z * consts.q_e ** 2 / (4.0 * np.pi * consts.epsilon_0 * r)


def orbital_energy(r, Z: int, k: int, consts: PhysicalConstants):
    """W(r) = hbar^2 k^2 / (2 m r^2) - Z e^2 / (4 pi eps0 r)."""
    return consts.hbar ** 2 * k * k / (2.0 * consts.m * r * r) + coulomb_energy(r, Z, consts)


def bohr_model(Z: int, k: int, consts: PhysicalConstants, cfg: FDConfig = FDConfig()) -> BohrLevel:
    """
    Orbit radius and energy of level k for nuclear charge Z.

    The closed forms are cross-checked against the stationary point of W(r),
    located with brentq on a central-difference dW/dr in units of r_k.
    """
    if k < 1 or Z < 1:
        raise PreconditionError(f"Bohr levels need k >= 1 and Z >= 1, got k={k}, Z={Z}")
    eps0, hbar, m, e = consts.epsilon_0, consts.hbar, consts.m, consts.q_e
    radius = 4.0 * np.pi * eps0 * hbar ** 2 * k * k / (Z * e * e * m)
    energy = -(Z ** 2) * e ** 4 * m / (32.0 * np.pi ** 2 * eps0 ** 2 * hbar ** 2 * k * k)
    scale = abs(energy)

    def slope(x: float) -> float:
        w = lambda s: orbital_energy(s * radius, Z, k, consts) / scale
        return float(fd_derivative(w, x, cfg.step, cfg.order, cfg.richardson))

    x_star = brentq(slope, 0.25, 4.0, xtol=1e-14, rtol=1e-13)
    stationary = x_star * radius
    w_at_radius = orbital_energy(radius, Z, k, consts)
    return BohrLevel(
        Z=Z,
        k=k,
        radius=radius,
        energy=energy,
        energy_ev=energy * consts.energy_unit_ev,
        stationary_radius=stationary,
        stationary_residual=abs(stationary - radius) / radius,
        energy_residual=abs(w_at_radius - energy) / scale,
    )


def bohr_table(Z_values: Iterable[int], k_values: Iterable[int], consts: PhysicalConstants,
               cfg: FDConfig = FDConfig()) -> pd.DataFrame:
    """Bohr levels for every (Z, k) pair as a DataFrame sorted by Z, k."""
    rows = [asdict(bohr_model(Z, k, consts, cfg)) for Z in Z_values for k in k_values]
    df = pd.DataFrame(rows, columns=list(BohrLevel.__dataclass_fields__))
    return df.sort_values(["Z", "k"]).reset_index(drop=True)


# ---------------------------------------------------------------------------
# Flux line and magnetic charge
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiracStringField:
    """Vector potential A = -hbar k / (q_e rho) e_phi of a quantized flux line."""

    k: int
    consts: PhysicalConstants

    def vector_potential(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        rho2 = x[..., 0] ** 2 + x[..., 1] ** 2
        direction = np.stack([-x[..., 1], x[..., 0], np.zeros_like(rho2)], axis=-1) / rho2[..., None]
        return -self.consts.hbar * self.k / self.consts.q_e * direction

    @property
    def flux(self) -> float:
        return -self.consts.h * self.k / self.consts.q_e

    @property
    def q_m_wb(self) -> float:
        return -self.flux

    @property
    def q_m_am(self) -> float:
        return self.q_m_wb / self.consts.mu_0

    @property
    def charge_ratio(self) -> float:
        """q_e q_m / (2 pi hbar) before rounding."""
        return self.consts.q_e * self.q_m_wb / self.consts.h

    @property
    def dirac_k(self) -> int:
        return int(np.rint(self.charge_ratio))

    @property
    def residue(self) -> float:
        return abs(self.charge_ratio - self.dirac_k)


@dataclass(frozen=True)
class DiracPotentialSample:
    A: np.ndarray
    div_A: float
    curl_A: np.ndarray

    @property
    def scale(self) -> float:
        """|A| / rho, the natural size of first derivatives of A."""
        return float(np.linalg.norm(self.A))


def dirac_vector_potential(p: PointLike, k: int, consts: PhysicalConstants,
                           cfg: FDConfig = FDConfig()) -> DiracPotentialSample:
    """A at p with its central-difference divergence and curl."""
    x = as_point(p)
    rho = float(np.hypot(x[0], x[1]))
    if rho < POLE_EXCLUSION:
        raise PoleError("point inside the axis exclusion zone", x)
    string = DiracStringField(k, consts)
    return DiracPotentialSample(
        A=string.vector_potential(x),
        div_A=fd_divergence(string.vector_potential, x, cfg, rho, POLE_EXCLUSION * rho),
        curl_A=fd_curl(string.vector_potential, x, cfg, rho, POLE_EXCLUSION * rho),
    )


@dataclass(frozen=True)
class DiracChargeReport:
    flux: float
    q_m_wb: float
    q_m_am: float
    dirac_k: int
    dirac_k_am: int
    residue: float
    encloses_axis: bool

    def to_dict(self) -> dict:
        return asdict(self)


def dirac_flux_and_charge(loop: LoopSpec, k: int, consts: PhysicalConstants,
                          exclusion_radius: float = POLE_EXCLUSION) -> DiracChargeReport:
    """
    Flux of the string through the loop (per traversal) and the magnetic charge.

    A loop that does not enclose the axis yields a zero-flux report flagged by
    encloses_axis = False.
    """
    _axis_guard(loop, exclusion_radius)
    string = DiracStringField(k, consts)
    circulation = line_integral(string.vector_potential, loop.curve(), loop.quadrature(), exclusion_radius)
    flux = circulation / loop.k_loop if loop.k_loop else 0.0
    encloses = loop.axis_winding() != 0
    if not encloses:
        logger.warning("loop of radius %g does not enclose the flux line", loop.rho)
    q_m_wb = -flux
    q_m_am = q_m_wb / consts.mu_0
    ratio = consts.q_e * q_m_wb / consts.h
    ratio_am = consts.q_e * consts.mu_0 * q_m_am / consts.h
    n = int(np.rint(ratio))
    return DiracChargeReport(
        flux=flux,
        q_m_wb=q_m_wb,
        q_m_am=q_m_am,
        dirac_k=n,
        dirac_k_am=int(np.rint(ratio_am)),
        residue=float(max(abs(ratio - n), abs(ratio_am - n))),
        encloses_axis=encloses,
    )


def delta_field_consistency(k: int, radii: Sequence[float], consts: PhysicalConstants) -> float:
    """
    Largest deviation of the loop flux from -h k / q_e over a sweep of radii,
    relative to |h k / q_e| (absolute in units of h / q_e when k = 0).
    """
    expected = DiracStringField(k, consts).flux
    unit = consts.h / abs(consts.q_e)
    worst = 0.0
    for R in radii:
        if R <= POLE_EXCLUSION:
            raise PoleOnPathError(f"radius {R} inside the axis exclusion zone")
        flux = dirac_flux_and_charge(LoopSpec(R), k, consts).flux
        worst = max(worst, abs(flux - expected))
    return worst / (abs(expected) if expected else unit)


@dataclass(frozen=True)
class RegularizedFlux:
    surface_flux: float
    circulation: float
    ideal: float

    @property
    def stokes_residual(self) -> float:
        return abs(self.surface_flux - self.circulation) / max(abs(self.ideal), 1e-300)

    @property
    def delta_residual(self) -> float:
        return abs(self.surface_flux - self.ideal) / max(abs(self.ideal), 1e-300)


def regularized_string_flux(k: int, sigma: float, radius: float, consts: PhysicalConstants,
                            cfg: FDConfig = FDConfig(),
                            quadrature: QuadratureConfig = QuadratureConfig()) -> RegularizedFlux:
    """
    Smoothed flux line A_sigma = -hbar k / (q_e rho) (1 - exp(-rho^2/sigma^2)) e_phi.

    The flux of B_sigma = rot A_sigma through the disc of the given radius
    (surface quadrature of a central-difference curl) is compared with the
    circulation of A_sigma along its rim; both tend to -h k / q_e once
    sigma << radius, which is the unit-integral property of the delta line.
    """
    if not (sigma > 0 and radius > 0):
        raise PreconditionError("sigma and radius must be positive")
    coefficient = -consts.hbar * k / consts.q_e

    def potential(q):
        rho2 = q[0] ** 2 + q[1] ** 2
        return coefficient * (-np.expm1(-rho2 / sigma ** 2)) / rho2 * np.array([-q[1], q[0], 0.0])

    rho, weights = quadrature_nodes(0.0, radius, quadrature)
    # the field is axisymmetric: sample B_z along the x axis
    b_z = np.array([fd_curl(potential, (r, 0.0, 0.0), cfg, sigma)[2] for r in rho])
    surface = float(np.sum(weights * b_z * 2.0 * np.pi * rho))
    circulation = line_integral(potential, Curve3.circle(radius), quadrature)
    return RegularizedFlux(surface, circulation, -consts.h * k / consts.q_e)


@dataclass(frozen=True)
class GaugeResiduals:
    coulomb: float
    lorenz: float


def gauge_check(model: WaveModel, p: PointLike, t: float, consts: PhysicalConstants,
                cfg: FDConfig = FDConfig()) -> GaugeResiduals:
    """
    Coulomb (div A) and Lorenz (eps mu / c^2 dchi/dt + div A) gauge residuals,
    relative to |A| / L. chi is the scalar potential e chi / q_e.
    """
    x = as_point(p)
    L = model.characteristic_length
    div_a = fd_divergence(lambda q: model.vector_potential(q, consts), x, cfg, L, model.exclusion_radius)
    time_scale = consts.m * L * L / consts.hbar
    chi_rate = fd_derivative(
        lambda s: classical_potential_chi(model, x, s, consts) / consts.q_e, t, cfg.step * time_scale
    )
    lorenz = consts.eps_r * consts.mu_r / consts.c ** 2 * float(chi_rate) + div_a
    a_norm = float(np.linalg.norm(model.vector_potential(x, consts)))
    scale = a_norm / L if a_norm > 0 else consts.hbar / (abs(consts.q_e) * L * L)
    return GaugeResiduals(coulomb=abs(div_a) / scale, lorenz=abs(lorenz) / scale)
