"""
Hydrodynamic (Madelung) decomposition of a wave field.

A field Psi = sqrt(f) exp(i phi) is turned into a density f, a log-density
S = Ln f, a velocity potential Phi = 2 phi + 2 pi n and a probability-flow
velocity <v> = -alpha grad Phi + gamma A. Every identity linking these
quantities (continuity, quantum potential, potential U, energy W,
Hamilton-Jacobi, action-phase relation, the Schrodinger equation itself) is
evaluated here as a normalized pointwise residual.

Derivatives come from the model's closed forms unless a FDConfig is passed or
the model has no analytic spatial derivatives, in which case central
differences of Psi are used. Time derivatives are always analytic.
"""

import logging
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from src.constants import PhysicalConstants
from src.errors import (
    BranchCutCrossingError,
    NodalPointError,
    PoleError,
    PreconditionError,
)
from src.models import WaveModel
from src.numerics import (
    FDConfig,
    PointLike,
    as_point,
    fd_curl,
    fd_divergence,
    fd_gradient,
    fd_laplacian,
    integrate_flow,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class MadelungFields:
    """Pointwise hydrodynamic bundle."""

    f: float
    S: float
    phi: float
    branch_index: int
    Phi: float
    v: np.ndarray
    v_p: np.ndarray
    v_s: np.ndarray
    A: np.ndarray
    Q: float


@dataclass(frozen=True)
class PsiDerivatives:
    psi: complex
    grad: np.ndarray
    laplacian: complex
    dt: complex

    @property
    def log_gradient(self) -> np.ndarray:
        return self.grad / self.psi

    @property
    def phase_gradient(self) -> np.ndarray:
        return np.imag(self.log_gradient)

    @property
    def phase_rate(self) -> float:
        return float(np.imag(self.dt / self.psi))

    @property
    def amplitude_laplacian_ratio(self) -> float:
        """Delta sqrt(f) / sqrt(f) = Re(Delta Psi / Psi) + |grad phi|^2."""
        g = self.phase_gradient
        return float(np.real(self.laplacian / self.psi) + g @ g)

    @property
    def phase_laplacian(self) -> float:
        g = self.log_gradient
        return float(np.imag(self.laplacian / self.psi - np.sum(g * g)))


@dataclass(frozen=True)
class EnergyBalance:
    W: float
    hj_residual: float


def _checked_point(model: WaveModel, p: PointLike) -> np.ndarray:
    x = as_point(p)
    if model.has_axis_pole and np.hypot(x[0], x[1]) < model.exclusion_radius:
        raise PoleError("point inside the axis exclusion zone", x)
    return x


def _psi_derivatives(model: WaveModel, x: np.ndarray, t: float, consts: PhysicalConstants,
                     cfg: Optional[FDConfig] = None) -> PsiDerivatives:
    psi = complex(model.psi(x, t, consts))
    if psi == 0:
        raise NodalPointError("density vanishes", x)
    dt = complex(model.dpsi_dt(x, t, consts))
    if cfg is None and model.analytic:
        grad = np.asarray(model.grad_psi(x, t, consts), dtype=complex)
        lap = complex(model.laplacian_psi(x, t, consts))
    else:
        cfg = cfg or FDConfig()
        L = model.characteristic_length
        field = lambda q: model.psi(q, t, consts)
        grad = np.asarray(fd_gradient(field, x, cfg, L, model.exclusion_radius), dtype=complex)
        lap = complex(fd_laplacian(field, x, cfg, L, model.exclusion_radius))
    return PsiDerivatives(psi, grad, lap, dt)


def _flow_velocity(model: WaveModel, x: np.ndarray, t: float, consts: PhysicalConstants,
                   cfg: Optional[FDConfig] = None) -> np.ndarray:
    d = _psi_derivatives(model, x, t, consts, cfg)
    v_p = consts.hbar / consts.m * d.phase_gradient
    return v_p + consts.gamma * np.asarray(model.vector_potential(x, consts))


def principal_phase(psi) -> np.ndarray:
    """Phase of Psi in [0, 2*pi)."""
    return np.mod(np.angle(psi), TWO_PI)


def decompose(model: WaveModel, p: PointLike, t: float, consts: PhysicalConstants,
              cfg: Optional[FDConfig] = None) -> MadelungFields:
    """
    Decompose the field at one point.

    Args:
        model: Wave field
        p: Point outside the axis exclusion zone
        t: Time
        consts: Physical constants
        cfg: Finite-difference settings; None selects analytic derivatives

    Returns:
        MadelungFields with the principal phase and branch index 0
    """
    x = _checked_point(model, p)
    d = _psi_derivatives(model, x, t, consts, cfg)
    f = float(abs(d.psi) ** 2)
    if not f > 0:
        raise NodalPointError("density vanishes", x)
    phi = float(principal_phase(d.psi))
    A = np.asarray(model.vector_potential(x, consts), dtype=float)
    # -alpha grad Phi with Phi = 2 phi
    v_p = -consts.alpha * 2.0 * d.phase_gradient
    v_s = consts.gamma * A
    Q = (consts.hbar / consts.m) * d.phase_laplacian + consts.gamma * float(model.vector_potential_divergence(x, consts))
    return MadelungFields(
        f=f,
        S=float(np.log(f)),
        phi=phi,
        branch_index=0,
        Phi=2.0 * phi,
        v=v_p + v_s,
        v_p=v_p,
        v_s=v_s,
        A=A,
        Q=Q,
    )


def divergence_Q(model: WaveModel, p: PointLike, t: float, consts: PhysicalConstants,
                 cfg: Optional[FDConfig] = None) -> float:
    """
    Q = div <v>.

    Analytic when the model has closed-form derivatives and no cfg is given,
    otherwise the central-difference divergence of the flow velocity.
    """
    x = _checked_point(model, p)
    if cfg is None and model.analytic:
        return decompose(model, x, t, consts).Q
    cfg = cfg or FDConfig()
    velocity = lambda q: _flow_velocity(model, q, t, consts)
    return fd_divergence(velocity, x, cfg, model.characteristic_length, model.exclusion_radius)


def continuity_terms(model: WaveModel, p: PointLike, t: float, consts: PhysicalConstants,
                     cfg: FDConfig = FDConfig()):
    """
    Raw terms of the continuity equation.

    Returns:
        Tuple of (df/dt, div(f <v>), floor) where floor = f (|v| + hbar/(m L)) / L
    """
    x = _checked_point(model, p)
    d = _psi_derivatives(model, x, t, consts)
    f = float(abs(d.psi) ** 2)
    if not f > 0:
        raise NodalPointError("density vanishes", x)
    rate = float(2.0 * np.real(np.conj(d.psi) * d.dt))

    def flux(q):
        return float(abs(model.psi(q, t, consts)) ** 2) * _flow_velocity(model, q, t, consts)

    L = model.characteristic_length
    divergence = fd_divergence(flux, x, cfg, L, model.exclusion_radius)
    speed = float(np.linalg.norm(_flow_velocity(model, x, t, consts)))
    floor = f * (speed + consts.hbar / (consts.m * L)) / L
    return rate, divergence, floor


def normalized_residual(*terms: float, floor: float = 0.0) -> float:
    """|sum(terms)| / max(|term|..., floor); 0 when everything vanishes."""
    total = abs(sum(terms))
    scale = max([abs(term) for term in terms] + [floor])
    if scale == 0:
        return 0.0
    return total / scale


def continuity_residual(model: WaveModel, p: PointLike, t: float, consts: PhysicalConstants,
                        cfg: FDConfig = FDConfig()) -> float:
    """Normalized |df/dt + div(f <v>)|."""
    rate, divergence, floor = continuity_terms(model, p, t, consts, cfg)
    return normalized_residual(rate, divergence, floor=floor)


def quantum_potential(model: WaveModel, p: PointLike, t: float, consts: PhysicalConstants,
                      cfg: Optional[FDConfig] = None) -> float:
    """-(hbar^2 / 2m) Delta sqrt(f) / sqrt(f)."""
    x = _checked_point(model, p)
    d = _psi_derivatives(model, x, t, consts, cfg)
    return -consts.hbar ** 2 / (2.0 * consts.m) * d.amplitude_laplacian_ratio


def _potential_from(d: PsiDerivatives, A: np.ndarray, consts: PhysicalConstants) -> float:
    g = d.phase_gradient
    return (
        -consts.hbar * d.phase_rate
        + consts.hbar ** 2 / (2.0 * consts.m) * (d.amplitude_laplacian_ratio - g @ g)
        - consts.hbar * consts.gamma * float(A @ g)
    )


def potential_U(model: WaveModel, p: PointLike, t: float, consts: PhysicalConstants,
                cfg: Optional[FDConfig] = None) -> float:
    """
    Potential U of the Schrodinger equation recovered from the field.

    U = -hbar dphi/dt + (hbar^2/2m)(Delta sqrt(f)/sqrt(f) - |grad phi|^2) - hbar gamma (A, grad phi)
    """
    x = _checked_point(model, p)
    d = _psi_derivatives(model, x, t, consts, cfg)
    return _potential_from(d, np.asarray(model.vector_potential(x, consts)), consts)


def classical_potential_chi(model: WaveModel, p: PointLike, t: float, consts: PhysicalConstants,
                            cfg: Optional[FDConfig] = None) -> float:
    """Potential energy e*chi = U - (m/2)|gamma A|^2 - (hbar^2/2m) Delta sqrt(f)/sqrt(f)."""
    x = _checked_point(model, p)
    d = _psi_derivatives(model, x, t, consts, cfg)
    A = np.asarray(model.vector_potential(x, consts))
    v_s = consts.gamma * A
    return (
        _potential_from(d, A, consts)
        - 0.5 * consts.m * float(v_s @ v_s)
        - consts.hbar ** 2 / (2.0 * consts.m) * d.amplitude_laplacian_ratio
    )


def energy_and_hj(model: WaveModel, p: PointLike, t: float, consts: PhysicalConstants,
                  potential_energy: Optional[Callable[[np.ndarray], float]] = None) -> EnergyBalance:
    """
    Total energy W = m|<v>|^2/2 + e chi and the Hamilton-Jacobi residual.

    Args:
        model: Wave field
        p: Point
        t: Time
        consts: Physical constants
        potential_energy: Replaces e chi, e.g. a Coulomb energy, when given

    Returns:
        EnergyBalance with W and the normalized |(hbar/2) dPhi/dt + W|
    """
    x = _checked_point(model, p)
    fields = decompose(model, x, t, consts)
    if potential_energy is None:
        e_chi = classical_potential_chi(model, x, t, consts)
    else:
        e_chi = float(potential_energy(x))
    W = 0.5 * consts.m * float(fields.v @ fields.v) + e_chi
    d = _psi_derivatives(model, x, t, consts)
    # (hbar/2) dPhi/dt = hbar dphi/dt
    action_rate = consts.hbar * d.phase_rate
    floor = consts.hbar ** 2 / (consts.m * model.characteristic_length ** 2)
    return EnergyBalance(W=W, hj_residual=normalized_residual(action_rate, W, floor=floor))


def action_phase_check(model: WaveModel, p: PointLike, t: float, consts: PhysicalConstants,
                       duration: Optional[float] = None, steps: int = 256) -> float:
    """
    Spread of (hbar Phi/2 - integral of L dt) along the flow line through p.

    The Lagrangian is the Legendre form L = (<v>, p_p) - W with p_p = hbar grad phi.
    Phi is unwrapped along the line. The spread (max - min) is divided by
    max(|hbar dPhi/2|, hbar).

    Args:
        duration: Time span; one revolution for vortex models, m L^2 / hbar otherwise
        steps: RK4 steps along the flow line
    """
    x0 = _checked_point(model, p)
    L = model.characteristic_length
    if duration is None:
        speed = float(np.linalg.norm(_flow_velocity(model, x0, t, consts)))
        if model.has_axis_pole:
            rho = np.hypot(x0[0], x0[1])
            duration = TWO_PI * rho / speed
        else:
            duration = consts.m * L * L / consts.hbar
    # keep the pure time phase below pi/4 per step so the unwrap is unambiguous
    steps = max(steps, int(np.ceil(4.0 * abs(model.energy) * duration / (np.pi * consts.hbar))))
    dt = duration / steps

    def guard(y, trace):
        if model.has_axis_pole and np.hypot(y[0], y[1]) < model.exclusion_radius:
            raise PoleError("flow line entered the axis exclusion zone", y, trace)

    times, states = integrate_flow(lambda s, y: _flow_velocity(model, y, s, consts), x0, t, dt, steps, guard)

    lagrangian = np.empty(len(times))
    for i, (s, y) in enumerate(zip(times, states)):
        d = _psi_derivatives(model, y, s, consts)
        v = _flow_velocity(model, y, s, consts)
        W = energy_and_hj(model, y, s, consts).W
        lagrangian[i] = consts.hbar * float(d.phase_gradient @ v) - W

    psi = model.psi(states, times, consts)
    half_phi = np.unwrap(np.angle(psi))
    action = cumulative_trapezoid(lagrangian, times, initial=0.0)
    offset = consts.hbar * half_phi - action
    spread = float(np.max(offset) - np.min(offset))
    scale = max(abs(consts.hbar * (half_phi[-1] - half_phi[0])), consts.hbar)
    logger.debug("action-phase spread %.3e over %d steps", spread, steps)
    return spread / scale


def schrodinger_residual(model: WaveModel, p: PointLike, t: float, consts: PhysicalConstants,
                         cfg: Optional[FDConfig] = None) -> float:
    """
    Normalized residual of i hbar dPsi/dt + (hbar^2/2m) Delta Psi + (q_e/m)(A, -i hbar grad) Psi - U Psi.

    U is recovered from the same derivatives, so the real part cancels and the
    remainder measures the continuity content of the equation.
    """
    x = _checked_point(model, p)
    d = _psi_derivatives(model, x, t, consts, cfg)
    A = np.asarray(model.vector_potential(x, consts))
    U = _potential_from(d, A, consts)
    terms = (
        1j * consts.hbar * d.dt,
        consts.hbar ** 2 / (2.0 * consts.m) * d.laplacian,
        consts.q_e / consts.m * complex(A @ (-1j * consts.hbar * d.grad)),
        -U * d.psi,
    )
    floor = consts.hbar ** 2 / (2.0 * consts.m * model.characteristic_length ** 2) * abs(d.psi)
    return normalized_residual(*terms, floor=floor)


def log_density_rate_residual(model: WaveModel, p: PointLike, t: float, consts: PhysicalConstants,
                              cfg: Optional[FDConfig] = None) -> float:
    """Normalized |dS/dt + Q| with dS/dt the material derivative along the flow."""
    x = _checked_point(model, p)
    d = _psi_derivatives(model, x, t, consts, cfg)
    f = abs(d.psi) ** 2
    rate = float(2.0 * np.real(np.conj(d.psi) * d.dt) / f)
    grad_S = 2.0 * np.real(d.log_gradient)
    v = consts.hbar / consts.m * d.phase_gradient + consts.gamma * np.asarray(model.vector_potential(x, consts))
    Q = (consts.hbar / consts.m) * d.phase_laplacian
    floor = consts.hbar / (consts.m * model.characteristic_length ** 2)
    return normalized_residual(rate + float(v @ grad_S), Q, floor=floor)


# ---------------------------------------------------------------------------
# Branch tracking of the velocity potential
# ---------------------------------------------------------------------------

def potential_velocity_fd(model: WaveModel, p: PointLike, t: float, consts: PhysicalConstants,
                          cfg: FDConfig = FDConfig()) -> np.ndarray:
    """
    <v_p> = -alpha grad Phi from central differences of the principal phase.

    Raises:
        BranchCutCrossingError: the stencil straddles the cut of the principal phase
    """
    x = _checked_point(model, p)
    centre = float(principal_phase(model.psi(x, t, consts)))

    def Phi(q):
        value = float(principal_phase(model.psi(q, t, consts)))
        if abs(value - centre) > np.pi:
            raise BranchCutCrossingError("stencil crosses the phase cut", q)
        return 2.0 * value

    grad = fd_gradient(Phi, x, cfg, model.characteristic_length, model.exclusion_radius)
    return -consts.alpha * grad


@dataclass(frozen=True)
class CurlScan:
    max_curl: float
    evaluated: int
    excluded: int


def helmholtz_curl_scan(model: WaveModel, points: Sequence[PointLike], t: float,
                        consts: PhysicalConstants, cfg: FDConfig = FDConfig()) -> CurlScan:
    """
    Curl of the finite-difference potential velocity, relative to |v|/L.

    Points whose stencil crosses the cut of the principal phase are excluded
    and counted.
    """
    wide = replace(cfg, step=cfg.laplacian_step)
    L = model.characteristic_length
    worst, evaluated, excluded = 0.0, 0, 0
    for p in points:
        x = _checked_point(model, p)
        field = lambda q: potential_velocity_fd(model, q, t, consts, wide)
        try:
            curl = fd_curl(field, x, wide, L, model.exclusion_radius)
        except BranchCutCrossingError:
            excluded += 1
            continue
        speed = float(np.linalg.norm(decompose(model, x, t, consts).v_p))
        scale = max(speed, consts.hbar / (consts.m * L)) / L
        worst = max(worst, float(np.linalg.norm(curl)) / scale)
        evaluated += 1
    if excluded:
        logger.warning("curl scan: %d of %d points excluded at the phase cut", excluded, excluded + evaluated)
    return CurlScan(max_curl=worst, evaluated=evaluated, excluded=excluded)


@dataclass(frozen=True)
class VelocityPotentialTrack:
    phi: np.ndarray
    Phi: np.ndarray
    branch_index: np.ndarray


def track_velocity_potential(model: WaveModel, points: Sequence[PointLike], t: float,
                             consts: PhysicalConstants) -> VelocityPotentialTrack:
    """
    Continuous velocity potential along an ordered point sequence.

    Phi starts at twice the principal phase of the first point and is
    unwrapped; branch_index is the integer n in Phi - 2 phi = 2 pi n.
    """
    pts = np.array([_checked_point(model, p) for p in points])
    if len(pts) < 2:
        raise PreconditionError("a potential track needs at least two points")
    psi = model.psi(pts, t, consts)
    if np.any(psi == 0):
        raise NodalPointError("density vanishes on the track")
    phi = principal_phase(psi)
    unwrapped = phi[0] + np.concatenate([[0.0], np.cumsum(np.angle(psi[1:] / psi[:-1]))])
    Phi = 2.0 * unwrapped
    branch = np.rint((Phi - 2.0 * phi) / TWO_PI).astype(int)
    return VelocityPotentialTrack(phi=phi, Phi=Phi, branch_index=branch)


def flow_velocity(model: WaveModel, p: PointLike, t: float, consts: PhysicalConstants) -> np.ndarray:
    """<v> at p from the model's derivatives."""
    return _flow_velocity(model, _checked_point(model, p), t, consts)


def phase_derivatives(model: WaveModel, p: PointLike, t: float, consts: PhysicalConstants,
                      cfg: Optional[FDConfig] = None) -> PsiDerivatives:
    return _psi_derivatives(model, _checked_point(model, p), t, consts, cfg)

