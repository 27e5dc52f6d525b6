"""
Closed-form wave fields with analytic derivatives.

Four model kinds are supported:

- central-field: Psi = sqrt(f) * exp(i(k*phi - E t / hbar)), f = C r^nu exp(-kappa r)
- dirac-string:  Psi = sqrt(f) * exp(-i E t / hbar) in the potential
                 A = -hbar k / (q_e rho) e_phi of a quantized flux line
- plane-wave:    Psi = a * exp(i(p.r - E t) / hbar)
- free-gaussian: freely spreading isotropic Gaussian packet

All methods are vectorized over points of shape (..., 3); the time argument
broadcasts against the leading point dimensions.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from src.constants import PhysicalConstants
from src.errors import PreconditionError
from src.numerics import POLE_EXCLUSION, gamma


class ModelKind(str, Enum):
    CENTRAL_FIELD = "central-field"
    DIRAC_STRING = "dirac-string"
    PLANE_WAVE = "plane-wave"
    FREE_GAUSSIAN = "free-gaussian"


def _radii(x: np.ndarray):
    x = np.asarray(x, dtype=float)
    rho2 = x[..., 0] ** 2 + x[..., 1] ** 2
    r = np.sqrt(rho2 + x[..., 2] ** 2)
    return x, r, rho2


def _azimuthal(x: np.ndarray, rho2: np.ndarray) -> np.ndarray:
    """Unit azimuthal direction divided by rho: (-y, x, 0) / rho^2."""
    return np.stack([-x[..., 1], x[..., 0], np.zeros_like(rho2)], axis=-1) / rho2[..., None]


@dataclass(frozen=True)
class WaveModel:
    """
    Parametrized closed-form wave field.

    `analytic` marks the availability of hand-coded spatial derivatives; when
    False, consumers fall back to finite differences of `psi`. Time
    derivatives are always analytic.
    """

    kind: ModelKind
    nu: float = 1.0
    kappa: float = 1.0
    k: int = 0
    energy: float = 0.0
    Z: int = 1
    sigma: float = 1.0
    momentum: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    amplitude: float = 1.0
    analytic: bool = True
    _norm: float = field(init=False, repr=False, compare=False, default=0.0)

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if int(self.k) != self.k:
            raise PreconditionError(f"winding k must be an integer, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))
        if self.kappa <= 0:
            raise PreconditionError(f"kappa must be positive, got {self.kappa!r}")
        if self.nu <= -3:
            raise PreconditionError(f"nu must exceed -3 for a normalizable density, got {self.nu!r}")
        if self.sigma <= 0:
            raise PreconditionError(f"sigma must be positive, got {self.sigma!r}")
        object.__setattr__(self, "momentum", tuple(float(c) for c in self.momentum))
        object.__setattr__(self, "_norm", self._normalization())

    # -- factories ---------------------------------------------------------

    @classmethod
    def central_field(cls, nu: float, kappa: float, k: int, energy: float, **kwargs) -> "WaveModel":
        return cls(ModelKind.CENTRAL_FIELD, nu=nu, kappa=kappa, k=k, energy=energy, **kwargs)

    @classmethod
    def dirac_string(cls, nu: float, kappa: float, k: int, energy: float, **kwargs) -> "WaveModel":
        return cls(ModelKind.DIRAC_STRING, nu=nu, kappa=kappa, k=k, energy=energy, **kwargs)

    @classmethod
    def plane_wave(cls, momentum, consts: PhysicalConstants, amplitude: float = 1.0,
                   energy: Optional[float] = None) -> "WaveModel":
        p = np.asarray(momentum, dtype=float)
        if energy is None:
            energy = float(p @ p) / (2.0 * consts.m)
        return cls(ModelKind.PLANE_WAVE, momentum=tuple(p), amplitude=amplitude, energy=energy)

    @classmethod
    def constant(cls, amplitude: float = 1.0) -> "WaveModel":
        """Static real field, a plane wave at rest with E = 0."""
        return cls(ModelKind.PLANE_WAVE, amplitude=amplitude, energy=0.0)

    @classmethod
    def free_gaussian(cls, sigma: float) -> "WaveModel":
        return cls(ModelKind.FREE_GAUSSIAN, sigma=sigma)

    # -- properties --------------------------------------------------------

    def _normalization(self) -> float:
        if self.kind in (ModelKind.CENTRAL_FIELD, ModelKind.DIRAC_STRING):
            return self.kappa ** (self.nu + 3) / (4.0 * np.pi * gamma(self.nu + 3))
        if self.kind is ModelKind.FREE_GAUSSIAN:
            return (2.0 * np.pi * self.sigma ** 2) ** -1.5
        return self.amplitude ** 2

    @property
    def normalization(self) -> float:
        """Density scale C (peak density of the Gaussian, |a|^2 of the plane wave)."""
        return self._norm

    @property
    def characteristic_length(self) -> float:
        if self.kind in (ModelKind.CENTRAL_FIELD, ModelKind.DIRAC_STRING):
            return 1.0 / self.kappa
        if self.kind is ModelKind.FREE_GAUSSIAN:
            return self.sigma
        return 1.0

    @property
    def exclusion_radius(self) -> float:
        return POLE_EXCLUSION * self.characteristic_length if self.has_axis_pole else 0.0

    @property
    def has_axis_pole(self) -> bool:
        return self.kind in (ModelKind.CENTRAL_FIELD, ModelKind.DIRAC_STRING) and self.k != 0

    @property
    def has_vector_potential(self) -> bool:
        return self.kind is ModelKind.DIRAC_STRING

    @property
    def normalizable(self) -> bool:
        return self.kind is not ModelKind.PLANE_WAVE

    @property
    def is_stationary(self) -> bool:
        """True when |Psi|^2 does not depend on time."""
        return self.kind is not ModelKind.FREE_GAUSSIAN

    # -- radial amplitude of the two axial models --------------------------

    def _amplitude(self, r):
        a, b = self.nu / 2.0, self.kappa / 2.0
        R = np.sqrt(self._norm) * r ** a * np.exp(-b * r)
        return R, a / r - b

    def radial_laplacian_ratio(self, r):
        """Delta|Psi| / |Psi| of the axial models: b^2 + a(a+1)/r^2 - 2b(a+1)/r, a = nu/2, b = kappa/2."""
        a, b = self.nu / 2.0, self.kappa / 2.0
        return b * b + a * (a + 1.0) / r ** 2 - 2.0 * b * (a + 1.0) / r

    # -- gaussian helpers --------------------------------------------------

    def _gaussian_terms(self, t, consts: PhysicalConstants):
        rate = consts.hbar / (2.0 * consts.m * self.sigma ** 2)
        tau = rate * np.asarray(t, dtype=float)
        one = 1.0 + 1j * tau
        a = 1.0 / (4.0 * self.sigma ** 2 * one)
        return rate, one, a

    # -- field and derivatives ---------------------------------------------

    def psi(self, x, t, consts: PhysicalConstants):
        x, r, rho2 = _radii(x)
        if self.kind is ModelKind.CENTRAL_FIELD:
            R, _ = self._amplitude(r)
            phi = np.arctan2(x[..., 1], x[..., 0])
            return R * np.exp(1j * (self.k * phi - self.energy * t / consts.hbar))
        if self.kind is ModelKind.DIRAC_STRING:
            R, _ = self._amplitude(r)
            return R * np.exp(-1j * self.energy * t / consts.hbar)
        if self.kind is ModelKind.PLANE_WAVE:
            p = np.asarray(self.momentum)
            return self.amplitude * np.exp(1j * (x @ p - self.energy * t) / consts.hbar)
        _, one, a = self._gaussian_terms(t, consts)
        return np.sqrt(self._norm) * one ** -1.5 * np.exp(-a * r ** 2)

    def grad_psi(self, x, t, consts: PhysicalConstants):
        x, r, rho2 = _radii(x)
        psi = self.psi(x, t, consts)
        if self.kind in (ModelKind.CENTRAL_FIELD, ModelKind.DIRAC_STRING):
            _, log_slope = self._amplitude(r)
            g = (log_slope / r)[..., None] * x
            if self.kind is ModelKind.CENTRAL_FIELD:
                g = g + 1j * self.k * _azimuthal(x, rho2)
            return g * psi[..., None]
        if self.kind is ModelKind.PLANE_WAVE:
            p = np.asarray(self.momentum)
            return (1j / consts.hbar) * p * psi[..., None]
        _, _, a = self._gaussian_terms(t, consts)
        return (-2.0 * a)[..., None] * x * psi[..., None]

    def laplacian_psi(self, x, t, consts: PhysicalConstants):
        x, r, rho2 = _radii(x)
        psi = self.psi(x, t, consts)
        if self.kind is ModelKind.CENTRAL_FIELD:
            return (self.radial_laplacian_ratio(r) - self.k ** 2 / rho2) * psi
        if self.kind is ModelKind.DIRAC_STRING:
            return self.radial_laplacian_ratio(r) * psi
        if self.kind is ModelKind.PLANE_WAVE:
            p = np.asarray(self.momentum)
            return -(p @ p) / consts.hbar ** 2 * psi
        _, _, a = self._gaussian_terms(t, consts)
        return (4.0 * a ** 2 * r ** 2 - 6.0 * a) * psi

    def dpsi_dt(self, x, t, consts: PhysicalConstants):
        x, r, _ = _radii(x)
        psi = self.psi(x, t, consts)
        if self.kind is not ModelKind.FREE_GAUSSIAN:
            return -1j * self.energy / consts.hbar * psi
        rate, one, a = self._gaussian_terms(t, consts)
        return psi * (-1.5j * rate / one + r ** 2 * a * 1j * rate / one)

    def density(self, x, t=0.0, consts: Optional[PhysicalConstants] = None):
        """f = |Psi|^2 in closed form."""
        x, r, _ = _radii(x)
        if self.kind in (ModelKind.CENTRAL_FIELD, ModelKind.DIRAC_STRING):
            return self._norm * r ** self.nu * np.exp(-self.kappa * r)
        if self.kind is ModelKind.PLANE_WAVE:
            return np.full_like(r, self._norm)
        if consts is None:
            raise PreconditionError("the Gaussian density needs constants")
        rate = consts.hbar / (2.0 * consts.m * self.sigma ** 2)
        width2 = self.sigma ** 2 * (1.0 + (rate * np.asarray(t, dtype=float)) ** 2)
        return (2.0 * np.pi * width2) ** -1.5 * np.exp(-r ** 2 / (2.0 * width2))

    def vector_potential(self, x, consts: PhysicalConstants):
        x, _, rho2 = _radii(x)
        if self.kind is not ModelKind.DIRAC_STRING:
            return np.zeros(x.shape)
        return -consts.hbar * self.k / consts.q_e * _azimuthal(x, rho2)

    def vector_potential_divergence(self, x, consts: PhysicalConstants):
        """Analytic div A; every model here is in the Coulomb gauge off the axis."""
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1])

    def closed_form_velocity(self, x, t, consts: PhysicalConstants):
        """Probability-flow velocity written out per model kind."""
        x, r, rho2 = _radii(x)
        if self.kind in (ModelKind.CENTRAL_FIELD, ModelKind.DIRAC_STRING):
            return consts.hbar * self.k / consts.m * _azimuthal(x, rho2)
        if self.kind is ModelKind.PLANE_WAVE:
            return np.broadcast_to(np.asarray(self.momentum) / consts.m, x.shape).copy()
        rate = consts.hbar / (2.0 * consts.m * self.sigma ** 2)
        tau = rate * np.asarray(t, dtype=float)
        return (consts.hbar / consts.m * tau / (2.0 * self.sigma ** 2 * (1.0 + tau ** 2)))[..., None] * x

    def phase_gradient(self, x, t, consts: PhysicalConstants):
        """grad(phi) = Im(grad Psi / Psi)."""
        return np.imag(self.grad_psi(x, t, consts) / self.psi(x, t, consts)[..., None])
