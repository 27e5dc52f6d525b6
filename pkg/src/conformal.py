"""
The conformal map Psi = exp(M / 2) from the M = S + i Phi plane.

The map is handled on the M-plane, where it is univalent on strips of
Phi-width at most 4*pi; Z-plane queries (Z = M / 2, width 2*pi) delegate to it.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree

from src.constants import PhysicalConstants
from src.errors import DivergenceError, NodalPointError, PreconditionError
from src.madelung import continuity_terms, normalized_residual
from src.models import WaveModel
from src.numerics import FDConfig, PointLike, QuadratureConfig, fd_derivative, quadrature_nodes

logger = logging.getLogger(__name__)

FOUR_PI = 4.0 * np.pi
COLLISION_DISTANCE = 1e-12


@dataclass(frozen=True)
class StripDomain:
    """
    Rectangle S_min < S < S_max, Phi_min < Phi < Phi_max of the M-plane.

    S bounds may be infinite. The sample lattice has s_count x phi_count
    points placed in the open rectangle.
    """

    s_min: float
    s_max: float
    phi_min: float
    phi_max: float
    s_count: int = 16
    phi_count: int = 64

    def __post_init__(self):
        if not self.phi_max > self.phi_min:
            raise PreconditionError(f"empty Phi range ({self.phi_min}, {self.phi_max})")
        if self.s_max < self.s_min:
            raise PreconditionError(f"S_max {self.s_max} below S_min {self.s_min}")
        if self.s_count < 2 or self.phi_count < 2:
            raise PreconditionError("lattice counts must be at least 2")

    @classmethod
    def from_z_plane(cls, re_min: float, re_max: float, im_min: float, im_max: float,
                     s_count: int = 16, phi_count: int = 64) -> "StripDomain":
        """M-plane image of a Z-plane rectangle under M = 2 Z."""
        return cls(2.0 * re_min, 2.0 * re_max, 2.0 * im_min, 2.0 * im_max, s_count, phi_count)

    @property
    def width(self) -> float:
        return self.phi_max - self.phi_min

    def s_window(self) -> Tuple[float, float]:
        lo, hi = self.s_min, self.s_max
        if not np.isfinite(lo) and not np.isfinite(hi):
            return -4.0, 4.0
        if not np.isfinite(lo):
            return hi - 8.0, hi
        if not np.isfinite(hi):
            return lo, lo + 8.0
        return lo, hi

    def lattice(self) -> np.ndarray:
        """Complex lattice M = S + i Phi strictly inside the rectangle."""
        lo, hi = self.s_window()
        s = lo + (np.arange(self.s_count) + 0.5) * (hi - lo) / self.s_count
        phi = self.phi_min + (np.arange(self.phi_count) + 0.5) * self.width / self.phi_count
        S, P = np.meshgrid(s, phi, indexing="ij")
        return (S + 1j * P).ravel()


@dataclass(frozen=True)
class MapSample:
    M: complex
    psi: complex
    J: float

    @classmethod
    def at(cls, M: complex) -> "MapSample":
        return cls(M=complex(M), psi=complex(forward_map(M)), J=float(jacobian(M)))


@dataclass(frozen=True)
class UnivalenceReport:
    univalent: bool
    witness: Optional[Tuple[complex, complex]]
    min_separation: float


def forward_map(M):
    """Psi = exp(M / 2); u = e^(S/2) cos(Phi/2), v = e^(S/2) sin(Phi/2)."""
    return np.exp(np.asarray(M, dtype=complex) / 2.0)


def forward_map_z(Z):
    return forward_map(2.0 * np.asarray(Z, dtype=complex))


def inverse_map(psi, sheet: int = 0):
    """
    M = 2 Ln Psi on the given sheet.

    Sheet 0 returns Phi in [0, 4*pi), the univalence strip; sheet n adds 4*pi*n.
    """
    psi = np.asarray(psi, dtype=complex)
    if np.any(psi == 0):
        raise NodalPointError("Ln is undefined at Psi = 0")
    phase = np.mod(np.angle(psi), 2.0 * np.pi)
    return 2.0 * np.log(np.abs(psi)) + 1j * (2.0 * phase + FOUR_PI * sheet)


def jacobian(M, mode: str = "analytic", cfg: FDConfig = FDConfig()):
    """
    Jacobian of (S, Phi) -> (u, v).

    Args:
        M: Point (or array of points) of the M-plane
        mode: 'analytic' returns e^S / 4; 'finite-difference' the determinant of
            the central-difference derivative matrix
        cfg: Step (absolute, in units of S and Phi) and order for FD mode

    Returns:
        The Jacobian
    """
    M = np.asarray(M, dtype=complex)
    if mode == "analytic":
        return np.exp(M.real) / 4.0
    if mode != "finite-difference":
        raise PreconditionError(f"unknown Jacobian mode {mode!r}")
    if M.ndim:
        return np.array([jacobian(m, mode, cfg) for m in M.ravel()]).reshape(M.shape)

    def along_s(s):
        return forward_map(s + 1j * M.imag)

    def along_phi(phi):
        return forward_map(M.real + 1j * phi)

    d_s = fd_derivative(along_s, M.real, cfg.step, cfg.order, cfg.richardson)
    d_phi = fd_derivative(along_phi, M.imag, cfg.step, cfg.order, cfg.richardson)
    return float(d_s.real * d_phi.imag - d_phi.real * d_s.imag)


def univalence_check(domain: StripDomain) -> UnivalenceReport:
    """
    Decide univalence of exp(M/2) on a strip.

    The criterion is Phi-width <= 4*pi. When it holds, the lattice images are
    also checked pairwise for collisions; when it fails, a colliding pair
    (S, Phi0), (S, Phi0 + 4*pi) inside the strip is returned.
    """
    lattice = domain.lattice()
    images = forward_map(lattice)
    tree = cKDTree(np.column_stack([images.real, images.imag]))
    distances, _ = tree.query(np.column_stack([images.real, images.imag]), k=2)
    min_separation = float(np.min(distances[:, 1]))

    if domain.width <= FOUR_PI:
        pairs = tree.query_pairs(r=COLLISION_DISTANCE)
        if pairs:
            i, j = sorted(pairs)[0]
            logger.warning("lattice images collide inside a univalent strip")
            return UnivalenceReport(False, (complex(lattice[i]), complex(lattice[j])), min_separation)
        return UnivalenceReport(True, None, min_separation)

    lo, hi = domain.s_window()
    s = 0.5 * (lo + hi)
    phi0 = domain.phi_min + 0.5 * (domain.width - FOUR_PI)
    first, second = complex(s, phi0), complex(s, phi0 + FOUR_PI)
    gap = abs(forward_map(first) - forward_map(second))
    if gap > COLLISION_DISTANCE * max(1.0, abs(forward_map(first))):
        raise ArithmeticError(f"witness images differ by {gap:.3e}")
    return UnivalenceReport(False, (first, second), min_separation)


def z_plane_univalent(width: float) -> bool:
    """Univalence of exp(Z) on a Z-plane strip, via the M-plane criterion."""
    return 2.0 * width <= FOUR_PI


def area_integral(domain: StripDomain, cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """
    Integral of e^S / 4 over the strip, the area of its image.

    The S integral is taken in w = e^S, where the integrand is constant.
    """
    if domain.s_max == np.inf:
        raise DivergenceError("the area integral diverges for S_max = +inf")
    if domain.s_min == domain.s_max:
        return 0.0
    w_lo = 0.0 if domain.s_min == -np.inf else float(np.exp(domain.s_min))
    w_hi = float(np.exp(domain.s_max))
    w, ww = quadrature_nodes(w_lo, w_hi, cfg)
    phi, wp = quadrature_nodes(domain.phi_min, domain.phi_max, cfg)
    integrand = np.full((len(w), len(phi)), 0.25)
    return float(ww @ integrand @ wp)


def conformality_defect(M: complex, dM1: complex, dM2: complex) -> float:
    """
    Difference between the angle of two increments and the angle of their images.

    Returns:
        Absolute angle mismatch in radians, wrapped to [0, pi]
    """
    base = forward_map(M)
    image1 = forward_map(M + dM1) - base
    image2 = forward_map(M + dM2) - base
    before = np.angle(dM2 / dM1)
    after = np.angle(image2 / image1)
    return float(abs(np.angle(np.exp(1j * (after - before)))))


def jacobian_continuity_residual(model: WaveModel, p: PointLike, t: float, consts: PhysicalConstants,
                                 cfg: FDConfig = FDConfig()) -> float:
    """Normalized |dJ/dt + div(J <v>)| with J = f / 4."""
    rate, divergence, floor = continuity_terms(model, p, t, consts, cfg)
    return normalized_residual(rate / 4.0, divergence / 4.0, floor=floor / 4.0)
