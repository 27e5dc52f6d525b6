"""
Physical constants in SI or atomic (natural) units.

SI values come from CODATA via scipy.constants. The natural mode is the
atomic-unit system: hbar = m = q_e = 1 and 4*pi*epsilon_0 = 1, so the Bohr
radius and the Hartree energy are both 1.
"""

from dataclasses import dataclass

import numpy as np
from scipy import constants as codata

from src.errors import PreconditionError

UNIT_MODES = ("si", "natural")


@dataclass(frozen=True)
class PhysicalConstants:
    """
    Constants of the hydrodynamic formulation.

    alpha, gamma and beta are derived on every read, so they can never drift
    from hbar, m and q_e.
    """

    hbar: float
    m: float
    q_e: float
    epsilon_0: float
    mu_0: float
    c: float
    eps_r: float = 1.0
    mu_r: float = 1.0
    mode: str = "si"

    def __post_init__(self):
        for name in ("hbar", "m", "epsilon_0", "mu_0", "c", "eps_r", "mu_r"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise PreconditionError(f"{name} must be positive and finite, got {value!r}")
        if not np.isfinite(self.q_e) or self.q_e == 0:
            raise PreconditionError(f"q_e must be non-zero and finite, got {self.q_e!r}")
        if self.mode not in UNIT_MODES:
            raise PreconditionError(f"unknown unit mode {self.mode!r}")

    @property
    def alpha(self) -> float:
        return -self.hbar / (2.0 * self.m)

    @property
    def gamma(self) -> float:
        return -self.q_e / self.m

    @property
    def beta(self) -> float:
        return 1.0 / self.hbar

    @property
    def h(self) -> float:
        """Planck constant, 2*pi*hbar."""
        return 2.0 * np.pi * self.hbar

    @property
    def energy_unit_ev(self) -> float:
        """Electronvolts per unit of energy in this mode."""
        if self.mode == "si":
            return 1.0 / codata.e
        return codata.physical_constants["Hartree energy in eV"][0]

    @classmethod
    def si(cls) -> "PhysicalConstants":
        return cls(
            hbar=codata.hbar,
            m=codata.m_e,
            q_e=codata.e,
            epsilon_0=codata.epsilon_0,
            mu_0=codata.mu_0,
            c=codata.c,
            mode="si",
        )

    @classmethod
    def natural(cls) -> "PhysicalConstants":
        epsilon_0 = 1.0 / (4.0 * np.pi)
        c = 1.0 / codata.fine_structure
        return cls(
            hbar=1.0,
            m=1.0,
            q_e=1.0,
            epsilon_0=epsilon_0,
            mu_0=1.0 / (epsilon_0 * c * c),
            c=c,
            mode="natural",
        )

    @classmethod
    def from_mode(cls, mode: str) -> "PhysicalConstants":
        if mode == "si":
            return cls.si()
        if mode == "natural":
            return cls.natural()
        raise PreconditionError(f"unknown unit mode {mode!r}, expected one of {UNIT_MODES}")
