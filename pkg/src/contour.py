"""
Complex-plane paths, winding numbers and the multivalued logarithm.

Paths are refined until neighbouring samples differ in argument by less than
pi/4 and carry their cumulative unwrapped phase, which fixes the branch of
Ln along the path. Integrals of d xi / xi, the complex action Z12 and the
Lagrangian as a phase rate are built on top of that.
"""

import logging
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np
import pandas as pd

from src.constants import PhysicalConstants
from src.errors import NearPoleError, PreconditionError, UnresolvedWindingError
from src.madelung import divergence_Q, energy_and_hj, phase_derivatives
from src.models import WaveModel
from src.numerics import Curve3, FDConfig, QuadratureConfig, fd_derivative, quadrature_nodes

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
UNWRAP_THRESHOLD = np.pi / 4.0
NEAR_POLE = 1e-12
INTEGER_TOLERANCE = 1e-6
MAX_SAMPLES = 1 << 20


@dataclass(frozen=True, eq=False)
class ComplexPath:
    """
    Ordered samples xi(tau) of a path in the complex plane.

    `generator`, when present, is the vectorized parametrization used to place
    refinement samples; `phase` is the cumulative unwrapped argument attached
    by refine_and_unwrap. Closed paths repeat their first sample at the end.
    """

    tau: np.ndarray
    xi: np.ndarray
    closed: bool = False
    generator: Optional[Callable[[np.ndarray], np.ndarray]] = None
    phase: Optional[np.ndarray] = None

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float)
        xi = np.asarray(self.xi, dtype=complex)
        if tau.shape != xi.shape or tau.ndim != 1:
            raise PreconditionError("tau and xi must be matching 1D arrays")
        if len(xi) < 2:
            raise PreconditionError("a path needs at least two samples")
        if np.any(np.abs(xi) < NEAR_POLE):
            raise NearPoleError("path sample at the pole xi = 0")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "xi", xi)

    @property
    def start(self) -> complex:
        return complex(self.xi[0])

    @property
    def end(self) -> complex:
        return complex(self.xi[-1])

    @property
    def total_phase(self) -> float:
        path = self if self.phase is not None else refine_and_unwrap(self)
        return float(path.phase[-1] - path.phase[0])

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], t0: float, t1: float,
                      samples: int = 64, closed: bool = False) -> "ComplexPath":
        tau = np.linspace(t0, t1, samples)
        return cls(tau, func(tau), closed, func)

    @classmethod
    def circle(cls, radius: float = 1.0, center: complex = 0.0, turns: int = 1,
               samples: Optional[int] = None) -> "ComplexPath":
        """Circle traversed |turns| times, clockwise for negative turns."""
        if turns == 0:
            raise PreconditionError("a circle needs a non-zero number of turns")
        sense = 1.0 if turns > 0 else -1.0
        samples = samples or 64 * abs(turns) + 1
        func = lambda t: center + radius * np.exp(1j * sense * t)
        path = cls.from_function(func, 0.0, TWO_PI * abs(turns), samples, closed=True)
        xi = path.xi.copy()
        xi[-1] = xi[0]
        return replace(path, xi=xi)

    @classmethod
    def segment(cls, a: complex, b: complex, samples: int = 2) -> "ComplexPath":
        func = lambda t: a + (b - a) * t
        return cls.from_function(func, 0.0, 1.0, samples)

    @classmethod
    def log_spiral(cls, a: complex, b: complex, windings: int = 0, samples: int = 64) -> "ComplexPath":
        """
        xi(tau) = a exp(tau (Log(b/a) + 2 pi i windings)), tau in [0, 1].

        windings = 0 is the principal branch; the explicit offset selects the
        homotopy class around the origin.
        """
        a, b = complex(a), complex(b)
        if a == 0 or b == 0:
            raise NearPoleError("a log spiral cannot start or end at 0")
        exponent = np.log(b / a) + 2j * np.pi * windings
        func = lambda t: a * np.exp(np.asarray(t) * exponent)
        path = cls.from_function(func, 0.0, 1.0, samples)
        xi = path.xi.copy()
        xi[-1] = b
        return replace(path, xi=xi)

    @classmethod
    def polyline(cls, points: Sequence[complex], closed: bool = False) -> "ComplexPath":
        xi = np.asarray(points, dtype=complex)
        if closed and xi[-1] != xi[0]:
            xi = np.append(xi, xi[0])
        return cls(np.arange(len(xi), dtype=float), xi, closed)

    # -- transforms --------------------------------------------------------

    def reversed(self) -> "ComplexPath":
        t0, t1 = self.tau[0], self.tau[-1]
        generator = None
        if self.generator is not None:
            gen = self.generator
            generator = lambda t: gen(t0 + t1 - np.asarray(t))
        phase = None if self.phase is None else self.phase[::-1].copy()
        return ComplexPath(t0 + t1 - self.tau[::-1], self.xi[::-1].copy(), self.closed, generator, phase)

    def concatenate(self, other: "ComplexPath") -> "ComplexPath":
        """Join two paths; the second must start where the first ends."""
        if abs(other.start - self.end) > NEAR_POLE * max(1.0, abs(self.end)):
            raise PreconditionError("paths do not share the junction point")
        tau = np.concatenate([self.tau, other.tau[1:] - other.tau[0] + self.tau[-1]])
        xi = np.concatenate([self.xi, other.xi[1:]])
        closed = abs(xi[-1] - xi[0]) <= NEAR_POLE * max(1.0, abs(xi[0]))
        if closed:
            xi[-1] = xi[0]
        return ComplexPath(tau, xi, closed)

    def as_curve(self) -> Curve3:
        """Polyline in the plane z = 0 with x = Re xi, y = Im xi."""
        vertices = np.column_stack([self.xi.real, self.xi.imag, np.zeros(len(self.xi))])
        return Curve3.polyline(vertices, closed=self.closed)

    # -- serialization -----------------------------------------------------

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"tau": self.tau, "re": self.xi.real, "im": self.xi.imag})
        if self.phase is not None:
            frame["phase"] = self.phase
            frame["sheet"] = sheet_ledger(self)
        return frame

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False, float_format="%.17e")

    @classmethod
    def from_csv(cls, path, closed: bool = False) -> "ComplexPath":
        frame = pd.read_csv(path)
        missing = {"tau", "re", "im"} - set(frame.columns)
        if missing:
            raise PreconditionError(f"path CSV lacks columns {sorted(missing)}")
        return cls(frame["tau"].to_numpy(), frame["re"].to_numpy() + 1j * frame["im"].to_numpy(), closed)


@dataclass(frozen=True)
class WindingReport:
    winding: int
    total_phase: float
    log_integral: complex


def refine_and_unwrap(path: ComplexPath, max_samples: int = MAX_SAMPLES) -> ComplexPath:
    """
    Insert samples until neighbours differ in argument by less than pi/4.

    Midpoints come from the path generator when available, otherwise from the
    chord. The result carries the cumulative unwrapped phase, starting from the
    principal argument of the first sample in [0, 2*pi).

    Raises:
        NearPoleError: a midpoint lands within 1e-12 of the origin or the
            sample budget is exhausted
    """
    tau, xi = path.tau, path.xi
    passes = 0
    while True:
        steps = np.angle(xi[1:] / xi[:-1])
        bad = np.flatnonzero(np.abs(steps) >= UNWRAP_THRESHOLD)
        if bad.size == 0:
            break
        if len(xi) + bad.size > max_samples:
            raise NearPoleError(f"refinement exceeded {max_samples} samples; the path hugs the origin")
        mid_tau = 0.5 * (tau[bad] + tau[bad + 1])
        if path.generator is not None:
            mid_xi = np.asarray(path.generator(mid_tau), dtype=complex)
        else:
            mid_xi = 0.5 * (xi[bad] + xi[bad + 1])
        if np.any(np.abs(mid_xi) < NEAR_POLE):
            raise NearPoleError("path passes within 1e-12 of the origin")
        tau = np.insert(tau, bad + 1, mid_tau)
        xi = np.insert(xi, bad + 1, mid_xi)
        passes += 1
    if passes:
        logger.debug("refined path to %d samples in %d passes", len(xi), passes)
    phase = np.mod(np.angle(xi[0]), TWO_PI) + np.concatenate([[0.0], np.cumsum(np.angle(xi[1:] / xi[:-1]))])
    return ComplexPath(tau, xi, path.closed, path.generator, phase)


def _refined(path: ComplexPath) -> ComplexPath:
    return path if path.phase is not None else refine_and_unwrap(path)


def winding_number(path: ComplexPath) -> int:
    """Number of turns of a closed path around the origin."""
    if not path.closed:
        raise PreconditionError("winding number of an open path")
    turns = _refined(path).total_phase / TWO_PI
    n = int(np.rint(turns))
    residue = abs(turns - n)
    if residue >= INTEGER_TOLERANCE:
        raise UnresolvedWindingError(turns, residue)
    return n


def log_integral(path: ComplexPath, cfg: QuadratureConfig = QuadratureConfig()) -> complex:
    """
    Integral of d xi / xi along the refined polyline.

    Each chord subtends less than pi/4 at the origin, so Gauss-Legendre
    converges fast on it.
    """
    refined = _refined(path)
    a, b = refined.xi[:-1], refined.xi[1:]
    s, w = quadrature_nodes(0.0, 1.0, cfg)
    xi = a[:, None] + (b - a)[:, None] * s[None, :]
    return complex(np.sum((b - a)[:, None] * w[None, :] / xi))


def winding_report(path: ComplexPath, cfg: QuadratureConfig = QuadratureConfig()) -> WindingReport:
    refined = _refined(path)
    return WindingReport(winding_number(refined), refined.total_phase, log_integral(refined, cfg))


@dataclass(frozen=True)
class Z12Result:
    z: complex
    S12: float
    Phi12: float
    psi12: complex
    sheet: int


def z12(psi1: complex, psi2: complex, path: ComplexPath, cfg: QuadratureConfig = QuadratureConfig()) -> Z12Result:
    """
    Complex action Z12 = Ln(Psi2 / Psi1) along a path from psi1 to psi2.

    Returns:
        Z12Result with z = (S12 + i Phi12) / 2, S12 = ln|Psi12|^2, and the sheet
        index n of Phi12 / 2 = Arg(Psi12) + 2 pi n
    """
    psi1, psi2 = complex(psi1), complex(psi2)
    tol = NEAR_POLE * max(1.0, abs(psi1), abs(psi2))
    if abs(path.start - psi1) > tol or abs(path.end - psi2) > tol:
        raise PreconditionError("path endpoints do not match psi1 and psi2")
    z = log_integral(path, cfg)
    psi12 = psi2 / psi1
    sheet = int(np.rint((z.imag - np.angle(psi12)) / TWO_PI))
    return Z12Result(z=z, S12=2.0 * z.real, Phi12=2.0 * z.imag, psi12=psi12, sheet=sheet)


@dataclass(frozen=True)
class PathDifference:
    value: complex
    integer: int
    residue: float
    loop_winding: int


def path_difference(path1: ComplexPath, path2: ComplexPath,
                    cfg: QuadratureConfig = QuadratureConfig()) -> PathDifference:
    """
    (I1 - I2) / (2 pi i) for two paths with shared endpoints, plus the winding
    number of the loop path1 followed by path2 reversed.
    """
    loop = _refined(path1).concatenate(_refined(path2).reversed())
    if not loop.closed:
        raise PreconditionError("paths do not share their end points")
    value = (log_integral(path1, cfg) - log_integral(path2, cfg)) / (2j * np.pi)
    n = int(np.rint(value.real))
    return PathDifference(value=value, integer=n, residue=float(abs(value - n)), loop_winding=winding_number(loop))


def sheet_ledger(path: ComplexPath) -> np.ndarray:
    """Riemann-sheet index floor(phase / 2 pi) of every refined sample."""
    return np.floor(_refined(path).phase / TWO_PI).astype(int)


def mirror_identity_check(psi12: complex, cfg: QuadratureConfig = QuadratureConfig(),
                          samples: int = 64) -> float:
    """
    |(1/2) integral from 1/Psi12 to Psi12 - integral from 1 to Psi12| of d xi / xi.

    The first path is xi = exp((2 tau - 1) Log Psi12), which passes through 1,
    the second its upper half; neither encloses the origin.
    """
    psi12 = complex(psi12)
    if psi12 == 0:
        raise PreconditionError("psi12 must be non-zero")
    log_psi = np.log(psi12)
    full = ComplexPath.from_function(lambda t: np.exp((2.0 * t - 1.0) * log_psi), 0.0, 1.0, samples)
    half = ComplexPath.from_function(lambda t: np.exp(t * log_psi), 0.0, 1.0, samples)
    return float(abs(0.5 * log_integral(full, cfg) - log_integral(half, cfg)))


# ---------------------------------------------------------------------------
# Complex action along physical trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComplexAction:
    re_z: float
    im_z: float
    q_integral: float
    l_integral: float
    endpoint_z: complex
    endpoint_residual: float


def legendre_lagrangian(model: WaveModel, x: np.ndarray, velocity: np.ndarray, t: float,
                        consts: PhysicalConstants) -> float:
    """L = (r', p_p) - W with p_p = hbar grad phi."""
    d = phase_derivatives(model, x, t, consts)
    return consts.hbar * float(d.phase_gradient @ velocity) - energy_and_hj(model, x, t, consts).W


def complex_action_decompose(model: WaveModel, traj: Curve3, t1: float, t2: float,
                             consts: PhysicalConstants,
                             cfg: QuadratureConfig = QuadratureConfig()) -> ComplexAction:
    """
    Split Z12 along a trajectory into -1/2 integral of Q and (1/hbar) integral of L.

    Args:
        traj: Curve3 parametrized by time
        t1, t2: Time window

    Returns:
        ComplexAction including the endpoint value Ln(Psi(r2, t2) / Psi(r1, t1))
        and the residual of the decomposition against it modulo 2 pi i
    """
    times, weights = quadrature_nodes(t1, t2, cfg)
    positions = traj.points(times)
    velocities = traj.tangent(times)
    q_values = np.array([divergence_Q(model, x, t, consts) for x, t in zip(positions, times)])
    l_values = np.array([
        legendre_lagrangian(model, x, v, t, consts) for x, v, t in zip(positions, velocities, times)
    ])
    q_integral = float(weights @ q_values)
    l_integral = float(weights @ l_values)
    re_z = -0.5 * q_integral
    im_z = l_integral / consts.hbar

    ends = traj.points(np.array([t1, t2]))
    psi_start = complex(model.psi(ends[0], t1, consts))
    psi_end = complex(model.psi(ends[1], t2, consts))
    endpoint_z = complex(np.log(psi_end / psi_start))
    turns = (im_z - endpoint_z.imag) / TWO_PI
    residual = abs(re_z - endpoint_z.real) + TWO_PI * abs(turns - np.rint(turns))
    return ComplexAction(re_z, im_z, q_integral, l_integral, endpoint_z, float(residual))


@dataclass(frozen=True)
class LagrangianSample:
    phase_rate: float
    legendre: float

    @property
    def residual(self) -> float:
        scale = max(abs(self.phase_rate), abs(self.legendre))
        return 0.0 if scale == 0 else abs(self.phase_rate - self.legendre) / scale


def lagrangian_on_path(model: WaveModel, traj: Curve3, t: float, consts: PhysicalConstants,
                       cfg: FDConfig = FDConfig()) -> LagrangianSample:
    """
    Lagrangian at time t as a phase rate, hbar d/dt Arg Psi(r(t), t), next to
    its Legendre form (r', p_p) - W.
    """
    x0 = traj.points(t)[0]
    psi0 = complex(model.psi(x0, t, consts))
    if psi0 == 0:
        raise PreconditionError("trajectory sits on a node of the field")

    def relative_phase(s):
        x = traj.points(s)[0]
        return float(np.angle(complex(model.psi(x, s, consts)) / psi0))

    time_scale = consts.m * model.characteristic_length ** 2 / consts.hbar
    rate = fd_derivative(relative_phase, t, cfg.step * time_scale, cfg.order, cfg.richardson)
    velocity = traj.tangent(t)[0]
    return LagrangianSample(
        phase_rate=consts.hbar * float(rate),
        legendre=legendre_lagrangian(model, x0, velocity, t, consts),
    )


def phase_along(model: WaveModel, traj: Curve3, t1: float, t2: float, consts: PhysicalConstants,
                samples: int = 64) -> ComplexPath:
    """Values of Psi(r(t), t) on [t1, t2] as a refined, unwrapped complex path."""
    generator = lambda t: model.psi(traj.points(t), np.asarray(t), consts)
    return refine_and_unwrap(ComplexPath.from_function(generator, t1, t2, samples))
