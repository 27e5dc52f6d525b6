"""
Numerical kernels shared by every module.

Central finite differences (order 2 or 4, optional Richardson extrapolation),
composite Gauss-Legendre / Simpson quadrature, line and volume integrals and a
fixed-step RK4 integrator.

Scalar and vector fields passed to the finite-difference helpers are callables
taking a single point as a length-3 numpy array. volume_integral expects a
field vectorized over an (N, 3) array.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gamma as gamma_function

from src.errors import (
    PoleError,
    PoleOnPathError,
    PreconditionError,
    StencilFailureError,
    TruncationError,
)

logger = logging.getLogger(__name__)

POLE_EXCLUSION = 1e-6
QUADRATURE_RULES = ("gauss-legendre", "simpson")

ScalarField = Callable[[np.ndarray], float]
VectorField = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Point3:
    """Cartesian point with cylindrical and spherical accessors."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not np.all(np.isfinite([self.x, self.y, self.z])):
            raise PreconditionError(f"non-finite coordinates {(self.x, self.y, self.z)}")

    @property
    def rho(self) -> float:
        return float(np.hypot(self.x, self.y))

    @property
    def r(self) -> float:
        return float(np.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2))

    @property
    def phi(self) -> float:
        """Azimuth in [0, 2*pi)."""
        return float(np.mod(np.arctan2(self.y, self.x), 2.0 * np.pi))

    @property
    def theta(self) -> float:
        return float(np.arctan2(self.rho, self.z))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_cylindrical(cls, rho: float, phi: float, z: float = 0.0) -> "Point3":
        return cls(rho * np.cos(phi), rho * np.sin(phi), z)

    @classmethod
    def from_spherical(cls, r: float, theta: float, phi: float) -> "Point3":
        return cls(r * np.sin(theta) * np.cos(phi), r * np.sin(theta) * np.sin(phi), r * np.cos(theta))


PointLike = Union[Point3, Sequence[float], np.ndarray]


def as_point(p: PointLike) -> np.ndarray:
    """Return a fresh float array of shape (3,)."""
    if isinstance(p, Point3):
        return p.as_array()
    arr = np.array(p, dtype=float)
    if arr.shape != (3,):
        raise PreconditionError(f"expected a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise PreconditionError(f"non-finite coordinates {arr}")
    return arr


def cylindrical_radius(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.hypot(x[..., 0], x[..., 1])


# ---------------------------------------------------------------------------
# Finite differences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FDConfig:
    """
    Finite-difference settings.

    Steps are fractions of a characteristic length supplied by the caller as
    `scale`. `laplacian_step` is used for second derivatives, whose roundoff
    grows like eps / h**2.
    """

    step: float = 1e-5
    order: int = 2
    richardson: bool = False
    laplacian_step: float = 1e-3

    def __post_init__(self):
        if not (self.step > 0 and self.laplacian_step > 0):
            raise PreconditionError("finite-difference steps must be positive")
        if self.order not in (2, 4):
            raise PreconditionError(f"order must be 2 or 4, got {self.order!r}")


# (offset, weight) pairs
_FIRST = {
    2: ((1, 0.5), (-1, -0.5)),
    4: ((2, -1.0 / 12.0), (1, 8.0 / 12.0), (-1, -8.0 / 12.0), (-2, 1.0 / 12.0)),
}
_SECOND = {
    2: ((1, 1.0), (0, -2.0), (-1, 1.0)),
    4: ((2, -1.0 / 12.0), (1, 16.0 / 12.0), (0, -30.0 / 12.0), (-1, 16.0 / 12.0), (-2, -1.0 / 12.0)),
}


def _evaluate(func: Callable, q: np.ndarray, exclusion_radius: float):
    if exclusion_radius > 0 and np.hypot(q[0], q[1]) < exclusion_radius:
        raise PoleError("stencil point inside the axis exclusion zone", q)
    try:
        value = func(q)
    except StencilFailureError:
        raise
    except (ArithmeticError, ValueError) as exc:
        raise StencilFailureError(f"field evaluation failed ({exc})", q) from exc
    value = np.asarray(value)
    if not np.all(np.isfinite(value)):
        raise StencilFailureError("field is not finite", q)
    return value


def _stencil(along: Callable[[float], np.ndarray], h: float, weights, power: int):
    total = 0.0
    for offset, weight in weights:
        total = total + weight * along(offset * h)
    return total / h ** power


def _derivative(along, h: float, order: int, richardson: bool, table, power: int):
    weights = table[order]
    coarse = _stencil(along, h, weights, power)
    if not richardson:
        return coarse
    fine = _stencil(along, h / 2.0, weights, power)
    factor = 2.0 ** order
    return (factor * fine - coarse) / (factor - 1.0)


def _axis_slice(func: Callable, p: np.ndarray, axis: int, exclusion_radius: float):
    def along(s: float):
        q = p.copy()
        q[axis] += s
        return _evaluate(func, q, exclusion_radius)
    return along


def fd_derivative(
    func: Callable[[float], float],
    x: float,
    h: float,
    order: int = 2,
    richardson: bool = False,
    derivative: int = 1,
):
    """
    Central-difference derivative of a function of one real variable.

    Args:
        func: Function to differentiate (may return arrays or complex values)
        x: Evaluation point
        h: Absolute step
        order: Stencil order, 2 or 4
        richardson: Apply one Richardson extrapolation step
        derivative: 1 or 2

    Returns:
        Derivative estimate
    """
    if order not in (2, 4):
        raise PreconditionError(f"order must be 2 or 4, got {order!r}")
    table = {1: _FIRST, 2: _SECOND}.get(derivative)
    if table is None:
        raise PreconditionError("only first and second derivatives are supported")

    def along(s: float):
        try:
            value = np.asarray(func(x + s))
        except (ArithmeticError, ValueError) as exc:
            raise StencilFailureError(f"evaluation failed ({exc})", (x + s, 0.0, 0.0)) from exc
        if not np.all(np.isfinite(value)):
            raise StencilFailureError("function is not finite", (x + s, 0.0, 0.0))
        return value

    return _derivative(along, h, order, richardson, table, derivative)


def _jacobian_rows(func, p, cfg: FDConfig, scale: float, exclusion_radius: float) -> list:
    p = as_point(p)
    _evaluate(func, p, exclusion_radius)
    h = cfg.step * scale
    return [
        _derivative(_axis_slice(func, p, axis, exclusion_radius), h, cfg.order, cfg.richardson, _FIRST, 1)
        for axis in range(3)
    ]


def fd_gradient(
    field: ScalarField,
    p: PointLike,
    cfg: FDConfig = FDConfig(),
    scale: float = 1.0,
    exclusion_radius: float = 0.0,
) -> np.ndarray:
    """
    Central-difference gradient of a scalar field.

    Args:
        field: Scalar field of a 3-vector
        p: Evaluation point
        cfg: Finite-difference settings
        scale: Characteristic length; the step is cfg.step * scale
        exclusion_radius: Stencil points closer than this to the OZ axis raise PoleError

    Returns:
        Gradient as an array of shape (3,)
    """
    return np.array(_jacobian_rows(field, p, cfg, scale, exclusion_radius))


def fd_laplacian(
    field: ScalarField,
    p: PointLike,
    cfg: FDConfig = FDConfig(),
    scale: float = 1.0,
    exclusion_radius: float = 0.0,
):
    """Seven-point (order 2) or thirteen-point (order 4) Laplacian."""
    p = as_point(p)
    _evaluate(field, p, exclusion_radius)
    h = cfg.laplacian_step * scale
    return sum(
        _derivative(_axis_slice(field, p, axis, exclusion_radius), h, cfg.order, cfg.richardson, _SECOND, 2)
        for axis in range(3)
    )


def fd_divergence(
    vfield: VectorField,
    p: PointLike,
    cfg: FDConfig = FDConfig(),
    scale: float = 1.0,
    exclusion_radius: float = 0.0,
) -> float:
    rows = _jacobian_rows(vfield, p, cfg, scale, exclusion_radius)
    return float(sum(np.real_if_close(rows[axis][axis]) for axis in range(3)))


def fd_curl(
    vfield: VectorField,
    p: PointLike,
    cfg: FDConfig = FDConfig(),
    scale: float = 1.0,
    exclusion_radius: float = 0.0,
) -> np.ndarray:
    """Componentwise central-difference curl; rows[j][i] is dF_i/dx_j."""
    d = _jacobian_rows(vfield, p, cfg, scale, exclusion_radius)
    return np.array([
        d[1][2] - d[2][1],
        d[2][0] - d[0][2],
        d[0][1] - d[1][0],
    ])


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureConfig:
    """
    Composite quadrature settings.

    For Simpson's rule `points` is the number of subintervals per panel,
    rounded up to an even number.
    """

    rule: str = "gauss-legendre"
    panels: int = 16
    points: int = 8

    def __post_init__(self):
        if self.rule not in QUADRATURE_RULES:
            raise PreconditionError(f"unknown quadrature rule {self.rule!r}")
        if self.panels < 1 or self.points < 1:
            raise PreconditionError("panels and points must be positive")


@lru_cache(maxsize=64)
def _gauss_legendre(points: int) -> Tuple[np.ndarray, np.ndarray]:
    return leggauss(points)


def quadrature_nodes(a: float, b: float, cfg: QuadratureConfig = QuadratureConfig()) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes and weights of the composite rule on [a, b].

    Args:
        a: Lower bound
        b: Upper bound
        cfg: Quadrature settings

    Returns:
        Tuple of (nodes, weights)
    """
    edges = np.linspace(a, b, cfg.panels + 1)
    lo, hi = edges[:-1], edges[1:]
    if cfg.rule == "gauss-legendre":
        x, w = _gauss_legendre(cfg.points)
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        nodes = mid[:, None] + half[:, None] * x[None, :]
        weights = half[:, None] * w[None, :]
        return nodes.ravel(), weights.ravel()

    n = cfg.points + (cfg.points % 2)
    n = max(n, 2)
    pattern = np.ones(n + 1)
    pattern[1:-1:2] = 4.0
    pattern[2:-1:2] = 2.0
    step = (hi - lo) / n
    nodes = lo[:, None] + step[:, None] * np.arange(n + 1)[None, :]
    weights = step[:, None] / 3.0 * pattern[None, :]
    return nodes.ravel(), weights.ravel()


def integrate_1d(func: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                 cfg: QuadratureConfig = QuadratureConfig()):
    """Composite quadrature of a vectorized function on [a, b]."""
    if a == b:
        return 0.0
    nodes, weights = quadrature_nodes(a, b, cfg)
    return np.sum(weights * func(nodes))


@dataclass(frozen=True)
class Curve3:
    """
    Parametrized curve r(tau) for tau in [t_start, t_end].

    `position` maps an array of parameters to an (N, 3) array. `breaks` are
    interior parameters where the curve has a kink; quadrature never spans one.
    When the parameter is time, the curve doubles as a physical trajectory.
    """

    position: Callable[[np.ndarray], np.ndarray]
    t_start: float
    t_end: float
    velocity: Optional[Callable[[np.ndarray], np.ndarray]] = None
    breaks: Tuple[float, ...] = ()
    closed: bool = False

    def points(self, tau) -> np.ndarray:
        return np.asarray(self.position(np.atleast_1d(np.asarray(tau, dtype=float))), dtype=float)

    def tangent(self, tau) -> np.ndarray:
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        if self.velocity is not None:
            return np.asarray(self.velocity(tau), dtype=float)
        h = 1e-6 * max(abs(self.t_end - self.t_start), 1e-300)
        return (self.points(tau + h) - self.points(tau - h)) / (2.0 * h)

    def segments(self) -> Tuple[Tuple[float, float], ...]:
        edges = (self.t_start,) + tuple(self.breaks) + (self.t_end,)
        return tuple(zip(edges[:-1], edges[1:]))

    @classmethod
    def circle(cls, radius: float, turns: int = 1, center: Sequence[float] = (0.0, 0.0),
               z: float = 0.0) -> "Curve3":
        """Circle in a plane z = const, traversed `turns` times (negative: clockwise)."""
        cx, cy = float(center[0]), float(center[1])
        sense = 1.0 if turns >= 0 else -1.0

        def position(tau):
            return np.stack([
                cx + radius * np.cos(sense * tau),
                cy + radius * np.sin(sense * tau),
                np.full_like(tau, z),
            ], axis=-1)

        def velocity(tau):
            return np.stack([
                -sense * radius * np.sin(sense * tau),
                sense * radius * np.cos(sense * tau),
                np.zeros_like(tau),
            ], axis=-1)

        return cls(position, 0.0, 2.0 * np.pi * abs(turns), velocity, closed=True)

    @classmethod
    def orbit(cls, start: PointLike, angular_speed: float, t_start: float, t_end: float) -> "Curve3":
        """Uniform rotation of `start` about the OZ axis, parametrized by time."""
        p0 = as_point(start)

        def position(t):
            a = angular_speed * (t - t_start)
            c, s = np.cos(a), np.sin(a)
            return np.stack([c * p0[0] - s * p0[1], s * p0[0] + c * p0[1], np.full_like(t, p0[2])], axis=-1)

        def velocity(t):
            a = angular_speed * (t - t_start)
            c, s = np.cos(a), np.sin(a)
            return angular_speed * np.stack([-s * p0[0] - c * p0[1], c * p0[0] - s * p0[1], np.zeros_like(t)], axis=-1)

        return cls(position, t_start, t_end, velocity)

    @classmethod
    def stationary(cls, point: PointLike, t_start: float, t_end: float) -> "Curve3":
        p0 = as_point(point)
        return cls(
            lambda t: np.broadcast_to(p0, (len(t), 3)).copy(),
            t_start,
            t_end,
            lambda t: np.zeros((len(t), 3)),
        )

    @classmethod
    def straight(cls, a: PointLike, b: PointLike, t_start: float = 0.0, t_end: float = 1.0) -> "Curve3":
        pa, pb = as_point(a), as_point(b)
        span = t_end - t_start
        return cls(
            lambda t: pa + ((t - t_start) / span)[:, None] * (pb - pa),
            t_start,
            t_end,
            lambda t: np.broadcast_to((pb - pa) / span, (len(t), 3)).copy(),
        )

    @classmethod
    def polyline(cls, vertices: Sequence[Sequence[float]], closed: bool = False) -> "Curve3":
        """Piecewise-linear curve through `vertices`, tau = vertex index."""
        pts = np.asarray(vertices, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 2:
            raise PreconditionError("a polyline needs at least two 3D vertices")
        last = len(pts) - 1

        def position(tau):
            i = np.clip(np.floor(tau).astype(int), 0, last - 1)
            frac = (tau - i)[:, None]
            return pts[i] + frac * (pts[i + 1] - pts[i])

        def velocity(tau):
            i = np.clip(np.floor(tau).astype(int), 0, last - 1)
            return pts[i + 1] - pts[i]

        return cls(position, 0.0, float(last), velocity, tuple(float(i) for i in range(1, last)), closed)


def line_integral(
    vfield: VectorField,
    path,
    cfg: QuadratureConfig = QuadratureConfig(),
    exclusion_radius: float = 0.0,
) -> float:
    """
    Line integral of a vector field, the sum of (F, dr) along the path.

    Args:
        vfield: Vector field of a 3-vector
        path: Curve3, or an object with an `as_curve()` method (ComplexPath)
        cfg: Quadrature settings applied on every smooth segment
        exclusion_radius: Nodes closer than this to the OZ axis raise PoleOnPathError

    Returns:
        The integral value
    """
    curve = path.as_curve() if hasattr(path, "as_curve") else path
    total = 0.0
    node_count = 0
    for lo, hi in curve.segments():
        if lo == hi:
            continue
        tau, weights = quadrature_nodes(lo, hi, cfg)
        points = curve.points(tau)
        tangents = curve.tangent(tau)
        for q, dr, w in zip(points, tangents, weights):
            if exclusion_radius > 0 and np.hypot(q[0], q[1]) < exclusion_radius:
                raise PoleOnPathError("quadrature node inside the axis exclusion zone", q)
            try:
                value = np.asarray(vfield(q))
            except (ArithmeticError, ValueError) as exc:
                raise PoleOnPathError(f"field evaluation failed ({exc})", q) from exc
            if not np.all(np.isfinite(value)):
                raise PoleOnPathError("field is singular on the path", q)
            total += w * float(np.real(np.dot(value, dr)))
        node_count += len(tau)
    logger.debug("line integral over %d nodes", node_count)
    return total


@dataclass(frozen=True)
class SphericalShell:
    """Region r_min <= r <= r_max; an infinite r_max needs a tail radius."""

    r_min: float = 0.0
    r_max: float = np.inf
    tail_radius: Optional[float] = None

    def __post_init__(self):
        if self.r_min < 0 or self.r_max < self.r_min:
            raise PreconditionError(f"invalid shell [{self.r_min}, {self.r_max}]")
        if self.tail_radius is not None and self.tail_radius <= self.r_min:
            raise PreconditionError("tail radius must exceed r_min")


def _shell_integral(field, r_lo: float, r_hi: float, cfg: QuadratureConfig) -> float:
    angular = QuadratureConfig(cfg.rule, max(1, cfg.panels // 4), cfg.points)
    r, wr = quadrature_nodes(r_lo, r_hi, cfg)
    theta, wt = quadrature_nodes(0.0, np.pi, angular)
    phi, wp = quadrature_nodes(0.0, 2.0 * np.pi, angular)

    R, T, P = np.meshgrid(r, theta, phi, indexing="ij")
    W = (wr[:, None, None] * wt[None, :, None] * wp[None, None, :]) * R ** 2 * np.sin(T)
    points = np.stack([
        R * np.sin(T) * np.cos(P),
        R * np.sin(T) * np.sin(P),
        R * np.cos(T),
    ], axis=-1).reshape(-1, 3)
    values = np.broadcast_to(np.asarray(field(points), dtype=float), (len(points),))
    return float(np.sum(W.ravel() * values))


def volume_integral(field: Callable[[np.ndarray], np.ndarray], region: SphericalShell,
                    cfg: QuadratureConfig = QuadratureConfig(), tail_tolerance: float = 1e-10) -> float:
    """
    Volume integral in spherical coordinates.

    Args:
        field: Scalar field vectorized over an (N, 3) array
        region: Spherical shell; infinite shells are truncated at region.tail_radius
        cfg: Radial quadrature settings (angles use a quarter of the panels)
        tail_tolerance: Largest admissible relative tail beyond the truncation radius

    Returns:
        The integral value
    """
    if np.isfinite(region.r_max):
        return _shell_integral(field, region.r_min, region.r_max, cfg)
    if region.tail_radius is None:
        raise PreconditionError("an unbounded region needs a tail truncation radius")

    R = region.tail_radius
    main = _shell_integral(field, region.r_min, R, cfg)
    tail = _shell_integral(field, R, 2.0 * R, cfg)
    logger.debug("volume integral %.15g with tail estimate %.3e", main, tail)
    if abs(tail) > tail_tolerance * max(1.0, abs(main)):
        raise TruncationError(f"tail beyond r={R} is {tail:.3e}, integral {main:.6e}")
    return main


def gamma(x: float) -> float:
    return float(gamma_function(x))


# ---------------------------------------------------------------------------
# Time integration
# ---------------------------------------------------------------------------

def rk4_step(rhs: Callable[[float, np.ndarray], np.ndarray], t: float, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(t, y)
    k2 = rhs(t + dt / 2, y + dt * k1 / 2)
    k3 = rhs(t + dt / 2, y + dt * k2 / 2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6


def integrate_flow(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    t0: float,
    dt: float,
    steps: int,
    guard: Optional[Callable[[np.ndarray, np.ndarray], None]] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Fixed-step RK4 integration.

    Args:
        rhs: Right-hand side f(t, y)
        y0: Initial state
        t0: Initial time
        dt: Step size
        steps: Number of steps
        guard: Called as guard(y, trace) after every step; may raise to abort

    Returns:
        Tuple of (times, states) with steps + 1 rows
    """
    times = t0 + dt * np.arange(steps + 1)
    states = np.empty((steps + 1,) + np.shape(y0))
    states[0] = y0
    y = np.asarray(y0, dtype=float)
    for n in range(steps):
        y = rk4_step(rhs, times[n], y, dt)
        states[n + 1] = y
        if guard is not None:
            guard(y, states[: n + 2])
    logger.debug("RK4: %d steps of %.3e", steps, dt)
    return times, states
