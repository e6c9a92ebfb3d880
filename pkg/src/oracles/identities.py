"""
NC-Chern - Geometric Identity Oracles

Signed simplex volumes and the integral identity behind the supertrace
formula:

    int dx tr{gamma_0 prod_i ((x_i + x)^ - (x_{i+1} + x)^).gamma}
        = s (2 pi)^n / (i^n n!) det(x_1 .. x_2n),      x_{2n+1} = 0,

checked by quadrature. The integrand is graded_constant * det of the
differences of unit vectors, bounded, with kinks at x = -x_i and decay
|x|^{-(2n+1)}.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate

from src.algebra.clifford import CliffordRep, build_clifford, graded_trace_batch
from src.errors import ArgumentError, DimensionError, PrecisionError
from src.models.results import QuadratureResult
from src.utils.performance import timed


logger = logging.getLogger(__name__)

DEFAULT_RADIUS = 24.0
MAX_POINT_NORM = 4.0
DEFAULT_RESOLUTION = 20
TOLERANCES = {1: 1e-3, 2: 5e-2}


@dataclass(frozen=True, eq=False)
class Simplex:
    """2n + 1 vertices in R^{2n}."""
    vertices: np.ndarray

    def __post_init__(self):
        stacked = np.asarray(self.vertices, dtype=float)
        if stacked.ndim != 2 or stacked.shape[0] != stacked.shape[1] + 1:
            raise DimensionError(
                f"A simplex in R^d needs d + 1 vertices, got shape {stacked.shape}", shape=list(stacked.shape)
            )
        object.__setattr__(self, "vertices", stacked)

    @property
    def dimension(self) -> int:
        return self.vertices.shape[1]


def simplex_volume(simplex: Union[Simplex, Sequence[Sequence[float]]]) -> float:
    """Oriented volume det(v_1 - v_0, ..., v_d - v_0) / d!."""
    if not isinstance(simplex, Simplex):
        simplex = Simplex(np.asarray(simplex, dtype=float))
    edges = simplex.vertices[1:] - simplex.vertices[0]
    return float(np.linalg.det(edges.T) / math.factorial(simplex.dimension))


def _validate_points(points: Sequence[Sequence[float]]) -> np.ndarray:
    stacked = np.asarray(points, dtype=float)
    if stacked.ndim != 2 or stacked.shape[0] != stacked.shape[1] or stacked.shape[0] % 2:
        raise DimensionError(
            f"Expected 2n points of length 2n, got shape {stacked.shape}", shape=list(stacked.shape)
        )
    if np.linalg.norm(stacked, axis=1).max(initial=0.0) > MAX_POINT_NORM:
        raise ArgumentError(f"Points must satisfy |x_i| <= {MAX_POINT_NORM}", max_norm=MAX_POINT_NORM)
    return stacked


def lemma3_rhs(points: Sequence[Sequence[float]], rep: Optional[CliffordRep] = None) -> complex:
    """s (2 pi)^n / (i^n n!) det(x_1, ..., x_2n) with s the representation orientation."""
    stacked = _validate_points(points)
    n = stacked.shape[0] // 2
    rep = rep or build_clifford(n)
    return complex(
        rep.orientation * (2 * np.pi) ** n / (1j ** n * math.factorial(n)) * np.linalg.det(stacked.T)
    )


def _unit(v: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(v, axis=-1, keepdims=True)
    return np.divide(v, norms, out=np.zeros_like(v), where=norms > 0)


def _integrand(rep: CliffordRep, points: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Graded trace of (a_1 - a_2, ..., a_2n - a_{2n+1}) with a_i = unit(x_i + x), a_{2n+1} = unit(x)."""
    units = [_unit(x + p) for p in points] + [_unit(x)]
    differences = np.stack([units[i] - units[i + 1] for i in range(len(points))], axis=-2)
    return graded_trace_batch(rep, differences)


def _planar_integrand(points: np.ndarray, r: float, theta: float) -> float:
    """n = 1 integrand times the polar Jacobian, in plain floats."""
    x, y = r * math.cos(theta), r * math.sin(theta)
    units = []
    for px, py in ((points[0, 0] + x, points[0, 1] + y), (points[1, 0] + x, points[1, 1] + y), (x, y)):
        norm = math.hypot(px, py)
        units.append((px / norm, py / norm) if norm > 0 else (0.0, 0.0))
    (a1x, a1y), (a2x, a2y), (a3x, a3y) = units
    return r * ((a1x - a2x) * (a2y - a3y) - (a1y - a2y) * (a2x - a3x))


def _planar(points: np.ndarray, radius: float) -> Tuple[float, float, float]:
    """Adaptive polar quadrature on the disc and on its complement; returns (disc, error, tail)."""
    kinks_r = sorted({float(np.linalg.norm(p)) for p in points if 0 < np.linalg.norm(p) < radius})
    kinks_theta = sorted({float(math.atan2(-p[1], -p[0]) % (2 * math.pi)) for p in points if np.linalg.norm(p) > 0})

    def ring(r: float) -> float:
        value, _ = integrate.quad(
            lambda theta: _planar_integrand(points, r, theta),
            0.0,
            2 * math.pi,
            points=kinks_theta or None,
            limit=200,
            epsabs=1e-11,
            epsrel=1e-9,
        )
        return value

    disc, disc_error = integrate.quad(ring, 0.0, radius, points=kinks_r or None, limit=200, epsabs=1e-9, epsrel=1e-8)
    # rings decay like r^{-2n} outside every kink
    tail, tail_error = integrate.quad(ring, radius, np.inf, limit=200, epsabs=1e-10, epsrel=1e-8)
    return disc, abs(disc_error) + abs(tail_error), tail


def _gauss(count: int, low: float, high: float) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(count)
    half = (high - low) / 2.0
    return low + half * (nodes + 1.0), half * weights


def _hyperspherical(rep: CliffordRep, points: np.ndarray, radius: float, resolution: int) -> complex:
    """Product Gauss-Legendre grid on R^4 in hyperspherical coordinates, tail mapped by r = R / t."""
    theta1, w1 = _gauss(resolution, 0.0, np.pi)
    theta2, w2 = _gauss(resolution, 0.0, np.pi)
    phi, w3 = _gauss(2 * resolution, 0.0, 2 * np.pi)
    T1, T2, F = np.meshgrid(theta1, theta2, phi, indexing="ij")
    directions = np.stack(
        [
            np.cos(T1),
            np.sin(T1) * np.cos(T2),
            np.sin(T1) * np.sin(T2) * np.cos(F),
            np.sin(T1) * np.sin(T2) * np.sin(F),
        ],
        axis=-1,
    ).reshape(-1, 4)
    angular = (w1[:, None, None] * w2[None, :, None] * w3[None, None, :] * np.sin(T1) ** 2 * np.sin(T2)).ravel()

    breaks = [0.0] + sorted({float(np.linalg.norm(p)) for p in points if 0 < np.linalg.norm(p) < radius}) + [radius]
    radial_nodes, radial_weights = [], []
    for low, high in zip(breaks, breaks[1:]):
        nodes, weights = _gauss(resolution, low, high)
        radial_nodes.append(nodes)
        radial_weights.append(weights * nodes ** 3)
    t, wt = _gauss(resolution, 0.0, 1.0)
    radial_nodes.append(radius / t)
    radial_weights.append(wt * radius / t ** 2 * (radius / t) ** 3)

    total = 0j
    for r, weight in zip(np.concatenate(radial_nodes), np.concatenate(radial_weights)):
        total += weight * complex(np.dot(angular, _integrand(rep, points, r * directions)))
    return total


@timed("oracles.lemma3")
def lemma3_lhs(
    rep: CliffordRep,
    points: Sequence[Sequence[float]],
    radius: float = DEFAULT_RADIUS,
    resolution: int = DEFAULT_RESOLUTION,
    tolerance: Optional[float] = None,
) -> QuadratureResult:
    """
    Quadrature of the graded-trace integrand over R^{2n}.

    n = 1: nested adaptive quadrature in polar coordinates on the disc of the
    given radius with breakpoints at the kinks, and on the unbounded
    complement. n = 2: fixed hyperspherical product grid with a mapped radial
    tail; the error bar is the difference to a half-resolution grid.

    Raises:
        ArgumentError: For n > 2
        PrecisionError: If the error estimate exceeds tolerance (default 1e-3
            for n = 1, 5e-2 for n = 2) relative to the scale
            (2 pi)^n max|x_i|^{2n}; suggests a doubled radius
    """
    stacked = _validate_points(points)
    n = stacked.shape[0] // 2
    if n != rep.n:
        raise DimensionError(f"Points are for n={n} but representation has n={rep.n}", n=n, rep_n=rep.n)
    if n > 2:
        raise ArgumentError(f"Quadrature oracle supports n <= 2, got n={n}", n=n)

    tolerance = TOLERANCES[n] if tolerance is None else tolerance
    scale = max(float(np.linalg.norm(stacked, axis=1).max()), 1e-12) ** (2 * n) * (2 * np.pi) ** n
    if n == 1:
        disc, disc_error, tail = _planar(stacked, radius)
        value = rep.graded_constant * (disc + tail)
        error = disc_error
    else:
        value = _hyperspherical(rep, stacked, radius, resolution)
        coarse = _hyperspherical(rep, stacked, radius, max(4, resolution // 2))
        tail = 0.0
        error = abs(value - coarse) / abs(rep.graded_constant)

    if error > tolerance * scale:
        raise PrecisionError(
            f"Quadrature error {error:.3g} exceeds tolerance {tolerance * scale:.3g} at radius {radius}",
            suggested_radius=2 * radius,
            error_estimate=error,
        )
    logger.debug(f"[OK] Identity quadrature n={n}: {value:.6g} (error {error:.2g})")
    return QuadratureResult(
        value=complex(value),
        error_estimate=float(error * abs(rep.graded_constant)),
        radius=float(radius),
        tail=complex(rep.graded_constant * tail),
    )
