"""
NC-Chern - Dixmier Log-Scaling Estimator

Weighted diagonal operators sum_x f(t_x w) phi(x^) / |x|^{2n} on Z^{2n} have
partial sums that grow like log N. The coefficient of that growth is read
off from ordered partial sums and extrapolated in 1/log N. Only the prefix
of the order that no point beyond R_max could interrupt is used.
"""

import logging
import math
from typing import Callable, List, Optional

import numpy as np

from src.errors import ArgumentError
from src.models.results import DixmierResult
from src.utils.performance import timed


logger = logging.getLogger(__name__)

MIN_COUNT = 64
CHECKPOINT_RATIO = 1.5
FIT_POINTS = 6
MAX_POINTS = 20_000_000

SiteFunction = Callable[[np.ndarray, np.random.Generator], np.ndarray]
SphereFunction = Callable[[np.ndarray], np.ndarray]


def _lattice_points(d: int, R_max: int) -> np.ndarray:
    """Integer points with 0 < |x| <= R_max, built slab by slab along the first axis."""
    axis = np.arange(-R_max, R_max + 1, dtype=np.int32)
    slabs = []
    for first in axis:
        rest = np.stack(np.meshgrid(*([axis] * (d - 1)), indexing="ij"), axis=-1).reshape(-1, d - 1)
        norm2 = int(first) ** 2 + np.sum(rest.astype(np.int64) ** 2, axis=1)
        keep = (norm2 > 0) & (norm2 <= R_max ** 2)
        if keep.any():
            column = np.full((int(keep.sum()), 1), first, dtype=np.int32)
            slabs.append(np.hstack([column, rest[keep]]))
    return np.vstack(slabs)


def _checkpoints(total: int) -> List[int]:
    counts = []
    count = float(MIN_COUNT)
    while count < total:
        counts.append(int(count))
        count *= CHECKPOINT_RATIO
    counts.append(total)
    return counts


@timed("oracles.dixmier")
def dixmier_estimate(
    f_values: Optional[SiteFunction] = None,
    phi: Optional[SphereFunction] = None,
    n: int = 1,
    R_max: int = 256,
    seed: int = 0,
) -> DixmierResult:
    """
    Estimate Tr_Dix of the diagonal operator with weights f(t_x w) phi(x^) / |x|^{2n}.

    Args:
        f_values: Called with the (N, 2n) integer points and a seeded generator,
            returns one value per point; defaults to 1
        phi: Called with the (N, 2n) unit vectors; defaults to 1
        n: Half dimension
        R_max: Largest lattice radius included
        seed: Seed of the realization generator

    Returns:
        DixmierResult with S_N / log N at geometric checkpoints and the
        intercept of its linear fit against 1 / log N over the largest ones;
        checkpoints stop where weights from outside the ball could enter the order
    """
    if n < 1 or n > 2:
        raise ArgumentError(f"Dixmier estimator supports n in 1..2, got {n}", n=n)
    minimum = 32 if n == 1 else 8
    if R_max < minimum:
        raise ArgumentError(f"R_max must be at least {minimum} for n={n}, got {R_max}", R_max=R_max)
    projected = np.pi ** n / math.factorial(n) * float(R_max) ** (2 * n)
    if projected > MAX_POINTS:
        raise ArgumentError(
            f"R_max={R_max} gives about {projected:.2e} lattice points for n={n} (limit {MAX_POINTS:.0e})",
            R_max=R_max,
        )

    points = _lattice_points(2 * n, int(R_max))
    norms = np.linalg.norm(points.astype(float), axis=1)
    units = points / norms[:, None]
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))

    f = np.ones(len(points)) if f_values is None else np.asarray(f_values(points, rng), dtype=float)
    angular = np.ones(len(points)) if phi is None else np.asarray(phi(units), dtype=float)
    weights = f * angular / norms ** (2 * n)

    order = np.argsort(-np.abs(weights), kind="stable")
    ordered = weights[order]
    partial = np.cumsum(ordered)

    # Points outside the ball carry |weight| <= max|f phi| / R_max^{2n}; below that the order is not exact.
    floor = float(np.abs(f * angular).max()) / float(R_max) ** (2 * n)
    exact = int(np.count_nonzero(np.abs(ordered) >= floor * (1.0 - 1e-12)))
    counts = _checkpoints(exact)
    if len(counts) < 3:
        raise ArgumentError(
            f"Only {exact} exactly ordered weights for R_max={R_max}; increase R_max", R_max=R_max, exact=exact
        )
    ratios = [float(partial[count - 1] / np.log(count)) for count in counts]
    tail = min(FIT_POINTS, len(counts))
    _, intercept = np.polyfit(1.0 / np.log(counts[-tail:]), ratios[-tail:], 1)

    logger.info(
        f"[OK] Dixmier estimate n={n}, R_max={R_max}: {exact}/{len(points)} ordered points, limit {intercept:.5f}"
    )
    return DixmierResult(
        counts=counts, ratios=ratios, limit=float(intercept), exact_count=exact, total_count=len(points)
    )
