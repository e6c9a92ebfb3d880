"""
NC-Chern - Localization Diagnostics

Localization length Lambda_n, fractional-moment decay fits of the resolvent,
and Sobolev continuity of the Fermi projector under deformations.
"""

import logging
import math
from typing import List, Optional, Sequence, Union

import numpy as np

from src.algebra.nctorus import DerivationScheme, derivation, ls_norm, sobolev_norm
from src.builders.disorder import sample_disorder
from src.builders.hamiltonian import FermiProjector, build_hamiltonian, fermi_projector, resolvent_rows
from src.builders.lattice import FiniteVolume, HoppingModel, MagneticField
from src.errors import ArgumentError, DimensionError
from src.models.results import ContinuityReport, ContinuityRow, FracMomentFit
from src.utils.performance import timed


logger = logging.getLogger(__name__)

DEFAULT_DELTA = 1e-3
DEFAULT_BETA_THRESHOLD = 0.05
DIRECTION_SEED_OFFSET = 2 ** 32
CONTINUITY_KINDS = ("hoppings", "fermi_energy", "disorder")
EXTENDED_FRACTION = 0.3


def localization_length(
    P: Union[FermiProjector, np.ndarray],
    vol: FiniteVolume,
    n: int,
    scheme: Optional[DerivationScheme] = None,
    core: Optional[Sequence[int]] = None,
) -> float:
    """Lambda_n = sum_i ||d_i P||_{L^2n}, in lattice spacings."""
    if vol.d != 2 * n:
        raise DimensionError(f"Localization length with n={n} needs d={2 * n}, volume has d={vol.d}", n=n, d=vol.d)
    matrix = P.P if isinstance(P, FermiProjector) else np.asarray(P)
    scheme = scheme or DerivationScheme.for_volume(vol)
    return float(sum(ls_norm(derivation(matrix, i, scheme), 2 * n, vol, core) for i in range(1, vol.d + 1)))


def _validate_distances(vol: FiniteVolume, distances: Sequence[int]) -> List[int]:
    unique = sorted({int(r) for r in distances})
    if len(unique) < 4:
        raise ArgumentError(f"Fractional-moment fit needs at least 4 distinct distances, got {unique}")
    reach = (vol.L - 1) // 2
    if unique[0] < 1 or unique[-1] > reach:
        raise ArgumentError(
            f"Distances must lie in 1..{reach} for L={vol.L}, got {unique}", distances=unique, L=vol.L
        )
    return unique


@timed("localization.fractional_moments")
def fractional_moment_fit(
    model: HoppingModel,
    vol: FiniteVolume,
    B: Optional[MagneticField],
    lam: float,
    fermi_energy: float,
    s: float,
    delta: float,
    seeds: Sequence[int],
    distances: Sequence[int],
    beta_threshold: float = DEFAULT_BETA_THRESHOLD,
) -> FracMomentFit:
    """
    Fit the averaged |G(0, x; E_F + i delta)|^s against |x|.

    The moment at distance r averages the spectral norm of the Q x Q block to
    the 2d points +-r e_j over all seeds. beta = -slope / s and C_s = exp(intercept)
    of the least-squares line through log(moment). The fit is flagged
    delocalized when beta <= beta_threshold or when the decay length 1/beta
    exceeds the span of fitted distances. Vanishing moments are left out of the
    line; with fewer than two nonzero ones beta is inf.
    """
    if not 0.0 < s < 1.0:
        raise ArgumentError(f"Fractional moment exponent must lie in (0, 1), got {s}", s=s)
    if delta <= 0:
        raise ArgumentError(f"Imaginary offset delta must be positive, got {delta}", delta=delta)
    if not seeds:
        raise ArgumentError("Fractional-moment fit needs at least one seed")
    radii = _validate_distances(vol, distances)

    Q = vol.Q
    origin = vol.site_at([0] * vol.d)
    targets = []
    for r in radii:
        points = []
        for j in range(vol.d):
            for sign in (1, -1):
                position = [0] * vol.d
                position[j] = sign * r
                points.append(vol.site_at(position))
        targets.append(points)

    moments = np.zeros(len(radii))
    for seed in seeds:
        dis = sample_disorder(vol, model, lam, int(seed))
        H = build_hamiltonian(model, vol, B, dis)
        rows = resolvent_rows(H, fermi_energy + 1j * delta, origin, Q)
        for k, points in enumerate(targets):
            blocks = [rows[:, site * Q:(site + 1) * Q] for site in points]
            moments[k] += sum(np.linalg.norm(block, 2) ** s for block in blocks) / len(blocks)
    moments /= len(seeds)

    warnings: List[str] = []
    positive = moments > np.finfo(float).tiny
    if positive.sum() < 2:
        # No two nonzero moments: the resolvent vanishes beyond the first distances.
        logger.info(f"[OK] Fractional moments s={s}, delta={delta}: resolvent vanishes off-site, beta=inf")
        return FracMomentFit(
            s=float(s),
            beta=math.inf,
            C_s=float(moments.max()),
            residual=0.0,
            distances=radii,
            moments=moments.tolist(),
            delta=float(delta),
            delocalized=False,
            lam=float(lam),
            fermi_energy=float(fermi_energy),
            warnings=warnings,
        )
    if not positive.all():
        warnings.append(f"Fitted {int(positive.sum())} of {len(radii)} distances; the other moments vanish")
    x = np.asarray(radii, dtype=float)[positive]
    logs = np.log(moments[positive])
    slope, intercept = np.polyfit(x, logs, 1)
    residual = float(np.sqrt(np.mean((logs - (slope * x + intercept)) ** 2)))
    beta = float(-slope / s)

    span = radii[-1] - radii[0]
    delocalized = beta <= beta_threshold or 1.0 / beta > span
    if delocalized:
        message = f"Resolvent moments do not decay within r={radii[0]}..{radii[-1]} (beta={beta:.4f})"
        warnings.append(message)
        logger.warning(f"[WARN] {message}")

    logger.info(f"[OK] Fractional moments s={s}, delta={delta}: beta={beta:.4f}, residual={residual:.3g}")
    return FracMomentFit(
        s=float(s),
        beta=beta,
        C_s=float(np.exp(intercept)),
        residual=residual,
        distances=radii,
        moments=moments.tolist(),
        delta=float(delta),
        delocalized=bool(delocalized),
        lam=float(lam),
        fermi_energy=float(fermi_energy),
        warnings=warnings,
    )


def delta_sweep(
    model: HoppingModel,
    vol: FiniteVolume,
    B: Optional[MagneticField],
    lam: float,
    fermi_energy: float,
    s: float,
    deltas: Sequence[float],
    seeds: Sequence[int],
    distances: Sequence[int],
) -> List[FracMomentFit]:
    """fractional_moment_fit repeated for several imaginary offsets."""
    return [fractional_moment_fit(model, vol, B, lam, fermi_energy, s, delta, seeds, distances) for delta in deltas]


def _direction(kind: str, model: HoppingModel, vol: FiniteVolume, B: Optional[MagneticField], seed: int):
    """Fixed deformation direction with entries bounded by 1."""
    if kind == "fermi_energy":
        return -np.eye(vol.dim)
    if kind == "disorder":
        return build_hamiltonian(model.scaled_zero(), vol, B, sample_disorder(vol, model, 1.0, seed))
    # 2 * omega lies in [-1, 1]
    pattern = sample_disorder(vol, model, 2.0, seed + DIRECTION_SEED_OFFSET)
    return build_hamiltonian(model.scaled_zero(), vol, B, pattern)


def _crossed_participation(base: FermiProjector, moved: FermiProjector, vol: FiniteVolume) -> float:
    """
    Largest participation fraction among the levels that crossed the Fermi energy.

    The crossed levels are the |count change| levels of the moved spectrum next
    to the Fermi energy. A level spread evenly over the volume has fraction 1, a
    level on one site 1 / n_sites.
    """
    change = moved.occupied_count - base.occupied_count
    if change == 0:
        return 0.0
    if change > 0:
        levels = moved.vectors[:, moved.occupied_count - change:moved.occupied_count]
    else:
        levels = moved.vectors[:, moved.occupied_count:moved.occupied_count - change]
    density = (np.abs(levels) ** 2).reshape(vol.n_sites, vol.Q, -1).sum(axis=1)
    participation = 1.0 / np.sum(density ** 2, axis=0)
    return float(participation.max() / vol.n_sites)


@timed("localization.sobolev_continuity")
def sobolev_continuity(
    model: HoppingModel,
    vol: FiniteVolume,
    fermi_energy: float,
    deltas: Sequence[float],
    n: int,
    seeds: Sequence[int],
    lam: float = 0.0,
    kind: str = "hoppings",
    B: Optional[MagneticField] = None,
    scheme: Optional[DerivationScheme] = None,
    core: Optional[Sequence[int]] = None,
) -> ContinuityReport:
    """
    ||P' - P||_W along H' = H + delta_h * Delta for a fixed direction Delta.

    kind "hoppings" perturbs every bond of the hopping support, "fermi_energy"
    shifts the Fermi level and "disorder" raises lambda. Norms are averaged
    over seeds. Levels that cross the Fermi energy are counted per row; the row
    is marked crossing only when one of them is extended, i.e. its participation
    reaches EXTENDED_FRACTION of the sites. Localized levels crossing a mobility
    gap leave the continuity claim intact.
    """
    if kind not in CONTINUITY_KINDS:
        raise ArgumentError(f"Unknown deformation kind '{kind}' (choose from {CONTINUITY_KINDS})", kind=kind)
    if vol.d != 2 * n:
        raise DimensionError(f"Sobolev continuity with n={n} needs d={2 * n}, volume has d={vol.d}", n=n, d=vol.d)
    sizes = [float(value) for value in deltas]
    if not sizes or any(value < 0 for value in sizes) or any(b >= a for a, b in zip(sizes, sizes[1:])):
        raise ArgumentError(f"Perturbation sizes must be non-negative and strictly decreasing, got {sizes}")
    if not seeds:
        raise ArgumentError("Sobolev continuity needs at least one seed")
    scheme = scheme or DerivationScheme.for_volume(vol)

    norms = np.zeros(len(sizes))
    crossings = [False] * len(sizes)
    level_crossings = [0] * len(sizes)
    for seed in seeds:
        dis = sample_disorder(vol, model, lam, int(seed))
        H = build_hamiltonian(model, vol, B, dis)
        base = fermi_projector(H, fermi_energy)
        direction = _direction(kind, model, vol, B, int(seed))
        for k, size in enumerate(sizes):
            if size == 0:
                continue
            moved = fermi_projector(H + size * direction, fermi_energy)
            norms[k] += sobolev_norm(moved.P - base.P, n, vol, core, scheme)
            level_crossings[k] += abs(moved.occupied_count - base.occupied_count)
            crossings[k] = crossings[k] or _crossed_participation(base, moved, vol) >= EXTENDED_FRACTION
    norms /= len(seeds)

    rows = [
        ContinuityRow(delta_h=size, norm=float(norm), crossing=crossing, level_crossings=count)
        for size, norm, crossing, count in zip(sizes, norms, crossings, level_crossings)
    ]
    warnings = [
        f"Extended level crosses the Fermi energy at delta_h={row.delta_h}; continuity does not apply to this row"
        for row in rows if row.crossing
    ]
    for message in warnings:
        logger.warning(f"[WARN] {message}")
    localized = sum(row.level_crossings for row in rows if not row.crossing)
    if localized:
        logger.info(f"[OK] {localized} localized level crossings kept in the continuity rows")

    usable = [(row.delta_h, row.norm) for row in rows if row.delta_h > 0 and row.norm > 0 and not row.crossing]
    slope = None
    if len(usable) >= 2:
        x, y = np.log(np.array(usable)).T
        slope = float(np.polyfit(x, y, 1)[0])
    logger.info(f"[OK] Sobolev continuity ({kind}): {len(rows)} rows, log-log slope {slope}")
    return ContinuityReport(kind=kind, rows=rows, slope=slope, warnings=warnings)
