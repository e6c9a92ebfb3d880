"""
NC-Chern - Chern Number Estimators

Momentum-space curvature for clean models, the real-space trace formula on a
finite volume, and disorder-ensemble averaging over seeds and phase-diagram
grids.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.algebra.nctorus import (
    DEFAULT_CORE_FRACTION,
    DerivationKind,
    DerivationScheme,
    core_sites,
    derivation,
)
from src.builders.disorder import sample_disorder
from src.builders.hamiltonian import FermiProjector, build_hamiltonian, fermi_projector
from src.builders.lattice import FiniteVolume, HoppingModel, MagneticField
from src.builders.zoo import model_zoo
from src.errors import ArgumentError, DimensionError, EnsembleError, GapError
from src.models.results import ChernEstimate, PhaseRow
from src.utils.parallel import run_ordered
from src.utils.performance import PerformanceTimer, timed


logger = logging.getLogger(__name__)

GAP_TOLERANCE = 1e-8
IMAG_TOLERANCE = 1e-6
KSPACE_METHODS = ("links", "analytic", "central")


def _alternating_sum(
    start: np.ndarray,
    factors: Sequence[np.ndarray],
    multiply: Callable[[np.ndarray, np.ndarray], np.ndarray],
    finish: Callable[[np.ndarray, np.ndarray], complex],
) -> complex:
    """
    sum over permutations sigma of sign(sigma) * finish(start * f_s1 * ... , f_sk).

    Permutations are walked depth-first so products with a common prefix are
    formed once; the last factor only enters through finish.
    """
    def walk(prefix: np.ndarray, remaining: List[int], sign: int) -> complex:
        if len(remaining) == 1:
            return sign * finish(prefix, factors[remaining[0]])
        total = 0j
        for position, index in enumerate(remaining):
            rest = remaining[:position] + remaining[position + 1:]
            total += walk(multiply(prefix, factors[index]), rest, sign * (-1) ** position)
        return total

    return walk(start, list(range(len(factors))), 1)


def _check_gap(energies: np.ndarray, fermi_energy: float, grid: np.ndarray) -> int:
    """Validate the gap on the grid and return the (constant) occupied band count."""
    distance = np.abs(energies - fermi_energy).min(axis=-1)
    worst = np.unravel_index(np.argmin(distance), distance.shape)
    if distance[worst] <= GAP_TOLERANCE:
        k_point = [float(c) for c in grid[worst]]
        raise GapError(
            f"Spectral gap closes at the Fermi energy near k={k_point} (distance {distance[worst]:.3g})",
            k_point=k_point,
            distance=float(distance[worst]),
        )
    counts = (energies <= fermi_energy).sum(axis=-1)
    if counts.min() != counts.max():
        k_point = [float(c) for c in grid[np.unravel_index(np.argmax(counts != counts.flat[0]), counts.shape)]]
        raise GapError(
            f"Fermi energy {fermi_energy} cuts through a band (occupied count varies over the grid)",
            k_point=k_point,
            distance=float(distance.min()),
        )
    return int(counts.flat[0])


def _link_chern(vectors: np.ndarray, occupied: int) -> float:
    """Plaquette field strength from U(1) links det<u(k)|u(k+e_mu)> on a 2D grid."""
    filled = vectors[..., :occupied]

    def link(axis: int) -> np.ndarray:
        overlap = np.conj(np.swapaxes(filled, -1, -2)) @ np.roll(filled, -1, axis=axis)
        return np.linalg.det(overlap)

    U1, U2 = link(0), link(1)
    plaquette = U1 * np.roll(U2, -1, axis=0) * np.conj(np.roll(U1, -1, axis=1)) * np.conj(U2)
    return float(-np.angle(plaquette).sum() / (2.0 * np.pi))


@timed("chern.kspace")
def kspace_chern(
    model: HoppingModel,
    fermi_energy: float,
    n: int,
    grid: int,
    method: Optional[str] = None,
) -> ChernEstimate:
    """
    C_n of a clean model from the Bloch projector on an N^{2n} grid.

    Args:
        model: Clean hopping model with d = 2n
        fermi_energy: Fermi level (must lie in a gap on the grid)
        n: Half-dimension
        grid: Points per direction N
        method: "links" (n=1 default), "analytic" (n>=2 default) or "central"

    Returns:
        ChernEstimate with method "kspace"

    Raises:
        GapError: If an eigenvalue comes within 1e-8 of the Fermi energy
    """
    if model.d != 2 * n:
        raise DimensionError(f"kspace_chern with n={n} needs d={2 * n}, model has d={model.d}", n=n, d=model.d)
    if grid < 2:
        raise ArgumentError(f"Grid needs at least 2 points per direction, got {grid}", grid=grid)
    method = method or ("links" if n == 1 else "analytic")
    if method not in KSPACE_METHODS:
        raise ArgumentError(f"Unknown kspace method '{method}' (choose from {KSPACE_METHODS})", method=method)
    if method == "links" and n != 1:
        raise ArgumentError("Link-variable method is only available for n=1", method=method, n=n)

    d = model.d
    axis = 2.0 * np.pi * np.arange(grid) / grid
    k_points = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1)
    logger.info(f"[...] kspace C_{n} for '{model.name}' on {grid}^{d} points ({method})")

    with PerformanceTimer("chern.kspace.eigh"):
        energies, vectors = np.linalg.eigh(model.bloch(k_points))
    occupied = _check_gap(energies, fermi_energy, k_points)

    metadata = {"grid": grid, "method": method, "occupied_bands": occupied, "model": model.describe()}
    if occupied in (0, model.Q):
        return ChernEstimate(value=0.0, n=n, method="kspace", metadata=metadata)

    if method == "links":
        value = _link_chern(vectors, occupied)
        return ChernEstimate(value=value, n=n, method="kspace", metadata=metadata)

    filled = vectors[..., :occupied]
    projectors = filled @ np.conj(np.swapaxes(filled, -1, -2))
    if method == "analytic":
        occupation = (energies <= fermi_energy).astype(float)
        gaps = energies[..., :, None] - energies[..., None, :]
        mask = occupation[..., :, None] != occupation[..., None, :]
        weights = np.where(mask, (occupation[..., :, None] - occupation[..., None, :]) / np.where(mask, gaps, 1.0), 0.0)
        derivatives = []
        for j in range(d):
            coupling = np.conj(np.swapaxes(vectors, -1, -2)) @ model.bloch_derivative(k_points, j) @ vectors
            derivatives.append(vectors @ (coupling * weights) @ np.conj(np.swapaxes(vectors, -1, -2)))
    else:
        step = 2.0 * np.pi / grid
        derivatives = [
            (np.roll(projectors, -1, axis=j) - np.roll(projectors, 1, axis=j)) / (2.0 * step) for j in range(d)
        ]

    total = _alternating_sum(
        projectors,
        derivatives,
        multiply=np.matmul,
        finish=lambda prefix, last: complex(np.einsum("...ab,...ba->...", prefix, last).sum()),
    )
    measure = (2.0 * np.pi / grid) ** d
    value = (-1) ** n / ((2j * np.pi) ** n * math.factorial(n)) * total * measure

    estimate = ChernEstimate(value=float(value.real), n=n, method="kspace", imag=float(value.imag), metadata=metadata)
    if abs(value.imag) > 1e-8:
        message = f"kspace imaginary part {value.imag:.3g} exceeds 1e-8"
        estimate.warnings.append(message)
        logger.warning(f"[WARN] {message}")
    return estimate


def _unpack(P: Union[FermiProjector, np.ndarray]) -> Tuple[np.ndarray, List[str]]:
    if isinstance(P, FermiProjector):
        return P.P, list(P.warnings)
    return np.asarray(P), []


@timed("chern.realspace")
def realspace_chern(
    P: Union[FermiProjector, np.ndarray],
    vol: FiniteVolume,
    n: int,
    scheme: Optional[DerivationScheme] = None,
    core: Optional[Sequence[int]] = None,
) -> ChernEstimate:
    """
    (2 pi i)^n / n! * sum_sigma sign(sigma) T(P d_s1 P ... d_s2n P) on a finite volume.

    Only the core rows of the running product are formed; the last factor
    contributes through the core diagonal.
    """
    if vol.d != 2 * n:
        raise DimensionError(f"realspace_chern with n={n} needs d={2 * n}, volume has d={vol.d}", n=n, d=vol.d)
    matrix, warnings = _unpack(P)
    if matrix.shape != (vol.dim, vol.dim):
        raise DimensionError(f"Projector shape {matrix.shape} does not match volume dimension {vol.dim}")
    scheme = scheme or DerivationScheme.for_volume(vol)
    sites = core_sites(vol) if core is None else np.asarray(core, dtype=int)
    if sites.size == 0:
        raise ArgumentError("Evaluation core is empty")
    rows = vol.orbital_indices(sites)

    with PerformanceTimer("chern.realspace.derivations"):
        derivatives = [derivation(matrix, i, scheme) for i in range(1, vol.d + 1)]
    with PerformanceTimer("chern.realspace.products"):
        total = _alternating_sum(
            matrix[rows, :],
            derivatives,
            multiply=lambda prefix, factor: prefix @ factor,
            finish=lambda prefix, last: complex(np.einsum("ij,ji->", prefix, last[:, rows])),
        )
    value = (2j * np.pi) ** n / math.factorial(n) * total / sites.size

    estimate = ChernEstimate(
        value=float(value.real),
        n=n,
        method="realspace",
        imag=float(value.imag),
        metadata={"volume": vol.describe(), "scheme": scheme.kind.value, "core_sites": int(sites.size)},
        warnings=warnings,
    )
    if abs(value.imag) > IMAG_TOLERANCE:
        message = f"realspace imaginary part {value.imag:.3g} exceeds {IMAG_TOLERANCE:g}"
        estimate.warnings.append(message)
        logger.warning(f"[WARN] {message}")
    logger.debug(f"[OK] realspace C_{n} = {value.real:.6f} (imag {value.imag:.2e}) on {sites.size} core sites")
    return estimate


def core_sensitivity(
    P: Union[FermiProjector, np.ndarray],
    vol: FiniteVolume,
    n: int,
    scheme: Optional[DerivationScheme] = None,
    fractions: Sequence[float] = (0.25, 0.5, 0.75),
) -> List[Dict[str, float]]:
    """Real-space estimate for several core fractions (finite-volume bias diagnostic)."""
    rows = []
    for fraction in fractions:
        estimate = realspace_chern(P, vol, n, scheme, core_sites(vol, fraction))
        rows.append({"fraction": float(fraction), "value": estimate.value, "imag": estimate.imag})
    return rows


@dataclass
class RealizationTask:
    """Picklable payload for one disorder realization."""
    model: HoppingModel
    vol: FiniteVolume
    B: Optional[MagneticField]
    lam: float
    fermi_energy: float
    n: int
    seed: int
    scheme_kind: Optional[DerivationKind] = None
    core_fraction: float = DEFAULT_CORE_FRACTION


def _run_realization(task: RealizationTask) -> ChernEstimate:
    dis = sample_disorder(task.vol, task.model, task.lam, task.seed)
    H = build_hamiltonian(task.model, task.vol, task.B, dis)
    projector = fermi_projector(H, task.fermi_energy)
    scheme = DerivationScheme(task.scheme_kind, task.vol) if task.scheme_kind else None
    return realspace_chern(projector, task.vol, task.n, scheme, core_sites(task.vol, task.core_fraction))


def _combine(per_seed: List[ChernEstimate], seeds: Sequence[int], n: int) -> ChernEstimate:
    values = np.array([estimate.value for estimate in per_seed])
    stderr = float(values.std(ddof=1) / np.sqrt(values.size)) if values.size > 1 else 0.0
    warnings = [f"seed {seed}: {w}" for seed, estimate in zip(seeds, per_seed) for w in estimate.warnings]
    metadata = dict(per_seed[0].metadata)
    metadata["seeds"] = [int(seed) for seed in seeds]
    return ChernEstimate(
        value=float(values.mean()),
        n=n,
        method="realspace",
        realizations=int(values.size),
        stderr=stderr,
        imag=float(np.mean([estimate.imag for estimate in per_seed])),
        per_seed=values.tolist(),
        metadata=metadata,
        warnings=warnings,
    )


def disorder_averaged_chern(
    model: HoppingModel,
    vol: FiniteVolume,
    B: Optional[MagneticField],
    lam: float,
    fermi_energy: float,
    n: int,
    seeds: Sequence[int],
    scheme_kind: Optional[DerivationKind] = None,
    core_fraction: float = DEFAULT_CORE_FRACTION,
    workers: int = 1,
) -> ChernEstimate:
    """
    Mean of realspace_chern over seeds; stderr = sample std / sqrt(#seeds).

    Raises:
        EnsembleError: On the first failed realization (in seed order)
    """
    if not seeds:
        raise ArgumentError("Ensemble needs at least one seed")
    tasks = [
        RealizationTask(model, vol, B, lam, fermi_energy, n, int(seed), scheme_kind, core_fraction) for seed in seeds
    ]
    logger.info(f"[...] Ensemble C_{n}: '{model.name}', lambda={lam}, {len(seeds)} seeds, L={vol.L}")
    outcomes = run_ordered(_run_realization, tasks, workers=workers, label="realizations")
    for seed, outcome in zip(seeds, outcomes):
        if not outcome.ok:
            raise EnsembleError(
                f"Realization with seed {seed} failed: {outcome.error}", seed=int(seed), cause=outcome.error
            )
    estimate = _combine([outcome.value for outcome in outcomes], seeds, n)
    logger.info(f"[OK] C_{n} = {estimate.value:.6f} +- {estimate.stderr:.2e}")
    return estimate


@dataclass
class PhaseSettings:
    """Settings shared by every point of a phase diagram."""
    vol: FiniteVolume
    fermi_energy: float
    n: int
    seeds: List[int]
    B: Optional[MagneticField] = None
    scheme_kind: Optional[DerivationKind] = None
    core_fraction: float = DEFAULT_CORE_FRACTION
    model_params: Dict[str, float] = field(default_factory=dict)


def phase_diagram(
    family: str,
    grid: Sequence[Tuple[float, float]],
    settings: PhaseSettings,
    workers: int = 1,
) -> List[PhaseRow]:
    """
    One disorder-averaged estimate per (m, lambda) point, in grid order.

    Tasks are (grid index, seed) pairs; a failed point keeps its row with the
    error text and the remaining points are still computed.
    """
    if not grid:
        raise ArgumentError("Phase diagram grid is empty")

    rows = [PhaseRow(index=k, model=family, m=float(m), lam=float(lam)) for k, (m, lam) in enumerate(grid)]
    tasks: List[RealizationTask] = []
    owners: List[int] = []
    for row in rows:
        try:
            model = model_zoo(family, {**settings.model_params, "m": row.m})
        except Exception as error:
            row.error = f"{type(error).__name__}: {error}"
            continue
        for seed in settings.seeds:
            tasks.append(
                RealizationTask(
                    model, settings.vol, settings.B, row.lam, settings.fermi_energy, settings.n,
                    int(seed), settings.scheme_kind, settings.core_fraction,
                )
            )
            owners.append(row.index)

    logger.info(f"[...] Phase diagram '{family}': {len(rows)} points, {len(tasks)} realizations")
    outcomes = run_ordered(_run_realization, tasks, workers=workers, label="phase-diagram realizations")

    grouped: Dict[int, List] = {}
    for owner, task, outcome in zip(owners, tasks, outcomes):
        grouped.setdefault(owner, []).append((task.seed, outcome))
    for index, results in grouped.items():
        failed = [(seed, outcome) for seed, outcome in results if not outcome.ok]
        if failed:
            seed, outcome = failed[0]
            rows[index].error = f"seed {seed}: {outcome.error}"
            continue
        rows[index].estimate = _combine([outcome.value for _, outcome in results], [s for s, _ in results], settings.n)

    failures = sum(1 for row in rows if row.error)
    logger.info(f"[DONE] Phase diagram: {len(rows) - failures} points ok, {failures} failed")
    return rows
