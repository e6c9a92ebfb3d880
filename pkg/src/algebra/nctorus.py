"""
NC-Chern - Finite-Volume Non-Commutative Calculus

Trace per unit volume, derivations, L^s norms and the Sobolev norm, realized
on dense matrices over a FiniteVolume. The trace is a Birkhoff average of the
diagonal over a core of sites, the surrogate for the disorder average at the
origin.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from src.builders.lattice import FiniteVolume
from src.errors import ArgumentError, DimensionError, SchemeError


logger = logging.getLogger(__name__)

DEFAULT_CORE_FRACTION = 0.5


class DerivationKind(Enum):
    """How the derivation d_i f = i[X_i, f] is realized on a finite volume."""
    OPEN_COMMUTATOR = "open"
    PERIODIC_PHASE = "periodic"
    PERIODIC_SYMMETRIC = "periodic-symmetric"
    PERIODIC_MINIMAL = "periodic-minimal"

    @property
    def periodic(self) -> bool:
        return self is not DerivationKind.OPEN_COMMUTATOR


@dataclass(frozen=True, eq=False)
class DerivationScheme:
    """
    A derivation kind bound to the volume it acts on.

    OPEN_COMMUTATOR needs an Open volume; the periodic kinds need a Periodic one.
    """
    kind: DerivationKind
    volume: FiniteVolume

    def __post_init__(self):
        if not isinstance(self.kind, DerivationKind):
            object.__setattr__(self, "kind", DerivationKind(self.kind))
        if self.kind.periodic != self.volume.is_periodic:
            raise SchemeError(
                f"Derivation '{self.kind.value}' cannot act on a {self.volume.boundary.value} volume",
                kind=self.kind.value,
                boundary=self.volume.boundary.value,
            )

    @classmethod
    def for_volume(cls, volume: FiniteVolume) -> "DerivationScheme":
        """Default scheme matching the volume boundary (minimal-image commutator on a torus)."""
        kind = DerivationKind.PERIODIC_MINIMAL if volume.is_periodic else DerivationKind.OPEN_COMMUTATOR
        return cls(kind=kind, volume=volume)

    def entry_factors(self, direction: int) -> np.ndarray:
        """
        Matrix c with (d_i f)_{ab} = c_{ab} f_{ab}.

        Args:
            direction: 1-based lattice direction

        Returns:
            Dense (dim, dim) complex array
        """
        vol = self.volume
        if not 1 <= direction <= vol.d:
            raise DimensionError(f"Direction {direction} outside 1..{vol.d}", direction=direction)
        x = vol.orbital_positions[:, direction - 1].astype(float)
        delta = x[:, None] - x[None, :]

        if self.kind is DerivationKind.OPEN_COMMUTATOR:
            return 1j * delta
        if self.kind is DerivationKind.PERIODIC_MINIMAL:
            wrapped = np.mod(delta + vol.L / 2.0, vol.L) - vol.L / 2.0
            wrapped[np.isclose(np.abs(wrapped), vol.L / 2.0)] = 0.0
            return 1j * wrapped
        theta = 2.0 * np.pi / vol.L
        scale = vol.L / (2.0 * np.pi)
        if self.kind is DerivationKind.PERIODIC_PHASE:
            return scale * (np.exp(1j * theta * delta) - 1.0)
        return 1j * scale * np.sin(theta * delta)


def derivation(f: np.ndarray, direction: int, scheme: DerivationScheme) -> np.ndarray:
    """
    Finite-volume derivation d_i f.

    OPEN_COMMUTATOR gives i[X_i, f]. PERIODIC_PHASE gives
    (L/2pi)(e^{2pi i X_i/L} f e^{-2pi i X_i/L} - f), PERIODIC_SYMMETRIC the
    centred version with entry factor i (L/2pi) sin(2pi (x_i - y_i)/L).
    PERIODIC_MINIMAL multiplies by i times the minimal-image separation, with
    bonds of length exactly L/2 set to zero so the result stays Hermitian for
    Hermitian f. The periodic kinds tend to i[X_i, f] for localized f as L grows.
    """
    matrix = np.asarray(f)
    if matrix.shape != (scheme.volume.dim, scheme.volume.dim):
        raise DimensionError(
            f"Operator shape {matrix.shape} does not match volume dimension {scheme.volume.dim}",
            shape=list(matrix.shape),
        )
    return scheme.entry_factors(direction) * matrix


def core_sites(vol: FiniteVolume, fraction: float = DEFAULT_CORE_FRACTION) -> np.ndarray:
    """
    Default evaluation core.

    Open volumes use the central box of side ceil(fraction * L) around the
    origin; Periodic volumes are homogeneous and use every site.

    Raises:
        ArgumentError: If fraction is outside (0, 1]
    """
    if not 0.0 < fraction <= 1.0:
        raise ArgumentError(f"Core fraction must lie in (0, 1], got {fraction}", fraction=fraction)
    if vol.is_periodic:
        return np.arange(vol.n_sites)

    side = max(1, int(np.ceil(fraction * vol.L - 1e-9)))
    low = (vol.L - side) // 2
    inside = np.all((vol.coords >= low) & (vol.coords < low + side), axis=1)
    return np.flatnonzero(inside)


def _core_rows(vol: FiniteVolume, core: Optional[Sequence[int]]) -> np.ndarray:
    sites = core_sites(vol) if core is None else np.asarray(core, dtype=int).ravel()
    if sites.size == 0:
        raise ArgumentError("Evaluation core is empty")
    if sites.min() < 0 or sites.max() >= vol.n_sites:
        raise ArgumentError("Evaluation core contains sites outside the volume", n_sites=vol.n_sites)
    return vol.orbital_indices(sites)


def trace_per_volume(f: np.ndarray, vol: FiniteVolume, core: Optional[Sequence[int]] = None) -> complex:
    """(1/|core|) sum over core sites x and orbitals alpha of <x,alpha|f|x,alpha>."""
    rows = _core_rows(vol, core)
    diagonal = np.asarray(f)[rows, rows]
    return complex(diagonal.sum() / (rows.size // vol.Q))


def ls_norm(f: np.ndarray, s: float, vol: FiniteVolume, core: Optional[Sequence[int]] = None) -> float:
    """
    L^s norm T(|f|^s)^{1/s} with |f| = (f f^dagger)^{1/2}.

    Args:
        f: Dense operator on the volume
        s: Exponent, s >= 1
        vol: Volume the operator lives on
        core: Evaluation core (defaults to core_sites(vol))

    Returns:
        Non-negative norm value
    """
    if s < 1:
        raise ArgumentError(f"L^s norm needs s >= 1, got {s}", s=s)
    rows = _core_rows(vol, core)
    matrix = np.asarray(f)
    gram = matrix @ matrix.conj().T
    weights, vectors = np.linalg.eigh((gram + gram.conj().T) / 2.0)
    weights = np.clip(weights, 0.0, None)
    diagonal = (np.abs(vectors[rows, :]) ** 2) @ (weights ** (s / 2.0))
    value = float(diagonal.sum()) / (rows.size // vol.Q)
    return max(value, 0.0) ** (1.0 / s)


def sobolev_norm(
    f: np.ndarray,
    n: int,
    vol: FiniteVolume,
    core: Optional[Sequence[int]] = None,
    scheme: Optional[DerivationScheme] = None,
) -> float:
    """||f||_{L^2n} + sum_i ||d_i f||_{L^2n}."""
    if vol.d != 2 * n:
        raise DimensionError(f"Sobolev norm with n={n} needs d={2 * n}, volume has d={vol.d}", n=n, d=vol.d)
    scheme = scheme or DerivationScheme.for_volume(vol)
    total = ls_norm(f, 2 * n, vol, core)
    for direction in range(1, vol.d + 1):
        total += ls_norm(derivation(f, direction, scheme), 2 * n, vol, core)
    return total
