"""
NC-Chern - Disorder Realizations

Seeded random hopping perturbations omega in [-1/2, 1/2] on every bond of
the clean hopping support plus on-site, paired so that the perturbed
Hamiltonian stays Hermitian.

Streams: displacement k of the lexicographically non-negative half gets its
own Philox generator seeded by SeedSequence([seed, k]), so a realization does
not depend on draw order or on the process that builds it.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from src.builders.lattice import Displacement, FiniteVolume, HoppingModel, check_compatible
from src.errors import ArgumentError, GeometryError


logger = logging.getLogger(__name__)


def _is_positive(u: Displacement) -> bool:
    for component in u:
        if component:
            return component > 0
    return False


def _stream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


@dataclass(frozen=True, eq=False)
class DisorderRealization:
    """
    One disorder configuration on a finite volume.

    omega[x, k, alpha, beta] is the variate on the bond <x, alpha| . |x - u_k, beta>
    with u_k = displacements[k]. Pairing: omega[x - u, -u] = omega[x, u]^T.
    """
    seed: int
    lam: float
    displacements: List[Displacement]
    omega: np.ndarray
    volume: FiniteVolume
    _lookup: Dict[Displacement, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.omega.setflags(write=False)
        object.__setattr__(self, "_lookup", {u: k for k, u in enumerate(self.displacements)})

    def index_of(self, u: Displacement) -> int:
        return self._lookup[tuple(u)]

    def bond_values(self, u: Displacement) -> np.ndarray:
        """omega for displacement u at every site, shape (n_sites, Q, Q)."""
        return self.omega[:, self.index_of(u)]

    def perturbation(self, u: Displacement) -> np.ndarray:
        """lambda * omega for displacement u."""
        return self.lam * self.bond_values(u)

    def with_strength(self, lam: float) -> "DisorderRealization":
        """Same variates at a different disorder strength."""
        if lam < 0:
            raise ArgumentError(f"Disorder strength must be non-negative, got {lam}", lam=lam)
        return DisorderRealization(self.seed, float(lam), list(self.displacements), self.omega, self.volume)

    def translated(self, a: Sequence[int]) -> "DisorderRealization":
        """
        Shifted configuration t_a omega with (t_a omega)[x] = omega[x - a].

        Raises:
            GeometryError: On an Open volume
        """
        if not self.volume.is_periodic:
            raise GeometryError("Disorder translation needs a periodic volume")
        source = self.volume.shifted_sites(a)
        shifted = np.array(self.omega[source])
        return DisorderRealization(self.seed, self.lam, list(self.displacements), shifted, self.volume)


def sample_disorder(vol: FiniteVolume, model: HoppingModel, lam: float, seed: int) -> DisorderRealization:
    """
    Draw one disorder realization.

    Args:
        vol: Finite volume
        model: Hopping model (fixes Q and the bond range)
        lam: Disorder strength lambda >= 0
        seed: Non-negative integer seed

    Returns:
        DisorderRealization with paired variates on the hopping support and on-site
    """
    if lam < 0:
        raise ArgumentError(f"Disorder strength must be non-negative, got {lam}", lam=lam)
    if seed < 0:
        raise ArgumentError(f"Seed must be non-negative, got {seed}", seed=seed)
    check_compatible(model, vol)

    displacements = model.disorder_displacements
    lookup = {u: k for k, u in enumerate(displacements)}
    omega = np.zeros((vol.n_sites, len(displacements), vol.Q, vol.Q))
    zero = (0,) * vol.d

    onsite = _stream(seed, 0).random((vol.n_sites, vol.Q, vol.Q)) - 0.5
    upper = np.triu(onsite)
    omega[:, lookup[zero]] = upper + np.swapaxes(np.triu(onsite, 1), 1, 2)

    stream = 1
    for u in displacements:
        if not _is_positive(u):
            continue
        values = _stream(seed, stream).random((vol.n_sites, vol.Q, vol.Q)) - 0.5
        stream += 1
        omega[:, lookup[u]] = values

        # bond (x, x + u) is bond (x + u, (x + u) - u) seen from the other end
        partner = vol.shifted_sites(tuple(-c for c in u))
        valid = partner >= 0
        mirror = lookup[tuple(-c for c in u)]
        omega[np.flatnonzero(valid), mirror] = np.swapaxes(values[partner[valid]], 1, 2)

    logger.debug(
        f"[INFO] Disorder seed={seed} lambda={lam}: {len(displacements)} displacements on {vol.n_sites} sites"
    )
    return DisorderRealization(
        seed=int(seed), lam=float(lam), displacements=list(displacements), omega=omega, volume=vol
    )
