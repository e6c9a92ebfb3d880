"""
NC-Chern - Fredholm Index Estimator

Dirac phase operator D = (X + x0).gamma / |X + x0| on the spinor-augmented
volume, the commutator K = [D, P (x) 1] and the truncated supertrace
1/2 Tr_R{Gamma K^{2n+1} D} whose radius sweep estimates the index.

Index space ordering: (site, orbital, spinor), spinor fastest.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from src.algebra.clifford import CliffordRep, build_clifford
from src.builders.hamiltonian import FermiProjector, build_hamiltonian, fermi_projector
from src.builders.lattice import Boundary, FiniteVolume
from src.builders.zoo import chern2d
from src.errors import ArgumentError, DimensionError
from src.models.results import IndexEstimate
from src.utils.logging_config import LogContext
from src.utils.performance import PerformanceTimer, timed


logger = logging.getLogger(__name__)

INSERTIONS = ("symmetric", "gamma1")
CONVERGENCE_GAP = 0.5
SINGULAR_RADIUS = 1e-12


@dataclass(frozen=True, eq=False)
class DiracPhase:
    """
    Site-diagonal Dirac phase.

    blocks[x] is the 2^n x 2^n spinor block at site x; it acts as the identity
    on orbitals.
    """
    rep: CliffordRep
    x0: np.ndarray
    blocks: np.ndarray
    volume: FiniteVolume
    insertion: str = "symmetric"

    @property
    def spinor_dim(self) -> int:
        return self.rep.dim

    @property
    def orbital_blocks(self) -> np.ndarray:
        """Spinor block for every (site, orbital) basis index, shape (dim, S, S)."""
        return np.repeat(self.blocks, self.volume.Q, axis=0)

    @property
    def radii(self) -> np.ndarray:
        """|x + x0| for every (site, orbital) basis index."""
        shifted = self.volume.orbital_positions + self.x0
        return np.linalg.norm(shifted, axis=1)

    @property
    def Dhat(self) -> np.ndarray:
        """Dense Hermitian unitary matrix on volume (x) spinor space."""
        return scipy.linalg.block_diag(*self.orbital_blocks)

    @property
    def Gamma(self) -> np.ndarray:
        """Grading 1 (x) gamma_0."""
        return np.kron(np.eye(self.volume.dim), self.rep.gamma0)


def dirac_phase(
    vol: FiniteVolume,
    rep: CliffordRep,
    x0: Sequence[float],
    insertion: str = "symmetric",
) -> DiracPhase:
    """
    Build the Dirac phase for offset x0.

    At the lattice point x = -x0 (if any) the block is (1/sqrt(2n)) sum_i gamma_i
    for insertion "symmetric", or gamma_1 for "gamma1".
    """
    if vol.d != rep.dimension:
        raise DimensionError(
            f"Clifford representation has 2n={rep.dimension} but volume has d={vol.d}", n=rep.n, d=vol.d
        )
    offset = np.asarray(x0, dtype=float)
    if offset.shape != (vol.d,):
        raise DimensionError(f"Offset x0 must have length {vol.d}", got=list(offset.shape))
    if insertion not in INSERTIONS:
        raise ArgumentError(f"Unknown insertion '{insertion}' (choose from {INSERTIONS})", insertion=insertion)

    shifted = vol.positions + offset
    norms = np.linalg.norm(shifted, axis=1)
    singular = norms < SINGULAR_RADIUS
    units = np.divide(shifted, norms[:, None], out=np.zeros_like(shifted), where=~singular[:, None])
    blocks = np.tensordot(units, np.asarray(rep.gammas), axes=1)
    if singular.any():
        special = rep.symmetric_insertion() if insertion == "symmetric" else rep.gammas[0]
        blocks[singular] = special
    return DiracPhase(rep=rep, x0=offset, blocks=blocks, volume=vol, insertion=insertion)


def _commutator(P: np.ndarray, phase: DiracPhase) -> np.ndarray:
    """K = [D, P (x) 1] with K[(i,a),(j,b)] = P_ij (d_i - d_j)_ab."""
    local = phase.orbital_blocks
    S = phase.spinor_dim
    K = np.einsum("ij,iab->iajb", P, local) - np.einsum("ij,jab->iajb", P, local)
    return K.reshape(P.shape[0] * S, P.shape[0] * S)


def _matrix(P: Union[FermiProjector, np.ndarray]) -> np.ndarray:
    return P.P if isinstance(P, FermiProjector) else np.asarray(P)


def _supertrace_sequence(
    P: np.ndarray, phase: DiracPhase, radii: Sequence[float]
) -> Tuple[np.ndarray, np.ndarray]:
    """Raw 1/2 Tr_R{Gamma K^{2n+1} D} for every radius; returns (real, imag)."""
    S = phase.spinor_dim
    n = phase.rep.n
    with PerformanceTimer("fredholm.commutator"):
        K = _commutator(P, phase)

    distance = phase.radii
    inside = np.flatnonzero(distance <= max(radii) + 1e-12)
    rows = (inside[:, None] * S + np.arange(S)[None, :]).ravel()

    with PerformanceTimer("fredholm.products"):
        product = K[rows, :]
        for _ in range(2 * n):
            product = product @ K

    product4 = product.reshape(inside.size, S, P.shape[0], S)
    diagonal = product4[np.arange(inside.size), :, inside, :]
    local = np.einsum("ab,kbc,kca->k", phase.rep.gamma0, diagonal, phase.orbital_blocks[inside])

    values = np.array([0.5 * local[distance[inside] <= R + 1e-12].sum() for R in radii])
    return values.real, values.imag


@timed("fredholm.index")
def index_estimate(
    P: Union[FermiProjector, np.ndarray],
    vol: FiniteVolume,
    rep: CliffordRep,
    x0: Sequence[float],
    radii: Sequence[float],
    insertion: str = "symmetric",
) -> IndexEstimate:
    """
    Truncated supertrace sequence over radii and its c + a/R extrapolation.

    Values are oriented so that the sign matches realspace_chern: the raw
    supertrace is multiplied by -s * index_orientation().

    Args:
        P: Fermi projector on vol
        vol: Volume with d = 2n
        rep: Clifford representation with 2n generators
        x0: Offset in [0, 1]^{2n}
        radii: Increasing truncation radii, the largest below L/2 - 1
        insertion: Block at the singular site ("symmetric" or "gamma1")

    Returns:
        IndexEstimate; converged is False when the last two values differ by
        more than 0.5
    """
    radii = [float(R) for R in radii]
    if not radii or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ArgumentError(f"Radii must be a nonempty increasing list, got {radii}", radii=radii)
    if radii[-1] > vol.L / 2 - 1:
        raise ArgumentError(
            f"Largest radius {radii[-1]} does not fit the interior of an L={vol.L} volume (max {vol.L / 2 - 1})",
            radius=radii[-1],
            L=vol.L,
        )
    matrix = _matrix(P)
    if matrix.shape != (vol.dim, vol.dim):
        raise DimensionError(f"Projector shape {matrix.shape} does not match volume dimension {vol.dim}")

    phase = dirac_phase(vol, rep, x0, insertion)
    raw, imag = _supertrace_sequence(matrix, phase, radii)
    sign = -rep.orientation * index_orientation()
    values = sign * raw

    if len(radii) >= 3:
        _, intercept = np.polyfit(1.0 / np.array(radii[-3:]), values[-3:], 1)
        extrapolated = float(intercept)
    else:
        extrapolated = float(values[-1])

    warnings: List[str] = list(P.warnings) if isinstance(P, FermiProjector) else []
    converged = len(values) < 2 or abs(values[-1] - values[-2]) <= CONVERGENCE_GAP
    if not converged:
        message = (
            f"Index sequence not converged: last values {values[-2]:.4f} and {values[-1]:.4f} "
            f"differ by more than {CONVERGENCE_GAP}"
        )
        warnings.append(message)
        logger.warning(f"[WARN] {message}")

    logger.info(f"[OK] Index sequence {np.round(values, 4).tolist()} -> {extrapolated:.4f}")
    return IndexEstimate(
        radii=radii,
        values=values.tolist(),
        extrapolated=extrapolated,
        converged=converged,
        insertion=insertion,
        x0=phase.x0.tolist(),
        imag=(sign * imag).tolist(),
        warnings=warnings,
    )


def _schatten_spectrum(P: np.ndarray, vol: FiniteVolume, rep: CliffordRep, x0: Sequence[float]) -> np.ndarray:
    phase = dirac_phase(vol, rep, x0)
    K = _commutator(P, phase)
    return np.abs(scipy.linalg.eigvalsh(1j * K))


def commutator_schatten(
    P: Union[FermiProjector, np.ndarray],
    vol: FiniteVolume,
    rep: CliffordRep,
    x0: Sequence[float],
    q: float,
) -> float:
    """(sum_k s_k^q)^{1/q} over singular values of [D, P (x) 1]."""
    if q <= 0:
        raise ArgumentError(f"Schatten exponent must be positive, got {q}", q=q)
    singular = _schatten_spectrum(_matrix(P), vol, rep, x0)
    return float(np.sum(singular ** q) ** (1.0 / q))


def schatten_profile(
    P: Union[FermiProjector, np.ndarray],
    vol: FiniteVolume,
    rep: CliffordRep,
    x0: Sequence[float],
    qs: Sequence[float],
) -> List[Dict[str, float]]:
    """commutator_schatten for several exponents from one spectrum."""
    if any(q <= 0 for q in qs):
        raise ArgumentError(f"Schatten exponents must be positive, got {list(qs)}")
    singular = _schatten_spectrum(_matrix(P), vol, rep, x0)
    return [{"q": float(q), "value": float(np.sum(singular ** q) ** (1.0 / q))} for q in qs]


@lru_cache(maxsize=1)
def index_orientation() -> int:
    """
    Sign kappa tying the supertrace to the real-space Chern number.

    Measured once on chern2d(m=1), Open L=16, x0=(1/2, 1/2): kappa = +1 when
    -s times the raw supertrace has the sign of realspace_chern.
    """
    from src.calculators.chern import realspace_chern

    vol = FiniteVolume(d=2, L=16, Q=2, boundary=Boundary.OPEN)
    rep = build_clifford(1)
    projector = fermi_projector(build_hamiltonian(chern2d(1.0), vol), 0.0)
    phase = dirac_phase(vol, rep, (0.5, 0.5))
    raw, _ = _supertrace_sequence(projector.P, phase, [6.0])
    with LogContext("src.calculators.chern", logging.WARNING):
        reference = realspace_chern(projector, vol, 1).value

    if abs(raw[-1]) < 0.5 or abs(reference) < 0.5:
        logger.warning(
            f"[WARN] Index orientation calibration inconclusive (raw={raw[-1]:.3f}, realspace={reference:.3f}); "
            "using +1"
        )
        return 1
    kappa = 1 if np.sign(-rep.orientation * raw[-1]) == np.sign(reference) else -1
    logger.debug(f"[OK] Index orientation kappa={kappa} (raw={raw[-1]:.4f}, realspace={reference:.4f})")
    return kappa
