"""
NC-Chern - Clifford Representations

Irreducible 2^n-dimensional representation of Cl_{2n,0}, the chirality element
gamma_0 = -i^{-n} gamma_1 ... gamma_2n, and the graded trace
tr{gamma_0 (y_1.gamma) ... (y_2n.gamma)} which is proportional to det(y_1..y_2n).
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np

from src.errors import DimensionError


logger = logging.getLogger(__name__)

MAX_HALF_DIMENSION = 4

_SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
_SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True, eq=False)
class CliffordRep:
    """
    Irreducible representation gamma_1..gamma_2n plus chirality gamma_0.

    orientation is the sign s in
        tr{gamma_0 (y_1.gamma)...(y_2n.gamma)} = s * i^{-n} * 2^n * det(y_1..y_2n),
    measured once at construction.
    """
    n: int
    gammas: Tuple[np.ndarray, ...]
    gamma0: np.ndarray
    orientation: int = field(default=0)

    @property
    def dim(self) -> int:
        """Spinor dimension 2^n."""
        return 2 ** self.n

    @property
    def dimension(self) -> int:
        """Number of generators 2n (lattice dimension d)."""
        return 2 * self.n

    @property
    def graded_constant(self) -> complex:
        """The proportionality constant s * i^{-n} * 2^n of the graded trace."""
        return self.orientation * (1j ** (-self.n)) * (2 ** self.n)

    def dirac_block(self, v: Sequence[float]) -> np.ndarray:
        """Unit-vector contraction v_hat . gamma (v must be nonzero)."""
        vector = np.asarray(v, dtype=float)
        return gamma_dot(self, vector / np.linalg.norm(vector))

    def symmetric_insertion(self) -> np.ndarray:
        """(1/sqrt(2n)) sum_i gamma_i, the value placed at a singular Dirac site."""
        return sum(self.gammas) / np.sqrt(self.dimension)


def _generators(n: int) -> Tuple[np.ndarray, ...]:
    """Recursive tensor doubling starting from (sigma_x, sigma_y)."""
    gammas = [_SIGMA_X, _SIGMA_Y]
    for _ in range(1, n):
        identity = np.eye(gammas[0].shape[0], dtype=complex)
        gammas = [np.kron(gamma, _SIGMA_Z) for gamma in gammas]
        gammas += [np.kron(identity, _SIGMA_X), np.kron(identity, _SIGMA_Y)]
    return tuple(gammas)


@lru_cache(maxsize=None)
def build_clifford(n: int) -> CliffordRep:
    """
    Build the deterministic irreducible representation of Cl_{2n,0}.

    Args:
        n: Half-dimension, 1 <= n <= 4

    Returns:
        CliffordRep with the orientation sign calibrated on the standard basis

    Raises:
        DimensionError: If n is outside 1..4
    """
    if not isinstance(n, (int, np.integer)) or n < 1 or n > MAX_HALF_DIMENSION:
        raise DimensionError(f"Clifford half-dimension must be in 1..{MAX_HALF_DIMENSION}, got {n}", n=n)
    n = int(n)

    gammas = _generators(n)
    product = np.eye(2 ** n, dtype=complex)
    for gamma in gammas:
        product = product @ gamma
    gamma0 = -(1j ** (-n)) * product

    for matrix in gammas + (gamma0,):
        matrix.setflags(write=False)

    unoriented = CliffordRep(n=n, gammas=gammas, gamma0=gamma0, orientation=1)
    standard = _graded_product(unoriented, np.eye(2 * n))
    ratio = standard / ((1j ** (-n)) * (2 ** n))
    orientation = 1 if ratio.real > 0 else -1
    logger.debug(f"Clifford n={n}: dim={2 ** n}, orientation s={orientation}")
    return CliffordRep(n=n, gammas=gammas, gamma0=gamma0, orientation=orientation)


def gamma_dot(rep: CliffordRep, v: Sequence[float]) -> np.ndarray:
    """
    Contract a real 2n-vector with the generators: sum_i v^i gamma_i.

    Raises:
        DimensionError: If len(v) != 2n
    """
    vector = np.asarray(v, dtype=float)
    if vector.shape != (rep.dimension,):
        raise DimensionError(
            f"gamma_dot expects a vector of length {rep.dimension}, got shape {vector.shape}",
            expected=rep.dimension,
            got=list(vector.shape),
        )
    return np.tensordot(vector, np.asarray(rep.gammas), axes=1)


def graded_trace(rep: CliffordRep, vectors: Sequence[Sequence[float]]) -> complex:
    """
    tr{gamma_0 (y_1.gamma) ... (y_2n.gamma)} for exactly 2n vectors of length 2n.

    Raises:
        DimensionError: On wrong vector count or length
    """
    stacked = np.asarray(vectors, dtype=float)
    if stacked.shape != (rep.dimension, rep.dimension):
        raise DimensionError(
            f"graded_trace expects {rep.dimension} vectors of length {rep.dimension}, got shape {stacked.shape}",
            expected=[rep.dimension, rep.dimension],
            got=list(stacked.shape),
        )
    return _graded_product(rep, stacked)


def _graded_product(rep: CliffordRep, stacked: np.ndarray) -> complex:
    product = rep.gamma0
    for vector in stacked:
        product = product @ gamma_dot(rep, vector)
    return complex(np.trace(product))


def graded_trace_batch(rep: CliffordRep, vectors: np.ndarray) -> np.ndarray:
    """
    Graded trace for a stack of tuples, shape (..., 2n, 2n) -> (...).

    Uses multilinearity: the trace equals graded_constant * det with the vectors as columns.
    """
    stacked = np.asarray(vectors, dtype=float)
    return rep.graded_constant * np.linalg.det(np.swapaxes(stacked, -1, -2))
