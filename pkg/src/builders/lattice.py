"""
NC-Chern - Lattice Types

Finite volumes of Z^d with Q orbitals per site, uniform magnetic fields and
translation-invariant hopping models.

Basis ordering: the flat index of |x, alpha> is site(x) * Q + alpha with
site(x) the C-order ravel of the lattice coordinates and alpha 0-based.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import ArgumentError, DimensionError, GeometryError


logger = logging.getLogger(__name__)

Displacement = Tuple[int, ...]


class Boundary(Enum):
    """Boundary condition of a finite volume."""
    OPEN = "open"
    PERIODIC = "periodic"


@dataclass(frozen=True, eq=False)
class FiniteVolume:
    """
    Box {0..L-1}^d with Q orbitals per site.

    Positions are origin-centered: the lattice point floor(L/2) in every
    direction is the origin (the volume center for Open boundaries).
    """
    d: int
    L: int
    Q: int = 1
    boundary: Boundary = Boundary.OPEN

    def __post_init__(self):
        if self.d < 2 or self.d % 2:
            raise DimensionError(f"Lattice dimension must be even and positive, got d={self.d}", d=self.d)
        if self.L < 1 or self.Q < 1:
            raise DimensionError(f"Volume needs L >= 1 and Q >= 1, got L={self.L}, Q={self.Q}", L=self.L, Q=self.Q)
        if not isinstance(self.boundary, Boundary):
            object.__setattr__(self, "boundary", Boundary(self.boundary))

    @property
    def n(self) -> int:
        """Half-dimension."""
        return self.d // 2

    @property
    def n_sites(self) -> int:
        return self.L ** self.d

    @property
    def dim(self) -> int:
        """Hilbert space dimension Q * L^d."""
        return self.Q * self.n_sites

    @property
    def is_periodic(self) -> bool:
        return self.boundary is Boundary.PERIODIC

    @property
    def origin(self) -> np.ndarray:
        return np.full(self.d, self.L // 2, dtype=int)

    @cached_property
    def coords(self) -> np.ndarray:
        """Lattice coordinates in 0..L-1, shape (n_sites, d)."""
        grid = np.indices((self.L,) * self.d).reshape(self.d, -1).T
        grid.setflags(write=False)
        return grid

    @cached_property
    def positions(self) -> np.ndarray:
        """Origin-centered integer positions, shape (n_sites, d)."""
        centered = self.coords - self.origin
        centered.setflags(write=False)
        return centered

    @cached_property
    def orbital_positions(self) -> np.ndarray:
        """Position of every basis state, shape (dim, d)."""
        expanded = np.repeat(self.positions, self.Q, axis=0)
        expanded.setflags(write=False)
        return expanded

    def site_of(self, coords: np.ndarray) -> np.ndarray:
        """
        Flat site index of lattice coordinates (shape (..., d)).

        Periodic volumes wrap; Open volumes return -1 for points outside.
        """
        coords = np.asarray(coords, dtype=int)
        flat_coords = coords.reshape(-1, self.d)
        if self.is_periodic:
            flat = np.ravel_multi_index(tuple((flat_coords % self.L).T), (self.L,) * self.d)
        else:
            inside = np.all((flat_coords >= 0) & (flat_coords < self.L), axis=1)
            flat = np.full(len(flat_coords), -1, dtype=int)
            if inside.any():
                flat[inside] = np.ravel_multi_index(tuple(flat_coords[inside].T), (self.L,) * self.d)
        return flat.reshape(coords.shape[:-1])

    def site_at(self, position: Sequence[int]) -> int:
        """Flat site index of an origin-centered position."""
        return int(self.site_of(np.asarray(position, dtype=int) + self.origin))

    def site_index(self, coord: Sequence[int], alpha: int) -> int:
        """Flat basis index of |x, alpha> for coordinates x in 0..L-1."""
        if not 0 <= alpha < self.Q:
            raise DimensionError(f"Orbital index {alpha} outside 0..{self.Q - 1}", alpha=alpha)
        site = int(self.site_of(np.asarray(coord, dtype=int)))
        if site < 0:
            raise DimensionError(f"Coordinates {list(coord)} lie outside the volume", coord=list(coord))
        return site * self.Q + alpha

    def shifted_sites(self, u: Sequence[int]) -> np.ndarray:
        """For every site x, the flat index of x - u (or -1 if it leaves an Open volume)."""
        return self.site_of(self.coords - np.asarray(u, dtype=int))

    def orbital_indices(self, sites: Sequence[int]) -> np.ndarray:
        """Basis indices of all orbitals on the given sites."""
        sites = np.asarray(sites, dtype=int)
        return (sites[:, None] * self.Q + np.arange(self.Q)[None, :]).ravel()

    def describe(self) -> Dict[str, object]:
        return {"d": self.d, "L": self.L, "Q": self.Q, "boundary": self.boundary.value}


@dataclass(frozen=True, eq=False)
class MagneticField:
    """Uniform field as a real antisymmetric d x d flux tensor B_hat."""
    B: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.B, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionError(f"Flux tensor must be square, got shape {matrix.shape}", shape=list(matrix.shape))
        if not np.array_equal(matrix.T, -matrix):
            raise ArgumentError("Flux tensor must be exactly antisymmetric")
        matrix.setflags(write=False)
        object.__setattr__(self, "B", matrix)

    @classmethod
    def zero(cls, d: int) -> "MagneticField":
        return cls(np.zeros((d, d)))

    @classmethod
    def from_entries(cls, d: int, entries: Sequence[Tuple[int, int, float]]) -> "MagneticField":
        """Build from (i, j, value) triples with 1-based i < j; B[j, i] = -value."""
        matrix = np.zeros((d, d))
        for i, j, value in entries:
            if not (1 <= i <= d and 1 <= j <= d) or i == j:
                raise DimensionError(f"Flux entry ({i}, {j}) outside 1..{d} or diagonal", entry=[i, j])
            matrix[i - 1, j - 1] = value
            matrix[j - 1, i - 1] = -value
        return cls(matrix)

    @property
    def d(self) -> int:
        return self.B.shape[0]

    @property
    def is_zero(self) -> bool:
        return not np.any(self.B)

    def peierls(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Phase factors exp(i pi (x, B y)) for paired rows of x and y."""
        if self.is_zero:
            return np.ones(np.asarray(x).shape[0], dtype=complex)
        return np.exp(1j * np.pi * np.einsum("ki,ij,kj->k", x, self.B, y))


@dataclass(frozen=True, eq=False)
class HoppingModel:
    """
    Translation-invariant hoppings t_u (Q x Q) with <x|H_0|y> = t_{x-y}.

    Hermiticity t_{-u} = t_u^dagger and the finite range |u| < R are checked
    at construction.
    """
    d: int
    Q: int
    hoppings: Dict[Displacement, np.ndarray]
    range: int
    name: str = "custom"
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        cleaned: Dict[Displacement, np.ndarray] = {}
        for u, matrix in self.hoppings.items():
            key = tuple(int(c) for c in u)
            block = np.array(matrix, dtype=complex).reshape(self.Q, self.Q)
            if len(key) != self.d:
                raise DimensionError(f"Displacement {key} does not have length d={self.d}", displacement=list(key))
            if np.linalg.norm(key) >= self.range:
                raise ArgumentError(
                    f"Displacement {key} violates the hopping range R={self.range}", displacement=list(key)
                )
            block.setflags(write=False)
            cleaned[key] = block
        for u, block in cleaned.items():
            mirror = tuple(-c for c in u)
            partner = cleaned.get(mirror)
            if partner is None or not np.allclose(partner, block.conj().T, atol=1e-14):
                raise ArgumentError(f"Hoppings are not Hermitian: t_{mirror} != t_{u}^dagger", displacement=list(u))
        object.__setattr__(self, "hoppings", dict(sorted(cleaned.items())))

    @property
    def displacements(self) -> List[Displacement]:
        return list(self.hoppings)

    @cached_property
    def disorder_displacements(self) -> List[Displacement]:
        """The hopping support plus the on-site bond, sorted; disorder acts on these bonds."""
        return sorted(set(self.hoppings) | {(0,) * self.d})

    def max_extent(self, include_disorder: bool = False) -> int:
        """Largest |u_i| over stored (and optionally disorder) displacements."""
        pool = list(self.hoppings)
        if include_disorder:
            pool += self.disorder_displacements
        return max((max(abs(c) for c in u) for u in pool), default=0)

    def scaled_zero(self) -> "HoppingModel":
        """Same geometry and bond support, all hopping blocks zero."""
        zeros = {u: np.zeros((self.Q, self.Q), dtype=complex) for u in self.hoppings}
        return HoppingModel(d=self.d, Q=self.Q, hoppings=zeros, range=self.range, name=f"{self.name}:zero")

    def bloch(self, k: np.ndarray) -> np.ndarray:
        """H(k) = sum_u t_u exp(-i k.u) on a stack of k, shape (..., d) -> (..., Q, Q)."""
        return self._fourier(k, derivative=None)

    def bloch_derivative(self, k: np.ndarray, direction: int) -> np.ndarray:
        """dH/dk_j (0-based j) on a stack of k."""
        return self._fourier(k, derivative=direction)

    def _fourier(self, k: np.ndarray, derivative: Optional[int]) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        result = np.zeros(k.shape[:-1] + (self.Q, self.Q), dtype=complex)
        for u, block in self.hoppings.items():
            phase = np.exp(-1j * (k @ np.asarray(u, dtype=float)))
            if derivative is not None:
                phase = -1j * u[derivative] * phase
            result += phase[..., None, None] * block
        return result

    def describe(self) -> Dict[str, object]:
        return {"name": self.name, "d": self.d, "Q": self.Q, "range": self.range, "params": dict(self.params)}


def check_compatible(model: HoppingModel, vol: FiniteVolume) -> None:
    """
    Validate that a model can live on a volume.

    Raises:
        DimensionError: If d or Q disagree
        GeometryError: If a Periodic volume is too small to wrap bonds unambiguously
    """
    if model.d != vol.d or model.Q != vol.Q:
        raise DimensionError(
            f"Model '{model.name}' has d={model.d}, Q={model.Q} but volume has d={vol.d}, Q={vol.Q}",
            model=[model.d, model.Q],
            volume=[vol.d, vol.Q],
        )
    if vol.is_periodic:
        extent = model.max_extent(include_disorder=True)
        if 2 * extent >= vol.L:
            raise GeometryError(
                f"Hopping extent {extent} is not below L/2 = {vol.L / 2} on a periodic volume (ambiguous wrap)",
                extent=extent,
                L=vol.L,
            )
