"""
NC-Chern - Hamiltonian Builder

Dense finite-volume Hamiltonians with Peierls phases and disorder, magnetic
translations, Fermi projectors and resolvent blocks.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg

from src.builders.disorder import DisorderRealization
from src.builders.lattice import FiniteVolume, HoppingModel, MagneticField, check_compatible
from src.errors import ArgumentError, DimensionError, FluxError, GeometryError, NumericalError


logger = logging.getLogger(__name__)

DEGENERACY_TOLERANCE = 1e-12


@dataclass
class FermiProjector:
    """Spectral projector P = chi_(-inf, fermi_energy](H) with its spectrum."""
    P: np.ndarray
    fermi_energy: float
    occupied_count: int
    eigenvalues: np.ndarray
    warnings: List[str] = field(default_factory=list)
    vectors: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return self.P.shape[0]

    @property
    def spectral_distance(self) -> float:
        """Distance from the Fermi energy to the nearest eigenvalue."""
        if self.eigenvalues.size == 0:
            return float("inf")
        return float(np.min(np.abs(self.eigenvalues - self.fermi_energy)))

    @property
    def degenerate(self) -> bool:
        return self.spectral_distance <= DEGENERACY_TOLERANCE


def build_hamiltonian(
    model: HoppingModel,
    vol: FiniteVolume,
    B: Optional[MagneticField] = None,
    dis: Optional[DisorderRealization] = None,
) -> np.ndarray:
    """
    Assemble <x,a|H|y,b> = exp(i pi (x, B y)) (t_{x-y} + lambda omega_{x,y}).

    Open volumes drop bonds leaving the box; Periodic volumes wrap them. Peierls
    phases use the origin-centered positions of both endpoints.

    Raises:
        DimensionError: If model, field and volume dimensions disagree
        GeometryError: If a Periodic volume cannot wrap the hopping range
    """
    check_compatible(model, vol)
    B = B or MagneticField.zero(vol.d)
    if B.d != vol.d:
        raise DimensionError(f"Flux tensor is {B.d}x{B.d} but volume has d={vol.d}", field=B.d, d=vol.d)
    if dis is not None and dis.omega.shape[0] != vol.n_sites:
        raise DimensionError("Disorder realization was drawn on a different volume")

    disordered = dis is not None and dis.lam > 0
    displacements = model.disorder_displacements if disordered else model.displacements

    Ns, Q = vol.n_sites, vol.Q
    H4 = np.zeros((Ns, Q, Ns, Q), dtype=complex)
    sites = np.arange(Ns)
    zero_block = np.zeros((Q, Q), dtype=complex)

    for u in displacements:
        neighbors = vol.shifted_sites(u)
        valid = neighbors >= 0
        if not valid.any():
            continue
        rows, cols = sites[valid], neighbors[valid]
        blocks = np.broadcast_to(model.hoppings.get(u, zero_block), (rows.size, Q, Q))
        if disordered:
            blocks = blocks + dis.perturbation(u)[rows]
        phases = B.peierls(vol.positions[rows], vol.positions[cols])
        H4[rows, :, cols, :] = phases[:, None, None] * blocks

    H = H4.reshape(vol.dim, vol.dim)
    logger.debug(
        f"[INFO] Built H for '{model.name}' on L={vol.L}, d={vol.d} ({vol.boundary.value}), "
        f"dim={vol.dim}, lambda={dis.lam if dis is not None else 0.0}"
    )
    return H


def magnetic_translation(vol: FiniteVolume, B: MagneticField, a: Sequence[int]) -> np.ndarray:
    """
    Unitary U_a |x,alpha> = exp(-i pi (a, B x)) |x + a, alpha> with periodic wrap.

    Raises:
        GeometryError: On an Open volume
        FluxError: If some L * B_ij is not an integer
    """
    if not vol.is_periodic:
        raise GeometryError("Magnetic translations need a periodic volume")
    shift = np.asarray(a, dtype=int)
    if shift.shape != (vol.d,):
        raise DimensionError(f"Translation vector must have length {vol.d}", got=list(shift.shape))

    scaled = vol.L * B.B
    bad = np.argwhere(np.abs(scaled - np.round(scaled)) > 1e-9)
    if bad.size:
        i, j = (int(c) for c in bad[0])
        raise FluxError(
            f"Flux B[{i + 1},{j + 1}] = {B.B[i, j]} is incommensurate with L={vol.L} (L*B must be an integer)",
            entry=[i + 1, j + 1],
            value=float(B.B[i, j]),
        )

    targets = vol.shifted_sites(-shift)
    phases = np.exp(-1j * np.pi * (vol.positions @ (B.B.T @ shift)))
    U_sites = np.zeros((vol.n_sites, vol.n_sites), dtype=complex)
    U_sites[targets, np.arange(vol.n_sites)] = phases
    return np.kron(U_sites, np.eye(vol.Q))


def fermi_projector(H: np.ndarray, fermi_energy: float) -> FermiProjector:
    """
    Spectral projector onto eigenvalues <= fermi_energy.

    Args:
        H: Dense Hermitian matrix
        fermi_energy: Fermi level

    Returns:
        FermiProjector; a warning is attached when an eigenvalue lies within
        1e-12 of the Fermi energy
    """
    try:
        eigenvalues, vectors = scipy.linalg.eigh(H)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalError(f"Diagonalization failed: {e}", dim=H.shape[0])

    occupied = eigenvalues <= fermi_energy
    filled = vectors[:, occupied]
    P = filled @ filled.conj().T
    projector = FermiProjector(
        P=P,
        fermi_energy=float(fermi_energy),
        occupied_count=int(occupied.sum()),
        eigenvalues=eigenvalues,
        vectors=vectors,
    )
    if projector.degenerate:
        message = (
            f"Eigenvalue within {DEGENERACY_TOLERANCE:g} of the Fermi energy {fermi_energy}; "
            "quantization is not guaranteed"
        )
        projector.warnings.append(message)
        logger.warning(f"[WARN] {message}")
    return projector


def _factor(H: np.ndarray, xi: complex):
    if np.imag(xi) == 0:
        raise ArgumentError(f"Resolvent needs Im(xi) != 0, got xi={xi}", xi=str(xi))
    shifted = H - xi * np.eye(H.shape[0])
    lu, piv = scipy.linalg.lu_factor(shifted, check_finite=False)
    if np.any(np.abs(np.diag(lu)) == 0):
        raise NumericalError(f"Singular resolvent at xi={xi}", xi=str(xi))
    return lu, piv


def resolvent_block(H: np.ndarray, xi: complex, x: int, y: int, Q: int = 1) -> np.ndarray:
    """The (x, y) site block of (H - xi)^{-1}, shape (Q, Q)."""
    lu, piv = _factor(H, xi)
    columns = np.zeros((H.shape[0], Q), dtype=complex)
    columns[y * Q + np.arange(Q), np.arange(Q)] = 1.0
    solved = scipy.linalg.lu_solve((lu, piv), columns)
    return solved[x * Q:(x + 1) * Q, :]


def resolvent_rows(H: np.ndarray, xi: complex, x: int, Q: int = 1) -> np.ndarray:
    """
    All blocks G(x, .) of (H - xi)^{-1} from one transposed solve.

    Returns:
        Array of shape (Q, dim): row alpha holds <x,alpha|(H - xi)^{-1}|.>
    """
    lu, piv = _factor(H, xi)
    units = np.zeros((H.shape[0], Q), dtype=complex)
    units[x * Q + np.arange(Q), np.arange(Q)] = 1.0
    return scipy.linalg.lu_solve((lu, piv), units, trans=1).T


def contour_projector(H: np.ndarray, fermi_energy: float, nodes: int = 128) -> np.ndarray:
    """
    P = (i/2pi) contour integral of (H - xi)^{-1} on a circle through the Fermi energy.

    The circle spans [Gershgorin lower bound - 1, fermi_energy]; trapezoidal
    nodes are offset by half a step so none sits on the real axis.
    """
    if nodes < 4:
        raise ArgumentError(f"Contour quadrature needs at least 4 nodes, got {nodes}", nodes=nodes)
    radii = np.sum(np.abs(H), axis=1) - np.abs(np.diag(H))
    lower = float(np.min(np.real(np.diag(H)) - radii)) - 1.0
    if lower >= fermi_energy:
        return np.zeros_like(H, dtype=complex)

    center = (lower + fermi_energy) / 2.0
    radius = (fermi_energy - lower) / 2.0
    identity = np.eye(H.shape[0])
    total = np.zeros(H.shape, dtype=complex)
    for k in range(nodes):
        phase = np.exp(1j * 2.0 * np.pi * (k + 0.5) / nodes)
        total += phase * scipy.linalg.solve(H - (center + radius * phase) * identity, identity)
    return -(radius / nodes) * total
