"""
NC-Chern - Model Builders

Finite volumes, hopping models, disorder and the dense operators built from them.
"""

from src.builders.disorder import DisorderRealization, sample_disorder
from src.builders.hamiltonian import (
    FermiProjector,
    build_hamiltonian,
    contour_projector,
    fermi_projector,
    magnetic_translation,
    resolvent_block,
    resolvent_rows,
)
from src.builders.lattice import Boundary, FiniteVolume, HoppingModel, MagneticField, check_compatible
from src.builders.zoo import model_zoo

__all__ = [
    "Boundary",
    "FiniteVolume",
    "HoppingModel",
    "MagneticField",
    "check_compatible",
    "DisorderRealization",
    "sample_disorder",
    "FermiProjector",
    "build_hamiltonian",
    "contour_projector",
    "fermi_projector",
    "magnetic_translation",
    "resolvent_block",
    "resolvent_rows",
    "model_zoo",
]
