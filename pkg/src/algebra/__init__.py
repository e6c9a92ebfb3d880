"""
NC-Chern - Algebra Package

Clifford representations and the finite-volume non-commutative calculus.
"""

from src.algebra.clifford import CliffordRep, build_clifford, gamma_dot, graded_trace
from src.algebra.nctorus import (
    DerivationKind,
    DerivationScheme,
    core_sites,
    derivation,
    ls_norm,
    sobolev_norm,
    trace_per_volume,
)

__all__ = [
    "CliffordRep",
    "build_clifford",
    "gamma_dot",
    "graded_trace",
    "DerivationKind",
    "DerivationScheme",
    "core_sites",
    "derivation",
    "ls_norm",
    "sobolev_norm",
    "trace_per_volume",
]
