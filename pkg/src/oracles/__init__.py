"""
NC-Chern - Oracles

Quadrature and lattice-sum checks of the geometric identities.
"""

from src.oracles.dixmier import dixmier_estimate
from src.oracles.identities import Simplex, lemma3_lhs, lemma3_rhs, simplex_volume

__all__ = ["Simplex", "simplex_volume", "lemma3_lhs", "lemma3_rhs", "dixmier_estimate"]
