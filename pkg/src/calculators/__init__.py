"""
NC-Chern - Calculators Package

Chern number estimators, the Fredholm index and localization diagnostics.
"""

from src.calculators.chern import (
    PhaseSettings,
    core_sensitivity,
    disorder_averaged_chern,
    kspace_chern,
    phase_diagram,
    realspace_chern,
)
from src.calculators.fredholm import (
    DiracPhase,
    commutator_schatten,
    dirac_phase,
    index_estimate,
    index_orientation,
    schatten_profile,
)
from src.calculators.localization import (
    delta_sweep,
    fractional_moment_fit,
    localization_length,
    sobolev_continuity,
)

__all__ = [
    "kspace_chern",
    "realspace_chern",
    "core_sensitivity",
    "disorder_averaged_chern",
    "PhaseSettings",
    "phase_diagram",
    "DiracPhase",
    "dirac_phase",
    "index_estimate",
    "index_orientation",
    "commutator_schatten",
    "schatten_profile",
    "localization_length",
    "fractional_moment_fit",
    "delta_sweep",
    "sobolev_continuity",
]
