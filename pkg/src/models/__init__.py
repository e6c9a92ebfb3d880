"""
NC-Chern - Result Models Package

Dataclass records returned by the estimators and written by the CLI.
"""

from src.models.results import (
    ChernEstimate,
    ContinuityReport,
    ContinuityRow,
    DixmierResult,
    FracMomentFit,
    IdentityCheck,
    IndexEstimate,
    PhaseRow,
    QuadratureResult,
)

__all__ = [
    "ChernEstimate",
    "IndexEstimate",
    "FracMomentFit",
    "ContinuityRow",
    "ContinuityReport",
    "PhaseRow",
    "IdentityCheck",
    "QuadratureResult",
    "DixmierResult",
]
