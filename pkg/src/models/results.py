"""
NC-Chern - Result Records

Estimator outputs and table rows. Every record converts to a plain dict for the
JSON and CSV writers.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional


def _nearest(value: float) -> int:
    return int(round(value))


@dataclass
class ChernEstimate:
    """
    Value of C_n from one estimator.

    method: "kspace" or "realspace"
    """
    value: float
    n: int
    method: str
    realizations: int = 1
    stderr: float = 0.0
    imag: float = 0.0
    per_seed: List[float] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    @property
    def nearest_integer(self) -> int:
        return _nearest(self.value)

    @property
    def distance_to_integer(self) -> float:
        return abs(self.value - self.nearest_integer)

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON output."""
        return {
            "value": self.value,
            "n": self.n,
            "method": self.method,
            "nearest_integer": self.nearest_integer,
            "distance_to_integer": self.distance_to_integer,
            "realizations": self.realizations,
            "stderr": self.stderr,
            "imag": self.imag,
            "per_seed": list(self.per_seed),
            "metadata": dict(self.metadata),
            "warnings": list(self.warnings),
        }


@dataclass
class IndexEstimate:
    """Truncated supertrace sequence over radii and its extrapolation."""
    radii: List[float]
    values: List[float]
    extrapolated: float
    converged: bool
    insertion: str
    x0: List[float]
    imag: List[float] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def nearest_integer(self) -> Optional[int]:
        """None when the sequence did not converge."""
        return _nearest(self.extrapolated) if self.converged else None

    @property
    def distance(self) -> Optional[float]:
        if not self.converged:
            return None
        return abs(self.extrapolated - self.nearest_integer)

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON output."""
        return {
            "radii": list(self.radii),
            "values": list(self.values),
            "imag": list(self.imag),
            "extrapolated": self.extrapolated,
            "nearest_integer": self.nearest_integer,
            "distance": self.distance,
            "converged": self.converged,
            "insertion": self.insertion,
            "x0": list(self.x0),
            "warnings": list(self.warnings),
        }


@dataclass
class FracMomentFit:
    """Exponential fit of disorder-averaged |G(0, x)|^s against |x|."""
    s: float
    beta: float
    C_s: float
    residual: float
    distances: List[int]
    moments: List[float]
    delta: float
    delocalized: bool
    lam: float = 0.0
    fermi_energy: float = 0.0
    warnings: List[str] = field(default_factory=list)

    def to_row(self) -> dict:
        """CSV row (localization table)."""
        return {
            "lambda": self.lam,
            "fermi_energy": self.fermi_energy,
            "s": self.s,
            "beta": self.beta,
            "C_s": self.C_s,
            "residual": self.residual,
            "delocalized": self.delocalized,
        }

    def to_dict(self) -> dict:
        row = self.to_row()
        row.update(
            {
                "distances": list(self.distances),
                "moments": list(self.moments),
                "delta": self.delta,
                "warnings": list(self.warnings),
            }
        )
        return row


@dataclass
class ContinuityRow:
    """One deformation size and the Sobolev distance it produced."""
    delta_h: float
    norm: float
    crossing: bool = False
    level_crossings: int = 0

    def to_row(self) -> dict:
        return {"delta_h": self.delta_h, "norm": self.norm, "crossing": self.crossing}

    def to_dict(self) -> dict:
        row = self.to_row()
        row["level_crossings"] = self.level_crossings
        return row


@dataclass
class ContinuityReport:
    """Sobolev-continuity table with its log-log slope."""
    kind: str
    rows: List[ContinuityRow]
    slope: Optional[float]
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "rows": [row.to_dict() for row in self.rows],
            "slope": self.slope,
            "warnings": list(self.warnings),
        }


@dataclass
class PhaseRow:
    """
    One (m, lambda) grid point of a phase diagram.

    Either estimate or error is set; failed points keep their slot.
    """
    index: int
    model: str
    m: float
    lam: float
    estimate: Optional[ChernEstimate] = None
    error: Optional[str] = None

    def to_row(self) -> dict:
        """CSV row (phase-diagram table)."""
        estimate = self.estimate
        return {
            "index": self.index,
            "model": self.model,
            "m": self.m,
            "lambda": self.lam,
            "value": estimate.value if estimate else None,
            "stderr": estimate.stderr if estimate else None,
            "realizations": estimate.realizations if estimate else 0,
            "per_seed": ";".join(f"{v:.10g}" for v in estimate.per_seed) if estimate else "",
            "error": self.error or "",
        }


@dataclass
class IdentityCheck:
    """One oracle comparison (verify-identity table)."""
    check: str
    n: int
    trial: int
    lhs: complex
    rhs: complex
    tolerance: float

    @property
    def rel_error(self) -> float:
        scale = abs(self.rhs)
        if scale == 0:
            return abs(self.lhs - self.rhs)
        return abs(self.lhs - self.rhs) / scale

    @property
    def passed(self) -> bool:
        return self.rel_error <= self.tolerance

    def to_row(self) -> dict:
        return {
            "check": self.check,
            "n": self.n,
            "trial": self.trial,
            "lhs": str(complex(self.lhs)),
            "rhs": str(complex(self.rhs)),
            "rel_error": self.rel_error,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass
class QuadratureResult:
    """Integral value with its error estimate and the ball radius used."""
    value: complex
    error_estimate: float
    radius: float
    tail: complex = 0j

    def to_dict(self) -> dict:
        return {
            "value": str(complex(self.value)),
            "error_estimate": self.error_estimate,
            "radius": self.radius,
            "tail": str(complex(self.tail)),
        }


@dataclass
class DixmierResult:
    """Log-scaled partial sums S_N / log N and the 1/log N extrapolation."""
    counts: List[int]
    ratios: List[float]
    limit: float
    exact_count: int = 0
    total_count: int = 0

    def to_dict(self) -> dict:
        return {
            "counts": list(self.counts),
            "ratios": list(self.ratios),
            "limit": self.limit,
            "exact_count": self.exact_count,
            "total_count": self.total_count,
        }
