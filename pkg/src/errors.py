"""
NC-Chern - Error Types

Every failure raised by the library derives from ChernToolError so the CLI can
turn it into a machine-readable error object.
"""

from typing import Any, Dict, Optional, Sequence


class ChernToolError(Exception):
    """Base class for all library errors."""

    code = "chern_error"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details

    def to_dict(self) -> Dict[str, Any]:
        """Machine-readable error object."""
        return {
            "error": self.code,
            "message": self.message,
            "details": {key: _plain(value) for key, value in self.details.items()},
        }


class DimensionError(ChernToolError):
    """Shapes, lengths or lattice dimensions do not match."""

    code = "dimension_error"


class GeometryError(ChernToolError):
    """Volume geometry cannot host the requested model (e.g. ambiguous wrap)."""

    code = "geometry_error"


class FluxError(ChernToolError):
    """Magnetic flux is incommensurate with the periodic volume."""

    code = "flux_error"

    def __init__(self, message: str, entry: Optional[Sequence[int]] = None, value: Optional[float] = None):
        super().__init__(message, entry=entry, value=value)
        self.entry = entry
        self.value = value


class SchemeError(ChernToolError):
    """Derivation scheme is incompatible with the boundary condition."""

    code = "scheme_error"


class GapError(ChernToolError):
    """Spectral gap closes at the Fermi energy on the sampled k-grid."""

    code = "gap_error"

    def __init__(self, message: str, k_point: Optional[Sequence[float]] = None, distance: Optional[float] = None):
        super().__init__(message, k_point=k_point, distance=distance)
        self.k_point = k_point
        self.distance = distance


class NumericalError(ChernToolError):
    """A linear-algebra step failed."""

    code = "numerical_error"


class PrecisionError(ChernToolError):
    """Quadrature could not reach the requested tolerance."""

    code = "precision_error"

    def __init__(self, message: str, suggested_radius: Optional[float] = None, error_estimate: Optional[float] = None):
        super().__init__(message, suggested_radius=suggested_radius, error_estimate=error_estimate)
        self.suggested_radius = suggested_radius
        self.error_estimate = error_estimate


class ModelLookupError(ChernToolError):
    """Unknown model name."""

    code = "lookup_error"


class ArgumentError(ChernToolError):
    """Invalid argument value (empty core, negative disorder, ...)."""

    code = "argument_error"


class ConfigError(ChernToolError):
    """Experiment configuration could not be parsed or validated."""

    code = "config_error"

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        super().__init__(message, field=field, line=line)
        self.field = field
        self.line = line


class ResourceLimitError(ChernToolError):
    """Projected dense matrix exceeds the configured dimension cap."""

    code = "resource_limit"

    def __init__(self, message: str, dimension: int, cap: int, memory_gb: float):
        super().__init__(message, dimension=dimension, cap=cap, memory_gb=memory_gb)
        self.dimension = dimension
        self.cap = cap
        self.memory_gb = memory_gb


class InternalError(ChernToolError):
    """Unexpected failure outside the library error hierarchy."""

    code = "internal_error"


class EnsembleError(ChernToolError):
    """A disorder realization failed; the ensemble is aborted."""

    code = "ensemble_error"

    def __init__(self, message: str, seed: int, cause: Optional[str] = None):
        super().__init__(message, seed=seed, cause=cause)
        self.seed = seed
        self.cause = cause


def _plain(value: Any) -> Any:
    """Coerce numpy scalars / tuples to JSON-friendly values."""
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, tuple):
        return list(value)
    return value
