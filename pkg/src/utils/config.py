"""
NC-Chern - Configuration Management

Experiment configuration (validated pydantic model loaded from TOML or JSON
files and overridden by CLI flags) and runtime settings from environment
variables with .env file support.
"""

import json
import logging
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Tuple, Union

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.builders.lattice import Boundary, FiniteVolume, HoppingModel, MagneticField
from src.builders.zoo import model_zoo
from src.errors import ChernToolError, ConfigError, ResourceLimitError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


logger = logging.getLogger(__name__)

COMMANDS = ("kspace", "realspace", "index", "localization", "verify-identity", "phase-diagram", "sobolev")
DEFAULT_MAX_DIM = 20000
BYTES_PER_ENTRY = 16
WORKING_MATRICES = 4

# Tables whose contents stay nested instead of being flattened
NESTED_TABLES = ("model_params",)

Command = Literal["kspace", "realspace", "index", "localization", "verify-identity", "phase-diagram", "sobolev"]


class ExperimentConfig(BaseModel):
    """
    One experiment. Sections in config files are organisational only: every
    key lands in this flat model (model parameters stay in model_params).
    """
    model_config = ConfigDict(extra="forbid", populate_by_name=True, frozen=True, protected_namespaces=())

    command: Command

    # Model and volume
    model: str = "chern2d"
    model_params: Dict[str, float] = Field(default_factory=dict)
    n: int = 1
    L: int = 16
    boundary: Literal["open", "periodic"] = "open"
    flux: List[Tuple[int, int, float]] = Field(default_factory=list)
    lam: float = Field(default=0.0, alias="lambda")
    fermi_energy: float = 0.0

    # Ensemble
    seeds: Optional[List[int]] = None
    seed0: int = 0
    seed_count: int = 1

    # Real-space estimator
    scheme: Optional[Literal["open", "periodic", "periodic-symmetric", "periodic-minimal"]] = None
    core_fraction: float = 0.5

    # kspace
    grid: int = 32
    kspace_method: Optional[Literal["links", "analytic", "central"]] = None

    # index
    radii: List[float] = Field(default_factory=lambda: [2.0, 3.0, 4.0])
    x0: Optional[List[float]] = None
    insertion: Literal["symmetric", "gamma1"] = "symmetric"
    schatten_qs: List[float] = Field(default_factory=list)

    # localization
    s: float = 0.5
    delta: float = 1e-3
    distances: List[int] = Field(default_factory=lambda: [1, 2, 3, 4, 5])
    beta_threshold: float = 0.05

    # sobolev
    perturbations: List[float] = Field(default_factory=lambda: [0.1, 0.05, 0.025, 0.0125])
    deformation: Literal["hoppings", "fermi_energy", "disorder"] = "hoppings"

    # phase-diagram
    m_values: List[float] = Field(default_factory=lambda: [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0])
    lam_values: Optional[List[float]] = None

    # verify-identity
    lemma: Literal[3, 5] = 3
    trials: int = 20
    quad_radius: float = 24.0
    resolution: int = 20
    r_max: Optional[int] = None

    # Output
    output: Optional[str] = None
    format: Optional[Literal["json", "csv"]] = None
    workers: Optional[int] = None

    @field_validator("n")
    @classmethod
    def _check_n(cls, value: int) -> int:
        if not 1 <= value <= 4:
            raise ValueError(f"n must lie in 1..4, got {value}")
        return value

    @field_validator("L", "grid", "trials", "resolution")
    @classmethod
    def _check_positive_int(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"must be positive, got {value}")
        return value

    @field_validator("lam")
    @classmethod
    def _check_lambda(cls, value: float) -> float:
        if value < 0:
            raise ValueError(f"disorder strength must be >= 0, got {value}")
        return value

    @field_validator("lam_values")
    @classmethod
    def _check_lambda_values(cls, values: Optional[List[float]]) -> Optional[List[float]]:
        if values is not None and any(value < 0 for value in values):
            raise ValueError(f"disorder strengths must be >= 0, got {values}")
        return values

    @field_validator("core_fraction")
    @classmethod
    def _check_core_fraction(cls, value: float) -> float:
        if not 0.0 < value <= 1.0:
            raise ValueError(f"core fraction must lie in (0, 1], got {value}")
        return value

    @field_validator("s")
    @classmethod
    def _check_s(cls, value: float) -> float:
        if not 0.0 < value < 1.0:
            raise ValueError(f"fractional moment exponent must lie in (0, 1), got {value}")
        return value

    @field_validator("delta")
    @classmethod
    def _check_delta(cls, value: float) -> float:
        if value <= 0:
            raise ValueError(f"imaginary offset must be positive, got {value}")
        return value

    @field_validator("radii")
    @classmethod
    def _check_radii(cls, values: List[float]) -> List[float]:
        if not values or any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError(f"radii must be a nonempty increasing list, got {values}")
        return values

    @field_validator("perturbations")
    @classmethod
    def _check_perturbations(cls, values: List[float]) -> List[float]:
        if not values or any(value <= 0 for value in values) or any(b >= a for a, b in zip(values, values[1:])):
            raise ValueError(f"perturbations must be positive and strictly decreasing, got {values}")
        return values

    @field_validator("seed_count")
    @classmethod
    def _check_seed_count(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"seed_count must be at least 1, got {value}")
        return value

    @model_validator(mode="after")
    def _check_consistency(self) -> "ExperimentConfig":
        try:
            model = self.build_model()
        except ChernToolError as error:
            raise ValueError(str(error)) from error
        if self.command != "verify-identity" and model.d != 2 * self.n:
            raise ValueError(f"model '{self.model}' has d={model.d} but n={self.n} needs d={2 * self.n}")
        for i, j, _ in self.flux:
            if not (1 <= i <= model.d and 1 <= j <= model.d and i != j):
                raise ValueError(f"flux entry ({i}, {j}) outside 1..{model.d} or on the diagonal")
        if self.x0 is not None and len(self.x0) != model.d:
            raise ValueError(f"x0 must have {model.d} components, got {len(self.x0)}")
        if self.seeds is not None and not self.seeds:
            raise ValueError("seeds must not be empty when given")
        return self

    @property
    def resolved_seeds(self) -> List[int]:
        """Explicit seeds, or seed0 + k for k < seed_count."""
        if self.seeds is not None:
            return list(self.seeds)
        return [self.seed0 + k for k in range(self.seed_count)]

    @property
    def output_format(self) -> str:
        if self.format:
            return self.format
        return "csv" if self.command in ("phase-diagram", "localization", "sobolev", "verify-identity") else "json"

    def build_model(self, **overrides: float) -> HoppingModel:
        return model_zoo(self.model, {**self.model_params, **overrides})

    def build_volume(self, model: Optional[HoppingModel] = None) -> FiniteVolume:
        model = model or self.build_model()
        return FiniteVolume(d=model.d, L=self.L, Q=model.Q, boundary=Boundary(self.boundary))

    def build_field(self, d: int) -> Optional[MagneticField]:
        if not self.flux:
            return None
        return MagneticField.from_entries(d, self.flux)

    def echo(self) -> Dict[str, Any]:
        """Plain dict with CLI-facing key names (the inverse of parse_config_data)."""
        return self.model_dump(mode="json", by_alias=True)


def _flatten(data: Mapping[str, Any], source: str) -> Dict[str, Any]:
    flat: Dict[str, Any] = {}
    for key, value in data.items():
        if isinstance(value, Mapping) and key not in NESTED_TABLES:
            for inner_key, inner_value in value.items():
                if inner_key in flat:
                    raise ConfigError(
                        f"Key '{inner_key}' appears in more than one section of {source}", field=inner_key
                    )
                flat[inner_key] = inner_value
        else:
            if key in flat:
                raise ConfigError(f"Key '{key}' appears in more than one section of {source}", field=key)
            flat[key] = value
    return flat


def parse_config_data(data: Mapping[str, Any], source: str = "<config>") -> ExperimentConfig:
    """
    Validate a (possibly sectioned) mapping into an ExperimentConfig.

    Raises:
        ConfigError: With the dotted field path of the first invalid entry
    """
    flat = _flatten(data, source)
    try:
        return ExperimentConfig.model_validate(flat)
    except ValidationError as error:
        first = error.errors()[0]
        path = ".".join(str(part) for part in first["loc"]) or None
        raise ConfigError(f"Invalid configuration in {source}: {first['msg']}", field=path) from error


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Load a TOML (default) or JSON (.json suffix) experiment file.

    Raises:
        ConfigError: Unreadable file, syntax error (with line) or invalid field
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as error:
        raise ConfigError(f"Cannot read config file {path}: {error}") from error

    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as error:
            raise ConfigError(f"JSON syntax error in {path}: {error.msg}", line=error.lineno) from error
    else:
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as error:
            match = re.search(r"line (\d+)", str(error))
            line = int(match.group(1)) if match else None
            raise ConfigError(f"TOML syntax error in {path}: {error}", line=line) from error

    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must contain a table of keys")
    config = parse_config_data(data, str(path))
    logger.debug(f"[OK] Loaded {config.command} configuration from {path}")
    return config


def apply_overrides(config: ExperimentConfig, overrides: Mapping[str, Any]) -> ExperimentConfig:
    """Return a new config with every non-None override applied and revalidated."""
    updates = {key: value for key, value in overrides.items() if value is not None}
    if not updates:
        return config
    merged = config.echo()
    merged.update(updates)
    return parse_config_data(merged, "command line")


@dataclass
class RuntimeSettings:
    """
    Settings from the environment (.env loaded if present).

    CHERN_WORKERS     default worker count
    CHERN_MAX_DIM     largest matrix dimension a run may build
    CHERN_LOG_DIR     directory of the rotating log file
    CHERN_LOG_LEVEL   console level name
    """
    workers: int = 1
    max_dim: int = DEFAULT_MAX_DIM
    log_dir: Path = field(default_factory=lambda: Path("data/logs"))
    log_level: str = "INFO"

    @classmethod
    def from_env(cls, env_file: Optional[Path] = None) -> "RuntimeSettings":
        env_file = env_file or Path(".env")
        if env_file.exists():
            load_dotenv(env_file)
        try:
            return cls(
                workers=int(os.getenv("CHERN_WORKERS", "1")),
                max_dim=int(os.getenv("CHERN_MAX_DIM", str(DEFAULT_MAX_DIM))),
                log_dir=Path(os.getenv("CHERN_LOG_DIR", "data/logs")),
                log_level=os.getenv("CHERN_LOG_LEVEL", "INFO").upper(),
            )
        except ValueError as error:
            raise ConfigError(f"Invalid numeric environment setting: {error}") from error


def projected_dimension(config: ExperimentConfig) -> int:
    """Largest matrix dimension the command will build."""
    if config.command in ("kspace", "verify-identity"):
        return 0
    model = config.build_model()
    dim = config.L ** model.d * model.Q
    if config.command == "index":
        dim *= 2 ** config.n
    return dim


def estimate_memory_gb(dimension: int) -> float:
    return WORKING_MATRICES * BYTES_PER_ENTRY * dimension ** 2 / 1024 ** 3


def check_resources(config: ExperimentConfig, max_dim: int) -> Dict[str, float]:
    """
    Refuse runs whose dense matrices exceed max_dim.

    Returns:
        Plan summary with the projected dimension and memory

    Raises:
        ResourceLimitError: Projected dimension above the cap
    """
    dimension = projected_dimension(config)
    memory = estimate_memory_gb(dimension)
    if dimension > max_dim:
        raise ResourceLimitError(
            f"Projected matrix dimension {dimension} exceeds the cap {max_dim} "
            f"(about {memory:.1f} GB); reduce L or raise CHERN_MAX_DIM",
            dimension=dimension,
            cap=max_dim,
            memory_gb=memory,
        )
    return {"dimension": dimension, "memory_gb": memory, "cap": max_dim}
