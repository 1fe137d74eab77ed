"""
Data models for the tensorlab harness

Pydantic models for everything that crosses the command-line boundary:
solver parameters, experiment configuration, per-trial records and the
report itself. Numerical value types live next to the code that uses
them in ``tensorlab.services``.
"""

from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from tensorlab.config import get_settings


class ErrorCode(str, Enum):
    """Standardised error codes"""
    INVALID_ARGUMENT = "INVALID_ARGUMENT"
    CONTRACT_VIOLATION = "CONTRACT_VIOLATION"
    UNSUPPORTED_PARAMETER = "UNSUPPORTED_PARAMETER"
    INSTANCE_TOO_LARGE = "INSTANCE_TOO_LARGE"
    IO_ERROR = "IO_ERROR"
    INTERNAL_ERROR = "INTERNAL_ERROR"


class Subcommand(str, Enum):
    """Experiments exposed on the command line"""
    NORM = "norm"
    RANDCHECK = "randcheck"
    SZAREK = "szarek"
    WALKS = "walks"
    ABSORB = "absorb"
    LPS = "lps"
    CN = "cn"


class OutputFormat(str, Enum):
    """Report serialisations"""
    JSON = "json"
    CSV = "csv"


class WalkKind(str, Enum):
    """Which lattice the walks experiment counts on"""
    IDENTITY = "identity"
    TREE = "tree"


class SolverParams(BaseModel):
    """Parameters of the matrix-free top singular value solver"""
    model_config = ConfigDict(frozen=True)

    tol: float = Field(..., gt=0, description="Threshold on successive squared estimates")
    max_iter: int = Field(..., ge=1, description="Iterations per start")
    restarts: int = Field(..., ge=0, description="Random starts besides the identity start")
    seed: int = Field(0, ge=0, lt=2**64, description="Seed of the random starts")

    @classmethod
    def from_settings(cls, seed: int = 0, **overrides: Any) -> "SolverParams":
        """
        Build solver parameters from the configured defaults

        Args:
            seed: Seed for the random starts
            **overrides: Explicit values that win over the settings

        Returns:
            SolverParams instance
        """
        settings = get_settings()
        values = {
            "tol": settings.SOLVER_TOL,
            "max_iter": settings.SOLVER_MAX_ITER,
            "restarts": settings.SOLVER_RESTARTS,
            "seed": seed,
        }
        values.update(overrides)
        return cls(**values)


class ExperimentConfig(BaseModel):
    """Validated configuration of one harness run"""
    model_config = ConfigDict(frozen=True)

    subcommand: Subcommand = Field(..., description="Experiment to run")
    n: int = Field(3, ge=1, le=64, description="Family size")
    dim: int = Field(4, ge=1, le=256, description="Matrix size N")
    dim2: Optional[int] = Field(None, ge=1, le=256, description="Second matrix size for mixed checks")
    gens: int = Field(2, ge=1, le=64, description="Free generators for the walks experiment")
    degree: Optional[int] = Field(None, ge=2, le=1024, description="Tree degree for tree walks")
    steps: int = Field(10, ge=0, le=5000, description="Half-lengths m = 0..steps")
    kind: WalkKind = Field(WalkKind.IDENTITY, description="Lattice for the walks experiment")
    prime: int = Field(5, ge=2, description="LPS prime")
    degree_cutoff: int = Field(40, ge=1, le=200, description="Highest irrep degree")
    m_max: int = Field(3, ge=1, le=64, description="Highest moment order")
    trials: int = Field(1, ge=1, le=100000, description="Number of independent trials")
    seed: int = Field(0, ge=0, lt=2**64, description="Root seed")
    tol: float = Field(1e-9, gt=0, description="Solver tolerance on squared values")
    output_format: OutputFormat = Field(OutputFormat.JSON, description="Report format")
    output: Optional[str] = Field(None, description="Report path, '-' for stdout")
    jobs: int = Field(1, ge=1, le=256, description="Worker threads")
    timings: bool = Field(False, description="Record wall-clock time per trial")

    @model_validator(mode="after")
    def validate_walks(self) -> "ExperimentConfig":
        """Tree walks need a degree"""
        if self.subcommand is Subcommand.WALKS and self.kind is WalkKind.TREE and self.degree is None:
            raise ValueError("tree walks require --degree")
        return self


class TrialRecord(BaseModel):
    """One line of an experiment report"""
    trial: int = Field(..., ge=0, description="Trial index")
    n: Optional[int] = Field(None, description="Family size")
    dim: Optional[int] = Field(None, description="Matrix size")
    m: Optional[int] = Field(None, description="Moment order, half-length or irrep degree")
    m_prime: Optional[int] = Field(None, description="Second irrep degree of a cross term")
    value: Optional[float] = Field(None, description="Measured value")
    gap: Optional[float] = Field(None, description="Value minus the reference bound")
    count: Optional[str] = Field(None, description="Exact integer count as a decimal string")
    converged: Optional[bool] = Field(None, description="Solver convergence flag")
    iterations: Optional[int] = Field(None, description="Solver iterations")
    seed_index: int = Field(..., ge=0, description="Seed stream index reproducing this record")
    wall_ms: Optional[float] = Field(None, description="Wall-clock milliseconds")
    passed: bool = Field(True, description="Whether the in-run contract held")
    note: Optional[str] = Field(None, description="Contract or failure description")
    details: Dict[str, float] = Field(default_factory=dict, description="Secondary measurements of the trial")

    @field_validator("count", mode="before")
    @classmethod
    def stringify_count(cls, v: Any) -> Optional[str]:
        """Counts are exact integers, kept as decimal strings"""
        if v is None:
            return None
        if isinstance(v, bool):
            raise ValueError("count must be an integer")
        return str(int(v))


class ReportSummary(BaseModel):
    """Aggregate view over the records of a run"""
    records: int = Field(0, description="Number of records")
    violations: List[int] = Field(default_factory=list, description="Trial indices whose contract failed")
    min_gap: Optional[float] = Field(None, description="Smallest gap")
    max_gap: Optional[float] = Field(None, description="Largest gap")
    mean_gap: Optional[float] = Field(None, description="Mean gap")
    min_value: Optional[float] = Field(None, description="Smallest value")
    max_value: Optional[float] = Field(None, description="Largest value")
    bounds: Dict[str, float] = Field(default_factory=dict, description="Reference constants")


class ExperimentReport(BaseModel):
    """Report emitted by one harness run"""
    config: ExperimentConfig = Field(..., description="Echo of the configuration")
    records: List[TrialRecord] = Field(default_factory=list, description="Per-trial records")
    summary: ReportSummary = Field(default_factory=ReportSummary, description="Aggregates")
    extras: Dict[str, Any] = Field(default_factory=dict, description="Subcommand-specific payload")

    @property
    def ok(self) -> bool:
        """True when no record violated its contract"""
        return not self.summary.violations
