"""
Experiment configuration: a YAML file validated into ExperimentConfig.
Unknown keys are rejected and every numeric range is checked at load time.
"""

import hashlib
import json
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
import yaml
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from src.exceptions import ConfigurationError
from src.models.operators import FrequencyVector, Potential, Window
from src.services.model import amo_potential, fourier_potential, zero_potential

GOLDEN_MEAN = (5 ** 0.5 - 1) / 2


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class AmoPotentialSpec(StrictModel):
    kind: Literal["amo"] = "amo"
    coupling: float = Field(ge=0.0)

    def build(self) -> Potential:
        return amo_potential(self.coupling)


class FourierPotentialSpec(StrictModel):
    kind: Literal["fourier"] = "fourier"
    dimension: int = Field(default=1, ge=1)
    coefficients: List[Tuple[List[int], float, float]]

    def build(self) -> Potential:
        return fourier_potential(self.dimension, self.coefficients)


class ZeroPotentialSpec(StrictModel):
    kind: Literal["zero"] = "zero"
    dimension: int = Field(default=1, ge=1)

    def build(self) -> Potential:
        return zero_potential(self.dimension)


PotentialSpec = Annotated[
    Union[AmoPotentialSpec, FourierPotentialSpec, ZeroPotentialSpec],
    Field(discriminator="kind"),
]


class PhaseSampling(StrictModel):
    mode: Literal["equidistributed", "random"] = "equidistributed"
    count: int = Field(default=32, ge=1)
    seed: Optional[int] = 0


class Grid(StrictModel):
    """Uniform grid of `points` values from start to stop inclusive."""

    start: float
    stop: float
    points: int = Field(ge=2)

    @model_validator(mode="after")
    def _ascending(self) -> "Grid":
        if self.stop <= self.start:
            raise ValueError(f"grid stop {self.stop} must exceed start {self.start}")
        return self

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


class Tolerances(StrictModel):
    q_vs_groupvel: float = Field(default=0.07, gt=0.0)
    dual_vs_q: float = Field(default=0.07, gt=0.0)
    velocity_margin: float = Field(default=0.1, ge=0.0)


def centered_window(size: int) -> Window:
    """Window of `size` sites containing 0 at its centre (rounding down for even sizes)."""
    return (-(size // 2), size - 1 - size // 2)


class ExperimentConfig(StrictModel):
    """
    One experiment: the operator (potential, alpha, phases) plus the numerical
    parameters of every stage of the verification pipeline.
    """

    name: str = "experiment"
    potential: PotentialSpec
    alpha: List[float] = Field(default_factory=lambda: [GOLDEN_MEAN], min_length=1)
    rationally_independent: bool = True
    x: Union[float, List[float]] = 0.0
    theta: float = 0.0
    phases: PhaseSampling = PhaseSampling()
    ids_window: int = Field(default=2048, ge=2)
    transport_window: int = Field(default=1024, ge=3)
    dual_window: int = Field(default=1025, ge=1)
    chain_sites: int = Field(default=8, ge=2, le=12)
    t_grid: Grid = Grid(start=8.0, stop=128.0, points=16)
    lr_grid: Optional[Grid] = None
    e_grid: Grid = Grid(start=-6.5, stop=6.5, points=2601)
    kotani_grid: Grid = Grid(start=-1.0, stop=1.0, points=5)
    delta_n: float = Field(default=1e-3, ge=1e-4, le=1e-2)
    gap_filter_factor: float = Field(default=20.0, gt=1.0)
    gap_threshold: float = Field(default=0.02, gt=0.0)
    front_threshold: float = Field(default=1e-4, gt=0.0, lt=1.0)
    epsilon: float = Field(default=1e-4, ge=1e-6, le=1e-2)
    kotani_phases: int = Field(default=200, ge=100)
    cocycle_length: int = Field(default=100000, ge=1000)
    moment_powers: List[float] = Field(default_factory=lambda: [1.0, 2.0], min_length=1)
    orbit_k: int = Field(default=50, ge=0)
    chain_times: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0], min_length=1)
    tolerances: Tolerances = Tolerances()
    output_dir: Optional[str] = None

    @field_validator("alpha")
    @classmethod
    def _alpha_in_unit_interval(cls, alpha: List[float]) -> List[float]:
        if any(not 0.0 < a < 1.0 for a in alpha):
            raise ValueError(f"frequencies must lie in (0, 1), got {alpha}")
        return alpha

    @model_validator(mode="after")
    def _dimensions_agree(self) -> "ExperimentConfig":
        dimension = len(self.alpha)
        if getattr(self.potential, "dimension", 1) != dimension:
            raise ValueError(
                f"potential lives on T^{getattr(self.potential, 'dimension', 1)} "
                f"but alpha has {dimension} components"
            )
        if len(np.atleast_1d(self.x)) != dimension:
            raise ValueError(f"phase x={self.x} does not live on T^{dimension}")
        return self

    def build_potential(self) -> Potential:
        return self.potential.build()

    def frequency(self) -> FrequencyVector:
        return FrequencyVector(tuple(self.alpha), self.rationally_independent)

    def phase_point(self) -> Tuple[float, ...]:
        return tuple(float(c) for c in np.atleast_1d(self.x))

    def lr_times(self) -> np.ndarray:
        """Fit times of the light-cone velocity, half of t_grid unless given."""
        if self.lr_grid is not None:
            return self.lr_grid.values()
        return 0.5 * self.t_grid.values()

    def with_overrides(
        self, seed: Optional[int] = None, output_dir: Optional[str] = None
    ) -> "ExperimentConfig":
        """Copy with CLI overrides applied (re-validated)."""
        data = self.model_dump()
        if seed is not None:
            data["phases"]["seed"] = seed
        if output_dir is not None:
            data["output_dir"] = output_dir
        return ExperimentConfig.model_validate(data)

    def sha256(self) -> str:
        """SHA-256 of the canonical JSON dump (sorted keys)."""
        dump = self.model_dump(mode="json")
        canonical = json.dumps(dump, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_experiment(path: Union[str, Path]) -> ExperimentConfig:
    """Function that reads and validates an experiment file

    Args:
        path (str | Path): YAML file.

    Returns:
        ExperimentConfig: validated configuration
    """
    try:
        with open(path, encoding="utf-8") as stream:
            raw = yaml.safe_load(stream)
    except (OSError, yaml.YAMLError) as error:
        raise ConfigurationError(f"cannot read experiment file {path}: {error}") from error
    if not isinstance(raw, dict):
        raise ConfigurationError(f"experiment file {path} must contain a mapping")
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as error:
        raise ConfigurationError(f"invalid experiment file {path}:\n{error}") from error
