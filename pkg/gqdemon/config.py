"""Run configuration shared by the CLI commands."""

import json
import math
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .optimizer import CandidateGrid


Command = Literal["measure", "protocol", "sweep", "validate"]
Measure = Literal["thermal_qd", "original_qd", "gqd", "mid"]
OutputFormat = Literal["csv", "json"]


class RunConfig(BaseModel):
    """Every setting of one CLI invocation, with stable defaults."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    command: Command
    state: Optional[str] = None
    state_file: Optional[str] = None
    measure: Measure = "gqd"
    apparatus: Optional[str] = None
    order: Optional[tuple[str, ...]] = None
    theta_steps: int = Field(25, ge=2)
    phi_steps: int = Field(25, ge=1)
    refine: bool = True
    lam_from: float = Field(0.0, ge=0.0, le=1.0)
    lam_to: float = Field(1.0, ge=0.0, le=1.0)
    lam_step: float = Field(0.05, gt=0.0)
    format: OutputFormat = "csv"
    out: Optional[str] = None
    precision: int = Field(6, ge=1, le=12)
    seed: int = 0
    parallel: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check_range(self) -> "RunConfig":
        if self.lam_from > self.lam_to:
            raise ValueError(f"sweep range is empty: from {self.lam_from} > to {self.lam_to}")
        return self

    def grid(self) -> CandidateGrid:
        return CandidateGrid(
            theta_steps=self.theta_steps,
            phi_steps=self.phi_steps,
            refine=self.refine,
            seed=self.seed,
        )

    def lambdas(self) -> list[float]:
        """Sweep points from lam_from to lam_to inclusive, rounded to kill float drift."""
        count = math.floor((self.lam_to - self.lam_from) / self.lam_step + 1e-9)
        points = [round(self.lam_from + k * self.lam_step, 12) for k in range(count + 1)]
        return [p for p in points if p <= self.lam_to + 1e-12]

    def canonical(self) -> str:
        """Sorted-key JSON; `from_canonical` parses it back to an equal config."""
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_canonical(cls, text: str) -> "RunConfig":
        return cls.model_validate_json(text)
