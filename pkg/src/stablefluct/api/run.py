from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Command = Literal["eval", "check", "simulate"]

POINT_FIELDS = ("x", "y", "z", "v", "w", "theta")


def parse_point(value) -> Optional[list[float]]:
    """Accept "2,0", "2 0" or a list of numbers."""
    if value is None:
        return None
    if isinstance(value, str):
        parts = [p for p in value.replace(",", " ").split() if p]
        if not parts:
            raise ValueError("empty point")
        try:
            return [float(p) for p in parts]
        except ValueError:
            raise ValueError(f"could not parse point {value!r}; expected comma-separated reals")
    return [float(p) for p in value]


class RunConfig(BaseModel):
    """Everything one CLI invocation needs, validated before any computation."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    command: Command = Field(..., description="Subcommand")
    d: int = Field(..., description="Dimension, d >= 2")
    alpha: float = Field(..., description="Stability index in (0, 2)")

    identity: Optional[str] = Field(None, description="Identity name for eval")
    suite: Optional[str] = Field(None, description="Suite name for check")
    experiment: Optional[str] = Field(None, description="Experiment name for simulate")

    x: Optional[list[float]] = Field(None, description="Starting point")
    y: Optional[list[float]] = Field(None, description="Target point")
    z: Optional[list[float]] = Field(None, description="Intermediate point or operator index point")
    v: Optional[list[float]] = Field(None, description="Point after the passage")
    w: Optional[list[float]] = Field(None, description="Point in the unit ball")
    theta: Optional[list[float]] = Field(None, description="Point on the unit sphere")

    r: Optional[float] = Field(None, description="Ball radius")
    rho: Optional[float] = Field(None, description="Radius argument")
    s: Optional[float] = Field(None, description="Overshoot radius")
    lam: Optional[float] = Field(None, alias="lambda", description="Laplace argument")
    gamma: Optional[float] = Field(None, description="Moment order")
    zeta: Optional[float] = Field(None, description="Upper limit of the J-integral")
    arg: Optional[float] = Field(None, description="Scalar argument of a one-variable function")
    index: Optional[float] = Field(None, description="Operator index z (real)")
    a: Optional[float] = Field(None, description="Inner shell radius")
    b: Optional[float] = Field(None, description="Outer shell radius")
    mode: Optional[Literal["entrance", "exit"]] = Field(None, description="Passage mode")
    side: Optional[Literal["minus", "plus"]] = Field(None, description="Ladder side")

    tol: Optional[float] = Field(None, description="Check tolerance")
    n: Optional[int] = Field(None, description="Monte Carlo sample count")
    workers: int = Field(1, description="Monte Carlo worker processes")
    seed: int = Field(0, description="Master seed")
    dt: float = Field(1e-3, description="Euler time step")
    doublings: Optional[int] = Field(None, description="Radial maximum doublings for reflected-stationary")
    clock: Optional[Literal["real", "lamperti"]] = Field(None, description="Simulation clock")

    out: Optional[str] = Field(None, description="Output path; stdout when absent")
    manifest: Optional[str] = Field(None, description="Manifest path for simulate")

    @field_validator(*POINT_FIELDS, mode="before")
    @classmethod
    def _points(cls, v):
        return parse_point(v)

    @field_validator("tol")
    @classmethod
    def _tol(cls, v):
        if v is not None and not v > 0:
            raise ValueError("tol must be positive")
        return v

    @field_validator("workers")
    @classmethod
    def _workers(cls, v):
        if v < 1:
            raise ValueError("workers must be >= 1")
        return v

    @model_validator(mode="after")
    def _check_command(self) -> "RunConfig":
        for name in POINT_FIELDS:
            point = getattr(self, name)
            if point is not None and len(point) != self.d:
                raise ValueError(f"point {name} has dimension {len(point)}, require d={self.d}")
        needed = {"eval": "identity", "check": "suite", "simulate": "experiment"}[self.command]
        if getattr(self, needed) is None:
            raise ValueError(f"{self.command} requires --{needed}")
        if self.command == "simulate":
            if self.n is None:
                raise ValueError("simulate requires --n")
            if self.n < 100:
                raise ValueError("require n >= 100")
        return self

    def arguments(self) -> dict:
        """Non-empty fields, keyed by field name, for the tool handlers."""
        return self.model_dump(exclude_none=True)
