import math
from typing import Any, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

# Points are dense float64 vectors; the dimension lives in StableParams.
Point = np.ndarray

REL_ERR_FLOOR = 1e-300


class StableFluctError(Exception):
    """Base class for every error raised by stablefluct."""


class DomainError(StableFluctError, ValueError):
    """Error raised when parameters or points violate an identity's support.

    The message names the violated constraint, e.g. ``require |x| > r``.
    """


class StableParams(BaseModel):
    """Dimension and stability index of an isotropic stable process."""

    model_config = ConfigDict(frozen=True)

    d: int = Field(..., description="Dimension of the state space")
    alpha: float = Field(..., description="Stability index in (0, 2)")

    def as_dict(self) -> dict[str, Any]:
        return {"d": self.d, "alpha": self.alpha}


class BallSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    r: float = Field(..., description="Radius of the ball centred at the origin")

    @field_validator("r")
    @classmethod
    def _positive(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("require r > 0")
        return v


class IdentityReport(BaseModel):
    """One validation case: left value, right value, errors and verdict."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    name: str = Field(..., description="Case name")
    params: dict[str, Any] = Field(default_factory=dict, description="Case parameters")
    lhs: float = Field(..., description="Computed side")
    rhs: float = Field(..., description="Reference side")
    abs_err: float = Field(..., description="|lhs - rhs|")
    rel_err: float = Field(..., description="abs_err / max(|rhs|, 1e-300)")
    tol: float = Field(..., description="Tolerance the case was judged against")
    passed: bool = Field(..., alias="pass", description="Verdict")

    @classmethod
    def compare(
        cls, name: str, params: dict[str, Any], lhs: float, rhs: float, tol: float
    ) -> "IdentityReport":
        """Build a report from the two sides of an identity.

        The verdict is relative (``rel_err <= tol``) unless the reference is an
        exact zero, in which case the absolute error is judged instead.
        """
        lhs = float(lhs)
        rhs = float(rhs)
        abs_err = abs(lhs - rhs)
        rel_err = abs_err / max(abs(rhs), REL_ERR_FLOOR)
        if math.isnan(abs_err):
            passed = False
        elif rhs == 0.0:
            passed = abs_err <= tol
        else:
            passed = rel_err <= tol
        return cls(
            name=name,
            params=params,
            lhs=lhs,
            rhs=rhs,
            abs_err=abs_err,
            rel_err=rel_err,
            tol=tol,
            passed=passed,
        )

    def to_json_dict(self) -> dict[str, Any]:
        return self.model_dump(by_alias=True)


def validate(params: StableParams) -> None:
    """Reject parameters outside d >= 2, 0 < alpha < 2.

    Raises:
        DomainError: naming the violated constraint.
    """
    if isinstance(params.d, bool) or not isinstance(params.d, int):
        raise DomainError("require integer d")
    if params.d < 2:
        raise DomainError(f"require d >= 2, got d={params.d}")
    if not math.isfinite(params.alpha) or not 0.0 < params.alpha < 2.0:
        raise DomainError(f"require 0 < alpha < 2, got alpha={params.alpha}")


def as_point(coords: Sequence[float] | np.ndarray, d: int | None = None) -> Point:
    """Convert coordinates to a float64 vector, checking the dimension if given."""
    x = np.asarray(coords, dtype=np.float64)
    if x.ndim != 1:
        raise DomainError("require a one-dimensional coordinate vector")
    if d is not None and x.shape[0] != d:
        raise DomainError(f"require a point of dimension {d}, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise DomainError("require finite coordinates")
    return x


def norm(x: Point) -> float:
    return float(np.linalg.norm(x))


def require_radius(r: float) -> float:
    if not r > 0 or not math.isfinite(r):
        raise DomainError(f"require r > 0, got r={r}")
    return float(r)


def unit_vector(d: int, axis: int = 0) -> Point:
    e = np.zeros(d)
    e[axis] = 1.0
    return e


def kelvin_invert(x: Point) -> Point:
    """Unit-sphere inversion Kx = x/|x|^2.

    Raises:
        DomainError: if x = 0.
    """
    x = as_point(x)
    n2 = float(np.dot(x, x))
    if n2 == 0.0:
        raise DomainError("require x != 0 for Kelvin inversion")
    return x / n2
