from typing import Any, Optional

from pydantic import BaseModel, Field

from stablefluct.model import IdentityReport


class ToolDescription(BaseModel):
    name: str = Field(..., description="Registry name")
    description: str = Field(..., description="One-line description")
    inputSchema: dict[str, Any] = Field(..., description="JSON schema of the arguments")


class Summary(BaseModel):
    passed: int = Field(..., description="Number of passing cases")
    failed: int = Field(..., description="Number of failing cases")


class EvalResult(BaseModel):
    identity: str = Field(..., description="Identity name")
    params: dict[str, Any] = Field(..., description="Parameters and geometry")
    value: Any = Field(..., description="Real value, or {real, imag} for complex results")


class CheckResult(BaseModel):
    suite: str = Field(..., description="Suite name")
    cases: list[IdentityReport] = Field(..., description="One report per case")
    summary: Summary = Field(..., description="Pass/fail counts")

    @property
    def all_passed(self) -> bool:
        return self.summary.failed == 0

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "suite": self.suite,
            "cases": [case.to_json_dict() for case in self.cases],
            "summary": self.summary.model_dump(),
        }


class SimulationRow(BaseModel):
    experiment: str = Field(..., description="Experiment name")
    d: int
    alpha: float
    param_items: list[tuple[str, Any]] = Field(..., description="Experiment parameters in column order")
    estimate: float
    stderr: float
    n: int
    reference: Optional[float] = None
    seed: int
    ks: Optional[float] = Field(None, description="KS distance, for experiments with a reference law")
    with_ks: bool = Field(False, description="Whether the ks column is emitted")
