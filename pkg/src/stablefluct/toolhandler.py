from typing import Any, Sequence

from pydantic import BaseModel

from stablefluct.api.records import ToolDescription
from stablefluct.model import DomainError, StableParams, validate

PARAMS_ARGS = ("d", "alpha")

# JSON schema of every argument a handler may declare.
ARG_SCHEMAS: dict[str, dict] = {
    "d": {"type": "integer", "description": "Dimension, d >= 2"},
    "alpha": {"type": "number", "description": "Stability index in (0, 2)"},
    "x": {"type": "array", "items": {"type": "number"}, "description": "Starting point"},
    "y": {"type": "array", "items": {"type": "number"}, "description": "Target point"},
    "z": {"type": "array", "items": {"type": "number"}, "description": "Intermediate point"},
    "v": {"type": "array", "items": {"type": "number"}, "description": "Point after the passage"},
    "w": {"type": "array", "items": {"type": "number"}, "description": "Point in the unit ball"},
    "theta": {"type": "array", "items": {"type": "number"}, "description": "Point on the unit sphere"},
    "r": {"type": "number", "description": "Ball radius"},
    "rho": {"type": "number", "description": "Radius argument"},
    "s": {"type": "number", "description": "Overshoot radius in (0, 1)"},
    "lam": {"type": "number", "description": "Laplace argument lambda >= 0"},
    "gamma": {"type": "number", "description": "Moment order gamma > 0"},
    "zeta": {"type": "number", "description": "Upper limit of the J-integral"},
    "arg": {"type": "number", "description": "Scalar argument of a one-variable function"},
    "index": {"type": "number", "description": "Real operator index z"},
    "a": {"type": "number", "description": "Inner shell radius"},
    "b": {"type": "number", "description": "Outer shell radius"},
    "mode": {"type": "string", "enum": ["entrance", "exit"], "description": "Passage mode"},
    "side": {"type": "string", "enum": ["minus", "plus"], "description": "Ladder side"},
    "tol": {"type": "number", "description": "Tolerance; cases with a floor use max(tol, floor)"},
    "n": {"type": "integer", "description": "Sample count, >= 100"},
    "workers": {"type": "integer", "description": "Worker processes"},
    "seed": {"type": "integer", "description": "Master seed"},
    "dt": {"type": "number", "description": "Euler time step"},
    "doublings": {"type": "integer", "description": "Radial maximum doublings before measuring"},
    "clock": {"type": "string", "enum": ["real", "lamperti"], "description": "Simulation clock"},
}


class ToolHandler():
    def __init__(self, tool_name: str):
        self.name = tool_name

    def get_params(self, args: dict) -> StableParams:
        params = StableParams(d=args["d"], alpha=args["alpha"])
        validate(params)
        return params

    def get_input_schema(self, required: Sequence[str], optional: Sequence[str] = ()) -> dict:
        names = list(PARAMS_ARGS) + [n for n in required if n not in PARAMS_ARGS] + list(optional)
        return {
            "type": "object",
            "required": list(PARAMS_ARGS) + [n for n in required if n not in PARAMS_ARGS],
            "properties": {name: ARG_SCHEMAS[name] for name in names},
        }

    def require(self, args: dict, *names: str) -> list[Any]:
        missing = [n for n in names if args.get(n) is None]
        if missing:
            flags = ", ".join("--lambda" if n == "lam" else f"--{n}" for n in missing)
            raise DomainError(f"{self.name} requires {flags}")
        return [args[n] for n in names]

    def get_tool_description(self) -> ToolDescription:
        raise NotImplementedError()

    def run_tool(self, args: dict) -> BaseModel:
        raise NotImplementedError()
