import logging
from typing import Any, Dict, Sequence

from pydantic import TypeAdapter

from stablefluct import montecarlo, toolhandler
from stablefluct.api.records import SimulationRow, ToolDescription

logger = logging.getLogger("stablefluct")

_experiment_adapter = TypeAdapter(montecarlo.Experiment)


class ExperimentToolHandler(toolhandler.ToolHandler):
    """Runs one Monte Carlo experiment and reports it next to its closed form."""

    def __init__(
        self,
        name: str,
        description: str,
        required: Sequence[str],
        optional: Sequence[str] = (),
        with_ks: bool = False,
    ):
        super().__init__(name)
        self._description = description
        self._required = tuple(required)
        self._optional = tuple(optional)
        self._with_ks = with_ks

    @property
    def kind(self) -> str:
        return self.name.replace("-", "_")

    def get_tool_description(self) -> ToolDescription:
        return ToolDescription(
            name=self.name,
            description=self._description,
            inputSchema=self.get_input_schema(
                list(self._required) + ["n"], optional=list(self._optional) + ["workers", "seed"]
            ),
        )

    def build_experiment(self, args: Dict[str, Any]) -> montecarlo.ExperimentBase:
        params = self.get_params(args)
        self.require(args, *self._required)
        spec = {"kind": self.kind, "d": params.d, "alpha": params.alpha}
        for key in self._required + self._optional:
            if args.get(key) is not None:
                spec[key] = args[key]
        experiment = _experiment_adapter.validate_python(spec)
        experiment.check()
        return experiment

    def run_tool(self, args: Dict[str, Any]) -> SimulationRow:
        experiment = self.build_experiment(args)
        n, workers, seed = args["n"], args.get("workers", 1), args.get("seed", 0)
        seeds = montecarlo.SeedSpec(master_seed=seed)
        result = montecarlo.estimate(experiment, n, seeds, workers)
        logger.info(
            f"{self.name}: estimate {result.mean:.6g} +/- {result.stderr:.2g}, reference {result.reference:.6g}"
        )
        return SimulationRow(
            experiment=self.name,
            d=experiment.d,
            alpha=experiment.alpha,
            param_items=experiment.param_items(),
            estimate=result.mean,
            stderr=result.stderr,
            n=result.n,
            reference=result.reference,
            seed=seed,
            ks=result.ks,
            with_ks=self._with_ks,
        )


def get_simulate_handlers() -> list[ExperimentToolHandler]:
    return [
        ExperimentToolHandler(
            "survival",
            "Fraction of paths that never enter the r-ball",
            ["x", "r"],
            ["dt", "clock"],
        ),
        ExperimentToolHandler(
            "closest-reach-radial",
            "Squared closest-reach radius against its Beta law",
            ["x"],
            ["dt", "clock"],
            with_ks=True,
        ),
        ExperimentToolHandler(
            "first-entrance-position",
            "Exact first-entrance sampler against the entrance law",
            ["x", "r"],
            with_ks=True,
        ),
        ExperimentToolHandler(
            "reflected-stationary",
            "Radial moment of X / M after the radial maximum has doubled repeatedly",
            ["x"],
            ["dt", "doublings", "gamma"],
        ),
        ExperimentToolHandler(
            "occupation",
            "Mean time in the shell a < |y| < b before leaving the r-ball",
            ["x", "r", "a", "b"],
            ["dt"],
        ),
    ]
