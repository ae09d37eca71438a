import logging
from typing import Any, Callable, Dict, Sequence

from stablefluct import identities, operators, toolhandler
from stablefluct.api.records import EvalResult, ToolDescription
from stablefluct.model import StableParams
from stablefluct.numerics import j_integral, log_gamma, poisson_kernel_average, reg_inc_beta

logger = logging.getLogger("stablefluct")

Evaluator = Callable[..., Any]


def _json_value(value: Any) -> Any:
    if isinstance(value, complex):
        return {"real": value.real, "imag": value.imag}
    return float(value)


class EvalToolHandler(toolhandler.ToolHandler):
    """Evaluates one closed form or quadrature at the given geometry.

    ``evaluate`` receives the parameters followed by the required arguments
    in declaration order.
    """

    def __init__(
        self,
        name: str,
        description: str,
        required: Sequence[str],
        evaluate: Evaluator,
    ):
        super().__init__(name)
        self._description = description
        self._required = tuple(required)
        self._evaluate = evaluate

    def get_tool_description(self) -> ToolDescription:
        return ToolDescription(
            name=self.name,
            description=self._description,
            inputSchema=self.get_input_schema(self._required),
        )

    def run_tool(self, args: Dict[str, Any]) -> EvalResult:
        params = self.get_params(args)
        values = self.require(args, *self._required)
        logger.info(f"evaluating {self.name}")
        value = self._evaluate(params, *values)
        used = {**params.as_dict(), **dict(zip(self._required, values))}
        if "lam" in used:
            used["lambda"] = used.pop("lam")
        return EvalResult(identity=self.name, params=used, value=_json_value(value))


def _rho_op(params: StableParams, index: float, theta) -> complex:
    return operators.rho_op(params, index, operators.SphereFunction.constant_function(1.0), theta)


def _resolvent_op(params: StableParams, index: float, theta) -> complex:
    return operators.resolvent_op(
        params, index, operators.SphereFunction.constant_function(1.0), theta
    )


def _excursion_occupation_shell(params: StableParams, theta, a: float, b: float) -> float:
    return operators.excursion_occupation_value(params, lambda y: 1.0, theta, radial_support=(a, b))


def _kelvin_duality(params: StableParams, x, z) -> float:
    return operators.kelvin_duality_check(params, x, z).rel_err


def _log_gamma(params: StableParams, arg: float) -> complex:
    return complex(log_gamma(arg))


def _reg_inc_beta(params: StableParams, arg: float, a: float, b: float) -> float:
    return reg_inc_beta(arg, a, b)


def _j_integral(params: StableParams, zeta: float) -> float:
    return j_integral(zeta, params)


def _poisson_kernel_average(params: StableParams, w) -> float:
    return poisson_kernel_average(w, params.d)


EVALUATORS: list[tuple[str, str, Sequence[str], Evaluator]] = [
    ("log-gamma", "Principal-branch log Gamma at a real argument", ["arg"], _log_gamma),
    ("reg-inc-beta", "Regularized incomplete beta I_arg(a, b)", ["arg", "a", "b"], _reg_inc_beta),
    ("j-integral", "int_0^zeta (1+u)^{-d/2} u^{alpha/2-1} du", ["zeta"], _j_integral),
    ("poisson-kernel-average", "Sphere average of |phi - w|^{-d}", ["w"], _poisson_kernel_average),
    ("jump-density", "Levy measure density at w", ["w"], identities.jump_density),
    ("levy-exponent", "Characteristic exponent of the radial MAP ordinate", ["arg"], identities.levy_exponent),
    ("closest-reach-density", "Density of the point of closest reach", ["x", "y"], identities.closest_reach_density),
    ("closest-reach-radial-cdf", "Beta CDF of the closest-reach radius from |x| = 1", ["rho"], identities.closest_reach_radial_cdf),
    ("closest-reach-radial-density", "Density of the closest-reach radius from |x| = 1", ["rho"], identities.closest_reach_radial_density),
    ("closest-reach-radial-moment", "E_1 |X_G|^{2 gamma}", ["gamma"], identities.closest_reach_radial_moment),
    ("first-passage-density", "Position density at first entrance/exit", ["x", "r", "mode", "y"], identities.first_passage_density),
    ("survival", "Probability the r-ball is never entered", ["x", "r"], identities.survival_probability),
    ("resolvent-density", "Occupation density before entrance/exit", ["r", "mode", "x", "y"], identities.resolvent_density),
    ("triple-density", "Joint law of extremum, pre-passage and passage points", ["r", "mode", "x", "z", "y", "v"], identities.triple_density),
    ("pair-reach-density", "Joint law of extremum and passage points", ["r", "mode", "x", "z", "v"], identities.pair_reach_density),
    ("pair-jump-density", "Joint law of pre-passage and passage points", ["r", "mode", "x", "y", "v"], identities.pair_jump_density),
    ("ladder-potential-density", "Descending or ascending ladder potential density", ["side", "x", "z"], identities.ladder_potential_density),
    ("ladder-levy-density", "Levy density of the descending ladder height", ["arg"], identities.ladder_levy_density),
    ("ladder-levy-tail", "Tail of the descending ladder Levy measure", ["arg"], identities.ladder_levy_tail),
    ("ladder-laplace-exponent", "Descending ladder Laplace exponent, gamma ratio", ["lam"], identities.ladder_laplace_exponent),
    ("ladder-laplace-integral", "1 + int (1 - e^{-lambda y}) nu(dy)", ["lam"], identities.ladder_laplace_integral),
    ("excursion-overshoot-density", "Overshoot density under the excursion measure", ["theta", "y"], identities.excursion_overshoot_density),
    ("overshoot-radial-density", "Density of the overshoot radius", ["s"], identities.overshoot_radial_density),
    ("stationary-density", "Stationary density of X / M", ["w"], identities.stationary_density),
    ("stationary-radial-moment", "E |W|^{2 gamma} under the stationary law", ["gamma"], identities.stationary_radial_moment),
    ("expected-exit-time", "Mean exit time from the r-ball", ["x", "r"], identities.expected_exit_time),
    ("first-entrance-radial-density", "Density of |X| at first entrance", ["x", "r", "rho"], identities.first_entrance_radial_density),
    ("first-entrance-radial-cdf", "Conditional CDF of |X| at first entrance", ["x", "r", "rho"], identities.first_entrance_radial_cdf),
    ("ladder-entrance-probability", "Entrance probability via closest reach and overshoot", ["x", "r"], identities.ladder_entrance_probability),
    ("shell-occupation", "Mean time in a < |y| < b before leaving the r-ball", ["x", "r", "a", "b"], identities.shell_occupation),
    ("escape-constant", "D = Gamma(d/2) / (Gamma((d-alpha)/2) Gamma(alpha/2))", [], identities.escape_constant),
    ("rho-op", "rho_z[1](theta) by quadrature", ["index", "theta"], _rho_op),
    ("resolvent-op", "R_z[1](theta) by quadrature", ["index", "theta"], _resolvent_op),
    ("rho-constant-image", "rho_z[1] closed form", ["index"], operators.rho_constant_image),
    ("resolvent-constant-image", "R_z[1] closed form", ["index"], operators.resolvent_constant_image),
    ("excursion-occupation-shell", "Excursion occupation of the shell a < |z| < b", ["theta", "a", "b"], _excursion_occupation_shell),
    ("kelvin-duality", "Worst relative error of the two Kelvin dualities", ["x", "z"], _kelvin_duality),
]


def get_eval_handlers() -> list[EvalToolHandler]:
    return [EvalToolHandler(name, description, required, fn) for name, description, required, fn in EVALUATORS]
