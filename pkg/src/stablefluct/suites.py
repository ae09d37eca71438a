"""Identity suites: each compares two independent computations of the same quantity.

A suite takes the process parameters and an optional tolerance and returns
IdentityReport cases. Cases whose reference side is a nested quadrature carry
a tolerance floor, and the effective tolerance is max(tol, floor).
"""

import logging
import math
from typing import Callable, Sequence

import numpy as np

from stablefluct import identities, operators
from stablefluct.model import IdentityReport, Point, StableParams, unit_vector, validate
from stablefluct.numerics import (
    QuadratureSpec,
    integrate_1d,
    j_integral,
    poisson_kernel_average,
    sphere_area,
    sphere_average,
)

logger = logging.getLogger("stablefluct")

MARGINAL_FLOOR = 1e-4
PAIR_JUMP_MASS_FLOOR = 1e-3
HARMONIC_FLOOR = 1e-4
OVERSHOOT_LIMIT_FLOOR = 1e-4

OUTER = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-10, on_failure="warn")
INNER = QuadratureSpec(abs_tol=1e-14, rel_tol=1e-11, on_failure="warn")

KELVIN_SEED = 20240601
ESCAPE_DELTA = 1e-6

Suite = Callable[[StableParams, float | None], list[IdentityReport]]


def _tol(tol: float | None, default: float, floor: float = 0.0) -> float:
    return max(default if tol is None else tol, floor)


def _case(params: StableParams, **extra) -> dict:
    return {**params.as_dict(), **extra}


def _on_axis(d: int, radius: float) -> Point:
    return radius * unit_vector(d, 0)


def _at(d: int, rho: float, c: float) -> Point:
    """The point of radius rho at angle-cosine c from e1, in the (e1, e2) plane."""
    return rho * (c * unit_vector(d, 0) + math.sqrt(max(0.0, 1.0 - c * c)) * unit_vector(d, 1))


def polar_integral(
    g: Callable[[Point], float],
    d: int,
    lo: float,
    hi: float,
    pole: Point | None = None,
    peak_radius: float | None = None,
    radial_hints: Sequence[float] = (),
    radial_weight: Callable[[float], float] | None = None,
) -> float:
    """Integral of g(y) * radial_weight(|y|) over the shell lo < |y| < hi.

    g must be symmetric about ``pole``. ``peak_radius`` marks the radius where
    g concentrates at the pole; the angular quadrature then gets break points
    scaled to the distance from it. ``radial_weight`` is evaluated once per
    radius, outside the angular quadrature.
    """
    pole = unit_vector(d, 0) if pole is None else np.asarray(pole, dtype=np.float64)
    side = unit_vector(d, 1) - np.dot(unit_vector(d, 1), pole) * pole
    side = side / np.linalg.norm(side)

    def shell(rho: float) -> float:
        if rho <= 0.0:
            return 0.0
        width = None
        if peak_radius:
            width = abs(rho - peak_radius) / peak_radius or None
        avg = sphere_average(
            lambda c: g(rho * (c * pole + math.sqrt(max(0.0, 1.0 - c * c)) * side)),
            d,
            INNER,
            peak_width=width,
        )
        weight = 1.0 if radial_weight is None else radial_weight(rho)
        return rho ** (d - 1) * weight * avg

    hints = [h for h in radial_hints if lo < h < hi]
    value, _ = integrate_1d(shell, lo, hi, OUTER.with_hints(hints))
    return sphere_area(d) * value


def normalization(params: StableParams, tol: float | None = None) -> list[IdentityReport]:
    """Total masses: closest reach, exit position, exit-time occupation."""
    validate(params)
    d = params.d
    t = _tol(tol, 1e-6)
    reports = []

    for radius in (1.0, 1.5):
        x = _on_axis(d, radius)
        mass = polar_integral(
            lambda y: identities.closest_reach_density(params, x, y),
            d,
            0.0,
            radius,
            peak_radius=radius,
        )
        reports.append(
            IdentityReport.compare(
                "closest-reach-mass", _case(params, x_norm=radius), mass, 1.0, t
            )
        )

    x = _on_axis(d, 0.4)
    mass = polar_integral(
        lambda y: identities.first_passage_density(params, x, 1.0, "exit", y), d, 1.0, math.inf
    )
    reports.append(IdentityReport.compare("exit-mass", _case(params, x_norm=0.4, r=1.0), mass, 1.0, t))

    for radius in (0.0, 0.3):
        x = _on_axis(d, radius)
        occupation = identities.shell_occupation(params, x, 1.0, 0.0, 1.0)
        reports.append(
            IdentityReport.compare(
                "exit-time-occupation",
                _case(params, x_norm=radius, r=1.0),
                occupation,
                identities.expected_exit_time(params, x, 1.0),
                t,
            )
        )
    return reports


def beta_marginal(params: StableParams, tol: float | None = None) -> list[IdentityReport]:
    """Angular integral of the closest-reach density against the Beta radial law."""
    validate(params)
    d = params.d
    t = _tol(tol, 1e-6)
    x = _on_axis(d, 1.0)
    reports = []
    for k in range(20):
        rho = (k + 0.5) / 20.0
        avg = sphere_average(
            lambda c: identities.closest_reach_density(params, x, _at(d, rho, c)),
            d,
            INNER,
            peak_width=1.0 - rho,
        )
        lhs = sphere_area(d) * rho ** (d - 1) * avg
        rhs = identities.closest_reach_radial_density(params, rho)
        reports.append(
            IdentityReport.compare("beta-marginal[density]", _case(params, rho=rho), lhs, rhs, t)
        )

    for rho in (0.3, 0.6, 0.9):
        lhs = 1.0 - identities.closest_reach_radial_cdf(params, rho)
        rhs = identities.survival_probability(params, x, rho)
        reports.append(
            IdentityReport.compare("beta-marginal[cdf-survival]", _case(params, rho=rho), lhs, rhs, t)
        )

    moment, _ = integrate_1d(
        lambda s: s * s * identities.closest_reach_radial_density(params, s) if 0 < s < 1 else 0.0,
        0.0,
        1.0,
        OUTER,
    )
    reports.append(
        IdentityReport.compare(
            "beta-marginal[moment]",
            _case(params, gamma=1.0),
            moment,
            identities.closest_reach_radial_moment(params, 1.0),
            t,
        )
    )
    return reports


def bgr_consistency(params: StableParams, tol: float | None = None) -> list[IdentityReport]:
    """First entrance and exit laws against the survival probability."""
    validate(params)
    d = params.d
    t = _tol(tol, 1e-6)
    reports = []

    for radius in (1.5, 2.0, 4.0):
        x = _on_axis(d, radius)
        via_j = identities.escape_constant(params) * j_integral(radius * radius - 1.0, params)
        reports.append(
            IdentityReport.compare(
                "survival[j-integral]",
                _case(params, x_norm=radius, r=1.0),
                via_j,
                identities.survival_probability(params, x, 1.0),
                t,
            )
        )

    x = _on_axis(d, 2.0)
    entered = polar_integral(
        lambda y: identities.first_passage_density(params, x, 1.0, "entrance", y),
        d,
        0.0,
        1.0,
    )
    reports.append(
        IdentityReport.compare(
            "entrance-mass",
            _case(params, x_norm=2.0, r=1.0),
            entered,
            1.0 - identities.survival_probability(params, x, 1.0),
            t,
        )
    )

    for rho in (0.2, 0.5, 0.9):
        avg = sphere_average(
            lambda c: identities.first_passage_density(
                params, x, 1.0, "entrance", _at(d, rho, c)
            ),
            d,
            INNER,
        )
        lhs = sphere_area(d) * rho ** (d - 1) * avg
        reports.append(
            IdentityReport.compare(
                "entrance-radial-density",
                _case(params, x_norm=2.0, r=1.0, rho=rho),
                lhs,
                identities.first_entrance_radial_density(params, x, 1.0, rho),
                t,
            )
        )

    inside, outside = _on_axis(d, 0.4), _on_axis(d, 1.7)
    reports.append(
        IdentityReport.compare(
            "mode-symmetry",
            _case(params, r=1.0, inner=0.4, outer=1.7),
            identities.first_passage_density(params, outside, 1.0, "entrance", inside),
            identities.first_passage_density(params, inside, 1.0, "exit", outside),
            t,
        )
    )

    for c in (0.5, 3.0):
        reports.append(
            IdentityReport.compare(
                "survival-scaling",
                _case(params, x_norm=2.0, r=1.0, c=c),
                identities.survival_probability(params, c * x, c * 1.0),
                identities.survival_probability(params, x, 1.0),
                t,
            )
        )
    return reports


def _pair_reach_v_mass(params: StableParams, rho: float) -> float:
    """int_{|v|<1} pair_reach(x, z, v) dv / pair_reach(x, z, 0) for |z| = rho > 1."""
    d, a = params.d, params.alpha
    z = _on_axis(d, rho)
    return polar_integral(
        lambda v: (rho * rho / ((rho - np.linalg.norm(v)) * (rho + np.linalg.norm(v)))) ** (a / 2)
        * (rho / np.linalg.norm(z - v)) ** d,
        d,
        0.0,
        1.0,
        peak_radius=rho,
    )


def _jump_into_ball(params: StableParams, rho: float) -> float:
    """int_{|v|<1} (|y| / |v - y|)^{alpha+d} dv for |y| = rho > 1."""
    d, a = params.d, params.alpha
    y = _on_axis(d, rho)
    return polar_integral(
        lambda v: (rho / np.linalg.norm(v - y)) ** (a + d), d, 0.0, 1.0, peak_radius=rho
    )


def marginalization(params: StableParams, tol: float | None = None) -> list[IdentityReport]:
    """Triple law down to the pair laws and the entrance law."""
    validate(params)
    d = params.d
    t = _tol(tol, MARGINAL_FLOOR, MARGINAL_FLOOR)
    r = 1.0
    origin = np.zeros(d)
    reports = []

    x, z = _on_axis(d, 3.0), _on_axis(d, 2.0)
    lhs = polar_integral(
        lambda y: identities.triple_density(params, r, "entrance", x, z, y, origin),
        d,
        2.0,
        math.inf,
        peak_radius=2.0,
    )
    reports.append(
        IdentityReport.compare(
            "marginal[triple->pair-reach]",
            _case(params, x=x.tolist(), z=z.tolist(), v=origin.tolist(), r=r),
            lhs,
            identities.pair_reach_density(params, r, "entrance", x, z, origin),
            t,
        )
    )

    x = _on_axis(d, 2.0)
    lhs = polar_integral(
        lambda w: identities.pair_reach_density(params, r, "entrance", x, w, origin),
        d,
        r,
        2.0,
        peak_radius=2.0,
    )
    reports.append(
        IdentityReport.compare(
            "marginal[pair-reach->entrance]",
            _case(params, x=x.tolist(), v=origin.tolist(), r=r),
            lhs,
            identities.first_passage_density(params, x, r, "entrance", origin),
            t,
        )
    )

    entrance_mass = 1.0 - identities.survival_probability(params, x, r)
    logger.info("integrating the pair-reach law over (z, v)")
    full = polar_integral(
        lambda w: identities.pair_reach_density(params, r, "entrance", x, w, origin),
        d,
        r,
        2.0,
        peak_radius=2.0,
        radial_weight=lambda rho: _pair_reach_v_mass(params, rho),
    )
    reports.append(
        IdentityReport.compare(
            "marginal[pair-reach-mass]", _case(params, x_norm=2.0, r=r), full, entrance_mass, t
        )
    )

    logger.info("integrating the pair-jump law over (y, v)")
    jump_tol = _tol(tol, PAIR_JUMP_MASS_FLOOR, PAIR_JUMP_MASS_FLOOR)
    full = polar_integral(
        lambda y: identities.pair_jump_density(params, r, "entrance", x, y, origin),
        d,
        r,
        math.inf,
        peak_radius=2.0,
        radial_hints=[2.0],
        radial_weight=lambda rho: _jump_into_ball(params, rho),
    )
    reports.append(
        IdentityReport.compare(
            "marginal[pair-jump-mass]", _case(params, x_norm=2.0, r=r), full, entrance_mass, jump_tol
        )
    )
    return reports


def kelvin_duality(params: StableParams, tol: float | None = None) -> list[IdentityReport]:
    """Both Kelvin dualities at a fixed pair and at ten seeded random pairs."""
    validate(params)
    d = params.d
    t = _tol(tol, 1e-12)
    pairs = [(unit_vector(d, 0), 2.0 * unit_vector(d, 1))]
    rng = np.random.default_rng(KELVIN_SEED)
    for _ in range(10):
        u = rng.standard_normal((2, d))
        u /= np.linalg.norm(u, axis=1)[:, None]
        nx = rng.uniform(0.2, 1.5)
        nz = nx * rng.uniform(1.2, 3.0)
        pairs.append((nx * u[0], nz * u[1]))
    reports = []
    for x, z in pairs:
        reports.extend(operators.kelvin_duality_reports(params, x, z, t))
    return reports


def phi_minus(params: StableParams, tol: float | None = None) -> list[IdentityReport]:
    """Gamma-ratio Laplace exponent against 1 + int (1 - e^{-lambda y}) nu(dy)."""
    validate(params)
    t = _tol(tol, 1e-8)
    reports = []
    for lam in (0.0, 0.5, 1.0, 2.0):
        reports.append(
            IdentityReport.compare(
                f"phi-minus[lambda={lam:g}]",
                _case(params, **{"lambda": lam}),
                identities.ladder_laplace_integral(params, lam),
                identities.ladder_laplace_exponent(params, lam),
                t,
            )
        )
    return reports


def overshoot_nu(params: StableParams, tol: float | None = None) -> list[IdentityReport]:
    """Excursion overshoot against the ladder Levy measure and the entrance law."""
    validate(params)
    d = params.d
    t = _tol(tol, 1e-8)
    theta = unit_vector(d, 0)
    reports = []
    for s in (0.3, 0.7):
        avg = sphere_average(
            lambda c: identities.excursion_overshoot_density(params, theta, _at(d, s, c)),
            d,
            INNER,
            peak_width=1.0 - s,
        )
        # |overshoot| = s  <=>  u = -log s, with ds = s du
        lhs = s * sphere_area(d) * s ** (d - 1) * avg
        nu = identities.ladder_levy_density(params, -math.log(s))
        reports.append(IdentityReport.compare("overshoot-nu[angular]", _case(params, s=s), lhs, nu, t))
        reports.append(
            IdentityReport.compare(
                "overshoot-nu[radial]",
                _case(params, s=s),
                s * identities.overshoot_radial_density(params, s),
                nu,
                t,
            )
        )

    x = _on_axis(d, 2.0)
    reports.append(
        IdentityReport.compare(
            "overshoot-entrance-split",
            _case(params, x_norm=2.0, r=1.0),
            identities.ladder_entrance_probability(params, x, 1.0),
            1.0 - identities.survival_probability(params, x, 1.0),
            _tol(tol, 1e-8, 1e-6),
        )
    )

    r0 = 1.0

    def g(s: float) -> float:
        return (1.0 - s / r0) ** 2 if s < r0 else 0.0

    reports.append(
        IdentityReport.compare(
            "overshoot-limit",
            _case(params, x_norm=2.0, r0=r0, epsilon=ESCAPE_DELTA),
            identities.overshoot_limit_ratio(params, x, 2.0 * (1.0 - ESCAPE_DELTA), g, r0),
            identities.overshoot_radial_functional(params, 2.0, g, r0),
            _tol(tol, 1e-8, OVERSHOOT_LIMIT_FLOOR),
        )
    )
    return reports


def factorization(params: StableParams, tol: float | None = None) -> list[IdentityReport]:
    """R_z = C rho_{d-alpha-z} rho_z on constants and a degree-one harmonic."""
    validate(params)
    d, a = params.d, params.alpha
    t = _tol(tol, 1e-6)
    theta = unit_vector(d, 0)
    one = operators.SphereFunction.constant_function(1.0, label="1")
    reports = []

    for z in (0.5, 1.0, 2.0):
        reports.append(
            IdentityReport.compare(
                f"rho-constant[z={z:g}]",
                _case(params, z=z),
                operators.rho_op(params, z, one, theta).real,
                operators.rho_constant_image(params, z).real,
                _tol(tol, 1e-8),
            )
        )

    for frac in (0.25, 0.5, 0.75):
        z = frac * (d - a)
        reports.append(
            IdentityReport.compare(
                f"resolvent-constant[z={z:g}]",
                _case(params, z=z),
                operators.resolvent_op(params, z, one, theta).real,
                operators.resolvent_constant_image(params, z).real,
                t,
            )
        )
        reports.append(operators.factorization_residual(params, z, one, t))

    harmonic = operators.SphereFunction.zonal(lambda c: c, theta, label="phi1")
    reports.append(
        operators.factorization_residual(params, (d - a) / 2.0, harmonic, _tol(tol, 1e-6, HARMONIC_FLOOR))
    )

    lo, hi = 1.5, 2.0
    shell = operators.excursion_occupation_value(
        params, lambda y: 1.0, theta, radial_support=(lo, hi)
    )

    def radial_first(c: float) -> float:
        value, _ = integrate_1d(
            lambda rho: rho ** (d - 1)
            * identities.ladder_potential_density(params, "plus", theta, _at(d, rho, c)),
            lo,
            hi,
            INNER,
        )
        return value

    swapped = (
        identities.factorization_constant(params)
        * sphere_area(d)
        * sphere_average(radial_first, d, OUTER, peak_width=0.5)
    )
    reports.append(
        IdentityReport.compare(
            "excursion-occupation[shell]", _case(params, inner=lo, outer=hi), shell, swapped, t
        )
    )
    return reports


def stationary(params: StableParams, tol: float | None = None) -> list[IdentityReport]:
    """Mass, kernel form and radial moments of the stationary law of X / M."""
    validate(params)
    d = params.d
    t = _tol(tol, 1e-6)
    reports = []

    def radial(rho: float, power: float = 0.0) -> float:
        return rho ** (d - 1 + power) * identities.stationary_density(params, _on_axis(d, rho))

    mass, _ = integrate_1d(radial, 0.0, 1.0, OUTER)
    reports.append(IdentityReport.compare("stationary-mass", _case(params), sphere_area(d) * mass, 1.0, t))

    for nw in (0.0, 0.5, 0.9):
        w = _on_axis(d, nw)
        reports.append(
            IdentityReport.compare(
                "stationary-kernel",
                _case(params, w_norm=nw),
                identities.stationary_density(params, w, use_quadrature=True),
                identities.stationary_density(params, w),
                _tol(tol, 1e-8),
            )
        )

    for gamma in (1.0, 2.0):
        moment, _ = integrate_1d(lambda rho: radial(rho, 2.0 * gamma), 0.0, 1.0, OUTER)
        reports.append(
            IdentityReport.compare(
                f"stationary-moment[gamma={gamma:g}]",
                _case(params, gamma=gamma),
                sphere_area(d) * moment,
                identities.stationary_radial_moment(params, gamma),
                _tol(tol, 1e-8),
            )
        )
    return reports


def poisson_kernel(params: StableParams, tol: float | None = None) -> list[IdentityReport]:
    """Sphere average of |phi - w|^{-d} times (1 - |w|^2) equals one."""
    validate(params)
    d = params.d
    t = _tol(tol, 1e-8)
    reports = []
    for nw in (0.0, 0.3, 0.7, 0.95):
        value = poisson_kernel_average(_on_axis(d, nw), d) * (1.0 - nw) * (1.0 + nw)
        reports.append(IdentityReport.compare("poisson-kernel", _case(params, w_norm=nw), value, 1.0, t))
    return reports


def escape_limit(params: StableParams, tol: float | None = None) -> list[IdentityReport]:
    """Boundary limit of the scaled survival probability: 2 D / alpha."""
    validate(params)
    d, a = params.d, params.alpha
    t = _tol(tol, 1e-3)
    r = 1.0
    inner = r - ESCAPE_DELTA
    target = 2.0 * identities.escape_constant(params) / a
    reports = []
    for frac in (0.25, 0.5, 1.0):
        rho = inner + ESCAPE_DELTA * frac
        scaled = (
            ((rho - inner) * (rho + inner)) ** (-a / 2)
            * r**a
            * identities.survival_probability(params, _on_axis(d, rho), inner)
        )
        reports.append(
            IdentityReport.compare(
                "escape-limit", _case(params, delta=ESCAPE_DELTA, rho=rho), scaled, target, t
            )
        )
    return reports


SUITES: dict[str, tuple[Suite, str]] = {
    "normalization": (normalization, "Closest-reach, exit-position and exit-time masses"),
    "beta-marginal": (beta_marginal, "Closest-reach radius against its Beta law"),
    "bgr-consistency": (bgr_consistency, "First entrance/exit laws against survival"),
    "marginalization": (marginalization, "Triple and pair laws marginalised by quadrature"),
    "kelvin-duality": (kelvin_duality, "Ladder-potential and resolvent dualities under inversion"),
    "phi-minus": (phi_minus, "Descending ladder Laplace exponent against its Levy measure"),
    "overshoot-nu": (overshoot_nu, "Excursion overshoot against the ladder Levy measure"),
    "factorization": (factorization, "Operator factorisation of the resolvent"),
    "stationary": (stationary, "Stationary law of the process reflected at its radial maximum"),
    "poisson-kernel": (poisson_kernel, "Poisson potential formula on the unit sphere"),
    "escape-limit": (escape_limit, "Scaled survival probability at the boundary"),
}
