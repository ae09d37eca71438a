"""Closed-form fluctuation identities of the isotropic stable process.

Every evaluator is a pure function of (params, geometry). Constants are
assembled in log space from ``scipy.special.gammaln`` and exponentiated once.
Points outside an identity's support raise ``DomainError``; nothing is
silently zero-extended.
"""

import math
from functools import lru_cache
from typing import Callable, Literal

import numpy as np
import scipy.stats

from stablefluct.model import (
    DomainError,
    Point,
    StableParams,
    as_point,
    require_radius,
    validate,
)
from stablefluct.numerics import (
    DEFAULT_QUAD,
    ToleranceNotMet,
    geometric_breaks,
    integrate_1d,
    j_integral,
    log_abs_gamma as lg,
    log_beta,
    log_gamma,
    poisson_kernel_average,
    reg_inc_beta,
    sphere_area,
    sphere_average,
)


EntranceExitMode = Literal["entrance", "exit"]
LadderSide = Literal["minus", "plus"]

LOG_PI = math.log(math.pi)
LOG_2 = math.log(2.0)
# Largest excess over 1 a quadrature CDF may show before it counts as a failure.
CDF_OVERSHOOT_TOL = 1e-6


class SingularityError(DomainError):
    """Error raised when a kernel is evaluated on its diagonal (x = y)."""


def _mode(mode: str) -> str:
    if mode not in ("entrance", "exit"):
        raise DomainError(f"mode must be 'entrance' or 'exit', got {mode!r}")
    return mode


def _side(side: str) -> str:
    if side not in ("minus", "plus"):
        raise DomainError(f"side must be 'minus' or 'plus', got {side!r}")
    return side


def _norm(x: Point) -> float:
    return float(np.linalg.norm(x))


def _dist(x: Point, y: Point) -> float:
    return float(np.linalg.norm(x - y))


def _gap(a: float, b: float) -> float:
    """|a^2 - b^2| in factored form."""
    return abs((a - b) * (a + b))


@lru_cache(maxsize=256)
def _log_jump_constant(d: int, alpha: float) -> float:
    return alpha * LOG_2 + lg((d + alpha) / 2) - (d / 2) * LOG_PI - lg(-alpha / 2)


@lru_cache(maxsize=256)
def _log_potential_constant(d: int, alpha: float) -> float:
    return -(d / 2) * LOG_PI + 2 * lg(d / 2) - lg((d - alpha) / 2) - lg(alpha / 2)


@lru_cache(maxsize=256)
def _log_bgr_constant(d: int, alpha: float) -> float:
    return -(d / 2 + 1) * LOG_PI + lg(d / 2) + math.log(math.sin(math.pi * alpha / 2))


@lru_cache(maxsize=256)
def _log_resolvent_constant(d: int, alpha: float) -> float:
    return -alpha * LOG_2 - (d / 2) * LOG_PI + lg(d / 2) - 2 * lg(alpha / 2)


@lru_cache(maxsize=256)
def _log_triple_constant(d: int, alpha: float) -> float:
    return (
        -(3 * d / 2) * LOG_PI
        + lg((d + alpha) / 2)
        - lg(-alpha / 2)
        + 2 * lg(d / 2)
        - 2 * lg(alpha / 2)
    )


@lru_cache(maxsize=256)
def _log_pair_reach_constant(d: int, alpha: float) -> float:
    return 2 * lg(d / 2) - d * LOG_PI - lg(-alpha / 2) - lg(alpha / 2)


@lru_cache(maxsize=256)
def _log_pair_jump_constant(d: int, alpha: float) -> float:
    return lg((d + alpha) / 2) + lg(d / 2) - d * LOG_PI - lg(-alpha / 2) - 2 * lg(alpha / 2)


@lru_cache(maxsize=256)
def _log_levy_constant(d: int, alpha: float) -> float:
    return math.log(alpha) + lg((d - alpha) / 2) - lg(d / 2) - lg(1 - alpha / 2)


@lru_cache(maxsize=256)
def _log_overshoot_constant(d: int, alpha: float) -> float:
    return math.log(alpha / 2) - (d / 2) * LOG_PI + lg((d - alpha) / 2) - lg(1 - alpha / 2)


@lru_cache(maxsize=256)
def _log_stationary_constant(d: int, alpha: float) -> float:
    return -(d / 2) * LOG_PI + lg((d + alpha) / 2) - lg(alpha / 2)


def escape_constant(params: StableParams) -> float:
    """D = Gamma(d/2) / (Gamma((d-alpha)/2) Gamma(alpha/2))."""
    validate(params)
    d, a = params.d, params.alpha
    return math.exp(lg(d / 2) - lg((d - a) / 2) - lg(a / 2))


def potential_constant(params: StableParams) -> float:
    """pi^{-d/2} Gamma(d/2)^2 / (Gamma((d-alpha)/2) Gamma(alpha/2)), shared by U^- and U^+."""
    validate(params)
    return math.exp(_log_potential_constant(params.d, params.alpha))


def free_potential_constant(params: StableParams) -> float:
    """Gamma((d-alpha)/2) / (2^alpha pi^{d/2} Gamma(alpha/2)), the Riesz potential constant."""
    validate(params)
    d, a = params.d, params.alpha
    return math.exp(lg((d - a) / 2) - a * LOG_2 - (d / 2) * LOG_PI - lg(a / 2))


def factorization_constant(params: StableParams) -> float:
    """2^{-alpha} Gamma((d-alpha)/2)^2 / Gamma(d/2)^2."""
    validate(params)
    d, a = params.d, params.alpha
    return math.exp(-a * LOG_2 + 2 * lg((d - a) / 2) - 2 * lg(d / 2))


def zeta_plus(x: Point, y: Point, r: float) -> float:
    """(|x|^2 - r^2)(|y|^2 - r^2) / (r^2 |x - y|^2), factored."""
    nx, ny = _norm(x), _norm(y)
    return (nx - r) * (nx + r) * (ny - r) * (ny + r) / (r * r * _dist(x, y) ** 2)


def zeta_minus(x: Point, y: Point, r: float) -> float:
    """(r^2 - |x|^2)(r^2 - |y|^2) / (r^2 |x - y|^2), factored."""
    nx, ny = _norm(x), _norm(y)
    return (r - nx) * (r + nx) * (r - ny) * (r + ny) / (r * r * _dist(x, y) ** 2)


def jump_density(params: StableParams, w: Point) -> float:
    """Density of the Levy measure at w != 0."""
    validate(params)
    w = as_point(w, params.d)
    nw = _norm(w)
    if nw == 0.0:
        raise DomainError("require w != 0")
    return math.exp(_log_jump_constant(params.d, params.alpha) - (params.alpha + params.d) * math.log(nw))


def levy_exponent(params: StableParams, theta: float) -> complex:
    """Characteristic exponent of the radial ordinate of the underlying MAP.

    Psi(theta) = Gamma((-i theta + alpha)/2) / Gamma(-i theta / 2)
               * Gamma((i theta + d)/2) / Gamma((i theta + d - alpha)/2)
    The removable zero at theta = 0 is returned exactly.
    """
    validate(params)
    if theta == 0.0:
        return 0j
    d, a = params.d, params.alpha
    it = 1j * theta
    log_value = (
        log_gamma((-it + a) / 2)
        - log_gamma(-it / 2)
        + log_gamma((it + d) / 2)
        - log_gamma((it + d - a) / 2)
    )
    return complex(np.exp(log_value))


def closest_reach_density(params: StableParams, x: Point, y: Point) -> float:
    """Density at y of the point of closest reach X_G(inf) under P_x."""
    validate(params)
    x = as_point(x, params.d)
    y = as_point(y, params.d)
    nx, ny = _norm(x), _norm(y)
    if not 0.0 < ny < nx:
        raise DomainError("require 0 < |y| < |x|")
    return _potential_kernel(params, x, y, nx, ny)


def _potential_kernel(params: StableParams, x: Point, z: Point, nx: float, nz: float) -> float:
    a = params.alpha
    d = params.d
    log_value = (
        _log_potential_constant(d, a)
        + (a / 2) * math.log(_gap(nz, nx))
        - d * math.log(_dist(z, x))
        - a * math.log(nz)
    )
    return math.exp(log_value)


def closest_reach_radial_cdf(params: StableParams, rho: float) -> float:
    """P_1(|X_G(inf)| <= rho) = I_{rho^2}((d-alpha)/2, alpha/2)."""
    validate(params)
    if not 0.0 < rho <= 1.0:
        raise DomainError(f"require 0 < rho <= 1, got rho={rho}")
    return reg_inc_beta(rho * rho, (params.d - params.alpha) / 2, params.alpha / 2)


def closest_reach_radial_density(params: StableParams, rho: float) -> float:
    """Density of |X_G(inf)| under P_1; |X_G|^2 is Beta((d-alpha)/2, alpha/2)."""
    validate(params)
    if not 0.0 < rho < 1.0:
        raise DomainError(f"require 0 < rho < 1, got rho={rho}")
    a = (params.d - params.alpha) / 2
    b = params.alpha / 2
    return 2.0 * rho * float(scipy.stats.beta.pdf(rho * rho, a, b))


def closest_reach_radial_moment(params: StableParams, gamma: float) -> float:
    """E_1[|X_G(inf)|^{2 gamma}] = B(gamma + (d-alpha)/2, alpha/2) / B((d-alpha)/2, alpha/2)."""
    validate(params)
    if not gamma > 0:
        raise DomainError(f"require gamma > 0, got gamma={gamma}")
    a = (params.d - params.alpha) / 2
    b = params.alpha / 2
    return math.exp(log_beta(gamma + a, b) - log_beta(a, b))


def first_passage_density(
    params: StableParams, x: Point, r: float, mode: EntranceExitMode, y: Point
) -> float:
    """Blumenthal-Getoor-Ray density of X at first entrance to / exit from the r-ball."""
    validate(params)
    mode = _mode(mode)
    r = require_radius(r)
    x = as_point(x, params.d)
    y = as_point(y, params.d)
    nx, ny = _norm(x), _norm(y)
    if mode == "entrance" and not (nx > r and ny < r):
        raise DomainError("require |x| > r > |y| for entrance")
    if mode == "exit" and not (nx < r and ny > r):
        raise DomainError("require |x| < r < |y| for exit")
    return _bgr_kernel(params, r, nx, ny, _dist(x, y))


def _bgr_kernel(params: StableParams, r: float, nx: float, ny: float, dxy: float) -> float:
    a = params.alpha
    log_value = (
        _log_bgr_constant(params.d, a)
        + (a / 2) * (math.log(_gap(r, nx)) - math.log(_gap(r, ny)))
        - params.d * math.log(dxy)
    )
    return math.exp(log_value)


def survival_probability(params: StableParams, x: Point, r: float) -> float:
    """P_x(tau_r^+ = inf) = I_{1-(r/|x|)^2}(alpha/2, (d-alpha)/2)."""
    validate(params)
    r = require_radius(r)
    x = as_point(x, params.d)
    nx = _norm(x)
    if not nx > r:
        raise DomainError("require |x| > r")
    u = (nx - r) * (nx + r) / (nx * nx)
    return reg_inc_beta(u, params.alpha / 2, (params.d - params.alpha) / 2)


def resolvent_density(
    params: StableParams, r: float, mode: EntranceExitMode, x: Point, y: Point
) -> float:
    """Occupation density h_r(x, y) up to first entrance (outside) or exit (inside)."""
    validate(params)
    mode = _mode(mode)
    r = require_radius(r)
    x = as_point(x, params.d)
    y = as_point(y, params.d)
    nx, ny = _norm(x), _norm(y)
    if mode == "exit" and not (nx < r and ny < r):
        raise DomainError("require |x|, |y| < r for exit")
    if mode == "entrance" and not (nx > r and ny > r):
        raise DomainError("require |x|, |y| > r for entrance")
    dxy = _dist(x, y)
    if dxy == 0.0:
        raise SingularityError("require x != y")
    zeta = zeta_minus(x, y, r) if mode == "exit" else zeta_plus(x, y, r)
    log_value = _log_resolvent_constant(params.d, params.alpha) + (params.alpha - params.d) * math.log(dxy)
    return math.exp(log_value) * j_integral(zeta, params)


def _ordering_triple(mode: str, r: float, nx: float, nz: float, ny: float, nv: float) -> None:
    if mode == "entrance":
        if not (nx > nz > r and ny > nz and nv < r):
            raise DomainError("require |x| > |z| > r, |y| > |z|, |v| < r for entrance")
    elif not (nx < nz < r and ny < nz and nv > r):
        raise DomainError("require |x| < |z| < r, |y| < |z|, |v| > r for exit")


def triple_density(
    params: StableParams,
    r: float,
    mode: EntranceExitMode,
    x: Point,
    z: Point,
    y: Point,
    v: Point,
) -> float:
    """Joint density of (radial extremum point, position before, position after) the passage.

    The same kernel serves entrance and exit; only the support differs.
    Exit mode carries no survival restriction since the exit time is a.s. finite.
    """
    validate(params)
    mode = _mode(mode)
    r = require_radius(r)
    x, z, y, v = (as_point(p, params.d) for p in (x, z, y, v))
    nx, nz, ny, nv = _norm(x), _norm(z), _norm(y), _norm(v)
    _ordering_triple(mode, r, nx, nz, ny, nv)
    d, a = params.d, params.alpha
    log_value = (
        _log_triple_constant(d, a)
        + (a / 2) * (math.log(_gap(nz, nx)) + math.log(_gap(ny, nz)))
        - a * math.log(nz)
        - d * (math.log(_dist(z, x)) + math.log(_dist(z, y)))
        - (a + d) * math.log(_dist(v, y))
    )
    return math.exp(log_value)


def pair_reach_density(
    params: StableParams, r: float, mode: EntranceExitMode, x: Point, z: Point, v: Point
) -> float:
    """Joint density of the radial extremum point before passage and the passage position."""
    validate(params)
    mode = _mode(mode)
    r = require_radius(r)
    x, z, v = (as_point(p, params.d) for p in (x, z, v))
    nx, nz, nv = _norm(x), _norm(z), _norm(v)
    if mode == "entrance" and not (nx > nz > r and nv < r):
        raise DomainError("require |x| > |z| > r, |v| < r for entrance")
    if mode == "exit" and not (nx < nz < r and nv > r):
        raise DomainError("require |x| < |z| < r, |v| > r for exit")
    d, a = params.d, params.alpha
    log_value = (
        _log_pair_reach_constant(d, a)
        + (a / 2) * (math.log(_gap(nz, nx)) - math.log(_gap(nz, nv)))
        - d * (math.log(_dist(z, v)) + math.log(_dist(z, x)))
    )
    return math.exp(log_value)


def pair_jump_density(
    params: StableParams, r: float, mode: EntranceExitMode, x: Point, y: Point, v: Point
) -> float:
    """Joint density of the positions immediately before and at first passage."""
    validate(params)
    mode = _mode(mode)
    r = require_radius(r)
    x, y, v = (as_point(p, params.d) for p in (x, y, v))
    nx, ny, nv = _norm(x), _norm(y), _norm(v)
    if mode == "entrance" and not (nx > r and ny > r and nv < r):
        raise DomainError("require |x|, |y| > r > |v| for entrance")
    if mode == "exit" and not (nx < r and ny < r and nv > r):
        raise DomainError("require |x|, |y| < r < |v| for exit")
    dxy = _dist(x, y)
    if dxy == 0.0:
        raise SingularityError("require x != y")
    zeta = zeta_plus(x, y, r) if mode == "entrance" else zeta_minus(x, y, r)
    d, a = params.d, params.alpha
    log_value = (
        _log_pair_jump_constant(d, a)
        + (a - d) * math.log(dxy)
        - (a + d) * math.log(_dist(v, y))
    )
    return math.exp(log_value) * j_integral(zeta, params)


def ladder_potential_density(params: StableParams, side: LadderSide, x: Point, z: Point) -> float:
    """Cartesian density of the descending (minus) or ascending (plus) ladder potential U_x."""
    validate(params)
    side = _side(side)
    x = as_point(x, params.d)
    z = as_point(z, params.d)
    nx, nz = _norm(x), _norm(z)
    if side == "minus" and not 0.0 < nz < nx:
        raise DomainError("require 0 < |z| < |x| on the minus side")
    if side == "plus" and not nz > nx > 0.0:
        raise DomainError("require |z| > |x| > 0 on the plus side")
    return _potential_kernel(params, x, z, nx, nz)


def ladder_levy_density(params: StableParams, y: float) -> float:
    """Levy density of the descending ladder height subordinator."""
    validate(params)
    if not y > 0:
        raise DomainError(f"require y > 0, got y={y}")
    a = params.alpha
    log_value = (
        _log_levy_constant(params.d, a)
        - (a / 2 + 1) * math.log(-math.expm1(-2.0 * y))
        - params.d * y
    )
    return math.exp(log_value)


def ladder_levy_tail(params: StableParams, y: float) -> float:
    """nu((y, inf)) by quadrature of the ladder Levy density."""
    validate(params)
    if not y > 0:
        raise DomainError(f"require y > 0, got y={y}")
    spec = DEFAULT_QUAD.with_hints(geometric_breaks(y, y + 40.0, lower=y))
    value, _ = integrate_1d(lambda s: ladder_levy_density(params, s), y, math.inf, spec)
    return value


def ladder_laplace_exponent(params: StableParams, lam: float) -> float:
    """Phi^-(lambda) = Gamma((d-alpha)/2) Gamma((lambda+d)/2) / (Gamma(d/2) Gamma((lambda+d-alpha)/2))."""
    validate(params)
    if not lam >= 0:
        raise DomainError(f"require lambda >= 0, got lambda={lam}")
    d, a = params.d, params.alpha
    return math.exp(lg((d - a) / 2) + lg((lam + d) / 2) - lg(d / 2) - lg((lam + d - a) / 2))


def ladder_laplace_integral(params: StableParams, lam: float) -> float:
    """1 + int (1 - e^{-lambda y}) nu(dy): the killed-subordinator form of Phi^-."""
    validate(params)
    if lam == 0:
        return 1.0

    def integrand(y: float) -> float:
        return -math.expm1(-lam * y) * ladder_levy_density(params, y)

    value, _ = integrate_1d(integrand, 0.0, math.inf, DEFAULT_QUAD.with_hints([0.1, 1.0]))
    return 1.0 + value


def _on_sphere(theta: Point) -> None:
    if abs(_norm(theta) - 1.0) > 1e-9:
        raise DomainError("require |theta| = 1")


def excursion_overshoot_density(params: StableParams, theta: Point, y: Point) -> float:
    """Density of the excursion overshoot under N_theta; supported on |y| < 1."""
    validate(params)
    theta = as_point(theta, params.d)
    y = as_point(y, params.d)
    _on_sphere(theta)
    ny = _norm(y)
    if not ny < 1.0:
        raise DomainError("require |y| < 1")
    a = params.alpha
    log_value = (
        _log_overshoot_constant(params.d, a)
        - (a / 2) * math.log((1.0 - ny) * (1.0 + ny))
        - params.d * math.log(_dist(theta, y))
    )
    return math.exp(log_value)


def overshoot_radial_density(params: StableParams, s: float) -> float:
    """Density of |overshoot| at s in (0, 1), the angular part collapsed analytically."""
    validate(params)
    if not 0.0 < s < 1.0:
        raise DomainError(f"require 0 < s < 1, got s={s}")
    d, a = params.d, params.alpha
    log_value = (
        _log_overshoot_constant(d, a)
        + math.log(sphere_area(d))
        + (d - 1) * math.log(s)
        - (a / 2 + 1) * math.log((1.0 - s) * (1.0 + s))
    )
    return math.exp(log_value)


def stationary_density(params: StableParams, w: Point, use_quadrature: bool = False) -> float:
    """Density of the limiting law of X_t / M_t.

    ``use_quadrature`` evaluates the Poisson-kernel average numerically
    instead of using its closed form (1 - |w|^2)^{-1}; the two forms agree.
    """
    validate(params)
    w = as_point(w, params.d)
    nw = _norm(w)
    if not nw < 1.0:
        raise DomainError("require |w| < 1")
    gap = (1.0 - nw) * (1.0 + nw)
    log_const = _log_stationary_constant(params.d, params.alpha)
    if use_quadrature:
        return math.exp(log_const + (params.alpha / 2) * math.log(gap)) * poisson_kernel_average(w, params.d)
    return math.exp(log_const + (params.alpha / 2 - 1) * math.log(gap))


def stationary_radial_moment(params: StableParams, gamma: float) -> float:
    """E[|W|^{2 gamma}] for the stationary law: a Beta(d/2, alpha/2) moment of |W|^2."""
    validate(params)
    if not gamma > 0:
        raise DomainError(f"require gamma > 0, got gamma={gamma}")
    d, a = params.d, params.alpha
    return math.exp(log_beta(gamma + d / 2, a / 2) - log_beta(d / 2, a / 2))


def expected_exit_time(params: StableParams, x: Point, r: float) -> float:
    """E_x[tau_r^-], the total mass of the exit-mode resolvent."""
    validate(params)
    r = require_radius(r)
    x = as_point(x, params.d)
    nx = _norm(x)
    if not nx < r:
        raise DomainError("require |x| < r")
    d, a = params.d, params.alpha
    log_value = (
        lg(d / 2)
        + (a / 2) * math.log(_gap(r, nx))
        - a * LOG_2
        - lg(1 + a / 2)
        - lg((d + a) / 2)
    )
    return math.exp(log_value)


def first_entrance_radial_density(params: StableParams, x: Point, r: float, rho: float) -> float:
    """Density of |X| at first entrance into the r-ball on {entrance < inf}.

    The sphere integral of the entrance kernel collapses through the
    exterior Poisson formula to |x|^{2-d} / (|x|^2 - rho^2).
    """
    validate(params)
    r = require_radius(r)
    x = as_point(x, params.d)
    nx = _norm(x)
    if not nx > r:
        raise DomainError("require |x| > r")
    if not 0.0 < rho < r:
        raise DomainError("require 0 < rho < r")
    d, a = params.d, params.alpha
    log_value = (
        _log_bgr_constant(d, a)
        + math.log(sphere_area(d))
        + (d - 1) * math.log(rho)
        + (a / 2) * (math.log(_gap(nx, r)) - math.log(_gap(r, rho)))
        + (2 - d) * math.log(nx)
        - math.log(_gap(nx, rho))
    )
    return math.exp(log_value)


def first_entrance_radial_cdf(params: StableParams, x: Point, r: float, rho: float) -> float:
    """P_x(|X at entrance| <= rho | entrance < inf).

    Raises:
        ToleranceNotMet: if the quadrature overshoots 1 by more than CDF_OVERSHOOT_TOL.
    """
    validate(params)
    r = require_radius(r)
    x = as_point(x, params.d)
    if not 0.0 < rho <= r:
        raise DomainError("require 0 < rho <= r")
    mass = 1.0 - survival_probability(params, x, r)
    value, error = integrate_1d(
        lambda s: first_entrance_radial_density(params, x, r, s), 0.0, rho, DEFAULT_QUAD
    )
    ratio = value / mass
    if ratio > 1.0 + CDF_OVERSHOOT_TOL:
        raise ToleranceNotMet(
            f"entrance radial CDF reached {ratio!r} at rho={rho}", estimate=ratio, error=error / mass
        )
    return ratio


def ladder_entrance_probability(params: StableParams, x: Point, r: float) -> float:
    """P_x(entrance to the r-ball < inf) through the closest-reach/overshoot split.

    The closest-reach radius has the Beta radial law scaled by |x|; from there
    an excursion enters the r-ball iff its overshoot undershoots log(|z|/r).
    """
    validate(params)
    r = require_radius(r)
    x = as_point(x, params.d)
    nx = _norm(x)
    if not nx > r:
        raise DomainError("require |x| > r")

    def integrand(rho: float) -> float:
        if rho <= r or rho >= nx:
            return 0.0
        return closest_reach_radial_density(params, rho / nx) / nx * ladder_levy_tail(
            params, math.log(rho / r)
        )

    value, _ = integrate_1d(integrand, r, nx, DEFAULT_QUAD)
    return value


def overshoot_limit_ratio(
    params: StableParams, x: Point, r: float, g: Callable[[float], float], r0: float
) -> float:
    """E_x[g(|X at entrance|); entrance < inf] / P_x(entrance = inf).

    ``g`` is a radial test function supported in [0, r0] with r0 < r. As r
    increases to |x| the ratio converges to the excursion overshoot
    functional computed by ``overshoot_radial_functional``.
    """
    validate(params)
    x = as_point(x, params.d)
    if not 0.0 < r0 < r:
        raise DomainError("require 0 < r0 < r")
    numerator, _ = integrate_1d(
        lambda s: g(s) * first_entrance_radial_density(params, x, r, s), 0.0, r0, DEFAULT_QUAD
    )
    return numerator / survival_probability(params, x, r)


def overshoot_radial_functional(
    params: StableParams, x_norm: float, g: Callable[[float], float], r0: float
) -> float:
    """N_theta(g(|x| * |overshoot|)) for a radial test function supported in [0, r0]."""
    validate(params)
    if not 0.0 < r0 < x_norm:
        raise DomainError("require 0 < r0 < |x|")
    value, _ = integrate_1d(
        lambda s: g(x_norm * s) * overshoot_radial_density(params, s),
        0.0,
        r0 / x_norm,
        DEFAULT_QUAD,
    )
    return value


def shell_occupation(params: StableParams, x: Point, r: float, a: float, b: float) -> float:
    """E_x[time spent in {a < |y| < b} before leaving the r-ball].

    Integrates the exit-mode resolvent over the shell; with (a, b) = (0, r)
    it reproduces ``expected_exit_time``.
    """
    validate(params)
    r = require_radius(r)
    x = as_point(x, params.d)
    nx = _norm(x)
    if not nx < r:
        raise DomainError("require |x| < r")
    if not 0.0 <= a < b <= r:
        raise DomainError("require 0 <= a < b <= r")
    d = params.d
    pole = x / nx if nx > 0 else np.eye(d)[0]
    side = np.eye(d)[1] if abs(pole[1]) < 0.9 else np.eye(d)[0]
    side = side - np.dot(side, pole) * pole
    side = side / np.linalg.norm(side)

    def angular(rho: float) -> float:
        if nx == 0.0:
            return resolvent_density(params, r, "exit", x, rho * pole)

        def g(c: float) -> float:
            y = rho * (c * pole + math.sqrt(max(0.0, 1.0 - c * c)) * side)
            return resolvent_density(params, r, "exit", x, y)

        return sphere_average(g, d, peak_width=abs(rho - nx) / max(nx, 1e-300) or None)

    hints = [nx] if a < nx < b else []
    value, _ = integrate_1d(
        lambda rho: rho ** (d - 1) * angular(rho) if rho > 0 else 0.0,
        a,
        b,
        DEFAULT_QUAD.with_hints(hints),
    )
    return sphere_area(d) * value
