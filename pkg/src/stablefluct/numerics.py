"""Special functions and deterministic quadrature.

Everything here wraps scipy: ``scipy.special`` for the gamma and incomplete
beta families and ``scipy.integrate.quad`` (QUADPACK, adaptive
Gauss-Kronrod with extrapolation) for integrals. The wrappers add the domain
checks, the fixed infinite-range substitution and the break-point handling the
identity evaluators rely on.
"""

import logging
import math
import warnings
from typing import Callable, Literal, Sequence

import numpy as np
import scipy.integrate
import scipy.special
from pydantic import BaseModel, ConfigDict, Field, field_validator

from stablefluct.model import DomainError, StableFluctError, StableParams, validate

logger = logging.getLogger("stablefluct")


class PoleError(DomainError):
    """Error raised when log-gamma is requested at a nonpositive integer."""


class ToleranceNotMet(StableFluctError):
    """Error raised when adaptive quadrature cannot reach the requested tolerance.

    Attributes:
      estimate: best value QUADPACK produced.
      error: its error estimate.
    """

    def __init__(self, message: str, estimate: float | complex, error: float):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class QuadratureSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    abs_tol: float = Field(1e-13, description="Absolute tolerance")
    rel_tol: float = Field(1e-10, description="Relative tolerance")
    max_depth: int = Field(
        400, description="Maximum number of subintervals QUADPACK may create"
    )
    singularity_hints: tuple[float, ...] = Field(
        (), description="Points where the integrand has an integrable singularity"
    )
    on_failure: Literal["raise", "warn"] = Field(
        "raise", description="Raise ToleranceNotMet or log a warning"
    )

    @field_validator("abs_tol", "rel_tol")
    @classmethod
    def _positive_tol(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("tolerances must be positive")
        return v

    @field_validator("max_depth")
    @classmethod
    def _depth(cls, v: int) -> int:
        if v < 1:
            raise ValueError("max_depth must be >= 1")
        return v

    def with_hints(self, hints: Sequence[float]) -> "QuadratureSpec":
        return self.model_copy(update={"singularity_hints": tuple(hints)})


DEFAULT_QUAD = QuadratureSpec()
# Inner integrals of nested quadrature run a little looser than the outer one.
INNER_QUAD = QuadratureSpec(abs_tol=1e-14, rel_tol=1e-11)


def log_gamma(z: complex) -> complex:
    """Principal branch of log Gamma(z).

    Raises:
        PoleError: at z = 0, -1, -2, ...
    """
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real):
        raise PoleError(f"log_gamma has a pole at z={z.real:g}")
    return complex(scipy.special.loggamma(z))


def log_abs_gamma(x: float) -> float:
    """log |Gamma(x)| for real x, used for every closed-form constant."""
    if x <= 0.0 and x == math.floor(x):
        raise PoleError(f"log_gamma has a pole at z={x:g}")
    return float(scipy.special.gammaln(x))


def log_beta(a: float, b: float) -> float:
    return float(scipy.special.betaln(a, b))


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta I_x(a, b).

    Raises:
        DomainError: unless 0 <= x <= 1, a > 0, b > 0.
    """
    if not (a > 0 and b > 0):
        raise DomainError(f"require a > 0 and b > 0, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"require 0 <= x <= 1, got x={x}")
    return float(scipy.special.betainc(a, b, x))


def reg_inc_beta_complement(y: float, a: float, b: float) -> float:
    """I_{1-y}(a, b) computed from y without forming 1 - y."""
    return 1.0 - reg_inc_beta(y, b, a) if y < 0.5 else reg_inc_beta(1.0 - y, a, b)


def j_integral(zeta: float, params: StableParams) -> float:
    """Integral of (1+u)^{-d/2} u^{alpha/2-1} over (0, zeta).

    Computed as B(alpha/2, (d-alpha)/2) * I_{zeta/(1+zeta)}(alpha/2, (d-alpha)/2).
    For zeta > 1 the complement 1/(1+zeta) is used so large arguments keep
    full relative accuracy.
    """
    validate(params)
    if not zeta >= 0:
        raise DomainError(f"require zeta >= 0, got zeta={zeta}")
    a = params.alpha / 2.0
    b = (params.d - params.alpha) / 2.0
    full = math.exp(log_beta(a, b))
    if math.isinf(zeta):
        return full
    if zeta <= 1.0:
        return full * reg_inc_beta(zeta / (1.0 + zeta), a, b)
    return full * (1.0 - reg_inc_beta(1.0 / (1.0 + zeta), b, a))


def geometric_breaks(width: float, upper: float, lower: float = 0.0) -> list[float]:
    """Break points lower + width * 10^k below ``upper`` for a peak of the given width."""
    if not width > 0:
        return []
    out = []
    w = width
    while lower + w < upper:
        out.append(lower + w)
        w *= 10.0
    return out


def _quad_real(
    f: Callable[[float], float], a: float, b: float, spec: QuadratureSpec, points: list[float]
) -> tuple[float, float, bool]:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", scipy.integrate.IntegrationWarning)
        value, error = scipy.integrate.quad(
            f,
            a,
            b,
            points=points or None,
            epsabs=spec.abs_tol,
            epsrel=spec.rel_tol,
            limit=max(spec.max_depth, len(points) + 2),
        )
    warned = any(issubclass(w.category, scipy.integrate.IntegrationWarning) for w in caught)
    return value, error, warned


def _finite_map(
    f: Callable[[float], complex], a: float, b: float, hints: Sequence[float]
) -> tuple[Callable[[float], complex], float, float, list[float]]:
    """Map an integral onto a finite interval with u = a + t/(1-t) on infinite ends."""
    if math.isinf(a) and math.isinf(b):
        raise DomainError("integrate_1d needs at least one finite endpoint")
    if math.isinf(b):

        def g(t: float) -> complex:
            if t >= 1.0:
                return 0.0
            s = 1.0 - t
            return f(a + t / s) / (s * s)

        pts = [(p - a) / (1.0 + p - a) for p in hints if p > a]
        return g, 0.0, 1.0, pts
    if math.isinf(a):

        def g(t: float) -> complex:
            if t >= 1.0:
                return 0.0
            s = 1.0 - t
            return f(b - t / s) / (s * s)

        pts = [(b - p) / (1.0 + b - p) for p in hints if p < b]
        return g, 0.0, 1.0, pts
    return f, a, b, list(hints)


def integrate_1d(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadratureSpec | None = None,
    complex_func: bool = False,
) -> tuple[float | complex, float]:
    """Adaptive integral of f over (a, b); b may be +inf.

    Declared singularity hints become forced break points. Complex integrands
    (``complex_func=True``) are integrated as separate real and imaginary parts.

    Returns:
        (value, error estimate)

    Raises:
        ToleranceNotMet: when QUADPACK flags the result and its error exceeds
            the requested tolerance (unless ``spec.on_failure == "warn"``).
    """
    spec = spec or DEFAULT_QUAD
    sign = 1.0
    if a > b:
        a, b, sign = b, a, -1.0
    if a == b:
        return (0j if complex_func else 0.0), 0.0
    g, lo, hi, pts = _finite_map(f, a, b, spec.singularity_hints)
    pts = sorted({p for p in pts if lo < p < hi})

    if complex_func:
        re, re_err, re_warn = _quad_real(lambda t: complex(g(t)).real, lo, hi, spec, pts)
        im, im_err, im_warn = _quad_real(lambda t: complex(g(t)).imag, lo, hi, spec, pts)
        value: float | complex = complex(re, im)
        error = math.hypot(re_err, im_err)
        warned = re_warn or im_warn
    else:
        value, error, warned = _quad_real(g, lo, hi, spec, pts)

    if warned and error > max(spec.abs_tol, spec.rel_tol * abs(value)):
        message = f"quadrature on ({a}, {b}) reached error {error:.3e} for value {value}"
        if spec.on_failure == "raise":
            raise ToleranceNotMet(message, estimate=sign * value, error=error)
        logger.warning(message)
    return sign * value, error


def sphere_constant(d: int) -> float:
    """c_d = Gamma(d/2) / (sqrt(pi) Gamma((d-1)/2)), the polar-angle normaliser."""
    return math.exp(
        log_abs_gamma(d / 2.0) - 0.5 * math.log(math.pi) - log_abs_gamma((d - 1) / 2.0)
    )


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def sphere_average(
    g: Callable[[float], float],
    d: int,
    spec: QuadratureSpec | None = None,
    peak_width: float | None = None,
    complex_func: bool = False,
) -> float:
    """Average of g(<phi, e1>) over the unit sphere under the uniform probability.

    Computed as c_d * int_0^pi g(cos t) sin^{d-2} t dt. ``peak_width`` adds
    geometric break points near t = 0 for integrands concentrated at the pole.
    """
    if d < 2:
        raise DomainError(f"require d >= 2, got d={d}")
    spec = spec or INNER_QUAD
    if peak_width is not None:
        spec = spec.with_hints(geometric_breaks(peak_width, math.pi))
    power = d - 2

    def integrand(t: float):
        return g(math.cos(t)) * math.sin(t) ** power

    value, _ = integrate_1d(integrand, 0.0, math.pi, spec, complex_func=complex_func)
    return sphere_constant(d) * value


def _orthonormal_partner(pole: np.ndarray, axis: np.ndarray | None) -> np.ndarray:
    d = pole.shape[0]
    candidates = [] if axis is None else [np.asarray(axis, dtype=np.float64)]
    candidates += [np.eye(d)[k] for k in range(d)]
    for c in candidates:
        e = c - np.dot(c, pole) * pole
        n = np.linalg.norm(e)
        if n > 1e-8:
            return e / n
    raise DomainError("could not complete an orthonormal frame")


def _third_direction(p: np.ndarray, e: np.ndarray) -> np.ndarray:
    for c in np.eye(p.shape[0]):
        v = c - np.dot(c, p) * p - np.dot(c, e) * e
        n = np.linalg.norm(v)
        if n > 1e-8:
            return v / n
    raise DomainError("could not complete an orthonormal frame")


def sphere_integral(
    h: Callable[[np.ndarray], float],
    d: int,
    pole: np.ndarray,
    axis: np.ndarray | None = None,
    spec: QuadratureSpec | None = None,
    peak_width: float | None = None,
    complex_func: bool = False,
) -> float:
    """Average of h(phi) over the unit sphere under the uniform probability.

    In d = 2 any h is allowed and the circle is parametrised from the pole.
    In d >= 3, h must depend on phi only through its projection onto
    span(pole, axis); phi = cos t * pole + sin t (cos b * e + sin b * e'),
    with weight sin^{d-2} t sin^{d-3} b.
    """
    pole = np.asarray(pole, dtype=np.float64)
    pole = pole / np.linalg.norm(pole)
    e = _orthonormal_partner(pole, axis)
    inner = spec or INNER_QUAD
    hints = geometric_breaks(peak_width, math.pi) if peak_width is not None else []

    if d == 2:
        two_sided = sorted(set([-p for p in hints] + [0.0] + hints))

        def circle(t: float):
            return h(math.cos(t) * pole + math.sin(t) * e)

        value, _ = integrate_1d(
            circle, -math.pi, math.pi, inner.with_hints(two_sided), complex_func=complex_func
        )
        return value / (2.0 * math.pi)

    if axis is None or abs(abs(np.dot(np.asarray(axis), pole)) - 1.0) < 1e-14:
        return sphere_average(
            lambda c: h(c * pole + math.sqrt(max(0.0, 1.0 - c * c)) * e),
            d,
            inner,
            peak_width=peak_width,
            complex_func=complex_func,
        )

    c_outer = sphere_constant(d)
    c_inner = sphere_constant(d - 1)
    e_perp = _third_direction(pole, e)

    def ring(t: float):
        ct, st = math.cos(t), math.sin(t)

        def around(b: float):
            phi = ct * pole + st * (math.cos(b) * e + math.sin(b) * e_perp)
            return h(phi) * math.sin(b) ** (d - 3)

        value, _ = integrate_1d(around, 0.0, math.pi, inner, complex_func=complex_func)
        return c_inner * value * st ** (d - 2)

    value, _ = integrate_1d(
        ring, 0.0, math.pi, (spec or DEFAULT_QUAD).with_hints(hints), complex_func=complex_func
    )
    return c_outer * value


def poisson_kernel_average(w: np.ndarray, d: int, spec: QuadratureSpec | None = None) -> float:
    """Quadrature of the average of |phi - w|^{-d} over the unit sphere.

    Equals (1 - |w|^2)^{-1} for |w| < 1.

    Raises:
        DomainError: if |w| >= 1.
    """
    w = np.asarray(w, dtype=np.float64)
    if w.shape[0] != d:
        raise DomainError(f"require a point of dimension {d}, got {w.shape[0]}")
    s = float(np.linalg.norm(w))
    if not s < 1.0:
        raise DomainError(f"require |w| < 1, got |w|={s}")

    def g(c: float) -> float:
        return ((1.0 - s) ** 2 + 2.0 * s * (1.0 - c)) ** (-d / 2.0)

    return sphere_average(g, d, spec, peak_width=(1.0 - s) if s > 0 else None)
