"""Operator layer of the deep factorisation.

rho_z and R_z act on bounded functions on the unit sphere. Both are evaluated
by radial x spherical quadrature; the angular part is reduced to one or two
dimensions by rotational symmetry, which is why sphere functions in d >= 3
must be constant or zonal (declare an axis).
"""

import logging
import math
from typing import Any, Callable, Optional

import numpy as np
from numpy.polynomial import Chebyshev
from pydantic import BaseModel, ConfigDict, Field

from stablefluct import identities
from stablefluct.model import (
    DomainError,
    IdentityReport,
    Point,
    StableParams,
    as_point,
    kelvin_invert,
    unit_vector,
    validate,
)
from stablefluct.numerics import (
    DEFAULT_QUAD,
    QuadratureSpec,
    integrate_1d,
    log_gamma,
    sphere_area,
    sphere_average,
    sphere_integral,
)

logger = logging.getLogger("stablefluct")

CHEBYSHEV_DEGREE = 12


class SphereFunction(BaseModel):
    """A bounded function on the unit sphere.

    A zonal function depends on phi only through <phi, axis> and carries its
    ``profile`` c -> f; a constant function carries ``constant``.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    evaluator: Callable[[np.ndarray], float] = Field(..., description="phi -> f(phi)")
    label: str = Field(..., description="Human readable name")
    axis: Optional[tuple[float, ...]] = Field(None, description="Symmetry axis of a zonal function")
    profile: Optional[Callable[[float], Any]] = Field(None, description="c -> f for zonal functions")
    constant: Optional[complex] = Field(None, description="Value of a constant function")

    @classmethod
    def constant_function(cls, value: complex = 1.0, label: str | None = None) -> "SphereFunction":
        return cls(
            evaluator=lambda phi: value,
            label=label or f"const({value:g})",
            constant=complex(value),
            profile=lambda c: value,
        )

    @classmethod
    def zonal(
        cls, profile: Callable[[float], Any], axis: np.ndarray, label: str
    ) -> "SphereFunction":
        a = np.asarray(axis, dtype=np.float64)
        a = a / np.linalg.norm(a)
        return cls(
            evaluator=lambda phi: profile(float(np.dot(phi, a))),
            label=label,
            axis=tuple(a),
            profile=profile,
        )

    @property
    def is_constant(self) -> bool:
        return self.constant is not None

    def axis_vector(self) -> np.ndarray | None:
        return None if self.axis is None else np.asarray(self.axis)

    def __call__(self, phi: np.ndarray) -> Any:
        return self.evaluator(phi)


def _gap2(rho: float, c: float) -> float:
    """|rho phi - theta|^2 for <phi, theta> = c, nonnegative by construction."""
    return (rho - 1.0) ** 2 + 2.0 * rho * (1.0 - c)


def _unit(theta: Point, d: int) -> Point:
    theta = as_point(theta, d)
    if abs(float(np.linalg.norm(theta)) - 1.0) > 1e-9:
        raise DomainError("require |theta| = 1")
    return theta


def _angular_average(
    d: int,
    f: SphereFunction,
    theta: Point,
    kernel: Callable[[float], float],
    peak_width: float | None,
    complex_func: bool,
) -> Any:
    """Average over phi of f(phi) * kernel(<phi, theta>)."""
    if f.is_constant:
        value = sphere_average(kernel, d, peak_width=peak_width)
        return f.constant * value if complex_func else f.constant.real * value
    axis = f.axis_vector()
    if axis is not None and f.profile is not None:
        cos_axis = float(np.dot(axis, theta))
        if abs(abs(cos_axis) - 1.0) < 1e-14:
            sign = 1.0 if cos_axis > 0 else -1.0
            return sphere_average(
                lambda c: f.profile(sign * c) * kernel(c),
                d,
                peak_width=peak_width,
                complex_func=complex_func,
            )
    elif d > 2:
        raise DomainError("require a constant or zonal sphere function for d >= 3")
    return sphere_integral(
        lambda phi: f(phi) * kernel(float(np.dot(phi, theta))),
        d,
        theta,
        axis=axis,
        peak_width=peak_width,
        complex_func=complex_func,
    )


def _is_complex(z: complex, f: SphereFunction) -> bool:
    if complex(z).imag != 0.0:
        return True
    return f.is_constant and f.constant.imag != 0.0


def rho_op(
    params: StableParams,
    z: complex,
    f: SphereFunction,
    theta: Point,
    spec: QuadratureSpec | None = None,
) -> complex:
    """rho_z[f](theta), the ascending ladder potential operator.

    Raises:
        DomainError: if Re z <= 0.
    """
    validate(params)
    z = complex(z)
    if not z.real > 0:
        raise DomainError("require Re z > 0")
    d, a = params.d, params.alpha
    theta = _unit(theta, d)
    cplx = _is_complex(z, f)

    def radial(rho: float):
        if rho <= 1.0:
            return 0.0
        kernel = lambda c: _gap2(rho, c) ** (-d / 2.0)
        ang = _angular_average(d, f, theta, kernel, rho - 1.0, cplx)
        weight = rho ** (d - 1) * ((rho - 1.0) * (rho + 1.0)) ** (a / 2)
        if cplx:
            return weight * ang * rho ** (-(a + z))
        return weight * ang * rho ** (-(a + z.real))

    value, _ = integrate_1d(radial, 1.0, math.inf, spec or DEFAULT_QUAD, complex_func=cplx)
    return complex(identities.potential_constant(params) * sphere_area(d) * value)


def resolvent_op(
    params: StableParams,
    z: complex,
    f: SphereFunction,
    theta: Point,
    spec: QuadratureSpec | None = None,
) -> complex:
    """R_z[f](theta) = int f(arg y) u(theta, y) |y|^{-(alpha+z)} dy over R^d.

    u is the free (Riesz) potential density. The integral converges absolutely
    in the strip 0 < Re z < d - alpha.
    """
    validate(params)
    z = complex(z)
    d, a = params.d, params.alpha
    if not 0.0 < z.real < d - a:
        raise DomainError("require 0 < Re z < d - alpha")
    theta = _unit(theta, d)
    cplx = _is_complex(z, f)
    spec = spec or DEFAULT_QUAD

    def radial(rho: float):
        if rho <= 0.0 or rho == 1.0:
            return 0.0
        kernel = lambda c: _gap2(rho, c) ** ((a - d) / 2.0)
        ang = _angular_average(d, f, theta, kernel, abs(rho - 1.0), cplx)
        power = d - 1 - a - (z if cplx else z.real)
        return ang * rho**power

    inner, _ = integrate_1d(radial, 0.0, 1.0, spec, complex_func=cplx)
    outer, _ = integrate_1d(radial, 1.0, math.inf, spec, complex_func=cplx)
    return complex(identities.free_potential_constant(params) * sphere_area(d) * (inner + outer))


def resolvent_op_as_printed(
    params: StableParams,
    lam: float,
    f: SphereFunction,
    theta: Point,
    inner: float,
    outer: float,
) -> complex:
    """The displayed R-kernel |y - theta|^{i lambda - d}, integrated over inner < |y - theta| < outer.

    Documentation evaluator only: the untruncated integral diverges
    logarithmically at both ends, so no check relies on it.
    """
    validate(params)
    d = params.d
    theta = _unit(theta, d)
    if not 0.0 < inner < outer < math.inf:
        raise DomainError("require 0 < inner < outer < inf")

    def shell(s: float):
        def h(psi: np.ndarray):
            y = theta + s * psi
            n = float(np.linalg.norm(y))
            return 0.0 if n == 0.0 else f(y / n)

        avg = sphere_integral(h, d, theta, axis=f.axis_vector())
        return avg * s ** (1j * lam - 1.0)

    value, _ = integrate_1d(shell, inner, outer, DEFAULT_QUAD, complex_func=True)
    return complex(identities.free_potential_constant(params) * sphere_area(d) * value)


def rho_constant_image(params: StableParams, z: complex) -> complex:
    """rho_z[1] = Gamma(d/2) Gamma(z/2) / (Gamma((d-alpha)/2) Gamma((z+alpha)/2))."""
    validate(params)
    d, a = params.d, params.alpha
    z = complex(z)
    return complex(
        np.exp(log_gamma(d / 2) + log_gamma(z / 2) - log_gamma((d - a) / 2) - log_gamma((z + a) / 2))
    )


def resolvent_constant_image(params: StableParams, z: complex) -> complex:
    """R_z[1] = 2^{-alpha} Gamma(z/2) Gamma((d-alpha-z)/2) / (Gamma((alpha+z)/2) Gamma((d-z)/2))."""
    validate(params)
    d, a = params.d, params.alpha
    z = complex(z)
    return complex(
        2.0 ** (-a)
        * np.exp(
            log_gamma(z / 2)
            + log_gamma((d - a - z) / 2)
            - log_gamma((a + z) / 2)
            - log_gamma((d - z) / 2)
        )
    )


def tabulate_zonal(
    params: StableParams,
    op: Callable[[Point], complex],
    f: SphereFunction,
    degree: int = CHEBYSHEV_DEGREE,
) -> SphereFunction:
    """Tabulate theta -> op(theta) for a constant or zonal input as a sphere function.

    Rotation invariance of the operators makes the image of a zonal function
    zonal about the same axis, so a Chebyshev interpolant in <theta, axis>
    represents it.
    """
    d = params.d
    if f.is_constant:
        value = op(unit_vector(d))
        return SphereFunction.constant_function(value, label=f"image({f.label})")
    axis = f.axis_vector()
    if axis is None:
        raise DomainError("require a constant or zonal sphere function to tabulate")
    e = np.eye(d)[int(np.argmin(np.abs(axis)))]
    e = e - np.dot(e, axis) * axis
    e = e / np.linalg.norm(e)

    def at_cosine(cs: np.ndarray) -> np.ndarray:
        out = []
        for c in np.atleast_1d(cs):
            theta = c * axis + math.sqrt(max(0.0, 1.0 - c * c)) * e
            out.append(op(theta))
        values = np.asarray(out)
        return values.real if np.all(values.imag == 0.0) else values

    logger.info(f"tabulating image of {f.label} on {degree + 1} Chebyshev nodes")
    series = Chebyshev.interpolate(at_cosine, degree, domain=[-1.0, 1.0])
    return SphereFunction.zonal(lambda c: series(c), axis, label=f"image({f.label})")


def factorization_thetas(d: int) -> list[Point]:
    """Fixed evaluation directions: e1 and two tilts towards e2."""
    out = []
    for tilt in (0.0, 0.3, 0.7):
        theta = math.cos(tilt) * unit_vector(d, 0) + math.sin(tilt) * unit_vector(d, 1)
        out.append(theta)
    return out


def factorization_residual(
    params: StableParams,
    z: float,
    f: SphereFunction,
    tol: float = 1e-6,
    thetas: list[Point] | None = None,
) -> IdentityReport:
    """Compare R_z[f] with C * rho_{d-alpha-z}[rho_z[f]], averaged over fixed directions.

    With z = -i lambda the displayed outer index i lambda + d - alpha becomes
    d - alpha - z.
    """
    validate(params)
    d, a = params.d, params.alpha
    if not 0.0 < z < d - a:
        raise DomainError("require 0 < z < d - alpha")
    thetas = thetas or factorization_thetas(d)
    outer_index = d - a - z

    inner = tabulate_zonal(params, lambda th: rho_op(params, z, f, th), f)
    lhs = np.mean([resolvent_op(params, z, f, th) for th in thetas])
    rhs = identities.factorization_constant(params) * np.mean(
        [rho_op(params, outer_index, inner, th) for th in thetas]
    )
    return IdentityReport.compare(
        f"factorization[{f.label}]",
        {"d": d, "alpha": a, "z": z},
        complex(lhs).real,
        complex(rhs).real,
        tol,
    )


def excursion_occupation_value(
    params: StableParams,
    g: Callable[[np.ndarray], float],
    theta: Point,
    radial_support: tuple[float, float] = (1.0, math.inf),
) -> float:
    """N_theta(int_0^zeta g ds) = C * int_{|z|>1} g(z) U^+_theta(dz).

    ``radial_support`` bounds the radii where g can be nonzero; its ends
    become break points. In d >= 3, g must be invariant under rotations
    fixing theta.
    """
    validate(params)
    d, a = params.d, params.alpha
    theta = _unit(theta, d)
    lo, hi = radial_support
    if not 1.0 <= lo < hi:
        raise DomainError("require 1 <= inner radius < outer radius")

    def radial(rho: float) -> float:
        if rho <= 1.0:
            return 0.0

        def h(phi: np.ndarray) -> float:
            value = g(rho * phi)
            if value == 0.0:
                return 0.0
            c = float(np.dot(phi, theta))
            return value * _gap2(rho, c) ** (-d / 2.0)

        ang = sphere_integral(h, d, theta, peak_width=rho - 1.0)
        return rho ** (d - 1 - a) * ((rho - 1.0) * (rho + 1.0)) ** (a / 2) * ang

    value, _ = integrate_1d(radial, lo, hi, DEFAULT_QUAD)
    return (
        identities.factorization_constant(params)
        * identities.potential_constant(params)
        * sphere_area(d)
        * value
    )


def kelvin_duality_reports(
    params: StableParams, x: Point, z: Point, tol: float = 1e-12
) -> list[IdentityReport]:
    """Both Kelvin dualities at (x, z): ladder potentials and entrance/exit resolvents."""
    validate(params)
    d, a = params.d, params.alpha
    x = as_point(x, d)
    z = as_point(z, d)
    nx, nz = float(np.linalg.norm(x)), float(np.linalg.norm(z))
    if not 0.0 < nx < nz:
        raise DomainError("require 0 < |x| < |z|")
    case = {"d": d, "alpha": a, "x": x.tolist(), "z": z.tolist()}

    kx, kz = kelvin_invert(x), kelvin_invert(z)
    plus = identities.ladder_potential_density(params, "plus", x, z)
    via_minus = (
        identities.ladder_potential_density(params, "minus", kx, kz)
        * (nx / nz) ** (a - d)
        * nz ** (-2 * d)
    )

    # the resolvent pair needs both points outside the unit ball
    s = min(nx, nz) / 2.0
    xs, zs = x / s, z / s
    ns_x, ns_z = nx / s, nz / s
    h_plus = identities.resolvent_density(params, 1.0, "entrance", xs, zs)
    h_via_minus = (
        identities.resolvent_density(params, 1.0, "exit", kelvin_invert(xs), kelvin_invert(zs))
        * (ns_x / ns_z) ** (a - d)
        * ns_z ** (2 * a - 2 * d)
    )
    return [
        IdentityReport.compare("kelvin-duality[ladder-potential]", case, via_minus, plus, tol),
        IdentityReport.compare(
            "kelvin-duality[resolvent]", {**case, "scale": s}, h_via_minus, h_plus, tol
        ),
    ]


def kelvin_duality_check(
    params: StableParams, x: Point, z: Point, tol: float = 1e-12
) -> IdentityReport:
    """Worst of the two Kelvin duality reports."""
    reports = kelvin_duality_reports(params, x, z, tol)
    return max(reports, key=lambda report: report.rel_err)
