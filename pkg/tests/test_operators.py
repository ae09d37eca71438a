"""Ladder-potential and resolvent operators on sphere functions."""

import math

import numpy as np
import pytest

from stablefluct import identities, operators
from stablefluct.model import DomainError, StableParams, unit_vector
from stablefluct.numerics import integrate_1d, sphere_integral

CAUCHY_PLANE = StableParams(d=2, alpha=1.0)
ONE = operators.SphereFunction.constant_function(1.0, label="1")
E1 = unit_vector(2, 0)


def _gamma_ratio_resolvent():
    return math.gamma(0.25) ** 2 / (2.0 * math.gamma(0.75) ** 2)


def test_constant_images_closed_forms():
    assert operators.rho_constant_image(CAUCHY_PLANE, 1.0) == pytest.approx(1.0, rel=1e-14)
    assert operators.rho_constant_image(CAUCHY_PLANE, 2.0) == pytest.approx(2.0 / math.pi, rel=1e-14)
    value = operators.resolvent_constant_image(CAUCHY_PLANE, 0.5)
    assert value == pytest.approx(_gamma_ratio_resolvent(), rel=1e-13)
    assert value.real == pytest.approx(4.3769, rel=1e-4)


def test_sphere_function_kinds():
    zonal = operators.SphereFunction.zonal(lambda c: c, [2.0, 0.0], label="phi1")
    assert zonal(np.array([0.6, 0.8])) == pytest.approx(0.6)
    assert zonal.axis == (1.0, 0.0)
    assert not zonal.is_constant
    assert ONE.is_constant
    assert ONE(np.array([0.0, 1.0])) == 1.0


def test_rho_op_domain():
    with pytest.raises(DomainError, match="Re z > 0"):
        operators.rho_op(CAUCHY_PLANE, 0.0, ONE, E1)
    with pytest.raises(DomainError):
        operators.rho_op(CAUCHY_PLANE, 1.0, ONE, [2.0, 0.0])


def test_resolvent_op_strip():
    with pytest.raises(DomainError, match="0 < Re z < d - alpha"):
        operators.resolvent_op(CAUCHY_PLANE, 1.0, ONE, E1)


def test_general_functions_need_symmetry_in_three_dimensions():
    params = StableParams(d=3, alpha=1.0)
    f = operators.SphereFunction(evaluator=lambda phi: phi[0] * phi[1], label="xy")
    with pytest.raises(DomainError, match="constant or zonal"):
        operators.rho_op(params, 1.0, f, unit_vector(3, 0))


@pytest.mark.slow
@pytest.mark.parametrize("z", [1.0, 2.0])
def test_rho_op_constant_matches_closed_form(z):
    value = operators.rho_op(CAUCHY_PLANE, z, ONE, E1)
    assert value.real == pytest.approx(operators.rho_constant_image(CAUCHY_PLANE, z).real, rel=1e-8)
    assert value.imag == 0.0


@pytest.mark.slow
def test_rho_op_is_linear():
    square = operators.SphereFunction.zonal(lambda c: c * c, E1, label="phi1^2")
    combo = operators.SphereFunction(
        evaluator=lambda phi: 2.0 - phi[0] ** 2, label="2 - phi1^2"
    )
    theta = np.array([math.cos(0.4), math.sin(0.4)])
    lhs = operators.rho_op(CAUCHY_PLANE, 1.0, combo, theta)
    rhs = 2.0 * operators.rho_op(CAUCHY_PLANE, 1.0, ONE, theta) - operators.rho_op(
        CAUCHY_PLANE, 1.0, square, theta
    )
    assert lhs.real == pytest.approx(rhs.real, rel=1e-8)


@pytest.mark.slow
def test_resolvent_op_constant_matches_closed_form_at_two_directions():
    first = operators.resolvent_op(CAUCHY_PLANE, 0.5, ONE, E1)
    second = operators.resolvent_op(CAUCHY_PLANE, 0.5, ONE, np.array([-0.6, 0.8]))
    assert first.real == pytest.approx(_gamma_ratio_resolvent(), rel=1e-6)
    assert second.real == pytest.approx(first.real, rel=1e-8)


@pytest.mark.slow
@pytest.mark.parametrize("params, z", [(CAUCHY_PLANE, 0.5), (StableParams(d=3, alpha=1.2), 0.9)])
def test_factorization_on_constants(params, z):
    report = operators.factorization_residual(params, z, ONE, tol=1e-6)
    assert report.passed, report
    assert report.name == "factorization[1]"


@pytest.mark.slow
def test_factorization_on_degree_one_harmonic():
    phi1 = operators.SphereFunction.zonal(lambda c: c, E1, label="phi1")
    report = operators.factorization_residual(CAUCHY_PLANE, 0.5, phi1, tol=1e-4)
    assert report.passed, report


def test_factorization_residual_rejects_index_outside_strip():
    with pytest.raises(DomainError):
        operators.factorization_residual(CAUCHY_PLANE, 1.0, ONE)


@pytest.mark.slow
def test_tabulate_zonal_reproduces_operator():
    phi1 = operators.SphereFunction.zonal(lambda c: c, E1, label="phi1")
    image = operators.tabulate_zonal(CAUCHY_PLANE, lambda th: operators.rho_op(CAUCHY_PLANE, 1.0, phi1, th), phi1)
    theta = np.array([math.cos(1.1), math.sin(1.1)])
    direct = operators.rho_op(CAUCHY_PLANE, 1.0, phi1, theta).real
    assert image(theta) == pytest.approx(direct, rel=1e-6, abs=1e-9)


@pytest.mark.slow
def test_excursion_occupation_shell_two_orders():
    lo, hi = 1.5, 2.0
    theta = E1

    def shell(z):
        return 1.0 if lo < np.linalg.norm(z) < hi else 0.0

    value = operators.excursion_occupation_value(CAUCHY_PLANE, shell, theta, radial_support=(lo, hi))

    def radial(rho):
        avg = sphere_integral(
            lambda phi: identities.ladder_potential_density(CAUCHY_PLANE, "plus", theta, rho * phi),
            2,
            theta,
        )
        return rho * avg

    mass, _ = integrate_1d(radial, lo, hi)
    expected = identities.factorization_constant(CAUCHY_PLANE) * 2.0 * math.pi * mass
    assert value == pytest.approx(expected, rel=1e-6)


def test_excursion_occupation_support():
    with pytest.raises(DomainError):
        operators.excursion_occupation_value(CAUCHY_PLANE, lambda z: 1.0, E1, radial_support=(0.5, 2.0))


def test_kelvin_duality_reports():
    reports = operators.kelvin_duality_reports(CAUCHY_PLANE, [1.0, 0.0], [0.0, 2.0])
    assert [r.name for r in reports] == ["kelvin-duality[ladder-potential]", "kelvin-duality[resolvent]"]
    assert all(r.passed for r in reports), reports
    worst = operators.kelvin_duality_check(StableParams(d=3, alpha=0.6), [0.3, 0.2, 0.0], [0.0, 1.0, 1.0])
    assert worst.rel_err < 1e-12


def test_kelvin_duality_needs_ordered_radii():
    with pytest.raises(DomainError):
        operators.kelvin_duality_check(CAUCHY_PLANE, [0.0, 2.0], [1.0, 0.0])


def test_resolvent_op_as_printed_is_finite_on_an_annulus():
    value = operators.resolvent_op_as_printed(CAUCHY_PLANE, 0.3, ONE, E1, 0.1, 0.5)
    assert math.isfinite(value.real) and math.isfinite(value.imag)
    with pytest.raises(DomainError):
        operators.resolvent_op_as_printed(CAUCHY_PLANE, 0.3, ONE, E1, 0.5, 0.1)


def _plane_rotation(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def _skewed(phi):
    return phi[0] * phi[1] + 0.5 * phi[0] + 0.2


@pytest.mark.slow
@pytest.mark.parametrize("operator, z", [(operators.rho_op, 1.0), (operators.resolvent_op, 0.5)])
def test_operators_commute_with_rotations(operator, z):
    rotation = _plane_rotation(np.random.default_rng(7).uniform(0.0, 2.0 * math.pi))
    f = operators.SphereFunction(evaluator=_skewed, label="skewed")
    rotated = operators.SphereFunction(evaluator=lambda phi: _skewed(rotation @ phi), label="skewed(R.)")
    theta = np.array([math.cos(0.4), math.sin(0.4)])
    lhs = operator(CAUCHY_PLANE, z, rotated, theta).real
    rhs = operator(CAUCHY_PLANE, z, f, rotation @ theta).real
    assert lhs == pytest.approx(rhs, rel=1e-7, abs=1e-10)


@pytest.mark.slow
def test_resolvent_op_is_monotone():
    f = operators.SphereFunction(evaluator=_skewed, label="skewed")
    g = operators.SphereFunction(evaluator=lambda phi: _skewed(phi) + 0.5 * (1.0 + phi[1]), label="skewed + bump")
    for angle in (0.0, 2.0):
        theta = np.array([math.cos(angle), math.sin(angle)])
        lower = operators.resolvent_op(CAUCHY_PLANE, 0.5, f, theta).real
        upper = operators.resolvent_op(CAUCHY_PLANE, 0.5, g, theta).real
        assert upper > lower
