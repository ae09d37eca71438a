"""Parameter validation, report verdicts and point helpers."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from stablefluct.model import (
    BallSpec,
    DomainError,
    IdentityReport,
    StableParams,
    as_point,
    kelvin_invert,
    norm,
    unit_vector,
    validate,
)


@pytest.mark.parametrize("d, alpha", [(2, 1.0), (3, 0.01), (5, 1.99)])
def test_validate_accepts_interior(d, alpha):
    validate(StableParams(d=d, alpha=alpha))


@pytest.mark.parametrize(
    "d, alpha, needle",
    [(1, 1.0, "d >= 2"), (2, 2.0, "0 < alpha < 2"), (2, 0.0, "0 < alpha < 2"), (3, math.nan, "alpha")],
)
def test_validate_names_the_constraint(d, alpha, needle):
    with pytest.raises(DomainError, match=needle):
        validate(StableParams(d=d, alpha=alpha))


def test_stable_params_is_frozen():
    params = StableParams(d=2, alpha=1.0)
    with pytest.raises(ValidationError):
        params.d = 3


def test_ball_spec_rejects_nonpositive_radius():
    with pytest.raises(ValidationError):
        BallSpec(r=0.0)


def test_report_relative_verdict():
    report = IdentityReport.compare("case", {}, 1.0 + 1e-9, 1.0, 1e-8)
    assert report.passed
    assert report.abs_err == pytest.approx(1e-9)
    assert report.rel_err == pytest.approx(1e-9)

    report = IdentityReport.compare("case", {}, 1.1, 1.0, 1e-8)
    assert not report.passed


def test_report_absolute_verdict_for_zero_reference():
    assert IdentityReport.compare("zero", {}, 1e-12, 0.0, 1e-10).passed
    assert not IdentityReport.compare("zero", {}, 1e-6, 0.0, 1e-10).passed


def test_report_nan_never_passes():
    assert not IdentityReport.compare("nan", {}, math.nan, 1.0, 1.0).passed


def test_report_serialises_verdict_as_pass():
    document = IdentityReport.compare("case", {"d": 2}, 2.0, 2.0, 1e-8).to_json_dict()
    assert document["pass"] is True
    assert "passed" not in document
    assert set(document) == {"name", "params", "lhs", "rhs", "abs_err", "rel_err", "tol", "pass"}


def test_as_point_checks_dimension():
    assert as_point([2, 0], 2).dtype == np.float64
    with pytest.raises(DomainError, match="dimension 3"):
        as_point([2.0, 0.0], 3)
    with pytest.raises(DomainError):
        as_point([1.0, math.inf])


def test_kelvin_inversion_is_an_involution():
    x = np.array([0.3, -1.2, 2.0])
    assert np.allclose(kelvin_invert(kelvin_invert(x)), x, rtol=1e-14)
    assert norm(kelvin_invert(x)) == pytest.approx(1.0 / norm(x))
    assert np.allclose(kelvin_invert([2.0, 0.0]), [0.5, 0.0])
    with pytest.raises(DomainError):
        kelvin_invert([0.0, 0.0])


def test_unit_vector():
    assert unit_vector(3, 1).tolist() == [0.0, 1.0, 0.0]
