"""Samplers, path simulation, seeding and the experiment runner."""

import math
import pickle

import numpy as np
import pytest
import scipy.stats
from pydantic import TypeAdapter, ValidationError

from stablefluct import identities, montecarlo
from stablefluct.model import DomainError, StableParams
from stablefluct.montecarlo import (
    ClosestReachRadialExperiment,
    FirstEntrancePositionExperiment,
    OccupationExperiment,
    ReflectedStationaryExperiment,
    RejectionBudgetExceeded,
    SeedSpec,
    SurvivalExperiment,
    TruncatedPaths,
)

CAUCHY_PLANE = StableParams(d=2, alpha=1.0)


def test_splitmix64_reference_output():
    # first output of the splitmix64 generator seeded with 0
    assert SeedSpec(master_seed=0, worker_index=1).stream_seed() == 0xE220A8397B1DCDAF


def test_seed_streams_are_reproducible_and_distinct():
    seeds = SeedSpec(master_seed=42)
    a = seeds.for_worker(0).rng().standard_normal(4)
    b = SeedSpec(master_seed=42, worker_index=0).rng().standard_normal(4)
    c = seeds.for_worker(1).rng().standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    with pytest.raises(ValidationError):
        SeedSpec(master_seed=1, worker_index=-1)


def test_one_sided_stable_half_is_levy():
    rng = np.random.default_rng(1)
    draws = montecarlo.sample_one_sided_stable(0.5, rng, 100_000)
    assert np.all(draws > 0)
    # E exp(-lam S) = exp(-sqrt(lam)) is the Levy law with scale 1/2
    assert montecarlo.ks_statistic(draws, scipy.stats.levy(scale=0.5).cdf) < 0.01


@pytest.mark.parametrize("beta", [0.3, 0.7])
def test_one_sided_stable_laplace_transform(beta):
    rng = np.random.default_rng(2)
    values = np.exp(-montecarlo.sample_one_sided_stable(beta, rng, 100_000))
    stderr = values.std(ddof=1) / math.sqrt(values.size)
    assert abs(values.mean() - math.exp(-1.0)) < 3.0 * stderr


def test_one_sided_stable_rejects_beta_outside_unit_interval():
    with pytest.raises(DomainError):
        montecarlo.sample_one_sided_stable(1.0, np.random.default_rng(0))


def test_cauchy_increment_radial_law():
    rng = np.random.default_rng(3)
    steps = montecarlo.sample_stable_increment(CAUCHY_PLANE, 1.0, rng, 100_000)
    assert steps.shape == (100_000, 2)
    # |X|^2 / d of the isotropic Cauchy law is F(d, 1)
    ratio = (steps**2).sum(axis=1) / 2.0
    assert montecarlo.ks_statistic(ratio, scipy.stats.f(2, 1).cdf) < 0.01


def test_increment_scaling_in_time():
    params = StableParams(d=3, alpha=1.5)
    one = montecarlo.sample_stable_increment(params, 1.0, np.random.default_rng(4), 10)
    scaled = montecarlo.sample_stable_increment(params, 8.0, np.random.default_rng(4), 10)
    assert np.allclose(scaled, one * 8.0 ** (1.0 / 1.5), rtol=1e-12)


def test_increment_directions_are_isotropic():
    n = 100_000
    steps = montecarlo.sample_stable_increment(StableParams(d=3, alpha=1.3), 1.0, np.random.default_rng(21), n)
    directions = steps / np.linalg.norm(steps, axis=1)[:, None]
    assert np.linalg.norm(directions.mean(axis=0)) < 3.0 / math.sqrt(n)


def test_simulate_paths_boundaries_and_horizon():
    rng = np.random.default_rng(5)
    batch = montecarlo.simulate_paths(CAUCHY_PLANE, [2.0, 0.0], 1e-2, 1.0, 50.0, 3.0, rng, n=200)
    assert np.all(batch.end_time <= 3.0 + 1e-12)
    assert set(np.unique(batch.exit_code)) <= {0, 1, 2}
    inner = batch.exit_code == 1
    assert np.all(np.linalg.norm(batch.first_passage_position[inner], axis=1) < 1.0)
    assert np.all(np.isnan(batch.first_passage_time[batch.exit_code == 0]))
    assert np.all(batch.min_radius <= 2.0)
    assert np.all(batch.max_radius >= 2.0)
    assert np.allclose(np.linalg.norm(batch.argmin_point, axis=1), batch.min_radius)


def test_path_record_exit_reason():
    record = montecarlo.simulate_path(
        CAUCHY_PLANE, [2.0, 0.0], 1e-2, 1.0, None, 0.05, SeedSpec(master_seed=3), clock="lamperti"
    )
    assert record.exit_reason in ("horizon", "hit_inner")
    if record.exit_reason == "horizon":
        assert record.first_passage_time is None
        assert record.end_time == pytest.approx(0.05)


def test_paths_out_of_steps_are_truncated():
    rng = np.random.default_rng(22)
    batch = montecarlo.simulate_paths(
        CAUCHY_PLANE, [4.0, 0.0], 1e-9, 1.0, 400.0, math.inf, rng, n=50, clock="lamperti", max_steps=2
    )
    assert np.all(batch.exit_code == montecarlo.TRUNCATED)
    assert np.all(np.isnan(batch.first_passage_time))
    assert batch.record(0).exit_reason == "truncated"


@pytest.mark.parametrize(
    "experiment",
    [
        SurvivalExperiment(d=2, alpha=1.0, x=[4.0, 0.0], r=1.0),
        ClosestReachRadialExperiment(d=2, alpha=1.0, x=[1.0, 0.0]),
    ],
    ids=["survival", "closest-reach"],
)
def test_estimators_refuse_truncated_paths(experiment, monkeypatch):
    monkeypatch.setattr(montecarlo, "MAX_STEPS", 2)
    with pytest.raises(TruncatedPaths) as excinfo:
        montecarlo.estimate(experiment, 100, SeedSpec(master_seed=1))
    assert excinfo.value.steps == 2
    assert 0 < excinfo.value.count <= 100
    copy = pickle.loads(pickle.dumps(excinfo.value))
    assert (copy.count, copy.steps) == (excinfo.value.count, 2)


def test_entrance_direction_budget_is_per_draw():
    # rho = 0 always accepts; rho = 1 against q = 1 + 1e-9 practically never does
    rho = np.concatenate([np.zeros(999), [1.0]])
    with pytest.raises(RejectionBudgetExceeded) as excinfo:
        montecarlo._sample_entrance_direction(
            CAUCHY_PLANE, np.array([1.0, 0.0]), 1.0 + 1e-9, rho, np.random.default_rng(23), budget=50
        )
    assert excinfo.value.accepted == 999
    assert excinfo.value.attempts == 1000 + 49
    copy = pickle.loads(pickle.dumps(excinfo.value))
    assert (copy.accepted, copy.attempts) == (999, 1049)


def test_simulate_paths_rejects_bad_geometry():
    rng = np.random.default_rng(0)
    with pytest.raises(DomainError):
        montecarlo.simulate_paths(CAUCHY_PLANE, [0.5, 0.0], 1e-3, 1.0, None, 1.0, rng)
    with pytest.raises(DomainError):
        montecarlo.simulate_paths(CAUCHY_PLANE, [2.0, 0.0], 0.0, 1.0, None, 1.0, rng)
    with pytest.raises(DomainError):
        montecarlo.simulate_paths(CAUCHY_PLANE, [0.0, 0.0], 1e-3, -1.0, None, 1.0, rng, clock="lamperti")


def test_shell_occupation_accumulates_time():
    rng = np.random.default_rng(6)
    batch = montecarlo.simulate_paths(
        CAUCHY_PLANE, [0.0, 0.0], 1e-2, -1.0, 1.0, math.inf, rng, n=100, shell=(0.0, 1.0)
    )
    assert np.all(batch.exit_code == 2)
    assert np.all(batch.occupation <= batch.end_time + 1e-12)
    assert np.all(batch.occupation > 0)


def test_first_entrance_sampler_lands_in_ball():
    rng = np.random.default_rng(7)
    y = montecarlo.sample_first_entrance_batch(CAUCHY_PLANE, [2.0, 0.0], 1.0, rng, 20_000)
    entered = ~np.isnan(y[:, 0])
    assert np.all(np.linalg.norm(y[entered], axis=1) < 1.0)
    fraction = entered.mean()
    assert abs(fraction - 1.0 / 3.0) < 4.0 * math.sqrt(2.0 / 9.0 / 20_000)
    # the entrance kernel favours the side facing the start
    assert np.mean(y[entered][:, 0]) > 0.0


def test_sample_first_entrance_single_draw():
    rng = np.random.default_rng(8)
    draws = [montecarlo.sample_first_entrance(CAUCHY_PLANE, [2.0, 0.0], 1.0, rng) for _ in range(20)]
    assert any(d is None for d in draws)
    assert all(d is None or np.linalg.norm(d) < 1.0 for d in draws)


def test_partition_and_merge():
    assert montecarlo.partition(10, 3) == [4, 3, 3]
    assert sum(montecarlo.partition(20_001, 8)) == 20_001
    rng = np.random.default_rng(9)
    values = rng.standard_normal(101)
    parts = [values[:40], values[40:41], values[41:]]
    merged = (0, 0.0, 0.0)
    for p in parts:
        merged = montecarlo._merge(merged, (p.size, p.mean(), ((p - p.mean()) ** 2).sum()))
    count, mean, m2 = merged
    assert count == 101
    assert mean == pytest.approx(values.mean(), rel=1e-12)
    assert m2 / (count - 1) == pytest.approx(values.var(ddof=1), rel=1e-12)


def test_experiment_union_dispatches_on_kind():
    adapter = TypeAdapter(montecarlo.Experiment)
    experiment = adapter.validate_python({"kind": "survival", "d": 2, "alpha": 1.0, "x": [2.0, 0.0], "r": 1.0})
    assert isinstance(experiment, SurvivalExperiment)
    assert experiment.clock == "lamperti"
    with pytest.raises(ValidationError):
        adapter.validate_python({"kind": "survival", "d": 2, "alpha": 1.0, "x": [2.0, 0.0], "radius": 1.0})
    with pytest.raises(ValidationError):
        adapter.validate_python({"kind": "teleport", "d": 2, "alpha": 1.0, "x": [2.0, 0.0]})


def test_param_items_order():
    experiment = SurvivalExperiment(d=2, alpha=1.5, x=[2.0, 0.0], r=1.0, dt=1e-3)
    assert experiment.param_items() == [("x", "2,0"), ("dt", 0.001), ("r", 1.0), ("clock", "lamperti")]
    entrance = FirstEntrancePositionExperiment(d=2, alpha=1.0, x=[2.0, 0.0], r=1.0)
    assert [k for k, _ in entrance.param_items()] == ["x", "r"]


def test_experiment_checks_geometry():
    with pytest.raises(DomainError, match=r"\|x\| > r"):
        SurvivalExperiment(d=2, alpha=1.0, x=[0.5, 0.0], r=1.0).check()
    with pytest.raises(DomainError):
        OccupationExperiment(d=2, alpha=1.0, x=[0.0, 0.0], r=1.0, a=0.8, b=0.2).check()


def test_estimate_is_reproducible():
    experiment = FirstEntrancePositionExperiment(d=2, alpha=1.0, x=[2.0, 0.0], r=1.0)
    first = montecarlo.estimate(experiment, 500, SeedSpec(master_seed=11))
    second = montecarlo.estimate(experiment, 500, SeedSpec(master_seed=11))
    assert first == second
    assert first.n == 500
    assert first.reference == pytest.approx(1.0 / 3.0)
    assert first.ks is not None


def test_estimate_rejects_small_samples():
    experiment = FirstEntrancePositionExperiment(d=2, alpha=1.0, x=[2.0, 0.0], r=1.0)
    with pytest.raises(DomainError, match="n >= 100"):
        montecarlo.estimate(experiment, 99, SeedSpec())


@pytest.mark.slow
def test_estimate_with_workers_is_reproducible():
    experiment = FirstEntrancePositionExperiment(d=2, alpha=1.0, x=[2.0, 0.0], r=1.0)
    first = montecarlo.estimate(experiment, 2_000, SeedSpec(master_seed=5), workers=2)
    second = montecarlo.estimate(experiment, 2_000, SeedSpec(master_seed=5), workers=2)
    assert first == second
    assert first.workers == 2


@pytest.mark.slow
def test_survival_estimate_matches_closed_form():
    experiment = SurvivalExperiment(d=2, alpha=1.0, x=[2.0, 0.0], r=1.0, dt=1e-3)
    result = montecarlo.estimate(experiment, 20_000, SeedSpec(master_seed=42))
    assert abs(result.mean - 2.0 / 3.0) < max(3.0 * result.stderr, 0.02)


@pytest.mark.slow
def test_closest_reach_radius_follows_beta_law():
    experiment = ClosestReachRadialExperiment(d=2, alpha=1.0, x=[1.0, 0.0], dt=1e-3)
    result = montecarlo.estimate(experiment, 20_000, SeedSpec(master_seed=7))
    assert result.ks < 0.03
    assert result.reference == pytest.approx(0.5)


@pytest.mark.slow
def test_first_entrance_radius_follows_quadrature_law():
    experiment = FirstEntrancePositionExperiment(d=2, alpha=1.0, x=[2.0, 0.0], r=1.0)
    result = montecarlo.estimate(experiment, 20_000, SeedSpec(master_seed=3))
    assert result.ks < 0.02


@pytest.mark.slow
def test_reflected_second_moment():
    experiment = ReflectedStationaryExperiment(d=2, alpha=1.0, x=[1.0, 0.0], dt=1e-3, doublings=12)
    result = montecarlo.estimate(experiment, 2_000, SeedSpec(master_seed=1))
    assert result.reference == pytest.approx(2.0 / 3.0)
    assert abs(result.mean - 2.0 / 3.0) < 0.05


@pytest.mark.slow
def test_exit_time_occupation():
    params = StableParams(d=2, alpha=1.5)
    experiment = OccupationExperiment(d=2, alpha=1.5, x=[0.0, 0.0], r=1.0, a=0.0, b=1.0, dt=1e-3)
    result = montecarlo.estimate(experiment, 4_000, SeedSpec(master_seed=13))
    reference = identities.expected_exit_time(params, [0.0, 0.0], 1.0)
    assert result.reference == pytest.approx(reference, rel=1e-6)
    assert abs(result.mean - reference) < max(3.0 * result.stderr, 0.01 * reference)


@pytest.mark.slow
def test_survival_estimate_is_self_similar():
    # scaling space by 2 scales Cauchy time by 2, so dt scales with it
    small = SurvivalExperiment(d=2, alpha=1.0, x=[2.0, 0.0], r=1.0, dt=1e-2)
    large = SurvivalExperiment(d=2, alpha=1.0, x=[4.0, 0.0], r=2.0, dt=2e-2)
    first = montecarlo.estimate(small, 4_000, SeedSpec(master_seed=31))
    second = montecarlo.estimate(large, 4_000, SeedSpec(master_seed=32))
    z = abs(first.mean - second.mean) / math.hypot(first.stderr, second.stderr)
    assert z < 3.0


@pytest.mark.slow
def test_grid_bias_only_raises_survival():
    coarse = montecarlo.estimate(
        SurvivalExperiment(d=2, alpha=1.0, x=[2.0, 0.0], r=1.0, dt=1e-1), 4_000, SeedSpec(master_seed=33)
    )
    fine = montecarlo.estimate(
        SurvivalExperiment(d=2, alpha=1.0, x=[2.0, 0.0], r=1.0, dt=1e-2), 4_000, SeedSpec(master_seed=34)
    )
    # a coarser grid misses more entrances, never fewer
    assert coarse.mean > 2.0 / 3.0 - 3.0 * coarse.stderr
    assert coarse.mean > fine.mean - 3.0 * math.hypot(coarse.stderr, fine.stderr)
