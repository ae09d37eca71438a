"""Monte Carlo verification of the closed-form laws.

Increments are exact in law: an isotropic alpha-stable step is a Brownian
step run for an independent (alpha/2)-stable subordinator time. Paths are
Euler walks on a time grid, so running minima are only observed at grid
times and entrance probabilities are biased low; the bias is budgeted by the
acceptance tolerances, not corrected.
"""

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from typing import Annotated, ClassVar, Literal, Optional, Union

import numpy as np
import scipy.stats
from pydantic import BaseModel, ConfigDict, Field, field_validator

from stablefluct import identities
from stablefluct.model import (
    DomainError,
    Point,
    StableFluctError,
    StableParams,
    as_point,
    require_radius,
    validate,
)
from stablefluct.numerics import integrate_1d

logger = logging.getLogger("stablefluct")

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

# Radius multiple standing in for "never returns"; transience keeps the
# probability of coming back from there below 1e-3 for every tested (d, alpha).
ESCAPE_FACTOR = 1e3
ENTRANCE_TABLE_SIZE = 4096
ENTRANCE_W_MIN = 1e-12
REJECTION_BUDGET = 1_000_000
MAX_STEPS = 5_000_000
KS_NODES = 257

Clock = Literal["real", "lamperti"]
ExitReason = Literal["hit_inner", "hit_outer", "horizon", "truncated"]
_REASONS: tuple[ExitReason, ...] = ("horizon", "hit_inner", "hit_outer", "truncated")
TRUNCATED = 3


class RejectionBudgetExceeded(StableFluctError):
    """Error raised when the angular rejection sampler stops accepting.

    Attributes:
      accepted: draws accepted before the budget ran out.
      attempts: proposals made.
    """

    def __init__(self, accepted: int, attempts: int):
        super().__init__(
            f"rejection sampler accepted {accepted} draws in {attempts} proposals before exhausting its budget"
        )
        self.accepted = accepted
        self.attempts = attempts

    def __reduce__(self):
        return type(self), (self.accepted, self.attempts)


class TruncatedPaths(StableFluctError):
    """Error raised when paths that should reach a boundary run out of steps first.

    Attributes:
      count: paths still unresolved.
      steps: step limit they ran into.
    """

    def __init__(self, count: int, steps: int):
        super().__init__(f"{count} paths were still running after {steps} steps; raise dt or the step limit")
        self.count = count
        self.steps = steps

    def __reduce__(self):
        return type(self), (self.count, self.steps)


def splitmix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SeedSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    master_seed: int = Field(0, description="64-bit master seed")
    worker_index: int = Field(0, description="Index of the worker stream")

    @field_validator("worker_index")
    @classmethod
    def _nonnegative(cls, v: int) -> int:
        if v < 0:
            raise ValueError("worker_index must be nonnegative")
        return v

    def stream_seed(self) -> int:
        return splitmix64((self.master_seed & MASK64) + self.worker_index * GOLDEN_GAMMA)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.stream_seed())

    def for_worker(self, worker_index: int) -> "SeedSpec":
        return SeedSpec(master_seed=self.master_seed, worker_index=worker_index)


class PathRecord(BaseModel):
    """Summary of one simulated path."""

    min_radius: float = Field(..., description="Running radial minimum on the grid")
    argmin_point: list[float] = Field(..., description="Grid point attaining the minimum")
    max_radius: float = Field(..., description="Running radial maximum on the grid")
    first_passage_time: Optional[float] = Field(None, description="Time of the boundary hit")
    first_passage_position: Optional[list[float]] = Field(None, description="Position at the boundary hit")
    exit_reason: ExitReason = Field(..., description="Why the path stopped")
    end_time: float = Field(..., description="Time the path stopped")
    end_position: list[float] = Field(..., description="Position the path stopped at")


class PathBatch(BaseModel):
    """Arrays for n paths simulated together; row i is path i."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    min_radius: np.ndarray
    argmin_point: np.ndarray
    max_radius: np.ndarray
    first_passage_time: np.ndarray
    first_passage_position: np.ndarray
    exit_code: np.ndarray
    end_time: np.ndarray
    end_position: np.ndarray
    occupation: np.ndarray

    def record(self, i: int) -> PathRecord:
        hit = not math.isnan(self.first_passage_time[i])
        return PathRecord(
            min_radius=float(self.min_radius[i]),
            argmin_point=self.argmin_point[i].tolist(),
            max_radius=float(self.max_radius[i]),
            first_passage_time=float(self.first_passage_time[i]) if hit else None,
            first_passage_position=self.first_passage_position[i].tolist() if hit else None,
            exit_reason=_REASONS[int(self.exit_code[i])],
            end_time=float(self.end_time[i]),
            end_position=self.end_position[i].tolist(),
        )


class MonteCarloEstimate(BaseModel):
    mean: float = Field(..., description="Sample mean")
    stderr: float = Field(..., description="Sample standard deviation / sqrt(n)")
    n: int = Field(..., description="Sample count")
    seed: SeedSpec = Field(..., description="Master seed the worker streams derive from")
    workers: int = Field(1, description="Number of worker streams")
    reference: Optional[float] = Field(None, description="Closed-form value the estimate targets")
    ks: Optional[float] = Field(None, description="Kolmogorov-Smirnov distance to the reference law")


def sample_one_sided_stable(
    beta: float, rng: np.random.Generator, size: int | None = None
) -> float | np.ndarray:
    """Positive stable draws with E[exp(-lam S)] = exp(-lam^beta), Kanter's representation."""
    if not 0.0 < beta < 1.0:
        raise DomainError(f"require 0 < beta < 1, got beta={beta}")
    u = rng.uniform(0.0, math.pi, size)
    e = rng.standard_exponential(size)
    a = (
        np.sin(beta * u) ** beta * np.sin((1.0 - beta) * u) ** (1.0 - beta) / np.sin(u)
    ) ** (1.0 / (1.0 - beta))
    s = (a / e) ** ((1.0 - beta) / beta)
    return float(s) if size is None else s


def sample_stable_increment(
    params: StableParams, dt: float | np.ndarray, rng: np.random.Generator, size: int | None = None
) -> np.ndarray:
    """Isotropic increments with characteristic function exp(-dt |theta|^alpha).

    ``dt`` may be an array of per-row time steps when ``size`` is given.
    """
    validate(params)
    a = params.alpha
    count = 1 if size is None else size
    s = sample_one_sided_stable(a / 2.0, rng, count) * np.asarray(dt, dtype=np.float64) ** (2.0 / a)
    z = rng.standard_normal((count, params.d))
    out = np.sqrt(2.0 * s)[:, None] * z
    return out[0] if size is None else out


def simulate_paths(
    params: StableParams,
    x0: Point,
    dt: float,
    inner_r: float,
    outer_R: float | None,
    horizon: float,
    rng: np.random.Generator,
    n: int = 1,
    clock: Clock = "real",
    shell: tuple[float, float] | None = None,
    max_steps: int = MAX_STEPS,
) -> PathBatch:
    """Euler walks with exact increments, stopped at the first grid hit of a boundary.

    ``clock="real"`` steps on the grid {k dt}. ``clock="lamperti"`` uses the
    step dt (|X|/|x0|)^alpha, a uniform grid in the Lamperti time of the
    radial part. The horizon is real time in both cases and the last step is
    shortened to land on it. ``shell`` accumulates time spent in a <= |X| < b.
    Paths still running after ``max_steps`` steps get exit code 3 (truncated).
    """
    validate(params)
    d, a = params.d, params.alpha
    x0 = as_point(x0, d)
    r0 = float(np.linalg.norm(x0))
    if not dt > 0:
        raise DomainError("require dt > 0")
    if not r0 > inner_r:
        raise DomainError("require |x0| > inner_r")
    if clock == "lamperti" and r0 == 0.0:
        raise DomainError("require |x0| > 0 for the Lamperti clock")
    if clock not in ("real", "lamperti"):
        raise DomainError(f"unknown clock {clock!r}")

    x = np.tile(x0, (n, 1))
    t = np.zeros(n)
    radius = np.full(n, r0)
    min_radius = radius.copy()
    argmin = x.copy()
    max_radius = radius.copy()
    fp_time = np.full(n, np.nan)
    fp_pos = np.full((n, d), np.nan)
    exit_code = np.zeros(n, dtype=np.int8)
    occupation = np.zeros(n)
    active = np.flatnonzero(t < horizon) if horizon > 0 else np.empty(0, dtype=np.int64)

    steps = 0
    while active.size:
        if steps >= max_steps:
            logger.warning(f"simulate_paths stopped {active.size} paths after {max_steps} steps")
            exit_code[active] = TRUNCATED
            break
        steps += 1
        step = np.full(active.size, dt)
        if clock == "lamperti":
            step = dt * (radius[active] / r0) ** a
        step = np.minimum(step, horizon - t[active])
        if shell is not None:
            # closed at a so that a start at the origin counts for a = 0
            inside = (radius[active] >= shell[0]) & (radius[active] < shell[1])
            occupation[active] += np.where(inside, step, 0.0)

        x[active] += sample_stable_increment(params, step, rng, active.size)
        t[active] += step
        rad = np.linalg.norm(x[active], axis=1)
        radius[active] = rad

        lower = rad < min_radius[active]
        idx = active[lower]
        min_radius[idx] = rad[lower]
        argmin[idx] = x[idx]
        max_radius[active] = np.maximum(max_radius[active], rad)

        hit_inner = rad < inner_r
        hit_outer = rad > outer_R if outer_R is not None else np.zeros(active.size, dtype=bool)
        done_horizon = t[active] >= horizon
        for mask, code in ((hit_inner, 1), (hit_outer & ~hit_inner, 2)):
            idx = active[mask]
            exit_code[idx] = code
            fp_time[idx] = t[idx]
            fp_pos[idx] = x[idx]
        active = active[~(hit_inner | hit_outer | done_horizon)]

    return PathBatch(
        min_radius=min_radius,
        argmin_point=argmin,
        max_radius=max_radius,
        first_passage_time=fp_time,
        first_passage_position=fp_pos,
        exit_code=exit_code,
        end_time=t,
        end_position=x,
        occupation=occupation,
    )


def _resolved_paths(*args, **kwargs) -> PathBatch:
    """``simulate_paths`` for the estimators, which cannot use unresolved paths."""
    max_steps = kwargs.pop("max_steps", MAX_STEPS)
    batch = simulate_paths(*args, max_steps=max_steps, **kwargs)
    truncated = int(np.count_nonzero(batch.exit_code == TRUNCATED))
    if truncated:
        raise TruncatedPaths(truncated, max_steps)
    return batch


def simulate_path(
    params: StableParams,
    x0: Point,
    dt: float,
    inner_r: float,
    outer_R: float | None,
    horizon: float,
    seeds: SeedSpec,
    clock: Clock = "real",
) -> PathRecord:
    """Single-path form of ``simulate_paths`` driven by its own seed stream."""
    batch = simulate_paths(params, x0, dt, inner_r, outer_R, horizon, seeds.rng(), 1, clock)
    return batch.record(0)


@lru_cache(maxsize=32)
def _entrance_radial_table(d: int, alpha: float, q: float) -> tuple[np.ndarray, np.ndarray, float]:
    """Radial inverse-CDF table for entrance into the unit ball from |x| = q.

    Nodes are log-spaced in w = 1 - rho^2. Returns (log w nodes, unnormalised
    cumulative mass at the nodes, C0 with density ~ C0 w^{-alpha/2} as w -> 0).
    """
    logger.info(f"building entrance radial table for d={d}, alpha={alpha}, |x|/r={q}")
    log_w = np.linspace(math.log(ENTRANCE_W_MIN), 0.0, ENTRANCE_TABLE_SIZE)
    w = np.exp(log_w)
    rho2 = 1.0 - w
    # sphere average of |x - rho phi|^{-d} is q^{2-d} / (q^2 - rho^2)
    density = 0.5 * rho2 ** ((d - 2) / 2.0) * w ** (-alpha / 2.0) / (q * q - rho2)
    c0 = 0.5 / (q * q - 1.0)
    tail = c0 * ENTRANCE_W_MIN ** (1.0 - alpha / 2.0) / (1.0 - alpha / 2.0)
    integrand = density * w
    steps = 0.5 * (integrand[1:] + integrand[:-1]) * np.diff(log_w)
    cumulative = tail + np.concatenate([[0.0], np.cumsum(steps)])
    return log_w, cumulative, c0


def _sample_entrance_radius(
    params: StableParams, q: float, rng: np.random.Generator, size: int
) -> np.ndarray:
    log_w, cumulative, c0 = _entrance_radial_table(params.d, params.alpha, q)
    total = cumulative[-1]
    target = rng.uniform(0.0, total, size)
    tail = cumulative[0]
    k = 1.0 - params.alpha / 2.0
    w = np.where(
        target < tail,
        (k * np.maximum(target, 1e-300) / c0) ** (1.0 / k),
        np.exp(np.interp(target, cumulative, log_w)),
    )
    return np.sqrt(np.clip(1.0 - w, 0.0, 1.0))


def _sample_entrance_direction(
    params: StableParams,
    x_unit: Point,
    q: float,
    rho: np.ndarray,
    rng: np.random.Generator,
    budget: int = REJECTION_BUDGET,
) -> np.ndarray:
    """Directions phi with density proportional to |x - rho phi|^{-d}, by rejection.

    Every pending draw gets one proposal per round, so ``budget`` bounds the
    proposals spent on any single draw whatever the batch size.
    """
    d = params.d
    out = np.empty((rho.size, d))
    pending = np.arange(rho.size)
    attempts = 0
    rounds = 0
    while pending.size:
        if rounds >= budget:
            raise RejectionBudgetExceeded(rho.size - pending.size, attempts)
        rounds += 1
        g = rng.standard_normal((pending.size, d))
        phi = g / np.linalg.norm(g, axis=1)[:, None]
        r = rho[pending]
        dist = np.linalg.norm(q * x_unit[None, :] - r[:, None] * phi, axis=1)
        accept = rng.uniform(size=pending.size) < ((q - r) / dist) ** d
        attempts += pending.size
        out[pending[accept]] = phi[accept]
        pending = pending[~accept]
    return out


def sample_first_entrance_batch(
    params: StableParams, x: Point, r: float, rng: np.random.Generator, n: int
) -> np.ndarray:
    """n exact draws of X at first entrance into the r-ball; NaN rows mean it never enters."""
    validate(params)
    r = require_radius(r)
    x = as_point(x, params.d)
    nx = float(np.linalg.norm(x))
    if not nx > r:
        raise DomainError("require |x| > r")
    q = nx / r
    survival = identities.survival_probability(params, x, r)
    enters = rng.uniform(size=n) >= survival
    out = np.full((n, params.d), np.nan)
    m = int(enters.sum())
    if m:
        rho = _sample_entrance_radius(params, q, rng, m)
        phi = _sample_entrance_direction(params, x / nx, q, rho, rng)
        out[enters] = r * rho[:, None] * phi
    return out


def sample_first_entrance(
    params: StableParams, x: Point, r: float, rng: np.random.Generator
) -> Point | None:
    """One exact draw of X at first entrance into the r-ball, or None if it never enters."""
    y = sample_first_entrance_batch(params, x, r, rng, 1)[0]
    return None if np.isnan(y[0]) else y


def ks_statistic(samples: np.ndarray, cdf) -> float:
    return float(scipy.stats.kstest(samples, cdf).statistic)


def _format_point(x: list[float]) -> str:
    return ",".join(f"{v:.9g}" for v in x)


class ExperimentBase(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    uses_dt: ClassVar[bool] = True

    d: int = Field(..., description="Dimension")
    alpha: float = Field(..., description="Stability index")
    x: list[float] = Field(..., description="Starting point")
    dt: float = Field(1e-3, description="Euler time step")

    @property
    def params(self) -> StableParams:
        return StableParams(d=self.d, alpha=self.alpha)

    def check(self) -> None:
        validate(self.params)
        as_point(self.x, self.d)
        if not self.dt > 0:
            raise DomainError("require dt > 0")

    def param_items(self) -> list[tuple[str, object]]:
        out: list[tuple[str, object]] = [("x", _format_point(self.x))]
        for key in type(self).model_fields:
            if key in ("kind", "d", "alpha", "x") or (key == "dt" and not self.uses_dt):
                continue
            out.append((key, getattr(self, key)))
        return out

    def reference(self) -> float:
        raise NotImplementedError()

    def run(self, rng: np.random.Generator, n: int) -> tuple[np.ndarray, Optional[np.ndarray]]:
        """Draw n samples of the estimated quantity plus optional samples for a KS test."""
        raise NotImplementedError()

    def ks_cdf(self, samples: np.ndarray):
        return None

    @property
    def x0(self) -> Point:
        return as_point(self.x, self.d)


class SurvivalExperiment(ExperimentBase):
    kind: Literal["survival"] = "survival"
    r: float = Field(1.0, description="Radius of the ball that must never be entered")
    clock: Clock = Field("lamperti", description="Time grid")

    def check(self) -> None:
        super().check()
        require_radius(self.r)
        if not np.linalg.norm(self.x0) > self.r:
            raise DomainError("require |x| > r")

    def reference(self) -> float:
        return identities.survival_probability(self.params, self.x0, self.r)

    def run(self, rng, n):
        escape = ESCAPE_FACTOR * float(np.linalg.norm(self.x0))
        batch = _resolved_paths(
            self.params, self.x0, self.dt, self.r, escape, math.inf, rng, n, self.clock
        )
        return (batch.exit_code == 2).astype(np.float64), None


class ClosestReachRadialExperiment(ExperimentBase):
    kind: Literal["closest_reach_radial"] = "closest_reach_radial"
    clock: Clock = Field("lamperti", description="Time grid")

    def check(self) -> None:
        super().check()
        if not np.linalg.norm(self.x0) > 0:
            raise DomainError("require |x| > 0")

    def _law(self):
        return scipy.stats.beta((self.d - self.alpha) / 2.0, self.alpha / 2.0)

    def reference(self) -> float:
        return float(self._law().mean())

    def run(self, rng, n):
        r0 = float(np.linalg.norm(self.x0))
        batch = _resolved_paths(
            self.params, self.x0, self.dt, 0.0, ESCAPE_FACTOR * r0, math.inf, rng, n, self.clock
        )
        ratio2 = (batch.min_radius / r0) ** 2
        return ratio2, ratio2

    def ks_cdf(self, samples):
        return self._law().cdf


class FirstEntrancePositionExperiment(ExperimentBase):
    kind: Literal["first_entrance_position"] = "first_entrance_position"
    uses_dt: ClassVar[bool] = False
    r: float = Field(1.0, description="Radius of the target ball")

    def check(self) -> None:
        super().check()
        require_radius(self.r)
        if not np.linalg.norm(self.x0) > self.r:
            raise DomainError("require |x| > r")

    def reference(self) -> float:
        return 1.0 - identities.survival_probability(self.params, self.x0, self.r)

    def run(self, rng, n):
        y = sample_first_entrance_batch(self.params, self.x0, self.r, rng, n)
        entered = ~np.isnan(y[:, 0])
        return entered.astype(np.float64), np.linalg.norm(y[entered], axis=1)

    def ks_cdf(self, samples):
        """Conditional radial CDF, integrated between sample quantiles and interpolated."""
        params, x0, r = self.params, self.x0, self.r
        inner = np.quantile(samples, np.linspace(0.0, 1.0, KS_NODES))
        nodes = np.unique(np.concatenate([[0.0], inner[(inner > 0) & (inner < r)], [r]]))
        mass = 1.0 - identities.survival_probability(params, x0, r)
        increments = [0.0]
        for lower, upper in zip(nodes[:-1], nodes[1:]):
            piece, _ = integrate_1d(
                lambda s: identities.first_entrance_radial_density(params, x0, r, s), lower, upper
            )
            increments.append(piece)
        values = np.minimum(np.cumsum(increments) / mass, 1.0)
        return lambda v: np.interp(v, nodes, values)


class ReflectedStationaryExperiment(ExperimentBase):
    kind: Literal["reflected_stationary"] = "reflected_stationary"
    doublings: int = Field(15, description="Radial maximum doublings the horizon allows for")
    gamma: float = Field(1.0, description="Moment order of |X_T/M_T|^2")

    def check(self) -> None:
        super().check()
        if not np.linalg.norm(self.x0) > 0:
            raise DomainError("require |x| > 0")

    def horizon(self) -> float:
        return (2.0**self.doublings * float(np.linalg.norm(self.x0))) ** self.alpha

    def reference(self) -> float:
        return identities.stationary_radial_moment(self.params, self.gamma)

    def run(self, rng, n):
        batch = _resolved_paths(
            self.params, self.x0, self.dt, 0.0, None, self.horizon(), rng, n, "lamperti"
        )
        ratio = np.linalg.norm(batch.end_position, axis=1) / batch.max_radius
        return ratio ** (2.0 * self.gamma), None


class OccupationExperiment(ExperimentBase):
    kind: Literal["occupation"] = "occupation"
    r: float = Field(1.0, description="Radius of the ball the path exits")
    a: float = Field(0.0, description="Inner radius of the shell")
    b: float = Field(1.0, description="Outer radius of the shell")

    def check(self) -> None:
        super().check()
        require_radius(self.r)
        if not np.linalg.norm(self.x0) < self.r:
            raise DomainError("require |x| < r")
        if not 0.0 <= self.a < self.b <= self.r:
            raise DomainError("require 0 <= a < b <= r")

    def reference(self) -> float:
        return identities.shell_occupation(self.params, self.x0, self.r, self.a, self.b)

    def run(self, rng, n):
        batch = _resolved_paths(
            self.params, self.x0, self.dt, -1.0, self.r, math.inf, rng, n, "real", (self.a, self.b)
        )
        return batch.occupation, None


Experiment = Annotated[
    Union[
        SurvivalExperiment,
        ClosestReachRadialExperiment,
        FirstEntrancePositionExperiment,
        ReflectedStationaryExperiment,
        OccupationExperiment,
    ],
    Field(discriminator="kind"),
]


def _run_worker(experiment: ExperimentBase, size: int, seeds: SeedSpec):
    values, ks_samples = experiment.run(seeds.rng(), size)
    count = values.size
    mean = float(values.mean()) if count else 0.0
    m2 = float(((values - mean) ** 2).sum()) if count else 0.0
    return count, mean, m2, ks_samples


def _merge(a: tuple[int, float, float], b: tuple[int, float, float]) -> tuple[int, float, float]:
    """Chan's pairwise combination of (count, mean, M2)."""
    na, ma, m2a = a
    nb, mb, m2b = b
    n = na + nb
    if n == 0:
        return 0, 0.0, 0.0
    delta = mb - ma
    return n, ma + delta * nb / n, m2a + m2b + delta * delta * na * nb / n


def partition(n: int, workers: int) -> list[int]:
    """Fixed split of n samples over the workers, the first n % workers getting one more."""
    base, extra = divmod(n, workers)
    return [base + (1 if i < extra else 0) for i in range(workers)]


def estimate(
    experiment: ExperimentBase, n: int, seeds: SeedSpec, workers: int = 1
) -> MonteCarloEstimate:
    """Run an experiment over independent worker streams and merge the results.

    The partition and the merge order depend only on (n, workers), so the
    estimate is reproducible bit for bit for a fixed master seed.
    """
    if n < 100:
        raise DomainError("require n >= 100")
    if workers < 1:
        raise DomainError("require workers >= 1")
    experiment.check()
    sizes = partition(n, workers)
    streams = [seeds.for_worker(i) for i in range(workers)]
    started = time.perf_counter()
    logger.info(f"running {experiment.kind} with n={n} over {workers} worker(s)")

    if workers == 1:
        results = [_run_worker(experiment, sizes[0], streams[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_worker, [experiment] * workers, sizes, streams))

    merged = (0, 0.0, 0.0)
    ks_parts = []
    for count, mean, m2, ks_samples in results:
        merged = _merge(merged, (count, mean, m2))
        if ks_samples is not None:
            ks_parts.append(ks_samples)
    count, mean, m2 = merged
    stderr = math.sqrt(m2 / (count - 1)) / math.sqrt(count)

    ks = None
    if ks_parts:
        samples = np.concatenate(ks_parts)
        if samples.size:
            ks = ks_statistic(samples, experiment.ks_cdf(samples))

    logger.info(f"{experiment.kind} finished in {time.perf_counter() - started:.2f}s")
    return MonteCarloEstimate(
        mean=mean,
        stderr=stderr,
        n=count,
        seed=seeds.for_worker(0),
        workers=workers,
        reference=experiment.reference(),
        ks=ks,
    )
