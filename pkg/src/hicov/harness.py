"""Monte Carlo campaigns: empirical size and power with theoretical overlays.

A campaign evaluates a set of tests on a grid of covariance alternatives.
Every replication gets its own counter-based substream keyed by
(master seed, grid index, replication index), so all selected tests see the
same datasets (paired comparison) and the result is bit-identical no matter
how replications are scheduled across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import identity_tests, linalg, models, power
from .exceptions import NotPositiveDefiniteError

DEFAULT_REPS = 10_000


class CampaignError(RuntimeError):
    """A campaign replication failed; the campaign is aborted, not patched."""


@dataclass(frozen=True, eq=False)
class SimulationConfig:
    """Configuration of one Monte Carlo campaign."""

    n: int
    p: int
    alpha: float
    grid: tuple[models.CovarianceModel, ...]
    tests: tuple[str, ...]
    seed: int
    reps: int = DEFAULT_REPS
    law: models.InnovationLaw = field(default_factory=models.Gaussian)
    mean_mode: str = "zero"
    workers: int = 1

    def __post_init__(self):
        if self.reps < 100:
            raise ValueError(f"need at least 100 replications, got {self.reps}")
        if not (2 <= self.p < self.n):
            raise ValueError(f"campaign requires 2 <= p < n, got p={self.p}, n={self.n}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        tests = tuple(t for t in identity_tests.TEST_NAMES if t in tuple(self.tests))
        if not tests or len(tests) != len(set(self.tests)) or set(self.tests) - set(tests):
            raise ValueError(
                f"tests must be a non-empty subset of {identity_tests.TEST_NAMES}, "
                f"got {self.tests!r}"
            )
        object.__setattr__(self, "tests", tests)
        grid = tuple(self.grid)
        if not grid:
            raise ValueError("grid must contain at least one covariance model")
        for m in grid:
            if models.dimension_of(m) != self.p:
                raise ValueError(
                    f"grid model {models.grid_label(m)} has dimension "
                    f"{models.dimension_of(m)}, campaign has p={self.p}"
                )
        object.__setattr__(self, "grid", grid)
        if self.mean_mode not in ("zero", "random-fixed"):
            raise ValueError(f"mean_mode must be 'zero' or 'random-fixed', got {self.mean_mode!r}")
        if "cm" in tests and (
            self.mean_mode != "zero" or not isinstance(self.law, models.Gaussian)
        ):
            raise ValueError(
                "the cm test assumes zero-mean Gaussian data; use mean_mode='zero' "
                "and a Gaussian law, or drop it from tests"
            )
        if int(self.seed) < 0:
            raise ValueError("seed must be a non-negative integer")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass(frozen=True)
class PowerPoint:
    """Result of one (grid point, test) cell."""

    grid_param: str
    test: str
    rejections: int
    reps: int
    reject_rate: float
    mc_stderr: float
    theory_power: float | None


@dataclass(frozen=True, eq=False)
class PowerCurve:
    """All cells of a campaign, in (grid, test) order, plus the config."""

    config: SimulationConfig
    points: tuple[PowerPoint, ...]


def _chunk_counts(task) -> tuple[int, dict[str, int]]:
    """Evaluate replications [lo, hi) of one grid point; returns rejection counts.

    Module-level so worker processes can unpickle it.  Counts are integers,
    so summing chunk results is order-independent and the campaign output
    does not depend on the worker count.
    """
    (seed, grid_idx, label, lo, hi, n, p, alpha, law, tests, factor, mu) = task
    z = power.normal_quantile(1.0 - alpha)
    want_lrt = "lrt" in tests
    want_cm = "cm" in tests
    want_czz = "czz" in tests
    calib = power.null_calibration(n, p, models.delta_of(law)) if want_lrt else None
    scale_cm = identity_tests.cm_scale(n, p) if want_cm else None
    counts = dict.fromkeys(tests, 0)
    for rep in range(lo, hi):
        rng = models.substream(seed, grid_idx, rep)
        X = factor.apply(models.draw_innovations(law, rng, p, n))
        if mu is not None:
            X = X + mu[:, None]
        if want_lrt:
            try:
                raw = identity_tests.lrt_statistic(linalg.sample_covariance(X), n)
            except NotPositiveDefiniteError as exc:
                raise CampaignError(
                    f"singular sample covariance at grid point {label!r}, "
                    f"replication {rep}: {exc}"
                ) from exc
            if (p * raw - calib.mu_n) / calib.sigma_n > z:
                counts["lrt"] += 1
        if want_cm or want_czz:
            G = X.T @ X
            if want_cm and identity_tests._cm_from_gram(G, p) / scale_cm > z:
                counts["cm"] += 1
            if want_czz:
                Xc = X - X.mean(axis=1, keepdims=True)
                tr_s = float((Xc * Xc).sum()) / (n - 1)
                if (n / (2.0 * p)) * identity_tests._czz_from_gram(G, tr_s, p) > z:
                    counts["czz"] += 1
    return grid_idx, counts


def _theory_power(test: str, cov: models.CovarianceModel, cfg: SimulationConfig) -> float | None:
    if test == "lrt":
        return power.lrt_power(power.model_likelihood_distance(cov), cfg.p / cfg.n, cfg.alpha)
    if isinstance(cov, models.RankOneSpike):
        return power.quadratic_spiked_power(cov.h, cfg.alpha)
    return None


def run_campaign(cfg: SimulationConfig) -> PowerCurve:
    """Run the campaign and tally rejection rates per (grid point, test).

    Deterministic for a fixed config regardless of ``cfg.workers``.  A
    singular sample covariance aborts the whole campaign with a
    :class:`CampaignError` naming the grid point and replication: in the
    p < n regime it indicates a bug, not a statistical event.
    """
    mu = None
    if cfg.mean_mode == "random-fixed":
        mu = models.substream(cfg.seed, models.MEAN_STREAM_KEY).standard_normal(cfg.p)
    tasks = []
    chunk = max(1, math.ceil(cfg.reps / (cfg.workers * 4))) if cfg.workers > 1 else cfg.reps
    for gi, cov in enumerate(cfg.grid):
        factor = models.sqrt_factor(cov)
        label = models.grid_label(cov)
        for lo in range(0, cfg.reps, chunk):
            hi = min(lo + chunk, cfg.reps)
            tasks.append(
                (cfg.seed, gi, label, lo, hi, cfg.n, cfg.p, cfg.alpha,
                 cfg.law, cfg.tests, factor, mu)
            )

    totals = [dict.fromkeys(cfg.tests, 0) for _ in cfg.grid]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for gi, counts in pool.map(_chunk_counts, tasks):
                for t, c in counts.items():
                    totals[gi][t] += c
    else:
        for task in tasks:
            gi, counts = _chunk_counts(task)
            for t, c in counts.items():
                totals[gi][t] += c

    points = []
    for gi, cov in enumerate(cfg.grid):
        label = models.grid_label(cov)
        for t in cfg.tests:
            k = totals[gi][t]
            rate = k / cfg.reps
            points.append(
                PowerPoint(
                    grid_param=label,
                    test=t,
                    rejections=k,
                    reps=cfg.reps,
                    reject_rate=rate,
                    mc_stderr=math.sqrt(rate * (1.0 - rate) / cfg.reps),
                    theory_power=_theory_power(t, cov, cfg),
                )
            )
    return PowerCurve(config=cfg, points=tuple(points))


# ---------------------------------------------------------------------------
# Validation suites
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NullCltSummary:
    """Moments and KS distance of the standardized statistic under the null."""

    reps: int
    delta: float
    mean: float
    variance: float
    ks_distance: float
    mean_bound: float
    var_bound: float

    @property
    def mean_ok(self) -> bool:
        return abs(self.mean) <= self.mean_bound

    @property
    def var_ok(self) -> bool:
        return abs(self.variance - 1.0) <= self.var_bound

    @property
    def passed(self) -> bool:
        return self.mean_ok and self.var_ok


def validate_null_clt(
    n: int,
    p: int,
    law: models.InnovationLaw,
    reps: int,
    seed: int,
    delta: float | None = None,
) -> NullCltSummary:
    """Simulate the standardized statistic under the null and summarize it.

    ``delta`` defaults to the true excess kurtosis of ``law``; passing a
    wrong value on purpose turns this into a negative control for the
    kurtosis term of the centering.  Bounds are 4 MC standard errors for
    the mean (4/sqrt(reps)) and for the variance (4*sqrt(2/reps)).
    """
    from scipy import stats

    if delta is None:
        delta = models.delta_of(law)
    calib = power.null_calibration(n, p, delta)
    vals = np.empty(reps)
    for rep in range(reps):
        rng = models.substream(seed, rep)
        Y = models.draw_innovations(law, rng, p, n)
        raw = identity_tests.lrt_statistic(linalg.sample_covariance(Y), n)
        vals[rep] = (p * raw - calib.mu_n) / calib.sigma_n
    ks = float(stats.kstest(vals, "norm").statistic)
    return NullCltSummary(
        reps=reps,
        delta=delta,
        mean=float(vals.mean()),
        variance=float(vals.var(ddof=1)),
        ks_distance=ks,
        mean_bound=4.0 / math.sqrt(reps),
        var_bound=4.0 * math.sqrt(2.0 / reps),
    )


@dataclass(frozen=True)
class TraceRemainderSummary:
    """Monte Carlo check of the centering remainder tr((Sigma-I)B) - tr(Sigma-I).

    ``exact_variance`` is the closed-form value
    2/(n-1) tr((Sigma-I)^2) + delta/n * sum_i (Sigma-I)_ii^2 and ``bound``
    the cruder (2+delta)/(n-1) tr((Sigma-I)^2).
    """

    reps: int
    mean: float
    mean_stderr: float
    variance: float
    exact_variance: float
    bound: float
    var_mc_stderr: float

    @property
    def mean_ok(self) -> bool:
        return abs(self.mean) <= 4.0 * self.mean_stderr

    @property
    def var_within_exact(self) -> bool:
        return abs(self.variance - self.exact_variance) <= 4.0 * self.var_mc_stderr

    @property
    def var_below_bound(self) -> bool:
        return self.variance <= 1.1 * self.bound + 4.0 * self.var_mc_stderr

    @property
    def passed(self) -> bool:
        return self.mean_ok and self.var_within_exact and self.var_below_bound


def validate_trace_remainder(
    cov: models.CovarianceModel,
    n: int,
    law: models.InnovationLaw,
    reps: int,
    seed: int,
) -> TraceRemainderSummary:
    """Simulate the remainder over innovation sample covariances.

    For each replication, draws the (p, n) innovation block Y, forms its
    sample covariance B, and records tr(A B) - tr(A) with A = Sigma - I.
    The remainder is identically zero when Sigma is the identity.
    """
    A = models.materialize(cov) - np.eye(models.dimension_of(cov))
    p = A.shape[0]
    delta = models.delta_of(law)
    tr_a = float(np.trace(A))
    tr_a2 = float((A * A).sum())
    hadamard = float((np.diagonal(A) ** 2).sum())
    exact_var = 2.0 / (n - 1) * tr_a2 + delta / n * hadamard
    bound = (2.0 + delta) / (n - 1) * tr_a2

    vals = np.empty(reps)
    for rep in range(reps):
        rng = models.substream(seed, rep)
        Y = models.draw_innovations(law, rng, p, n)
        Yc = Y - Y.mean(axis=1, keepdims=True)
        vals[rep] = float(((A @ Yc) * Yc).sum()) / (n - 1) - tr_a
    return TraceRemainderSummary(
        reps=reps,
        mean=float(vals.mean()),
        mean_stderr=float(vals.std(ddof=1)) / math.sqrt(reps) if reps > 1 else 0.0,
        variance=float(vals.var(ddof=1)),
        exact_variance=exact_var,
        bound=bound,
        var_mc_stderr=exact_var * math.sqrt(2.0 / max(reps - 1, 1)),
    )


@dataclass(frozen=True)
class PowerTheoryRow:
    """One grid point of an empirical-versus-predicted power comparison."""

    grid_param: str
    empirical: float
    mc_stderr: float
    predicted: float
    gap: float


def power_vs_theory(cfg: SimulationConfig) -> list[PowerTheoryRow]:
    """Empirical power of the likelihood-ratio test against its prediction.

    The prediction at each grid point is the asymptotic power evaluated at
    the model's likelihood distance.  Requires "lrt" in ``cfg.tests``.
    """
    if "lrt" not in cfg.tests:
        raise ValueError("power_vs_theory needs 'lrt' among the configured tests")
    curve = run_campaign(cfg)
    rows = []
    for pt in curve.points:
        if pt.test != "lrt":
            continue
        rows.append(
            PowerTheoryRow(
                grid_param=pt.grid_param,
                empirical=pt.reject_rate,
                mc_stderr=pt.mc_stderr,
                predicted=pt.theory_power,
                gap=pt.reject_rate - pt.theory_power,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Deterministic scalar-inequality and oracle sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InequalityReport:
    """Sampled check of (x-1)^2 <= 2 max(1, M) (x - 1 - log x) on each branch."""

    samples_per_branch: int
    violations: dict[str, int]
    worst_margin: float

    @property
    def passed(self) -> bool:
        return all(v == 0 for v in self.violations.values())


def validate_log_inequality(
    samples_per_branch: int,
    seed: int,
    uppers: tuple[float, ...] = (2.0, 10.0, 100.0),
) -> InequalityReport:
    """Sample the two branches of the logarithmic gap inequality.

    Branch one draws x uniformly from (0, 1] and checks
    (x-1)^2 <= 2 (x - 1 - log x); branch two draws x from (1, M) for each
    M in ``uppers`` and checks (x-1)^2 <= 2M (x - 1 - log x).  Comparisons
    allow a 1e-12 relative slack for floating-point noise near x = 1.
    """
    rng = models.substream(seed)
    violations: dict[str, int] = {}
    worst = math.inf

    def check(x: np.ndarray, factor: float, label: str):
        nonlocal worst
        lhs = (x - 1.0) ** 2
        rhs = factor * (x - 1.0 - np.log(x))
        slack = 1e-12 * np.maximum(1.0, lhs)
        bad = lhs > rhs + slack
        violations[label] = int(bad.sum())
        worst = min(worst, float((rhs - lhs).min()))

    check(1.0 - rng.random(samples_per_branch), 2.0, "x in (0,1]")
    for M in uppers:
        x = 1.0 + (M - 1.0) * rng.random(samples_per_branch)
        check(x, 2.0 * M, f"x in (1,{M:g})")
    return InequalityReport(
        samples_per_branch=samples_per_branch,
        violations=violations,
        worst_margin=worst,
    )


@dataclass(frozen=True)
class OracleSweepReport:
    """Worst relative gap between the fast and brute-force quadratic statistics."""

    datasets: int
    max_rel_gap: float

    @property
    def passed(self) -> bool:
        return self.max_rel_gap <= 1e-9


def czz_oracle_sweep(
    seed: int,
    datasets_per_shape: int = 5,
    n_range: tuple[int, int] = (4, 8),
    p_range: tuple[int, int] = (1, 4),
) -> OracleSweepReport:
    """Cross-check the efficient statistic against the brute-force oracle.

    Sweeps every (n, p) shape in the given inclusive ranges with
    ``datasets_per_shape`` random datasets each (a mix of integer-valued
    and heavy-tailed continuous data).
    """
    rng = models.substream(seed)
    count = 0
    worst = 0.0
    for n in range(n_range[0], n_range[1] + 1):
        for p in range(p_range[0], p_range[1] + 1):
            for k in range(datasets_per_shape):
                if k % 2 == 0:
                    X = rng.integers(-3, 4, size=(p, n)).astype(float)
                else:
                    X = rng.standard_t(df=3, size=(p, n)) * 2.0
                fast = identity_tests.czz_statistic(X)
                brute = identity_tests.czz_statistic_bruteforce(X)
                gap = abs(fast - brute) / max(abs(brute), 1e-12)
                worst = max(worst, gap)
                count += 1
    return OracleSweepReport(datasets=count, max_rel_gap=worst)


# ---------------------------------------------------------------------------
# Campaign presets
# ---------------------------------------------------------------------------

RHO_GRID = (0.01, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0)

PRESET_NAMES = ("figure1", "figure2", "smoke")


def preset_configs(
    name: str,
    seed: int,
    reps: int | None = None,
    workers: int = 1,
) -> list[SimulationConfig]:
    """Campaign configurations for the bundled presets.

    * figure1 - Gaussian data with known zero mean, lrt + cm, rho grid,
      at n=200 for p=50 and p=100.
    * figure2 - gamma innovations with a random fixed mean, lrt + czz,
      same grid and sizes.
    * smoke   - 100-replication single-size run of all three tests.
    """
    if name == "figure1":
        return [
            SimulationConfig(
                n=200, p=p, alpha=0.05, reps=reps or DEFAULT_REPS, seed=seed,
                law=models.Gaussian(), mean_mode="zero", tests=("lrt", "cm"),
                grid=tuple(models.DiagonalSpike(p=p, rho=r) for r in RHO_GRID),
                workers=workers,
            )
            for p in (50, 100)
        ]
    if name == "figure2":
        return [
            SimulationConfig(
                n=200, p=p, alpha=0.05, reps=reps or DEFAULT_REPS, seed=seed,
                law=models.StandardizedGamma(4, 0.5), mean_mode="random-fixed",
                tests=("lrt", "czz"),
                grid=tuple(models.DiagonalSpike(p=p, rho=r) for r in RHO_GRID),
                workers=workers,
            )
            for p in (50, 100)
        ]
    if name == "smoke":
        return [
            SimulationConfig(
                n=200, p=50, alpha=0.05, reps=reps or 100, seed=seed,
                law=models.Gaussian(), mean_mode="zero", tests=("lrt", "cm", "czz"),
                grid=tuple(models.DiagonalSpike(p=50, rho=r) for r in (0.25, 1.0, 4.0)),
                workers=workers,
            )
        ]
    raise ValueError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")
