"""Covariance alternatives, innovation laws, and the dataset generator.

Data are generated from the location-scale model ``X_i = R Y_i + mu`` where
``R`` is a square root of the population covariance and the entries of the
``(p, n)`` innovation matrix ``Y`` are i.i.d. with zero mean, unit variance
and known excess kurtosis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .exceptions import NotPositiveDefiniteError

#: spawn key arity-1 constant reserved for the campaign-level mean draw,
#: so it can never collide with the (grid, replication) data streams.
MEAN_STREAM_KEY = 0x00BEEF


# ---------------------------------------------------------------------------
# Covariance models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Identity:
    """The p-dimensional identity covariance."""

    p: int

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("dimension p must be at least 1")


@dataclass(frozen=True)
class DiagonalSpike:
    """diag(rho, 1, ..., 1): one variance moved away from 1."""

    p: int
    rho: float

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("dimension p must be at least 1")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")


@dataclass(frozen=True, eq=False)
class RankOneSpike:
    """I + h * sqrt(p / n_ref) * v v' for a unit vector v.

    The sqrt(p / n_ref) factor ties the perturbation size to a reference
    sample size, so the model is self-contained.  ``v`` defaults to the
    first coordinate vector; any unit vector is equivalent for the tests
    in this package (rotation invariance is property-tested).
    """

    p: int
    n_ref: int
    h: float
    v: np.ndarray | None = None

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("dimension p must be at least 1")
        if self.n_ref < 1:
            raise ValueError("reference sample size n_ref must be at least 1")
        if self.v is None:
            v = np.zeros(self.p)
            v[0] = 1.0
        else:
            v = np.asarray(self.v, dtype=float).reshape(-1)
            if v.shape[0] != self.p:
                raise ValueError(f"v must have length p={self.p}, got {v.shape[0]}")
            if abs(np.linalg.norm(v) - 1.0) > 1e-12:
                raise ValueError("v must be a unit vector (||v|| = 1 within 1e-12)")
        object.__setattr__(self, "v", v)
        if 1.0 + self.amplitude <= 0.0:
            raise NotPositiveDefiniteError(
                f"rank-one spike would make the covariance singular: "
                f"1 + h*sqrt(p/n_ref) = {1.0 + self.amplitude:.6g} <= 0"
            )

    @property
    def amplitude(self) -> float:
        """The scalar h * sqrt(p / n_ref) multiplying v v'."""
        return self.h * math.sqrt(self.p / self.n_ref)


@dataclass(frozen=True, eq=False)
class Explicit:
    """Covariance given as an explicit SPD matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        M = linalg.symmetrize(self.matrix)
        linalg.logdet_spd(M)  # raises NotPositiveDefiniteError unless SPD
        object.__setattr__(self, "matrix", M)

    @property
    def p(self) -> int:
        return self.matrix.shape[0]


CovarianceModel = Identity | DiagonalSpike | RankOneSpike | Explicit


def materialize(cov: CovarianceModel) -> np.ndarray:
    """Return the explicit (p, p) covariance matrix of a model."""
    if isinstance(cov, Identity):
        return np.eye(cov.p)
    if isinstance(cov, DiagonalSpike):
        d = np.ones(cov.p)
        d[0] = cov.rho
        return np.diag(d)
    if isinstance(cov, RankOneSpike):
        return np.eye(cov.p) + cov.amplitude * np.outer(cov.v, cov.v)
    if isinstance(cov, Explicit):
        return cov.matrix.copy()
    raise TypeError(f"not a covariance model: {cov!r}")


def grid_label(cov: CovarianceModel) -> str:
    """Short per-grid-point descriptor used in reports (rho, h, or a name)."""
    if isinstance(cov, Identity):
        return "identity"
    if isinstance(cov, DiagonalSpike):
        return f"{cov.rho:g}"
    if isinstance(cov, RankOneSpike):
        return f"{cov.h:g}"
    if isinstance(cov, Explicit):
        return "explicit"
    raise TypeError(f"not a covariance model: {cov!r}")


def grid_value(cov: CovarianceModel) -> float | None:
    """Numeric grid coordinate for plotting, when one exists."""
    if isinstance(cov, DiagonalSpike):
        return float(cov.rho)
    if isinstance(cov, RankOneSpike):
        return float(cov.h)
    return None


# ---------------------------------------------------------------------------
# Innovation laws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Gaussian:
    """Standard normal innovation entries; excess kurtosis 0."""


@dataclass(frozen=True)
class StandardizedGamma:
    """Centered gamma innovations Y = G - shape*scale, G ~ Gamma(shape, scale).

    ``shape * scale**2`` must equal 1 so that the entries have unit
    variance; the default ``scale = 1/sqrt(shape)`` enforces this.  The
    excess kurtosis is ``6 / shape``.  The shape must be a (small) integer:
    draws are formed as a sum of ``shape`` exponentials, which is exact and
    free of rejection loops.
    """

    shape: int = 4
    scale: float | None = None

    def __post_init__(self):
        if not (isinstance(self.shape, (int, np.integer)) and self.shape >= 1):
            raise ValueError(f"shape must be a positive integer, got {self.shape!r}")
        scale = self.scale if self.scale is not None else 1.0 / math.sqrt(self.shape)
        if abs(self.shape * scale * scale - 1.0) > 1e-12:
            raise ValueError(
                f"shape*scale^2 must equal 1 for unit-variance entries, "
                f"got {self.shape * scale * scale:.6g}"
            )
        object.__setattr__(self, "scale", float(scale))


InnovationLaw = Gaussian | StandardizedGamma


def delta_of(law: InnovationLaw) -> float:
    """Excess kurtosis E[Y^4] - 3 of the innovation entries."""
    if isinstance(law, Gaussian):
        return 0.0
    if isinstance(law, StandardizedGamma):
        return 6.0 / law.shape
    raise TypeError(f"not an innovation law: {law!r}")


def draw_innovations(law: InnovationLaw, rng: np.random.Generator, p: int, n: int) -> np.ndarray:
    """Draw a (p, n) block of i.i.d. innovations from ``law``.

    Each call consumes the generator in a fixed order, so a dedicated
    substream per replication yields identical data regardless of how the
    replications are scheduled.
    """
    if isinstance(law, Gaussian):
        return rng.standard_normal((p, n))
    if isinstance(law, StandardizedGamma):
        k, theta = law.shape, law.scale
        gamma = theta * rng.standard_exponential((k, p, n)).sum(axis=0)
        return gamma - k * theta
    raise TypeError(f"not an innovation law: {law!r}")


# ---------------------------------------------------------------------------
# Reproducible substreams
# ---------------------------------------------------------------------------

def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for stream ``(master_seed, *key)``.

    Streams with distinct keys are independent by construction
    (``SeedSequence`` spawn keys feeding a Philox counter generator), so
    replications can run in any order, or in parallel, without changing
    any draw.  Campaign code keys data streams by (grid index,
    replication index) and the fixed-mean draw by ``MEAN_STREAM_KEY``.
    """
    master_seed = int(master_seed)
    if master_seed < 0:
        raise ValueError("master seed must be a non-negative integer")
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------------------
# Square-root factors and dataset sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SqrtFactor:
    """Precomputed square root of a covariance model.

    ``apply`` maps a (p, n) innovation block Y to R Y without forming a
    dense product when the model structure allows it (diagonal and
    rank-one models use closed forms; only Explicit needs a dense matrix).
    """

    kind: str
    diag: np.ndarray | None = None
    v: np.ndarray | None = None
    coef: float = 0.0
    dense: np.ndarray | None = None

    def apply(self, Y: np.ndarray) -> np.ndarray:
        if self.kind == "identity":
            return Y
        if self.kind == "diag":
            return Y * self.diag[:, None]
        if self.kind == "rank_one":
            return Y + self.coef * np.outer(self.v, self.v @ Y)
        if self.kind == "dense":
            return self.dense @ Y
        raise ValueError(f"unknown factor kind {self.kind!r}")


def sqrt_factor(cov: CovarianceModel) -> SqrtFactor:
    """Square-root factor of a model, using the analytic form when available."""
    if isinstance(cov, Identity):
        return SqrtFactor(kind="identity")
    if isinstance(cov, DiagonalSpike):
        d = np.ones(cov.p)
        d[0] = math.sqrt(cov.rho)
        return SqrtFactor(kind="diag", diag=d)
    if isinstance(cov, RankOneSpike):
        # (I + a vv')^{1/2} = I + (sqrt(1+a) - 1) vv'
        coef = math.sqrt(1.0 + cov.amplitude) - 1.0
        return SqrtFactor(kind="rank_one", v=cov.v, coef=coef)
    if isinstance(cov, Explicit):
        return SqrtFactor(kind="dense", dense=linalg.sqrt_psd(cov.matrix))
    raise TypeError(f"not a covariance model: {cov!r}")


def dimension_of(cov: CovarianceModel) -> int:
    return cov.p


@dataclass(frozen=True, eq=False)
class DatasetSpec:
    """Everything needed to draw one dataset reproducibly."""

    cov: CovarianceModel
    law: InnovationLaw
    n: int
    seed: int
    mu: np.ndarray | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need n >= 2 observations, got {self.n}")
        if self.mu is not None:
            mu = np.asarray(self.mu, dtype=float).reshape(-1)
            if mu.shape[0] != dimension_of(self.cov):
                raise ValueError(
                    f"mu has length {mu.shape[0]}, expected p={dimension_of(self.cov)}"
                )
            object.__setattr__(self, "mu", mu)
        if int(self.seed) < 0:
            raise ValueError("seed must be a non-negative integer")


def sample_dataset(spec: DatasetSpec) -> np.ndarray:
    """Draw the (p, n) data matrix for ``spec``.

    Bit-identical for identical specs: the draw order is fixed and the
    stream is keyed by the seed alone.
    """
    rng = substream(spec.seed)
    factor = sqrt_factor(spec.cov)
    p = dimension_of(spec.cov)
    X = factor.apply(draw_innovations(spec.law, rng, p, spec.n))
    if spec.mu is not None:
        X = X + spec.mu[:, None]
    return X
