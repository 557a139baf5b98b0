"""Tests for covariance models, innovation laws, and the dataset generator."""

import math

import numpy as np
import pytest

from hicov.exceptions import NotPositiveDefiniteError
from hicov.models import (
    DatasetSpec,
    DiagonalSpike,
    Explicit,
    Gaussian,
    Identity,
    RankOneSpike,
    StandardizedGamma,
    delta_of,
    draw_innovations,
    grid_label,
    materialize,
    sample_dataset,
    sqrt_factor,
    substream,
)


class TestCovarianceModels:
    def test_identity_materializes(self):
        np.testing.assert_array_equal(materialize(Identity(3)), np.eye(3))

    def test_diagonal_spike_materializes(self):
        np.testing.assert_array_equal(materialize(DiagonalSpike(p=2, rho=4.0)),
                                      np.diag([4.0, 1.0]))

    def test_rank_one_spike_expands_outer_product(self):
        """h sqrt(p/n_ref) = 2 * sqrt(4/16) = 1, added on the e1 axis."""
        m = RankOneSpike(p=4, n_ref=16, h=2.0)
        np.testing.assert_allclose(materialize(m), np.diag([2.0, 1.0, 1.0, 1.0]),
                                   atol=1e-15)

    def test_rank_one_spike_general_vector(self):
        v = np.array([3.0, 4.0]) / 5.0
        m = RankOneSpike(p=2, n_ref=8, h=-0.5, v=v)
        expected = np.eye(2) + m.amplitude * np.outer(v, v)
        np.testing.assert_allclose(materialize(m), expected, rtol=1e-15)

    def test_diagonal_spike_at_one_is_identity_exactly(self):
        np.testing.assert_array_equal(materialize(DiagonalSpike(p=5, rho=1.0)), np.eye(5))

    def test_rank_one_spike_at_zero_is_identity_exactly(self):
        np.testing.assert_array_equal(materialize(RankOneSpike(p=5, n_ref=10, h=0.0)),
                                      np.eye(5))

    def test_rank_one_spike_rejects_non_unit_vector(self):
        with pytest.raises(ValueError, match="unit vector"):
            RankOneSpike(p=2, n_ref=4, h=1.0, v=np.array([1.0, 1.0]))

    def test_rank_one_spike_rejects_degenerate_amplitude(self):
        # h sqrt(p/n_ref) = -2 makes 1 + a negative
        with pytest.raises(NotPositiveDefiniteError):
            RankOneSpike(p=4, n_ref=4, h=-2.0)

    def test_explicit_requires_positive_definite(self):
        with pytest.raises(NotPositiveDefiniteError):
            Explicit(np.diag([1.0, 0.0]))

    def test_explicit_symmetrizes(self):
        E = Explicit(np.array([[2.0, 0.3], [0.3, 1.0]]))
        np.testing.assert_array_equal(E.matrix, E.matrix.T)

    def test_diagonal_spike_rejects_nonpositive_rho(self):
        with pytest.raises(ValueError):
            DiagonalSpike(p=3, rho=0.0)

    def test_grid_labels(self):
        assert grid_label(Identity(4)) == "identity"
        assert grid_label(DiagonalSpike(p=4, rho=0.25)) == "0.25"
        assert grid_label(RankOneSpike(p=4, n_ref=9, h=-1.2)) == "-1.2"


class TestInnovationLaws:
    def test_gaussian_has_zero_excess_kurtosis(self):
        assert delta_of(Gaussian()) == 0.0

    def test_gamma_4_half(self):
        """E(G - 2)^4 = 3 k^2 theta^4 + 6 k theta^4 = 4.5 at (4, 0.5), so 3 + 1.5."""
        assert delta_of(StandardizedGamma(4, 0.5)) == 1.5

    def test_gamma_shape_12(self):
        assert delta_of(StandardizedGamma(12)) == 0.5

    def test_gamma_default_scale_gives_unit_variance(self):
        law = StandardizedGamma(9)
        assert law.scale == pytest.approx(1.0 / 3.0)

    def test_gamma_rejects_variance_mismatch(self):
        with pytest.raises(ValueError, match="unit-variance"):
            StandardizedGamma(4, 1.0)

    def test_gamma_rejects_fractional_shape(self):
        with pytest.raises(ValueError, match="positive integer"):
            StandardizedGamma(2.5)


class TestSubstreams:
    def test_same_key_reproduces(self):
        a = substream(123, 4, 5).standard_normal(8)
        b = substream(123, 4, 5).standard_normal(8)
        np.testing.assert_array_equal(a, b)

    def test_distinct_keys_differ(self):
        a = substream(123, 4, 5).standard_normal(8)
        b = substream(123, 4, 6).standard_normal(8)
        c = substream(124, 4, 5).standard_normal(8)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_rejects_negative_seed(self):
        with pytest.raises(ValueError):
            substream(-1)


class TestSampling:
    def test_identical_spec_is_bit_identical(self):
        spec = DatasetSpec(cov=DiagonalSpike(p=3, rho=2.0),
                           law=StandardizedGamma(4, 0.5), n=20, seed=99)
        np.testing.assert_array_equal(sample_dataset(spec), sample_dataset(spec))

    def test_distinct_seeds_differ(self):
        mk = lambda s: DatasetSpec(cov=Identity(3), law=Gaussian(), n=10, seed=s)
        assert not np.array_equal(sample_dataset(mk(1)), sample_dataset(mk(2)))

    def test_mean_vector_is_added(self):
        mu = np.array([10.0, -5.0])
        spec = DatasetSpec(cov=Identity(2), law=Gaussian(), n=5000, seed=3, mu=mu)
        X = sample_dataset(spec)
        np.testing.assert_allclose(X.mean(axis=1), mu, atol=0.1)

    def test_mu_length_validated(self):
        with pytest.raises(ValueError, match="length"):
            DatasetSpec(cov=Identity(3), law=Gaussian(), n=5, seed=0, mu=np.ones(2))

    def test_n_below_two_rejected(self):
        with pytest.raises(ValueError):
            DatasetSpec(cov=Identity(3), law=Gaussian(), n=1, seed=0)

    def test_gaussian_moments_converge(self):
        """Law of large numbers at p=1, n=1e5: mean near 0, variance near 1."""
        n = 100_000
        spec = DatasetSpec(cov=Identity(1), law=Gaussian(), n=n, seed=7)
        X = sample_dataset(spec)[0]
        assert abs(X.mean()) <= 4.0 / math.sqrt(n)
        assert abs(X.var(ddof=1) - 1.0) <= 4.0 * math.sqrt(2.0 / n)

    def test_diagonal_spike_scales_first_coordinate(self):
        spec = DatasetSpec(cov=DiagonalSpike(p=2, rho=4.0), law=Gaussian(),
                           n=100_000, seed=8)
        X = sample_dataset(spec)
        assert abs(X[0].var(ddof=1) - 4.0) <= 0.1
        assert abs(X[1].var(ddof=1) - 1.0) <= 0.05

    def test_gamma_moments(self):
        """4e6 draws: mean ~ 0, variance ~ 1, fourth moment ~ 3 + 1.5.

        The fourth-moment estimator has standard deviation
        sqrt(mu8 - mu4^2)/sqrt(N) ~ 0.017 at this N, so 0.05 is ~3 sigma.
        """
        law = StandardizedGamma(4, 0.5)
        Y = draw_innovations(law, substream(17), 2000, 2000).ravel()
        N = Y.size
        assert abs(Y.mean()) <= 4.0 / math.sqrt(N)
        assert abs(Y.var(ddof=1) - 1.0) <= 4.0 * math.sqrt(2.0 + 1.5) / math.sqrt(N)
        assert abs((Y**4).mean() - 4.5) <= 0.05

    def test_rank_one_factor_matches_dense_product(self):
        m = RankOneSpike(p=6, n_ref=24, h=1.7)
        rng = substream(5)
        Y = rng.standard_normal((6, 40))
        from hicov.linalg import sqrt_psd

        dense = sqrt_psd(materialize(m)) @ Y
        np.testing.assert_allclose(sqrt_factor(m).apply(Y), dense, atol=1e-10)

    def test_explicit_factor_roundtrip_covariance(self):
        """Sampling with an explicit covariance reproduces it empirically."""
        M = np.array([[2.0, 0.6], [0.6, 1.0]])
        spec = DatasetSpec(cov=Explicit(M), law=Gaussian(), n=200_000, seed=11)
        X = sample_dataset(spec)
        emp = np.cov(X)
        np.testing.assert_allclose(emp, M, atol=0.05)
