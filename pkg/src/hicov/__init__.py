"""High-dimensional covariance identity testing.

Three tests of whether a population covariance equals the identity when the
dimension p grows with the sample size n (p/n in (0, 1)), the asymptotic
power approximations for the likelihood-ratio test, and a reproducible
Monte Carlo harness with CSV and figure reports.
"""

from .exceptions import InvalidRegimeError, NotPositiveDefiniteError, NotPSDError
from .linalg import logdet_spd, sample_covariance, sqrt_psd, symmetrize
from .models import (
    CovarianceModel,
    DatasetSpec,
    DiagonalSpike,
    Explicit,
    Gaussian,
    Identity,
    InnovationLaw,
    RankOneSpike,
    StandardizedGamma,
    delta_of,
    grid_label,
    materialize,
    sample_dataset,
    sqrt_factor,
    substream,
)
from .power import (
    NullCalibration,
    alternative_shift,
    d_correction,
    likelihood_distance,
    lrt_power,
    lrt_spiked_power,
    model_likelihood_distance,
    model_quadratic_distance,
    normal_cdf,
    normal_quantile,
    null_calibration,
    quadratic_distance,
    quadratic_spiked_power,
    sigma_scale,
)
from .identity_tests import (
    TestOutcome,
    cm_statistic,
    cm_test,
    czz_statistic,
    czz_statistic_bruteforce,
    czz_test,
    lrt_statistic,
    lrt_test,
    run_test,
)
from .harness import (
    CampaignError,
    PowerCurve,
    PowerPoint,
    SimulationConfig,
    czz_oracle_sweep,
    power_vs_theory,
    preset_configs,
    run_campaign,
    validate_log_inequality,
    validate_null_clt,
    validate_trace_remainder,
)

__version__ = "0.1.0"
