"""Memory-efficient dyadic Bayesian histograms on [0,1)^d with exact and
bounded Wasserstein distance computation, streaming construction, and a
Monte-Carlo convergence-rate harness."""

from .core import (
    DiscreteMeasure,
    DyadicHistogram,
    ModelConfig,
    auto_depth,
    bin_index,
    coarsen,
    default_prior_concentration,
    density_at,
    discretize,
    fit_batch,
    haar_estimate_2d,
    posterior_mean_weights,
    sample_posterior,
)
from .distributions import (
    BetaSym,
    Product,
    Split,
    Uniform,
    discretize_ground_truth,
    parse_ground_truth,
    split_density,
)
from .errors import (
    CapacityError,
    ConsistencyError,
    DataFormatError,
    DegenerateHistogramError,
    DomainError,
    ImproperPosteriorError,
    NumericalError,
)
from .hist_io import histogram_from_json, histogram_to_json, load_histogram, save_histogram
from .simulate import (
    ExperimentResult,
    ExperimentSpec,
    delta_ci,
    dirichlet_concentration_mc,
    fit_slope,
    multinomial_concentration_mc,
    posterior_contraction_mc,
    run_experiment,
)
from .streaming import MultiResCounter, StreamConfig, new_stream
from .wasserstein import (
    DiscreteMassOracle,
    HistogramMassOracle,
    PiecewiseQuantile,
    multires_bound,
    ot_discrete,
    quantile_of_discrete,
    quantile_of_histogram,
    wasserstein_1d,
    wv_hist_vs_discrete,
)

__version__ = "0.1.0"

__all__ = [
    "BetaSym",
    "CapacityError",
    "ConsistencyError",
    "DataFormatError",
    "DegenerateHistogramError",
    "DiscreteMassOracle",
    "DiscreteMeasure",
    "DomainError",
    "DyadicHistogram",
    "ExperimentResult",
    "ExperimentSpec",
    "HistogramMassOracle",
    "ImproperPosteriorError",
    "ModelConfig",
    "MultiResCounter",
    "NumericalError",
    "PiecewiseQuantile",
    "Product",
    "Split",
    "StreamConfig",
    "Uniform",
    "auto_depth",
    "bin_index",
    "coarsen",
    "default_prior_concentration",
    "delta_ci",
    "density_at",
    "dirichlet_concentration_mc",
    "discretize",
    "discretize_ground_truth",
    "fit_batch",
    "fit_slope",
    "haar_estimate_2d",
    "histogram_from_json",
    "histogram_to_json",
    "load_histogram",
    "multinomial_concentration_mc",
    "multires_bound",
    "new_stream",
    "ot_discrete",
    "parse_ground_truth",
    "posterior_contraction_mc",
    "posterior_mean_weights",
    "quantile_of_discrete",
    "quantile_of_histogram",
    "run_experiment",
    "sample_posterior",
    "save_histogram",
    "split_density",
    "wasserstein_1d",
    "wv_hist_vs_discrete",
]
