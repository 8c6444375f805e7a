"""Pseudoinverse canonical correlation analysis in the high-dimension, low sample
size regime, under a two-block spiked covariance model."""

from .asymptotics import (
    LimitPrediction,
    Regime,
    Theorem1Constants,
    limit_rho1,
    predicted_limits,
    theorem1_constants,
)
from .estimator import (
    CcaEstimate,
    DegenerateDataError,
    InsufficientRankError,
    SampleMoments,
    alignment,
    cca_fit,
    cross_covariance_singular_values,
    gram_eigh,
    sample_eigh,
    sample_moments,
    whitened_correlation_core,
)
from .harness import GridConfig, RepRecord, load_config, run_grid, run_rep, summarize
from .sampling import DataSet, gaussian_matrix, generate_dataset, make_stream
from .spiked_model import (
    ModelError,
    PopulationModel,
    SpikedParams,
    StructuredSqrt,
    build_population_model,
    joint_sqrt,
    validate_params,
)

__version__ = "0.1.0"
