"""popsep: spectral separation of Bernoulli product mixtures in the wide-data
regime (more features than samples)."""

from .classify import (
    ClassifyParams,
    RoundOutcome,
    classify,
    classify_rounds,
    default_params,
    majority_vote,
    threshold_T,
)
from .errors import ConvergenceError, DegenerateSpectrumError, PopsepError
from .harness import ExperimentConfig, ExperimentRecord, run_experiment, summarize
from .linalg import (
    SingularTriplet,
    SpectralSummary,
    frobenius_norm,
    operator_norm,
    rank_k_approximation,
    top_k_singular_triplets,
)
from .oracle import (
    BoundCheck,
    StaticMoments,
    StaticSpectrum,
    compute_abc,
    expected_matrix,
    max_weight_balanced_cut,
    moments_from_model,
    oracle_classifier,
    run_verification,
    static_spectrum,
    verify_perturbation_bounds,
    verify_separation_identity,
    verify_static_properties,
)
from .partition import (
    CandidatePartition,
    Misclassification,
    PartitionParams,
    PartitionResult,
    candidate_partition,
    misclassification,
    partition,
    q_ball,
)
from .popmodel import (
    FeatureBlocks,
    PopulationModel,
    SampleMatrix,
    divergence,
    normalize,
    random_model,
    sample,
    split_feature_blocks,
    two_block_model,
)

__version__ = "0.1.0"
