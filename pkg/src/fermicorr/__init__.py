"""Correlation functions, determinant inequalities and detection sampling for
spin-polarized chaotic electron beams."""

__version__ = "0.1.0"

from .correlations import CorrelationValue, correlation, detection_probability, pairwise_g2
from .dpp_sampler import (
    CoincidenceHistogram,
    DetectionSample,
    GridSpec,
    SamplingKernel,
    build_sampling_kernel,
    estimate_g2,
    exact_subset_probabilities,
    sample,
    sample_many,
)
from .field_model import (
    DetectorConfig,
    KernelBundle,
    SpacetimePoint,
    SpectralModel,
    antibunching_curve,
    build_kernel,
    bundle_from_matrix,
    coherence_time_from_bandwidth,
    degree_of_coherence,
)
from .hermitian_linalg import (
    Definiteness,
    DefinitenessVerdict,
    EigenDecomposition,
    HermitianMatrix,
    definiteness,
    determinant,
    eigendecompose,
    leibniz_determinant_oracle,
    lemma_check,
    unit_diagonal_normalize,
)
from .inequalities import (
    InequalityReport,
    PartitionSpec,
    check_partition_bound,
    check_product_bound,
    fischer_cross_check,
    set_partitions,
    sweep_partitions,
)
