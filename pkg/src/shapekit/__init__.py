"""Robust rank-based one-step shape-matrix estimation for complex
elliptically distributed data, with the samplers, score functions, and
Monte Carlo harness needed to benchmark it."""

from .errors import (
    ConfigError,
    ConvergenceError,
    DataError,
    DegenerateDataError,
    DimensionError,
    DomainError,
    ExperimentError,
    IllConditionedError,
    NumericError,
    PerturbationError,
    ShapekitError,
    SingularMatrixError,
)
from .estimators import (
    EstimatorDiagnostics,
    EstimatorOutput,
    RankStatistics,
    cross_information_scale,
    one_step_r_estimate,
    random_hermitian_perturbation,
    rank_central_sequence,
    rank_statistics,
    scm,
    trace_normalize,
    tyler,
)
from .harness import (
    ExperimentConfig,
    MseCurve,
    MseRow,
    emit_csv,
    mse_index,
    parse_csv,
    preset_config,
    run_experiment,
)
from .linalg import (
    StructuralOperators,
    frobenius,
    herm_inv_sqrt,
    herm_sqrt,
    kron,
    ovec,
    structural_operators,
    unovec,
    unvec,
    vec,
    whitened_projector,
)
from .sampling import (
    CesModel,
    ComplexT,
    ContaminationConfig,
    GeneralizedGaussian,
    RngStream,
    build_outlier_dataset,
    complex_gaussian,
    dump_dataset,
    gg_scale_for_power,
    load_dataset,
    sample_ces,
    sample_contaminated,
    sample_modular,
    sample_sphere,
    toeplitz_scatter,
)
from .scores import (
    PowerScore,
    ScoreFunction,
    StudentTScore,
    VanDerWaerdenScore,
    ranks,
    spearman_score,
    wilcoxon_score,
)
from .special import (
    QuantileResult,
    beta_cdf,
    fisher_cdf,
    fisher_quantile,
    gamma_cdf,
    gamma_quantile,
    ln_gamma,
)

__version__ = "0.1.0"
