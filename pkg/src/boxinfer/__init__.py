"""Conditional inference after black-box model selection.

The observed data is decomposed into a scalar statistic for the target of
interest plus an independent remainder; the probability that the frozen
selection algorithm fires, as a function of that statistic, is learned by
re-running the algorithm on perturbed data and fitting a binary regression.
Inference then proceeds in the resulting one-parameter exponential family.
"""

from .exceptions import (
    BoxinferError,
    ConfigError,
    ConvergenceError,
    DegenerateLabelsError,
    DegenerateSupportError,
    DomainError,
    NumericError,
    RangeError,
)
from .stats import (
    CovarianceFactor,
    SeededStream,
    binom_sf,
    ld_binom_sf,
    mvn_sample,
    norm_cdf,
    norm_quantile,
    norm_sf,
)
from .splines import SplineSpec, basis_matrix, eval_basis, fit_spline_spec
from .glm import BinaryGlmModel, fit_binary_glm, predict_prob
from .lasso import (
    GramProblem,
    LassoPath,
    cv_lambda,
    geometric_grid,
    kkt_violation,
    lambda_range,
    lasso_cd,
    lasso_path,
)
from .selectors import (
    SelectionOutcome,
    SelectorSpec,
    multi_cv_select,
    multi_cv_single_run,
    select,
    simple_threshold_select,
    single_component,
    stability_select,
)
from .inference import (
    ConditionalDensityGrid,
    LearnedSelectionProb,
    LearningSample,
    NaiveResult,
    TargetDecomposition,
    build_density_grid,
    decompose_full,
    decompose_general,
    decompose_partial,
    estimate_selection_prob,
    generate_labels,
    learned_prob_from_json,
    learned_prob_to_json,
    learning_sample_from_json,
    learning_sample_to_json,
    naive_inference,
    sample_covariates,
    selective_ci,
    selective_pvalue,
)
from .config import ExperimentConfig, build_config, parse_config_file, with_updates
from .experiments import (
    ResultTable,
    generate_synthetic,
    ks_uniform,
    run_experiment,
    run_multicv_experiment,
    run_simple_experiment,
    run_stability_experiment,
    write_result_table,
)

__version__ = "0.1.0"

__all__ = [
    "BoxinferError",
    "ConfigError",
    "ConvergenceError",
    "DegenerateLabelsError",
    "DegenerateSupportError",
    "DomainError",
    "NumericError",
    "RangeError",
    "CovarianceFactor",
    "SeededStream",
    "binom_sf",
    "ld_binom_sf",
    "mvn_sample",
    "norm_cdf",
    "norm_quantile",
    "norm_sf",
    "SplineSpec",
    "basis_matrix",
    "eval_basis",
    "fit_spline_spec",
    "BinaryGlmModel",
    "fit_binary_glm",
    "predict_prob",
    "GramProblem",
    "LassoPath",
    "cv_lambda",
    "geometric_grid",
    "kkt_violation",
    "lambda_range",
    "lasso_cd",
    "lasso_path",
    "SelectionOutcome",
    "SelectorSpec",
    "multi_cv_select",
    "multi_cv_single_run",
    "select",
    "simple_threshold_select",
    "single_component",
    "stability_select",
    "ConditionalDensityGrid",
    "LearnedSelectionProb",
    "LearningSample",
    "NaiveResult",
    "TargetDecomposition",
    "build_density_grid",
    "decompose_full",
    "decompose_general",
    "decompose_partial",
    "estimate_selection_prob",
    "generate_labels",
    "learned_prob_from_json",
    "learned_prob_to_json",
    "learning_sample_from_json",
    "learning_sample_to_json",
    "naive_inference",
    "sample_covariates",
    "selective_ci",
    "selective_pvalue",
    "ExperimentConfig",
    "build_config",
    "parse_config_file",
    "with_updates",
    "ResultTable",
    "generate_synthetic",
    "ks_uniform",
    "run_experiment",
    "run_multicv_experiment",
    "run_simple_experiment",
    "run_stability_experiment",
    "write_result_table",
]
