"""E-value tests of symmetry: Fisher-type, sign and Wilcoxon signed-rank e-tests."""

__version__ = "0.1.0"

from .kernels import BACKEND
from .symmetry import (
    ENUMERATION_CAP,
    RngSeed,
    Sample,
    SignVector,
    Summary,
    kernel_expectation,
    kernel_sample,
    kernel_sample_batch,
    summarize,
    verify_e_variable,
)
from .etests import (
    EValue,
    ParamGrid,
    delapena_e,
    fisher_e,
    fisher_log_normalizer,
    fisher_mix_e,
    grid_average_e,
    normalize,
    sign_count,
    sign_e_lambda,
    sign_e_p,
    sign_mix_one_sided,
    sign_mix_two_sided,
    signed_rank_stats,
    wilcoxon_e,
    wilcoxon_log_normalizer,
)
from .baseline import baseline_n, gauss_lr_e, gauss_mix_e, gauss_optimal_epower, kl_gauss
from .merging import (
    EPowerEstimate,
    EVector,
    MergeSpec,
    e_power_estimate,
    lift,
    mixture_merge,
    product_merge,
    u_statistic_merge,
)
from .pvalues import PValue, fisher_permutation_pvalue, sign_test_pvalue
