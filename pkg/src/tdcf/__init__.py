"""Tandem detection cost (t-DCF) evaluation of spoofing countermeasures with ASV."""

from .cost_model import (
    CostModel,
    CostModelError,
    GenericCostSpec,
    PriorTriple,
    banking_priors,
    effective_prior,
    generic_dcf,
    load_cost_model,
    nist_dcf,
)
from .engine import (
    AsvRates,
    SpoofMode,
    TandemArchitecture,
    TandemOperatingPoint,
    TdcfBreakdown,
    calibrate_affine,
    min_tdcf_over_cm,
    tandem_error_terms,
    tdcf_at,
    tdcf_from_rates,
)
from .error_rates import (
    EerEstimate,
    EerMethod,
    ErrorProfile,
    ProfileRole,
    asv_rates_at,
    asv_spoof_miss_at,
    build_profile,
    cm_rates_at,
    estimate_eer,
)
from .synthetic import GaussianScoreModel, analytic_rates, analytic_tdcf, sample_scores
from .trial_data import (
    ScoreFileError,
    ScoreKind,
    ScoreSet,
    TrialLabel,
    TrialRecord,
    parse_score_file,
    subset_by_label,
    write_score_file,
)

__version__ = "0.1.0"
