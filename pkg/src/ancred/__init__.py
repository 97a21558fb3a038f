"""Reverse-Bayes analysis of credibility: sceptical priors and p-values for credibility."""

from .credibility import (
    CREDIBILITY_RATIO_BOUND,
    CredibilityReport,
    ScepticalPrior,
    box_test,
    compatibility_test,
    credibility_ratio_credible,
    credibility_report,
    extrinsic_p,
    intrinsic_p,
    intrinsic_threshold,
    intrinsically_credible_by_variance,
    matthews_extrinsic_credible,
    matthews_intrinsic_threshold,
    sceptical_limit,
    sceptical_prior,
    sceptical_variance,
)
from .effects import (
    ConfidenceInterval,
    EffectEstimate,
    TwoByTwoTable,
    ci_to_estimate,
    estimate_to_ci,
    from_two_by_two,
    p_value,
    test_statistic,
)
from .errors import (
    BracketError,
    ConvergenceError,
    CredibilityError,
    DegenerateTableError,
    DomainError,
    NoSolutionError,
    NotSignificantError,
)

__version__ = "0.1.0"
