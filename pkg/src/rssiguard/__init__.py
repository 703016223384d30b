"""Inside/outside detection of a radio beacon from RSSI at fixed APs.

A one-class SVM trained on RSSI windows collected in a target area flags
windows that look like the object has left.  The package also provides the
analytic detection-rate approximation, AP / target-area placement by the
gate-point criterion, and simulation harnesses to check both.
"""

__version__ = "0.1.0"

from .analytic import (
    RateQuery,
    RateResult,
    detection_rate_domain,
    detection_rate_point,
    lambda_t,
    surrogate_classify,
)
from .errors import ConvergenceError, NumericalError, SingularityError, ValidationError
from .features import StandardizerStats, apply_standardizer, average_windows, fit_standardizer
from .ocsvm import OcSvmConfig, OcSvmModel, Verdict, classify, decision_value, rbf_kernel, train
from .placement import PlacementProblem, PlacementSolution, optimize, placement_objective, validate_ranking
from .propagation import (
    Point,
    PropagationParams,
    RssiDataset,
    Variant,
    fading_pdf,
    generate_dataset,
    mean_rssi,
    sample_rssi,
)
from .special import chi2_quantile, marcum_q, noncentral_chi2_cdf

__all__ = [
    "ConvergenceError",
    "NumericalError",
    "OcSvmConfig",
    "OcSvmModel",
    "PlacementProblem",
    "PlacementSolution",
    "Point",
    "PropagationParams",
    "RateQuery",
    "RateResult",
    "RssiDataset",
    "SingularityError",
    "StandardizerStats",
    "ValidationError",
    "Variant",
    "Verdict",
    "apply_standardizer",
    "average_windows",
    "chi2_quantile",
    "classify",
    "decision_value",
    "detection_rate_domain",
    "detection_rate_point",
    "fading_pdf",
    "fit_standardizer",
    "generate_dataset",
    "lambda_t",
    "marcum_q",
    "mean_rssi",
    "noncentral_chi2_cdf",
    "optimize",
    "placement_objective",
    "rbf_kernel",
    "sample_rssi",
    "surrogate_classify",
    "train",
    "validate_ranking",
]
