"""Weighted likelihood estimation of multivariate location and scatter.

Robustness weights are driven by the distribution of squared Mahalanobis
distances, so the density estimation involved is always univariate whatever
the dimension of the data.
"""

from .discriminant import WLEDiscriminantAnalysis, fit_da, loo_cv, misclassification
from .estimator import FitConfig, FitResult, WLECovariance, fit_mle, fit_wle, select_bandwidth
from .exceptions import (
    BandwidthSelectionError,
    ConvergenceError,
    DegenerateScatterError,
    RankError,
    WLEError,
)
from .kde import KernelScheme
from .outlier import WLEOutlierDetector, detect, multiplicity_level, scaled_beta_quantile
from .pca import RobustPCA, robust_pca
from .raf import RafSpec, parse_raf

__version__ = "0.1.0"

__all__ = [
    "BandwidthSelectionError",
    "ConvergenceError",
    "DegenerateScatterError",
    "FitConfig",
    "FitResult",
    "KernelScheme",
    "RafSpec",
    "RankError",
    "RobustPCA",
    "WLECovariance",
    "WLEDiscriminantAnalysis",
    "WLEError",
    "WLEOutlierDetector",
    "detect",
    "fit_da",
    "fit_mle",
    "fit_wle",
    "loo_cv",
    "misclassification",
    "multiplicity_level",
    "parse_raf",
    "robust_pca",
    "scaled_beta_quantile",
    "select_bandwidth",
]
