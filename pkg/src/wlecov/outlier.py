"""Squared robust distances, their finite-sample law, and outlier flags.

At the normal model, squared distances computed from an unbiased weighted
likelihood fit follow, asymptotically, the scaled Beta law::

    d2 ~ ((n - 1)**2 / n) * Beta(p / 2, (n - p - 1) / 2)

which tends to chi-square(p) as n grows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, stats
from sklearn.base import BaseEstimator, OutlierMixin
from sklearn.utils.validation import check_is_fitted, validate_data

__all__ = [
    "OutlierReport",
    "mahalanobis_sq",
    "scaled_beta_quantile",
    "scaled_beta_distribution",
    "multiplicity_level",
    "detect",
    "diagnostics",
    "WLEOutlierDetector",
]

REFERENCES = ("beta", "chisq")


def mahalanobis_sq(X, location, scatter) -> np.ndarray:
    """Squared Mahalanobis distances via a Cholesky factor of ``scatter``.

    Raises
    ------
    ValueError
        If ``scatter`` is not symmetric positive definite.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    S = np.atleast_2d(np.asarray(scatter, dtype=float))
    mu = np.atleast_1d(np.asarray(location, dtype=float))
    if S.shape[0] != S.shape[1] or S.shape[0] != X.shape[1] or mu.shape[0] != X.shape[1]:
        raise ValueError("dimension mismatch between data, location and scatter")
    if not np.allclose(S, S.T, rtol=1e-8, atol=1e-12 * np.abs(S).max()):
        raise ValueError("scatter matrix is not symmetric")
    try:
        L = linalg.cholesky(S, lower=True)
    except linalg.LinAlgError as exc:
        raise ValueError("scatter matrix is not positive definite") from exc
    Z = linalg.solve_triangular(L, (X - mu).T, lower=True)
    return np.einsum("ij,ij->j", Z, Z)


def _check_beta_args(n, p):
    if p < 1 or n <= p + 1:
        raise ValueError(f"scaled Beta law needs n > p + 1 (got n={n}, p={p})")


def scaled_beta_distribution(n: int, p: int, variant: str = "n-p-1"):
    """Frozen scipy distribution of the scaled Beta law.

    ``variant="n-p-1"`` uses the second shape ``(n - p - 1)/2``;
    ``variant="n-p"`` uses ``(n - p)/2``.
    """
    _check_beta_args(n, p)
    if variant == "n-p-1":
        b = (n - p - 1) / 2.0
    elif variant == "n-p":
        b = (n - p) / 2.0
    else:
        raise ValueError(f"unknown Beta variant {variant!r}")
    return stats.beta(p / 2.0, b, scale=(n - 1) ** 2 / n)


def scaled_beta_quantile(n: int, p: int, level, variant: str = "n-p-1"):
    """Quantile of ``((n-1)^2/n) Beta(p/2, (n-p-1)/2)`` at ``level``."""
    level_arr = np.asarray(level, dtype=float)
    if np.any((level_arr <= 0) | (level_arr >= 1)):
        raise ValueError("level must lie in (0, 1)")
    q = scaled_beta_distribution(n, p, variant).ppf(level_arr)
    return float(q) if q.ndim == 0 else q


def multiplicity_level(alpha: float, n: int) -> float:
    """Per-test level ``(1 - alpha)**(1/n)`` giving familywise level ``alpha``."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if n < 1:
        raise ValueError("n must be >= 1")
    return float((1.0 - alpha) ** (1.0 / n))


def _reference_quantile(reference, n, p, level, beta_variant="n-p-1"):
    if reference == "beta":
        return scaled_beta_quantile(n, p, level, beta_variant)
    if reference == "chisq":
        return float(stats.chi2.ppf(level, p))
    raise ValueError(f"reference must be one of {REFERENCES}, got {reference!r}")


@dataclass
class OutlierReport:
    squared_distances: np.ndarray
    cutoff_plain: float
    cutoff_multiplicity: float
    flags_plain: np.ndarray
    flags_multiplicity: np.ndarray
    reference: str
    alpha: float
    n: int
    p: int
    weights: np.ndarray | None = field(default=None, repr=False)

    @property
    def level_plain(self) -> float:
        return 1.0 - self.alpha

    @property
    def level_multiplicity(self) -> float:
        return multiplicity_level(self.alpha, self.n)


def detect(fit, alpha: float = 0.025, reference: str = "beta", beta_variant: str = "n-p-1") -> OutlierReport:
    """Flag observations whose squared distance exceeds the reference cutoffs.

    ``fit`` is anything exposing ``squared_distances`` (a ``FitResult``).
    The plain cutoff is the ``1 - alpha`` quantile; the multiplicity cutoff
    uses the per-test level ``(1 - alpha)**(1/n)``.
    """
    d2 = np.asarray(fit.squared_distances, dtype=float)
    n = d2.size
    p = int(np.shape(fit.location)[0])
    plain = _reference_quantile(reference, n, p, 1.0 - alpha, beta_variant)
    mult = _reference_quantile(reference, n, p, multiplicity_level(alpha, n), beta_variant)
    return OutlierReport(
        squared_distances=d2,
        cutoff_plain=plain,
        cutoff_multiplicity=mult,
        flags_plain=d2 > plain,
        flags_multiplicity=d2 > mult,
        reference=reference,
        alpha=alpha,
        n=n,
        p=p,
        weights=getattr(fit, "weights", None),
    )


def diagnostics(fit, mle_fit, alpha: float = 0.025, beta_variant: str = "n-p-1") -> dict:
    """QQ and distance-distance series for plotting.

    Returns a dict with ``qq_pairs`` (sorted robust squared distances against
    scaled-Beta quantiles at plotting positions ``(i - 0.5)/n``), ``dd_pairs``
    (classical vs robust squared distance per row, in row order), and
    ``cutoffs`` (plain and multiplicity; shared by both axes of ``dd_pairs``).
    """
    d2 = np.asarray(fit.squared_distances, dtype=float)
    d2_mle = np.asarray(mle_fit.squared_distances, dtype=float)
    if d2.shape != d2_mle.shape or np.shape(fit.location) != np.shape(mle_fit.location):
        raise ValueError("robust and classical fits must come from the same data")
    n, p = d2.size, int(np.shape(fit.location)[0])
    positions = (np.arange(1, n + 1) - 0.5) / n
    theo = scaled_beta_quantile(n, p, positions, beta_variant)
    return {
        "qq_pairs": np.column_stack([theo, np.sort(d2)]),
        "dd_pairs": np.column_stack([d2_mle, d2]),
        "cutoffs": {
            "plain": scaled_beta_quantile(n, p, 1.0 - alpha, beta_variant),
            "multiplicity": scaled_beta_quantile(n, p, multiplicity_level(alpha, n), beta_variant),
        },
    }


class WLEOutlierDetector(OutlierMixin, BaseEstimator):
    """Outlier detection from weighted likelihood squared distances.

    ``predict`` returns -1 for outliers and 1 for inliers, following the
    scikit-learn convention. New points are compared with the cutoff derived
    from the training sample size.

    Parameters
    ----------
    alpha : float, default=0.025
        Nominal level of each test (or familywise level with
        ``multiplicity=True``).
    multiplicity : bool, default=True
        Use the multiplicity-corrected cutoff.
    reference : {"beta", "chisq"}, default="beta"
    estimator : WLECovariance or None
        Unfitted covariance estimator; a default ``WLECovariance`` is used
        when None.
    """

    def __init__(self, alpha=0.025, multiplicity=True, reference="beta", estimator=None):
        self.alpha = alpha
        self.multiplicity = multiplicity
        self.reference = reference
        self.estimator = estimator

    def fit(self, X, y=None):
        from sklearn.base import clone

        from .estimator import WLECovariance

        X = validate_data(self, X, ensure_min_samples=2)
        est = WLECovariance() if self.estimator is None else clone(self.estimator)
        self.estimator_ = est.fit(X)
        self.report_ = detect(est.result_, self.alpha, self.reference)
        self.cutoff_ = (
            self.report_.cutoff_multiplicity if self.multiplicity else self.report_.cutoff_plain
        )
        self.offset_ = -self.cutoff_
        return self

    def score_samples(self, X):
        """Negated squared robust distance (larger is more normal)."""
        check_is_fitted(self)
        X = validate_data(self, X, reset=False)
        return -self.estimator_.mahalanobis(X)

    def decision_function(self, X):
        return self.score_samples(X) - self.offset_

    def predict(self, X):
        return np.where(self.decision_function(X) < 0, -1, 1)
